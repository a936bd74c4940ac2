import numpy as np
import pytest

from nvforce.core import CONSTANTS
from nvforce.errors import ConfigError, InsideMagnet
from nvforce.magnetostatics import (LARGE_MAGNET, SMALL_MAGNET,
                                    CylindricalMagnet, field_at,
                                    field_at_many, field_map, gradient_at,
                                    on_axis_field, surface_current_field,
                                    write_field_map_csv)

MAG = SMALL_MAGNET


def _axis_point(z_above_face):
    return np.array([0.0, 0.0, z_above_face])


def test_invalid_geometry_rejected():
    with pytest.raises(ConfigError):
        CylindricalMagnet(radius=-1e-3, length=1e-2, remanence=1.0)
    with pytest.raises(ConfigError):
        CylindricalMagnet(radius=1e-3, length=1e-2, remanence=1.0,
                          axis=(0, 0, 2))


def test_on_axis_transverse_components_vanish():
    B = field_at(MAG, _axis_point(1e-3))
    assert B[0] == pytest.approx(0.0, abs=1e-14)
    assert B[1] == pytest.approx(0.0, abs=1e-14)


def test_on_axis_matches_elementary_formula():
    for z in [0.5e-3, 1e-3, 3e-3, 10e-3, 50e-3]:
        Bz = field_at(MAG, _axis_point(z))[2]
        assert Bz == pytest.approx(on_axis_field(MAG, z), rel=1e-10)


def test_calibration_point():
    # operating point 1 mm above the pole face
    B = field_at(MAG, _axis_point(1e-3))
    G = gradient_at(MAG, _axis_point(1e-3))
    assert B[2] == pytest.approx(0.63, rel=0.05)
    assert G[2, 2] == pytest.approx(-98.0, rel=0.05)


def test_dipole_limit():
    # measured from the magnet center; moment = Br * volume / mu0
    m = MAG.remanence * np.pi * MAG.radius**2 * MAG.length / CONSTANTS.mu_0
    errs = []
    for factor in [20.0, 40.0, 80.0]:
        d = factor * MAG.radius
        Bz = field_at(MAG, _axis_point(d - MAG.length / 2))[2]
        dipole = CONSTANTS.mu_0 * m / (2 * np.pi * d**3)
        errs.append(abs(Bz / dipole - 1.0))
    assert errs[0] <= 0.01
    assert errs[0] > errs[1] > errs[2]


def test_surface_current_oracle():
    rng = np.random.default_rng(3)
    for _ in range(5):
        p = np.array([rng.uniform(-30e-3, 30e-3), rng.uniform(-30e-3, 30e-3),
                      rng.uniform(1e-3, 30e-3)])
        rho = np.hypot(p[0], p[1])
        if rho < MAG.radius * 1.2 and p[2] < 1e-3:
            p[2] += 2e-3
        B = field_at(MAG, p)
        B_quad = surface_current_field(MAG, p)
        assert np.linalg.norm(B - B_quad) <= 1e-4 * np.linalg.norm(B)


def test_mirror_symmetry():
    p = np.array([2e-3, 0.0, 1.5e-3])
    B1 = field_at(MAG, p)
    B2 = field_at(MAG, p * np.array([-1.0, 1.0, 1.0]))
    assert B1[2] == pytest.approx(B2[2], rel=1e-12)
    assert B1[0] == pytest.approx(-B2[0], rel=1e-12)


def test_axisymmetry():
    rng = np.random.default_rng(11)
    base = np.array([3e-3, 0.0, 2e-3])
    B0 = np.linalg.norm(field_at(MAG, base))
    for _ in range(10):
        a = rng.uniform(0, 2 * np.pi)
        p = np.array([3e-3 * np.cos(a), 3e-3 * np.sin(a), 2e-3])
        assert np.linalg.norm(field_at(MAG, p)) == pytest.approx(B0, rel=1e-10)


def test_gradient_on_axis_symmetries():
    G = gradient_at(MAG, _axis_point(1e-3))
    assert abs(G[0, 2]) < 1e-6 * abs(G[2, 2])
    assert abs(G[1, 2]) < 1e-6 * abs(G[2, 2])
    # axisymmetric, divergence-free: dBx/dx = dBy/dy = -dBz/dz / 2
    assert G[0, 0] == pytest.approx(-G[2, 2] / 2, rel=1e-6)
    assert G[1, 1] == pytest.approx(-G[2, 2] / 2, rel=1e-6)


def test_divergence_and_curl_free_grid():
    xs = np.linspace(-2e-3, 2e-3, 11)
    zs = np.linspace(1e-3, 5e-3, 11)
    X, Y, Z = np.meshgrid(xs, xs, zs, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=-1)
    for s in field_map(MAG, pts):
        scale = np.linalg.norm(s.gradB)
        assert abs(np.trace(s.gradB)) <= 1e-6 * scale
        assert np.max(np.abs(s.gradB - s.gradB.T)) <= 1e-6 * scale


def test_field_map_matches_pointwise():
    pts = np.array([[0.0, 0.0, 1e-3], [1e-3, -1e-3, 2e-3]])
    samples = field_map(MAG, pts)
    assert len(samples) == 2
    for s in samples:
        assert np.array_equal(s.B, field_at(MAG, s.position))
        assert np.array_equal(s.gradB, gradient_at(MAG, s.position))


def test_inside_magnet_rejected():
    with pytest.raises(InsideMagnet):
        field_at(MAG, [0.0, 0.0, -1e-3])
    with pytest.raises(InsideMagnet):
        field_at_many(MAG, [[0.0, 0.0, 5e-3], [1e-3, 0.0, -5e-3]])


def test_large_preset_geometry():
    assert LARGE_MAGNET.radius == pytest.approx(2 * SMALL_MAGNET.radius, rel=1e-3)
    assert LARGE_MAGNET.length == SMALL_MAGNET.length
    # larger magnet: bigger far field, weaker near gradient
    z = 5e-3
    assert field_at(LARGE_MAGNET, _axis_point(z))[2] > \
        field_at(SMALL_MAGNET, _axis_point(z))[2]
    assert abs(gradient_at(LARGE_MAGNET, _axis_point(1e-3))[2, 2]) < \
        abs(gradient_at(SMALL_MAGNET, _axis_point(1e-3))[2, 2])


def test_csv_export(tmp_path):
    path = tmp_path / "map.csv"
    write_field_map_csv(field_map(MAG, [[0.0, 0.0, 1e-3]]), path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,y,z,Bx,By,Bz,dBzdz"
    vals = [float(v) for v in lines[1].split(",")]
    assert vals[2] == 1e-3
    assert vals[5] == pytest.approx(0.63, rel=0.05)
