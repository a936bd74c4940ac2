import numpy as np
import pytest

from nvforce.core import (CONSTANTS, MAGIC_ANGLE, SPIN1, NVOrientation,
                          default_orientations, eigensolve_hermitian3,
                          rotation_matrix)
from nvforce.errors import NotHermitian


def test_constants_defaults():
    assert CONSTANTS.gamma_e == 28.0e9
    assert CONSTANTS.D_gs == 2.87e9
    assert CONSTANTS.h == 6.62607015e-34
    assert CONSTANTS.k_B == 1.380649e-23


def test_spin_commutators():
    # [Sx, Sy] = i Sz and cyclic permutations
    for a, b, c in [(SPIN1.Sx, SPIN1.Sy, SPIN1.Sz),
                    (SPIN1.Sy, SPIN1.Sz, SPIN1.Sx),
                    (SPIN1.Sz, SPIN1.Sx, SPIN1.Sy)]:
        comm = a @ b - b @ a
        assert np.max(np.abs(comm - 1j * c)) < 1e-12


def test_sz_diagonal_ordering():
    assert np.allclose(SPIN1.Sz, np.diag([1.0, 0.0, -1.0]))


def test_rotation_identity():
    R = rotation_matrix(NVOrientation(theta=0.0, phi=0.0))
    assert np.allclose(R, np.eye(3), atol=1e-15)


def test_rotation_axis_swap():
    # theta = pi/2 tips the NV z axis onto lab x
    R = rotation_matrix(NVOrientation(theta=np.pi / 2, phi=0.0))
    assert np.allclose(R @ [0, 0, 1], [1, 0, 0], atol=1e-15)


def test_rotation_111_axis():
    R = rotation_matrix(NVOrientation(theta=MAGIC_ANGLE, phi=np.deg2rad(45.0)))
    assert np.allclose(R @ [0, 0, 1], np.ones(3) / np.sqrt(3), atol=1e-12)


def test_rotation_orthogonal_property():
    rng = np.random.default_rng(42)
    for _ in range(50):
        o = NVOrientation(theta=rng.uniform(0, np.pi),
                          phi=rng.uniform(0, 2 * np.pi))
        R = rotation_matrix(o)
        assert np.allclose(R.T @ R, np.eye(3), atol=1e-12)
        assert np.isclose(np.linalg.det(R), 1.0, atol=1e-12)
        v = rng.standard_normal(3)
        assert np.allclose(R.T @ (R @ v), v, atol=1e-12)


def test_default_orientations():
    orients = default_orientations()
    assert len(orients) == 4
    for o in orients:
        assert np.isclose(o.theta, MAGIC_ANGLE)
    phis = np.array([o.phi for o in orients])
    assert np.allclose(np.diff(phis), np.pi / 2)
    assert [o.index for o in orients] == [1, 2, 3, 4]


def test_eigensolve_trivial_diagonal():
    hD = CONSTANTS.h * CONSTANTS.D_gs
    w, U = eigensolve_hermitian3(np.diag([hD, 0.0, hD]))
    assert np.allclose(w, [0.0, hD, hD])
    # columns are (possibly permuted) basis vectors
    assert np.allclose(np.abs(U), np.eye(3)[:, [1, 0, 2]], atol=1e-12) or \
        np.allclose(np.abs(U) @ np.abs(U).T, np.eye(3), atol=1e-12)


def test_eigensolve_aligned_field():
    # B along the NV axis: H is diagonal with h(D +/- gamma B) and 0
    h, D, g = CONSTANTS.h, CONSTANTS.D_gs, CONSTANTS.gamma_e
    B = 0.63
    H = h * (D * (SPIN1.Sz @ SPIN1.Sz) + g * B * SPIN1.Sz)
    w, _ = eigensolve_hermitian3(H)
    expect = np.sort([0.0, h * (D - g * B), h * (D + g * B)])
    assert expect[0] < 0  # past the level anticrossing
    assert np.allclose(w, expect, rtol=1e-12)


def test_eigensolve_reconstruction_property():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        H = A + A.conj().T
        w, U = eigensolve_hermitian3(H)
        assert np.all(np.diff(w) >= -1e-12)
        assert np.linalg.norm(U @ U.conj().T - np.eye(3)) < 1e-12
        recon = (U * w) @ U.conj().T
        assert np.linalg.norm(recon - H) <= 1e-10 * max(np.linalg.norm(H), 1.0)


def test_eigensolve_rejects_nonhermitian():
    with pytest.raises(NotHermitian):
        eigensolve_hermitian3(np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]],
                                       dtype=complex))
