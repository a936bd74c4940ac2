"""Exact field and gradient of a uniformly magnetized cylindrical magnet.

The field is the closed-form solution for an axially magnetized cylinder,
expressed through Bulirsch's generalized complete elliptic integral
cel(kc, p, c, s). The equivalent-solenoid (surface current) picture gives

    B_rho = B0 * (alpha_p * cel(k_p, 1, 1, -1) - alpha_m * cel(k_m, 1, 1, -1))
    B_z   = B0 * R / (R + rho) *
            (beta_p * cel(k_p, g^2, 1, g) - beta_m * cel(k_m, g^2, 1, g))

with B0 = remanence / pi, g = (R - rho) / (R + rho), and the +/- quantities
evaluated at the two pole faces. Gradients are 5-point central differences
of the analytic field; the elliptic expressions are too ill-conditioned to
differentiate symbolically near the edge ring.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InsideMagnet

# 5-point central-difference step (m); small against every geometric scale
# used here, large enough to keep roundoff below the 1e-6 divergence budget.
_FD_STEP = 1e-6


@dataclass(frozen=True)
class CylindricalMagnet:
    """Uniformly axially magnetized cylinder.

    ``pole_face_position`` locates the center of the top pole face along the
    magnet axis: the face center sits at pole_face_position * axis.
    """

    radius: float
    length: float
    remanence: float
    pole_face_position: float = 0.0
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.radius <= 0 or self.length <= 0 or self.remanence <= 0:
            raise ConfigError("radius, length and remanence must be positive")
        n = np.linalg.norm(self.axis)
        if not np.isclose(n, 1.0, atol=1e-9):
            raise ConfigError("magnet axis must be a unit vector")


@dataclass(frozen=True)
class FieldSample:
    """Field vector and spatial gradient tensor at one lab-frame point."""

    position: np.ndarray   # (3,) m
    B: np.ndarray          # (3,) T
    gradB: np.ndarray      # (3, 3), gradB[i, j] = dB_j / dx_i, T/m


# Calibrated presets. The paper's magnet dimensions live in an unavailable
# supplementary table; the small preset is instead fit (aspect length = 2R,
# remanence free) so that the on-axis field 1 mm above the pole face is
# 0.63 T with gradient -98 T/m. The large preset has twice the diameter and
# the same length and remanence: a stronger far field, a weaker gradient.
SMALL_MAGNET = CylindricalMagnet(radius=7.46e-3, length=14.93e-3, remanence=1.631)
LARGE_MAGNET = CylindricalMagnet(radius=14.92e-3, length=14.93e-3, remanence=1.631)

MAGNET_PRESETS = {"small": SMALL_MAGNET, "large": LARGE_MAGNET}


def _cel(kc, p, c, s, tol=1e-12):
    """Bulirsch's general complete elliptic integral cel(kc, p, c, s).

    Vectorized; requires kc != 0 and p > 0 (the only branch this module
    needs). Iterates the Bartky transformation to ``tol`` relative.
    """
    kc = np.abs(np.asarray(kc, dtype=float))
    p = np.asarray(p, dtype=float) + np.zeros_like(kc)
    c = np.asarray(c, dtype=float) + np.zeros_like(kc)
    s = np.asarray(s, dtype=float) + np.zeros_like(kc)
    if np.any(kc == 0.0) or np.any(p <= 0.0):
        raise ValueError("cel requires kc != 0 and p > 0")

    e = kc.copy()
    m = np.ones_like(kc)
    p = np.sqrt(p)
    s = s / p

    f = c.copy()
    c = c + s / p
    g = e / p
    s = 2.0 * (s + f * g)
    p = p + g
    g = m.copy()
    m = m + kc
    while np.any(np.abs(g - kc) > g * tol):
        kc = 2.0 * np.sqrt(e)
        e = kc * m
        f = c.copy()
        c = c + s / p
        g = e / p
        s = 2.0 * (s + f * g)
        p = p + g
        g = m.copy()
        m = m + kc
    return (np.pi / 2.0) * (s + c * m) / (m * (m + p))


def _axis_frame(axis):
    """Orthonormal (e1, e2, axis) triad for resolving the radial direction."""
    a = np.asarray(axis, dtype=float)
    helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(a, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    return e1, e2, a


def _cylindrical_components(magnet: CylindricalMagnet, points: np.ndarray):
    """(rho, z) of each point relative to the magnet center, plus rho_hat."""
    e1, e2, a = _axis_frame(magnet.axis)
    center = (magnet.pole_face_position - magnet.length / 2.0) * a
    rel = points - center
    z = rel @ a
    rho_vec = rel - np.outer(z, a)
    rho = np.linalg.norm(rho_vec, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho_hat = np.where(rho[:, None] > 0, rho_vec / np.where(rho[:, None] > 0, rho[:, None], 1.0), 0.0)
    return rho, z, rho_hat, a


def _field_cylindrical(magnet: CylindricalMagnet, rho: np.ndarray, z: np.ndarray):
    """(B_rho, B_z) at cylindrical coordinates relative to the magnet center."""
    R = magnet.radius
    L = magnet.length / 2.0
    b0 = magnet.remanence / np.pi

    # Nudge off the rho == R line where the p = g^2 branch degenerates.
    rho = np.where(np.abs(rho - R) < 1e-10 * R, R * (1.0 + 1e-10), rho)

    zp = z + L
    zm = z - L
    dp = np.sqrt(zp**2 + (rho + R) ** 2)
    dm = np.sqrt(zm**2 + (rho + R) ** 2)
    kp = np.sqrt((zp**2 + (rho - R) ** 2) / (zp**2 + (rho + R) ** 2))
    km = np.sqrt((zm**2 + (rho - R) ** 2) / (zm**2 + (rho + R) ** 2))
    g = (R - rho) / (R + rho)

    b_rho = b0 * R * (_cel(kp, 1.0, 1.0, -1.0) / dp - _cel(km, 1.0, 1.0, -1.0) / dm)
    b_z = (b0 * R / (R + rho)) * (
        zp / dp * _cel(kp, g * g, 1.0, g) - zm / dm * _cel(km, g * g, 1.0, g)
    )
    return b_rho, b_z


def _check_exterior(magnet, rho, z, margin=0.0):
    L = magnet.length / 2.0
    inside = (rho <= magnet.radius + margin) & (np.abs(z) <= L + margin)
    if np.any(inside):
        idx = int(np.argmax(inside))
        raise InsideMagnet(f"point index {idx} lies inside the magnet body")


def field_at_many(magnet: CylindricalMagnet, points) -> np.ndarray:
    """Field vectors (T) at an (N, 3) array of exterior lab-frame points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    rho, z, rho_hat, a = _cylindrical_components(magnet, points)
    # Leave headroom for the finite-difference stencil of gradient_at_many.
    _check_exterior(magnet, rho, z, margin=2.5 * _FD_STEP)
    b_rho, b_z = _field_cylindrical(magnet, rho, z)
    return b_rho[:, None] * rho_hat + b_z[:, None] * a


def field_at(magnet: CylindricalMagnet, point) -> np.ndarray:
    """Field vector (T) at a single exterior lab-frame point."""
    return field_at_many(magnet, point)[0]


def gradient_at_many(magnet: CylindricalMagnet, points) -> np.ndarray:
    """Gradient tensors (N, 3, 3) with [i, j] = dB_j/dx_i, by 5-point stencil."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(points)
    h = _FD_STEP
    grad = np.empty((n, 3, 3))
    for i in range(3):
        offsets = np.zeros(3)
        offsets[i] = h
        fm2 = field_at_many(magnet, points - 2 * offsets)
        fm1 = field_at_many(magnet, points - offsets)
        fp1 = field_at_many(magnet, points + offsets)
        fp2 = field_at_many(magnet, points + 2 * offsets)
        grad[:, i, :] = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    return grad


def gradient_at(magnet: CylindricalMagnet, point) -> np.ndarray:
    """Gradient tensor (3, 3) at a single exterior point, [i, j] = dB_j/dx_i."""
    return gradient_at_many(magnet, point)[0]


def field_map(magnet: CylindricalMagnet, grid) -> list[FieldSample]:
    """Batch field + gradient evaluation over an (N, 3) array of points."""
    points = np.atleast_2d(np.asarray(grid, dtype=float))
    B = field_at_many(magnet, points)
    G = gradient_at_many(magnet, points)
    return [FieldSample(position=p, B=b, gradB=g) for p, b, g in zip(points, B, G)]


def write_field_map_csv(samples: list[FieldSample], path) -> None:
    """Write a field map as CSV with header x,y,z,Bx,By,Bz,dBzdz."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "z", "Bx", "By", "Bz", "dBzdz"])
        for s in samples:
            w.writerow([f"{v:.17g}" for v in (*s.position, *s.B, s.gradB[2, 2])])


def on_axis_field(magnet: CylindricalMagnet, z_above_face: float) -> float:
    """Elementary closed-form on-axis B_z, used as an independent oracle."""
    R, ell, Br = magnet.radius, magnet.length, magnet.remanence
    z = z_above_face
    return Br / 2.0 * ((z + ell) / np.hypot(z + ell, R) - z / np.hypot(z, R))


def surface_current_field(magnet: CylindricalMagnet, point,
                          n_phi: int = 720, n_z: int = 400) -> np.ndarray:
    """Field by direct Biot-Savart quadrature over the bound surface current.

    The magnetization is equivalent to an azimuthal sheet current density
    K = remanence / mu_0 on the side wall. Trapezoid rule in phi (periodic,
    spectrally accurate), Gauss-Legendre in z. Independent oracle for the
    elliptic-integral expressions; not meant for production use.
    """
    from .core import CONSTANTS

    point = np.asarray(point, dtype=float)
    e1, e2, a = _axis_frame(magnet.axis)
    center = (magnet.pole_face_position - magnet.length / 2.0) * a

    K = magnet.remanence / CONSTANTS.mu_0  # A/m
    R = magnet.radius
    L = magnet.length / 2.0

    phi = np.arange(n_phi) * (2 * np.pi / n_phi)
    zg, wz = np.polynomial.legendre.leggauss(n_z)
    zg = zg * L
    wz = wz * L

    # source points and current direction, magnet frame
    cphi, sphi = np.cos(phi), np.sin(phi)
    src = (R * cphi[:, None, None] * e1 + R * sphi[:, None, None] * e2
           + zg[None, :, None] * a + center)
    dl_dir = -sphi[:, None, None] * e1 + cphi[:, None, None] * e2

    rvec = point - src
    r3 = np.linalg.norm(rvec, axis=-1, keepdims=True) ** 3
    integrand = np.cross(dl_dir, rvec) / r3
    dphi = 2 * np.pi / n_phi
    summed = np.tensordot(wz, integrand.sum(axis=0), axes=(0, 0)) * dphi * R
    return CONSTANTS.mu_0 / (4 * np.pi) * K * summed
