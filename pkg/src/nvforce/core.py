"""Physical constants, spin-1 operators, NV orientations and frame rotations.

Conventions used everywhere in this package:

* spin basis ordering is (|m_s=+1>, |m_s=0>, |m_s=-1>),
* all internal units are SI, frequencies are stored in Hz and multiplied
  by Planck's constant only where an energy is actually needed,
* a rotation R = R_z(phi) @ R_y(theta) maps NV-frame vector components to
  lab-frame components; the NV symmetry axis is R @ (0, 0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants used by the spin and force models."""

    h: float = 6.62607015e-34        # Planck constant, J s
    k_B: float = 1.380649e-23        # Boltzmann constant, J/K
    gamma_e: float = 28.0e9          # electron gyromagnetic ratio, Hz/T
    D_gs: float = 2.87e9             # NV ground-state zero-field splitting, Hz
    mu_0: float = 1.25663706212e-6   # vacuum permeability, T m/A


CONSTANTS = PhysicalConstants()

# Polar angle of the <111> NV axes against a [001] face normal.
MAGIC_ANGLE = float(np.arccos(1.0 / np.sqrt(3.0)))

_SQ2 = np.sqrt(2.0)

_SX = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / _SQ2
_SY = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / _SQ2
_SZ = np.diag([1.0, 0.0, -1.0]).astype(complex)
for _m in (_SX, _SY, _SZ):
    _m.setflags(write=False)


@dataclass(frozen=True)
class SpinOperators:
    """Dimensionless spin-1 matrices in the (+1, 0, -1) basis."""

    Sx: np.ndarray = _SX
    Sy: np.ndarray = _SY
    Sz: np.ndarray = _SZ


SPIN1 = SpinOperators()


@dataclass(frozen=True)
class NVOrientation:
    """One of the four NV crystallographic axes, in lab-frame angles."""

    theta: float
    phi: float
    index: int = 1


def default_orientations(phi_offset_deg: float = 45.0) -> tuple[NVOrientation, ...]:
    """The four NV axes of a [100]-cut diamond with vertical [001].

    All four make the magic angle (~54.7 deg) with the lab z axis; the
    azimuthal placement relative to the magnet is not constrained by the
    geometry, so the first axis sits at ``phi_offset_deg`` and the rest are
    spaced by 90 degrees.
    """
    return tuple(
        NVOrientation(theta=MAGIC_ANGLE,
                      phi=np.deg2rad(phi_offset_deg + 90.0 * i),
                      index=i + 1)
        for i in range(4)
    )


def rotation_matrix(orient: NVOrientation) -> np.ndarray:
    """Return R = R_z(phi) @ R_y(theta), mapping NV-frame to lab-frame vectors."""
    ct, st = np.cos(orient.theta), np.sin(orient.theta)
    cp, sp = np.cos(orient.phi), np.sin(orient.phi)
    ry = np.array([[ct, 0.0, st],
                   [0.0, 1.0, 0.0],
                   [-st, 0.0, ct]])
    rz = np.array([[cp, -sp, 0.0],
                   [sp, cp, 0.0],
                   [0.0, 0.0, 1.0]])
    return rz @ ry


def eigensolve_hermitian3(H: np.ndarray, rtol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a 3x3 Hermitian matrix.

    Returns (eigenvalues ascending, U) with eigenvectors as the columns of U,
    i.e. H @ U[:, j] = w[j] * U[:, j].

    Raises NotHermitian if the anti-Hermitian part exceeds ``rtol`` relative
    to the matrix norm.
    """
    H = np.asarray(H, dtype=complex)
    scale = np.linalg.norm(H)
    if scale > 0 and np.linalg.norm(H - H.conj().T) > rtol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    w, U = np.linalg.eigh(H)
    return w, U
