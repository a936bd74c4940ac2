"""NV ground-state spin model: Hamiltonian, thermal state, optically pumped
steady state from a seven-level rate model, and the lab-frame moment per spin.

The Hamiltonian is represented in the NV-frame m_s basis (+1, 0, -1), where
the zero-field splitting term is diagonal and the local field enters through
its NV-frame components. Eigenvector matrices U therefore express energy
eigenstates in the m_s basis, and a density matrix built from eigenbasis
populations is carried back to the spin basis as U rho U^dagger.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (CONSTANTS, SPIN1, NVOrientation, PhysicalConstants,
                   eigensolve_hermitian3, rotation_matrix)
from .errors import (FieldOutOfRange, NonPositiveTemperature, NotUnitary,
                     SingularRateMatrix)

_MAX_FIELD_T = 10.0


@dataclass(frozen=True)
class NVHamiltonian:
    """Ground-state spin Hamiltonian (J) in the NV-frame m_s basis."""

    matrix: np.ndarray
    orientation: NVOrientation
    B_local: np.ndarray  # lab-frame field at the NV, T


@dataclass(frozen=True)
class DensityMatrix3:
    """3x3 Hermitian, unit-trace, positive semidefinite spin state."""

    matrix: np.ndarray

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))


@dataclass(frozen=True)
class SevenLevelParams:
    """Transition rates of the NV photophysics rate model.

    Optical rates follow the room-temperature single-NV photodynamics
    literature: radiative decay ~65.9 MHz, strongly spin-selective
    intersystem crossing from the m_s = +/-1 excited branches (~53 MHz vs
    ~7.9 MHz from m_s = 0), and singlet decay favouring the m_s = 0 ground
    state. The pump rate per intensity is the one calibration constant of
    the optical model: it is frozen so that the simulated ensemble force at
    the 50 mW operating point lands on the measured few-nanonewton scale.
    """

    k_pump_per_intensity: float = 6.0  # Hz per (mW/mm^2)
    k_rad: float = 65.9e6
    k_isc_ms0: float = 7.9e6
    k_isc_ms1: float = 53.3e6
    k_s0: float = 0.98e6
    k_s1: float = 0.73e6
    D_es: float = 1.42e9
    T1: float = 5e-3
    use_excited_hamiltonian: bool = True

    def __post_init__(self):
        rates = (self.k_pump_per_intensity, self.k_rad, self.k_isc_ms0,
                 self.k_isc_ms1, self.k_s0, self.k_s1)
        if any(r < 0 for r in rates):
            raise ValueError("rates must be nonnegative")
        if self.k_isc_ms1 <= self.k_isc_ms0:
            raise ValueError("spin-selective shelving requires k_isc_ms1 > k_isc_ms0")


@dataclass(frozen=True)
class LaserDrive:
    """Pump light: intensity in mW/mm^2, polarizing (532 nm) or not (980 nm)."""

    intensity: float
    wavelength_polarizing: bool = True

    def __post_init__(self):
        if self.intensity < 0:
            raise ValueError("intensity must be nonnegative")


def build_hamiltonian(B_local, orient: NVOrientation,
                      consts: PhysicalConstants = CONSTANTS) -> NVHamiltonian:
    """H = h D S_z^2 + h gamma_e (R^T B) . S in the NV-frame m_s basis."""
    B_local = np.asarray(B_local, dtype=float)
    if np.linalg.norm(B_local) >= _MAX_FIELD_T:
        raise FieldOutOfRange(f"|B| must be below {_MAX_FIELD_T} T")
    B_nv = rotation_matrix(orient).T @ B_local
    H = consts.h * (consts.D_gs * (SPIN1.Sz @ SPIN1.Sz)
                    + consts.gamma_e * (B_nv[0] * SPIN1.Sx
                                        + B_nv[1] * SPIN1.Sy
                                        + B_nv[2] * SPIN1.Sz))
    return NVHamiltonian(matrix=H, orientation=orient, B_local=B_local)


def thermal_state(H: NVHamiltonian, T: float,
                  consts: PhysicalConstants = CONSTANTS) -> DensityMatrix3:
    """Boltzmann state exp(-H/kT)/Z, expressed in the m_s basis."""
    if T <= 0:
        raise NonPositiveTemperature("temperature must be positive")
    w, U = eigensolve_hermitian3(H.matrix)
    x = (w - w.min()) / (consts.k_B * T)
    pops = np.exp(-x)
    pops /= pops.sum()
    rho = (U * pops) @ U.conj().T
    return DensityMatrix3(matrix=rho)


def _spin_characters(U: np.ndarray) -> np.ndarray:
    """|<m_s|eigenstate_j>|^2 as characters[m, j]."""
    return np.abs(U) ** 2


def _excited_characters(H: NVHamiltonian, params: SevenLevelParams,
                        consts: PhysicalConstants) -> np.ndarray:
    if not params.use_excited_hamiltonian:
        _, U = eigensolve_hermitian3(H.matrix)
        return _spin_characters(U)
    B_nv = rotation_matrix(H.orientation).T @ H.B_local
    H_es = consts.h * (params.D_es * (SPIN1.Sz @ SPIN1.Sz)
                       + consts.gamma_e * (B_nv[0] * SPIN1.Sx
                                           + B_nv[1] * SPIN1.Sy
                                           + B_nv[2] * SPIN1.Sz))
    _, V = eigensolve_hermitian3(H_es)
    return _spin_characters(V)


def seven_level_steady_state(H: NVHamiltonian, drive: LaserDrive,
                             params: SevenLevelParams, T: float,
                             consts: PhysicalConstants = CONSTANTS) -> DensityMatrix3:
    """Steady state of the seven-level optical pumping model, in the m_s basis.

    With the pump light off (zero intensity or a non-polarizing wavelength)
    this is exactly the thermal state. Otherwise the populations of ground
    triplet, excited triplet and singlet evolve under: optical excitation at
    k_pump_per_intensity * I distributed by spin-character overlap, radiative
    decay distributed the same way, spin-selective intersystem crossing,
    singlet decay, and T1 relaxation of the ground manifold toward the
    Boltzmann distribution. The ground-triplet block of the null-space
    solution, renormalized to unit trace, is returned.
    """
    if drive.intensity == 0.0 or not drive.wavelength_polarizing:
        return thermal_state(H, T, consts)
    if T <= 0:
        raise NonPositiveTemperature("temperature must be positive")

    w, U = eigensolve_hermitian3(H.matrix)
    gc = _spin_characters(U)                      # ground characters [m, i]
    ec = _excited_characters(H, params, consts)   # excited characters [m, j]

    x = (w - w.min()) / (consts.k_B * T)
    p_th = np.exp(-x)
    p_th /= p_th.sum()

    k_pump = params.k_pump_per_intensity * drive.intensity
    k_isc = np.array([params.k_isc_ms1, params.k_isc_ms0, params.k_isc_ms1])
    k_singlet = np.array([params.k_s1, params.k_s0, params.k_s1])

    # Spin-character overlap between ground state i and excited state j.
    overlap = gc.T @ ec  # [i, j]

    # dP/dt = M P; levels 0-2 ground, 3-5 excited, 6 singlet.
    M = np.zeros((7, 7))
    for i in range(3):
        for j in range(3):
            M[3 + j, i] += k_pump * overlap[i, j]       # pump i -> j
            M[i, 3 + j] += params.k_rad * overlap[i, j]  # radiative j -> i
    M[6, 3:6] += ec.T @ k_isc                            # ISC j -> singlet
    M[0:3, 6] += gc.T @ k_singlet                        # singlet -> ground i
    # T1 relaxation of the ground manifold toward Boltzmann populations.
    M[0:3, 0:3] += np.outer(p_th, np.ones(3)) / params.T1
    M[np.diag_indices(3)] -= 1.0 / params.T1
    # population conservation: each column's losses
    M[np.diag_indices(7)] -= M.sum(axis=0)

    _, s, Vh = np.linalg.svd(M)
    if s[-2] <= 1e-8 * s[0]:
        raise SingularRateMatrix("rate matrix null space is not one-dimensional")
    p = np.real(Vh[-1])
    p = p / p.sum()
    if np.any(p < -1e-9):
        raise SingularRateMatrix("steady state has negative populations")
    p = np.clip(p, 0.0, None)

    ground = p[0:3] / p[0:3].sum()
    rho_e = DensityMatrix3(matrix=np.diag(ground).astype(complex))
    return to_spin_basis(rho_e, U)


def steady_state_populations(H: NVHamiltonian, drive: LaserDrive,
                             params: SevenLevelParams, T: float,
                             consts: PhysicalConstants = CONSTANTS) -> np.ndarray:
    """Ground-triplet eigenbasis populations of the pumped steady state."""
    rho = seven_level_steady_state(H, drive, params, T, consts)
    _, U = eigensolve_hermitian3(H.matrix)
    rho_e = U.conj().T @ rho.matrix @ U
    return np.real(np.diag(rho_e))


def to_spin_basis(rho_e: DensityMatrix3, U: np.ndarray) -> DensityMatrix3:
    """Carry a density matrix from the energy eigenbasis to the m_s basis.

    U holds the eigenvectors (in the m_s basis) as columns, so the
    transformation is rho_ms = U rho_e U^dagger; trace and spectrum are
    preserved.
    """
    U = np.asarray(U, dtype=complex)
    if np.linalg.norm(U @ U.conj().T - np.eye(3)) > 1e-10:
        raise NotUnitary("basis-change matrix is not unitary")
    return DensityMatrix3(matrix=U @ rho_e.matrix @ U.conj().T)


def lab_moment(rho: DensityMatrix3, orient: NVOrientation,
               consts: PhysicalConstants = CONSTANTS) -> np.ndarray:
    """Magnetic moment vector (J/T) in the lab frame: m = -h gamma_e R <S>."""
    s_nv = np.array([np.real(np.trace(rho.matrix @ S))
                     for S in (SPIN1.Sx, SPIN1.Sy, SPIN1.Sz)])
    return -consts.h * consts.gamma_e * (rotation_matrix(orient) @ s_nv)


def thermal_moments_many(B_points: np.ndarray, orient: NVOrientation, T: float,
                         consts: PhysicalConstants = CONSTANTS) -> np.ndarray:
    """Lab-frame thermal moments (N, 3) for one orientation at many fields.

    Batched equivalent of thermal_state + lab_moment, used by the volume
    integration where per-point eigensolves dominate the cost.
    """
    if T <= 0:
        raise NonPositiveTemperature("temperature must be positive")
    B_points = np.atleast_2d(np.asarray(B_points, dtype=float))
    R = rotation_matrix(orient)
    B_nv = B_points @ R  # R^T B for each row
    H = (consts.D_gs * (SPIN1.Sz @ SPIN1.Sz)[None, :, :]
         + consts.gamma_e * (B_nv[:, 0, None, None] * SPIN1.Sx
                             + B_nv[:, 1, None, None] * SPIN1.Sy
                             + B_nv[:, 2, None, None] * SPIN1.Sz))
    w, U = np.linalg.eigh(consts.h * H)
    x = (w - w.min(axis=1, keepdims=True)) / (consts.k_B * T)
    pops = np.exp(-x)
    pops /= pops.sum(axis=1, keepdims=True)
    rho = (U * pops[:, None, :]) @ np.conj(np.swapaxes(U, 1, 2))
    s_nv = np.stack([np.real(np.trace(rho @ S, axis1=1, axis2=2))
                     for S in (SPIN1.Sx, SPIN1.Sy, SPIN1.Sz)], axis=1)
    return -consts.h * consts.gamma_e * (s_nv @ R.T)
