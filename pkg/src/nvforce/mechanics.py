"""Levitated oscillator dynamics: a damped harmonic oscillator driven by a
square-wave spin force and thermal (fluctuation-dissipation) noise.

The equation of motion  m z'' + (m w0 / Q) z' + m w0^2 z = F(t)  is
integrated with the exact zero-order-hold discretization of the linear
system (matrix exponential over one sample), so the deterministic response
carries no step-size bias at any sample rate. The thermal force is white
with one-sided spectral density S_F = 4 k_B T m w0 / Q and enters as an
independent Gaussian force per step with variance S_F / (2 dt).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.signal import lfilter, ss2tf

from .core import CONSTANTS
from .errors import DutyOutOfRange, ParseError, TooShort, UnstableStep

MIN_STEPS_PER_PERIOD = 50
DEFAULT_SAMPLE_RATE = 2440.0


@dataclass(frozen=True)
class OscillatorParams:
    """Mechanical plant: mass, resonance, damping and bath temperature."""

    mass: float = 1.28e-4    # kg
    f0: float = 17.6         # Hz
    Q: float = 55.0
    temperature: float = 300.0  # K

    def __post_init__(self):
        if min(self.mass, self.f0, self.Q, self.temperature) <= 0:
            raise ValueError("oscillator parameters must be positive")

    @property
    def omega0(self) -> float:
        return 2 * np.pi * self.f0


@dataclass(frozen=True)
class DriveWaveform:
    """Square-wave force: F_high for a fraction ``duty`` of each period."""

    F_low: float = 0.0
    F_high: float = 0.0
    duty: float = 0.5
    period: float = 1.0 / 17.6
    phase: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.duty < 1.0:
            raise DutyOutOfRange("duty cycle must lie strictly in (0, 1)")
        if self.period <= 0:
            raise ValueError("period must be positive")

    def sample(self, t: np.ndarray) -> np.ndarray:
        frac = np.mod((np.asarray(t) - self.phase) / self.period, 1.0)
        return np.where(frac < self.duty, self.F_high, self.F_low)


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled displacement record with its RNG provenance."""

    sample_rate: float
    samples: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if len(self.samples) == 0:
            raise TooShort("time series must contain samples")

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def _zoh_filter_coeffs(osc: OscillatorParams, dt: float):
    """Discrete transfer function (b, a) from force input to displacement."""
    w0 = osc.omega0
    gamma = w0 / osc.Q
    A = np.array([[0.0, 1.0], [-w0**2, -gamma]])
    B = np.array([[0.0], [1.0 / osc.mass]])
    Ad = expm(A * dt)
    Bd = np.linalg.solve(A, (Ad - np.eye(2)) @ B)
    # z[n] taps only the position state
    num, den = ss2tf(Ad, Bd, np.array([[1.0, 0.0]]), np.array([[0.0]]))
    return num[0], den


def simulate(osc: OscillatorParams, drive: DriveWaveform, duration: float,
             thermal_noise: bool = True, seed: int | None = 0,
             sample_rate: float = DEFAULT_SAMPLE_RATE) -> TimeSeries:
    """Integrate the driven, thermally agitated oscillator from rest.

    Deterministic for a fixed seed. Raises UnstableStep if the sample rate
    resolves fewer than MIN_STEPS_PER_PERIOD steps per oscillation period,
    TooShort for durations under ten drive periods.
    """
    if sample_rate < MIN_STEPS_PER_PERIOD * osc.f0:
        raise UnstableStep(
            f"need at least {MIN_STEPS_PER_PERIOD} steps per period; "
            f"got {sample_rate / osc.f0:.1f}")
    if duration < 10 * drive.period:
        raise TooShort("duration must cover at least 10 drive periods")

    dt = 1.0 / sample_rate
    n = int(round(duration * sample_rate))
    t = np.arange(n) * dt
    force = drive.sample(t)
    if thermal_noise:
        s_f = 4 * CONSTANTS.k_B * osc.temperature * osc.mass * osc.omega0 / osc.Q
        rng = np.random.default_rng(seed)
        force = force + rng.standard_normal(n) * np.sqrt(s_f / (2 * dt))
    b, a = _zoh_filter_coeffs(osc, dt)
    z = lfilter(b, a, force)
    return TimeSeries(sample_rate=sample_rate, samples=z,
                      seed=seed if thermal_noise else None)


def steady_state_amplitude(osc: OscillatorParams, delta_F: float, duty: float) -> float:
    """Resonant steady-state amplitude of the square-wave-driven oscillator.

    A = 2 Q sin(pi D) dF / (pi m w0^2): the fundamental Fourier component of
    the square wave, amplified by Q on resonance. Exact algebraic inverse of
    analysis.force_from_amplitude.
    """
    if not 0.0 < duty < 1.0:
        raise DutyOutOfRange("duty cycle must lie strictly in (0, 1)")
    return 2 * osc.Q * np.sin(np.pi * duty) * delta_F / (np.pi * osc.mass * osc.omega0**2)


def segment_average(ts: TimeSeries, period: float, n_bins: int | None = None,
                    normalize: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Fold a time series modulo ``period`` and average phase bins.

    Returns (bin_times, waveform). Phase-coherent motion at the folding
    period survives; incoherent noise is suppressed by ~1/sqrt(segments).
    With ``normalize`` the waveform peak magnitude is scaled to 1.
    """
    if ts.duration < 2 * period:
        raise TooShort("need at least two periods to segment-average")
    if n_bins is None:
        n_bins = max(16, int(round(period * ts.sample_rate)))
    phase = np.mod(ts.times, period)
    idx = np.minimum((phase / period * n_bins).astype(int), n_bins - 1)
    sums = np.bincount(idx, weights=ts.samples, minlength=n_bins)
    counts = np.bincount(idx, minlength=n_bins)
    waveform = sums / np.maximum(counts, 1)
    waveform = waveform - waveform.mean()
    if normalize:
        peak = np.max(np.abs(waveform))
        if peak > 0:
            waveform = waveform / peak
    bin_times = (np.arange(n_bins) + 0.5) * period / n_bins
    return bin_times, waveform


def write_timeseries_csv(ts: TimeSeries, path, metadata: dict | None = None) -> None:
    """Two-column (t, z) CSV plus a JSON sidecar with parameters and seed."""
    t = ts.times
    with open(path, "w") as fh:
        fh.write("t,z\n")
        for ti, zi in zip(t, ts.samples):
            fh.write(f"{ti:.17g},{zi:.17g}\n")
    meta = {"sample_rate": ts.sample_rate, "n_samples": len(ts.samples),
            "seed": ts.seed}
    meta.update(metadata or {})
    with open(str(path) + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
