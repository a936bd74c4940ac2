"""Measurement pipeline: PSD estimation, resonance peak-area amplitude
extraction, and inversion of the amplitude-force relation.

PSD normalization: this package uses the amplitude-squared convention in
which the integrated area under a pure sinusoid's peak equals its amplitude
squared. That is twice the common one-sided density convention (where the
area would be A^2/2); conversions to/from scipy carry the factor 2. Because
the area (not the height) is what is integrated, no window coherent-gain
correction is needed beyond Welch's own density scaling.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.signal import welch

from .errors import (BandOutOfRange, DutyOutOfRange, NonuniformSampling,
                     ParseError, TooShort)
from .mechanics import OscillatorParams, TimeSeries


@dataclass(frozen=True)
class PSDEstimate:
    """One-sided PSD in the amplitude-squared convention (m^2/Hz)."""

    frequencies: np.ndarray
    values: np.ndarray
    window: str
    resolution_bandwidth: float

    def band_integral(self, f_lo: float, f_hi: float) -> float:
        mask = (self.frequencies >= f_lo) & (self.frequencies <= f_hi)
        return float(np.sum(self.values[mask]) * self.resolution_bandwidth)


@dataclass(frozen=True)
class AmplitudeEstimate:
    """Oscillation amplitude from a resonance-peak band integral."""

    amplitude: float
    band: tuple[float, float]
    background_subtracted: bool
    raw_amplitude: float = 0.0  # without background subtraction


def estimate_psd(ts: TimeSeries, segment_length: float = 30.0,
                 window: str = "hann") -> PSDEstimate:
    """Averaged-periodogram PSD with the amplitude-squared normalization.

    Frequency resolution is 1/segment_length; the series must cover at
    least two segments.
    """
    nperseg = int(round(segment_length * ts.sample_rate))
    if len(ts.samples) < 2 * nperseg:
        raise TooShort("time series shorter than two PSD segments")
    f, pxx = welch(ts.samples, fs=ts.sample_rate, window=window,
                   nperseg=nperseg, noverlap=0, detrend="constant",
                   scaling="density")
    return PSDEstimate(frequencies=f, values=2.0 * pxx, window=window,
                       resolution_bandwidth=ts.sample_rate / nperseg)


def amplitude_from_peak(psd: PSDEstimate, f0: float, delta_f: float | None = None,
                        subtract_background: bool = True) -> AmplitudeEstimate:
    """A = sqrt(area under the resonance peak), background-subtracted.

    The band is (f0 - delta_f, f0 + delta_f); the default half-width is five
    resolution bandwidths. The background density is estimated from equal
    flanking bands on each side and removed from the band integral.
    """
    if delta_f is None:
        delta_f = 5 * psd.resolution_bandwidth
    lo, hi = f0 - delta_f, f0 + delta_f
    if lo - 2 * delta_f < psd.frequencies[0] or hi + 2 * delta_f > psd.frequencies[-1]:
        raise BandOutOfRange("peak band (plus flanking bands) exceeds PSD range")
    area = psd.band_integral(lo, hi)
    raw = np.sqrt(max(area, 0.0))
    if not subtract_background:
        return AmplitudeEstimate(amplitude=raw, band=(lo, hi),
                                 background_subtracted=False, raw_amplitude=raw)
    bg = 0.5 * (psd.band_integral(lo - 2 * delta_f, lo - psd.resolution_bandwidth)
                + psd.band_integral(hi + psd.resolution_bandwidth, hi + 2 * delta_f))
    amp = np.sqrt(max(area - bg, 0.0))
    return AmplitudeEstimate(amplitude=amp, band=(lo, hi),
                             background_subtracted=True, raw_amplitude=raw)


def peak_to_floor(psd: PSDEstimate, f0: float, delta_f: float | None = None) -> float:
    """Mean in-band PSD over the mean flanking-band PSD.

    Near 1 for purely Brownian motion (the flanking bands sit on the same
    Lorentzian), large for a coherent drive peak.
    """
    if delta_f is None:
        delta_f = 5 * psd.resolution_bandwidth
    f = psd.frequencies
    band = (f >= f0 - delta_f) & (f <= f0 + delta_f)
    flank = (((f >= f0 - 2 * delta_f) & (f < f0 - delta_f))
             | ((f > f0 + delta_f) & (f <= f0 + 2 * delta_f)))
    if not band.any() or not flank.any():
        raise BandOutOfRange("band outside PSD range")
    return float(np.mean(psd.values[band]) / np.mean(psd.values[flank]))


def force_from_amplitude(amplitude: float | AmplitudeEstimate,
                         osc: OscillatorParams, duty: float) -> float:
    """dF = (pi/2) m (2 pi f0)^2 / (Q sin(pi D)) * A.

    Exact inverse of mechanics.steady_state_amplitude.
    """
    if not 0.0 < duty < 1.0:
        raise DutyOutOfRange("duty cycle must lie strictly in (0, 1)")
    A = amplitude.amplitude if isinstance(amplitude, AmplitudeEstimate) else amplitude
    if A < 0:
        raise ValueError("amplitude must be nonnegative")
    return (np.pi / 2.0) * osc.mass * osc.omega0**2 / (osc.Q * np.sin(np.pi * duty)) * A


def import_timeseries(path, sample_rate: float | None = None) -> TimeSeries:
    """Read a two-column (t, z) CSV written by mechanics.write_timeseries_csv.

    Rejects NaNs (naming the offending row) and nonuniform sampling. If
    ``sample_rate`` is given it overrides the rate inferred from the time
    column.
    """
    times, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file")
        for row_no, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ParseError(f"row {row_no}: expected 2 columns, got {len(row)}")
            try:
                t, z = float(row[0]), float(row[1])
            except ValueError as exc:
                raise ParseError(f"row {row_no}: {exc}") from None
            if np.isnan(t) or np.isnan(z):
                raise ParseError(f"row {row_no}: NaN value")
            times.append(t)
            values.append(z)
    if len(values) < 2:
        raise TooShort("time series needs at least two samples")
    dts = np.diff(times)
    dt = np.median(dts)
    if dt <= 0 or np.any(np.abs(dts - dt) > 1e-6 * dt):
        raise NonuniformSampling("time column is not uniformly sampled")
    rate = sample_rate if sample_rate is not None else 1.0 / dt
    return TimeSeries(sample_rate=rate, samples=np.asarray(values))
