"""Additive seasonal-trend decomposition of vibration records.

The classical recipe: a centered moving average of one period estimates the
trend, per-phase means of the detrended series give a zero-mean periodic
seasonal component, and everything left over is the residual.  Fault
signatures that are not phase-locked to the period survive in the residual,
which is what the downstream feature extraction consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TimeSeries", "Decomposition", "decompose_additive", "estimate_period"]


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar signal with its sample rate.

    ``label`` optionally carries a class identifier for supervised runs.
    """

    samples: np.ndarray
    sample_rate_hz: float
    label: str | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError(f"samples must be a non-empty 1-D sequence, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples contain NaN or Inf")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class Decomposition:
    """Aligned trend/seasonal/residual components of one series.

    ``trend + seasonal + residual`` reconstructs the input everywhere (the
    residual is defined as the remainder).  ``valid_range`` is the half-open
    index interval where the trend estimate has a full averaging window;
    outside it the trend is edge-replicated.
    """

    trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray
    period: int
    valid_range: tuple[int, int]

    def reconstruct(self) -> np.ndarray:
        return self.trend + self.seasonal + self.residual


def _centered_trend(x: np.ndarray, period: int) -> tuple[np.ndarray, int]:
    """Centered moving average of one period; returns (trend, half-width).

    Even periods use the standard 2xP average (half weights on the two
    endpoints) so the window stays centered; both variants weight every
    phase of the cycle equally.
    """
    if period % 2 == 0:
        kernel = np.full(period + 1, 1.0 / period)
        kernel[0] = kernel[-1] = 0.5 / period
        half = period // 2
    else:
        kernel = np.full(period, 1.0 / period)
        half = (period - 1) // 2
    trend_core = np.convolve(x, kernel, mode="valid")
    trend = np.empty_like(x)
    trend[half:x.size - half] = trend_core
    trend[:half] = trend_core[0]
    trend[x.size - half:] = trend_core[-1]
    return trend, half


def decompose_additive(x: TimeSeries, period: int) -> Decomposition:
    """Split a series into trend + seasonal + residual at a known period.

    Parameters
    ----------
    x : TimeSeries
        Input signal, at least ``2 * period`` samples long.
    period : int
        Cycle length ``P`` in samples, ``P >= 2``.

    Returns
    -------
    Decomposition
        Components of the same length as the input.  The seasonal component
        is exactly P-periodic and sums to ~0 over one period; the residual
        closes the additive identity everywhere, including the
        edge-replicated trend region.
    """
    if period < 2:
        raise ValueError(f"period must be >= 2, got {period}")
    samples = x.samples
    n = samples.size
    if n < 2 * period:
        raise ValueError(f"series of length {n} is shorter than 2*period = {2 * period}")

    trend, half = _centered_trend(samples, period)
    start, stop = half, n - half

    detrended = samples - trend
    phases = np.arange(start, stop) % period
    phase_means = np.zeros(period)
    np.add.at(phase_means, phases, detrended[start:stop])
    phase_means /= np.bincount(phases, minlength=period)
    phase_means -= phase_means.mean()

    seasonal = phase_means[np.arange(n) % period]
    residual = samples - trend - seasonal
    return Decomposition(trend, seasonal, residual, period, (start, stop))


def estimate_period(x: TimeSeries, hint_hz: float | None = None) -> int:
    """Estimate the dominant cycle length in samples.

    With ``hint_hz`` the period is simply ``round(sample_rate / hint)``.
    Without it, the lag maximising the (mean-removed) autocorrelation over
    lags ``[2, len(x)//4]`` wins, ties broken toward the smallest lag.
    """
    n = len(x)
    if n < 16:
        raise ValueError(f"need at least 16 samples to estimate a period, got {n}")
    if hint_hz is not None:
        if hint_hz >= x.sample_rate_hz / 2:
            raise ValueError(
                f"hint {hint_hz} Hz implies a period under 2 samples at "
                f"{x.sample_rate_hz} Hz"
            )
        if hint_hz <= 0:
            raise ValueError(f"hint_hz must be positive, got {hint_hz}")
        return round(x.sample_rate_hz / hint_hz)

    centred = x.samples - x.samples.mean()
    max_lag = n // 4
    # Biased autocorrelation; the taper toward long lags breaks period
    # multiples in favour of the fundamental.
    full = np.correlate(centred, centred, mode="full")[n - 1:]
    lags = full[2:max_lag + 1]
    return 2 + int(np.argmax(lags))
