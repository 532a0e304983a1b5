"""Power-law fits over tau_Q and plateau detection in time series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DomainError
from .observables import ObservableSeries


@dataclass(frozen=True)
class FitResult:
    exponent: float
    prefactor: float
    exponent_stderr: float
    window: tuple[float, float]
    r_squared: float
    points: int

    def predict(self, tau):
        return self.prefactor * np.asarray(tau, dtype=float) ** self.exponent


def default_window(taus) -> tuple[float, float]:
    """Upper half of the range on a log scale."""
    taus = np.asarray(taus, dtype=float)
    return float(math.sqrt(taus.min() * taus.max())), float(taus.max())


def powerlaw_fit_arrays(taus, values, window: tuple[float, float] | None = None) -> FitResult:
    """Least squares of log(value) against log(tau) inside ``window``."""
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if taus.shape != values.shape or taus.ndim != 1:
        raise DomainError("taus and values must be 1D arrays of equal length")
    if len(taus) == 0:
        raise DomainError("empty series")
    lo, hi = default_window(taus) if window is None else window
    tol = 1e-12 * max(abs(lo), abs(hi))
    sel = (taus >= lo - tol) & (taus <= hi + tol)
    if sel.sum() < 3:
        raise DomainError(f"need >= 3 points in window [{lo}, {hi}], got {int(sel.sum())}")
    bad = taus[sel][~(values[sel] > 0)]
    if bad.size:
        raise DomainError(f"non-positive value at tau_Q={bad[0]:g}; cannot take logarithm")
    x, y = np.log(taus[sel]), np.log(values[sel])
    res = stats.linregress(x, y)
    r2 = min(1.0, max(0.0, res.rvalue**2)) if np.ptp(y) > 0 else 1.0
    return FitResult(
        exponent=float(res.slope),
        prefactor=float(math.exp(res.intercept)),
        exponent_stderr=float(res.stderr),
        window=(float(taus[sel].min()), float(taus[sel].max())),
        r_squared=float(r2),
        points=int(sel.sum()),
    )


def powerlaw_fit(series: ObservableSeries, observable: str = "N_total",
                 window: tuple[float, float] | None = None) -> FitResult:
    if series.axis != "tau_Q":
        raise DomainError("power-law fits need a tau_Q series")
    return powerlaw_fit_arrays(series.axis_values, series[observable], window)


@dataclass(frozen=True)
class Plateau:
    value: float
    onset: float


def plateau_detect_arrays(times, values, trailing: float = 0.2, drift_tol: float = 0.005):
    """Plateau value and onset, or None if the tail still drifts.

    The tail is the last ``trailing`` fraction of samples; it is a plateau if
    ``(max - min) / |mean|`` over it is below ``drift_tol``.  The onset is the
    earliest sample from which the series stays inside that band around the
    tail mean.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) < 10:
        raise DomainError(f"plateau detection needs >= 10 samples, got {len(values)}")
    k = max(2, int(math.ceil(trailing * len(values))))
    tail = values[-k:]
    mean = float(np.mean(tail))
    if mean == 0:
        return Plateau(0.0, float(times[-k])) if np.all(tail == 0) else None
    if (tail.max() - tail.min()) / abs(mean) >= drift_tol:
        return None
    inside = np.abs(values - mean) <= drift_tol * abs(mean) / 2 + np.ptp(tail) / 2
    outside = np.flatnonzero(~inside)
    first = 0 if outside.size == 0 else outside[-1] + 1
    return Plateau(mean, float(times[min(first, len(times) - k)]))


def plateau_detect(series: ObservableSeries, observable: str = "N_total",
                   trailing: float = 0.2, drift_tol: float = 0.005):
    if series.axis != "time":
        raise DomainError("plateau detection needs a time series")
    return plateau_detect_arrays(series.axis_values, series[observable], trailing, drift_tol)
