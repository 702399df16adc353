"""Three-region diffusion model for transport through the momentum barriers.

The partial barriers at p = +-10*pi separate a central region from two
outer regions, all of phase-space area 40*pi^2, sealed from beyond by
the unbroken tori at +-30*pi.  If each kick carries a phase-space area F
across each barrier and the regions mix fast internally, occupation
probabilities follow a three-state chain whose slow mode decays at rate

    a = ln(1 - 3*F / (40*pi^2))   per kick,

so the inside probability relaxes from 1 to the uniform value 1/3.
Fitting a line to ln(2/3 - P_outside) over early kicks recovers F from
simulated ensembles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REGION_AREA = 40.0 * np.pi**2

# points this close to equilibrium carry no slope information
EQUILIBRIUM_CUTOFF = np.exp(-3.0)

DEFAULT_WINDOW = (5, 50)
MIN_USABLE_POINTS = 5


@dataclass(frozen=True)
class DiffusionFit:
    """Result of a flux fit.

    F is the recovered flux per kick, a the per-kick decay rate,
    fit_window the kick range actually used, residual the RMS deviation
    of the log series from the fitted line.  n_dropped counts points
    discarded because the series fluctuated past 2/3; rejected flags
    fits with too few usable points; valid flags |a| < 0.5, outside of
    which the small-flux model does not apply.
    """

    F: float
    a: float
    fit_window: tuple
    residual: float
    n_dropped: int
    n_used: int
    rejected: bool
    valid: bool


def decay_rate(F: float) -> float:
    """Per-kick decay rate a = ln(1 - 3F/area); negative for F > 0."""
    x = 3.0 * F / REGION_AREA
    if not 0.0 <= x < 1.0:
        raise ValueError(
            f"F must satisfy 0 <= 3F/(40 pi^2) < 1, got F={F}")
    return float(np.log1p(-x))


def model_inside(F: float, t) -> float:
    """P(|p| < 10*pi, t) = 1/3 + (2/3) exp(a t)."""
    a = decay_rate(F)
    out = 1.0 / 3.0 + (2.0 / 3.0) * np.exp(a * np.asarray(t, dtype=float))
    return out if out.ndim else float(out)


def model_outside(F: float, t) -> float:
    """P(|p| > 10*pi, t) = (2/3)(1 - exp(a t)); complements model_inside."""
    a = decay_rate(F)
    out = (2.0 / 3.0) * (1.0 - np.exp(a * np.asarray(t, dtype=float)))
    return out if out.ndim else float(out)


def flux_from_rate(a: float) -> float:
    """Invert a = ln(1 - 3F/area) for F."""
    return float(-np.expm1(a) * REGION_AREA / 3.0)


def fit_flux(series, window=DEFAULT_WINDOW) -> DiffusionFit:
    """Estimate flux per kick from an outside-fraction series.

    series[t] is P(|p| > 10*pi) after t kicks.  A line is fitted to
    ln(2/3 - series) on the kick window, after dropping points beyond
    2/3 (counted in n_dropped) and points within exp(-3) of
    equilibrium.  Too few surviving points raises the rejected flag
    rather than an error.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 1 or series.size < 10:
        raise ValueError("series must be one-dimensional with >= 10 entries")
    if np.any(series < -1e-9) or np.any(series > 2.0 / 3.0 + 0.05):
        raise ValueError("series values must be probabilities below ~2/3")

    t_lo, t_hi = window
    t_hi = min(t_hi, series.size - 1)
    t = np.arange(t_lo, t_hi + 1)
    y = 2.0 / 3.0 - series[t]

    overshoot = y <= 0.0
    n_dropped = int(np.count_nonzero(overshoot))
    keep = (~overshoot) & (y >= EQUILIBRIUM_CUTOFF)
    t_use, y_use = t[keep], y[keep]
    n_used = int(t_use.size)
    rejected = n_used < MIN_USABLE_POINTS

    if n_used < 2:
        return DiffusionFit(F=np.nan, a=np.nan, fit_window=(t_lo, t_hi),
                            residual=np.nan, n_dropped=n_dropped,
                            n_used=n_used, rejected=True, valid=False)

    logy = np.log(y_use)
    a, intercept = np.polyfit(t_use, logy, 1)
    residual = float(np.sqrt(np.mean((logy - (a * t_use + intercept))**2)))
    F = flux_from_rate(a)
    return DiffusionFit(F=F, a=float(a),
                        fit_window=(int(t_use[0]), int(t_use[-1])),
                        residual=residual, n_dropped=n_dropped,
                        n_used=n_used, rejected=rejected,
                        valid=bool(abs(a) < 0.5))
