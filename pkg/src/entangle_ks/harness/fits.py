"""Least-squares slope fits of entropy series."""

from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

MIN_POINTS = 4


class FitError(ValueError):
    pass


@dataclass
class FitResult:
    kind: str  # "linear" (S vs t) or "log" (S vs ln t)
    slope: float
    intercept: float
    residual: float  # RMS of the fit residuals
    window: tuple
    n_points: int
    slope_stderr: float
    ci95: float  # half-width of the 95% confidence interval of the slope

    def as_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def _fit(x, y, kind, window):
    n = len(x)
    if n < MIN_POINTS:
        raise FitError(f"{kind} fit window {window} holds {n} points; need at least {MIN_POINTS}")
    if np.ptp(x) == 0:
        raise FitError(f"{kind} fit window {window} has no spread in the abscissa")
    slope, intercept = np.polyfit(x, y, 1)
    res = y - (slope * x + intercept)
    sxx = np.sum((x - x.mean()) ** 2)
    dof = n - 2
    se = float(np.sqrt(np.sum(res**2) / dof / sxx))
    ci = float(stats.t.ppf(0.975, dof) * se)
    return FitResult(kind, float(slope), float(intercept), float(np.sqrt(np.mean(res**2))),
                     tuple(float(w) for w in window), n, se, ci)


def _select(t, s, window):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    lo, hi = window
    if not lo <= hi:
        raise FitError(f"empty fit window {window}")
    m = (t >= lo) & (t <= hi)
    return t[m], s[m]


def fit_linear(t, s, window):
    """Slope of ``s`` against ``t`` using only points with ``t`` inside ``window``."""
    x, y = _select(t, s, window)
    return _fit(x, y, "linear", window)


def fit_log(t, s, window):
    """Exponent ``alpha`` of ``s ~ alpha ln t`` over ``window``; points with ``t < 1`` are dropped."""
    x, y = _select(t, s, window)
    keep = x >= 1
    return _fit(np.log(x[keep]), y[keep], "log", window)


def half_saturation_time(t, s):
    """First ``t`` at which ``s - s[0]`` exceeds half of its maximum."""
    t = np.asarray(t)
    v = np.asarray(s, dtype=float) - s[0]
    plateau = v.max()
    above = np.nonzero(v > 0.5 * plateau)[0]
    return int(t[above[0]]) if len(above) else int(t[-1])


def default_linear_window(t, s):
    """``[1, t_half]``, widened to the first ``MIN_POINTS`` kicks when saturation comes earlier."""
    t_half = half_saturation_time(t, s)
    return (1.0, float(max(t_half, MIN_POINTS)))
