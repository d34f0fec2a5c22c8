"""Small numerical routines shared by the check suites.

Kept deliberately independent of the closed forms they are used to
cross-check: the golden-section minimizer below is the second route to
every "minimize this one-dimensional cost" claim in the package.
"""

from __future__ import annotations

import math
from typing import Callable, Tuple

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0   # 1/phi
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2


def golden_section_min(f: Callable[[float], float],
                       lo: float, hi: float,
                       tol: float = 1e-12,
                       max_iter: int = 400) -> Tuple[float, float]:
    """Minimize a unimodal f on [lo, hi]; returns (x_min, f(x_min)).

    Plain golden-section bracketing, linear convergence; tol is the
    final bracket width.
    """
    if not hi > lo:
        raise ValueError("need lo < hi")
    a, b = lo, hi
    h = b - a
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if h <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + _INVPHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = f(d)
    x = c if fc < fd else d
    return x, min(fc, fd)


def grid_max(f: Callable[[np.ndarray], np.ndarray],
             lo: float, hi: float, num: int = 20001,
             refine_tol: float = 1e-14) -> Tuple[float, float]:
    """Maximize f on [lo, hi]: dense grid scan plus golden-section polish.

    f must accept a vector of abscissae.  Used as the brute-force oracle
    against closed-form maximizers.
    """
    xs = np.linspace(lo, hi, num)
    vals = np.asarray(f(xs), dtype=float)
    i = int(np.argmax(vals))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, num - 1)]
    if b <= a:
        return float(xs[i]), float(vals[i])
    neg = lambda x: -float(f(np.asarray([x]))[0])
    x, fneg = golden_section_min(neg, float(a), float(b), tol=refine_tol)
    if -fneg >= vals[i]:
        return x, -fneg
    return float(xs[i]), float(vals[i])


def ols_loglog(x: np.ndarray, y: np.ndarray) -> Tuple[float, float, float]:
    """Least-squares fit of log y against log x.

    Returns (slope, intercept, stderr_of_slope).  With two points the
    slope is exact and the standard error is reported as infinity.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length 1-d arrays")
    if len(x) < 2:
        raise ValueError("need at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    mx, my = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    if sxx == 0.0:
        raise ValueError("degenerate abscissae")
    slope = float(np.sum((lx - mx) * (ly - my)) / sxx)
    intercept = my - slope * mx
    m = len(x)
    if m == 2:
        return slope, intercept, math.inf
    resid = ly - (intercept + slope * lx)
    s2 = float(np.sum(resid ** 2)) / (m - 2)
    return slope, intercept, math.sqrt(s2 / sxx)
