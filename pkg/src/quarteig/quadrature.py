"""Small quadrature helpers: adaptive Simpson for smooth vector integrands
and a composite Simpson rule for uniformly sampled data."""

from __future__ import annotations

import numpy as np

_MAX_DEPTH = 40


def adaptive_simpson_vec(f, a: float, b: float, tol: float) -> np.ndarray:
    """Adaptive Simpson integral of a vector-valued f over [a, b].

    The refinement criterion is the usual |S_half - S| / 15 estimate, applied
    to the max-norm across components, with the tolerance split between
    halves.  Intended for entire integrands; depth is capped defensively.
    """
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _recurse(f, a, b, fa, fm, fb, whole, tol, _MAX_DEPTH)


def _recurse(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = np.max(np.abs(left + right - whole))
    if err <= 15.0 * tol or depth <= 0:
        return left + right + (left + right - whole) / 15.0
    half = 0.5 * tol
    return _recurse(f, a, m, fa, flm, fm, left, half, depth - 1) + _recurse(
        f, m, b, fm, frm, fb, right, half, depth - 1
    )


def composite_simpson(values: np.ndarray, step: float) -> float:
    """Composite Simpson integral of uniformly sampled values.

    Handles an even interval count directly; with an odd count the last
    interval is added by a three-point closed rule on the final pair of
    intervals (standard end correction).
    """
    y = np.asarray(values, dtype=float)
    n = y.size - 1
    if n < 1:
        return 0.0
    if n == 1:
        return 0.5 * step * (y[0] + y[1])
    total = 0.0
    if n % 2 == 1:
        # 3/8-style end correction over the trailing interval
        total += step * (5.0 * y[-1] + 8.0 * y[-2] - y[-3]) / 12.0
        y = y[:-1]
        n -= 1
    total += step / 3.0 * (y[0] + y[-1] + 4.0 * np.sum(y[1:-1:2]) + 2.0 * np.sum(y[2:-2:2]))
    return float(total)
