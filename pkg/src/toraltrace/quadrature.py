"""Deterministic doubling quadrature with convergence certificates.

Two rules share one refinement loop:

* :func:`romberg` -- composite trapezoid on ``[a, b]`` with Richardson
  extrapolation, for smooth integrands on a closed interval;
* :func:`periodic_trapezoid` -- plain trapezoid on a full period, for
  periodic integrands or smooth integrands compactly supported inside
  ``(a, b)``, where the rule already converges faster than any power.

Integrands are vectorized: ``f(x)`` receives a 1-D array of nodes and returns
either an array of the same length or a 2-D array ``(m, len(x))`` holding
``m`` integrands evaluated at once.  Refinement stops when every component
changed by at most ``rtol * max(|value|, scale)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError

NYQUIST_FACTOR = 8
DEFAULT_RTOL = 1e-8
MAX_DOUBLINGS = 22
_ROMBERG_DEPTH = 6


@dataclass
class QuadResult:
    """Integral value(s) plus the doubling certificate."""

    value: np.ndarray | complex | float
    doublings: int
    points: int
    change: float

    def certificate(self) -> dict:
        return {"doublings": self.doublings, "points": self.points, "change": self.change}


def nyquist_points(length: float, max_frequency: float, minimum: int = 16) -> int:
    """Node count giving ``NYQUIST_FACTOR`` samples per period of ``max_frequency``.

    ``max_frequency`` is in cycles per unit length.
    """
    need = NYQUIST_FACTOR * abs(length) * abs(max_frequency)
    return max(minimum, int(2 ** math.ceil(math.log2(max(need, 1.0)))))


def _scale_array(scale, shape):
    if scale is None:
        return np.zeros(shape)
    return np.broadcast_to(np.asarray(scale, dtype=float), shape)


def _converged(new, old, rtol, scale):
    ref = np.maximum(np.abs(new), _scale_array(scale, np.shape(new)))
    change = np.abs(new - old)
    ok = change <= rtol * ref
    worst = float(np.max(change / np.where(ref > 0, ref, 1.0))) if np.size(change) else 0.0
    return bool(np.all(ok)), worst


def periodic_trapezoid(
    f,
    a: float,
    b: float,
    n0: int = 16,
    rtol: float = DEFAULT_RTOL,
    scale=None,
    max_doublings: int = MAX_DOUBLINGS,
    where=None,
) -> QuadResult:
    """Trapezoid rule over one period ``[a, b)`` with node doubling.

    Each doubling reuses the previous nodes and only evaluates the new
    midpoints.
    """
    h = (b - a) / n0
    x = a + h * np.arange(n0)
    total = np.sum(f(x), axis=-1)
    value = total * h
    n = n0
    for k in range(1, max_doublings + 1):
        mid = a + h * (np.arange(n) + 0.5)
        total = total + np.sum(f(mid), axis=-1)
        n *= 2
        h /= 2
        new = total * h
        ok, worst = _converged(new, value, rtol, scale)
        value = new
        if ok:
            return QuadResult(value, k, n, worst)
    raise QuadratureError(
        f"periodic trapezoid did not converge after {max_doublings} doublings "
        f"(relative change {worst:.3e})",
        where=where,
        change=worst,
    )


def romberg(
    f,
    a: float,
    b: float,
    n0: int = 16,
    rtol: float = DEFAULT_RTOL,
    scale=None,
    max_doublings: int = MAX_DOUBLINGS,
    where=None,
    min_doublings: int = 2,
) -> QuadResult:
    """Composite trapezoid on ``[a, b]`` with Richardson extrapolation.

    The Romberg tableau is built row by row; convergence is judged on the
    diagonal.  ``min_doublings`` guards against early agreement by accident.
    """
    if b == a:
        z = f(np.array([a]))
        return QuadResult(np.zeros(np.shape(z)[:-1]), 0, 1, 0.0)
    h = (b - a) / n0
    x = a + h * np.arange(n0 + 1)
    fx = f(x)
    total = np.sum(fx, axis=-1) - 0.5 * (fx[..., 0] + fx[..., -1])
    prev = [total * h]
    n = n0
    best = prev[0]
    worst = math.inf
    for k in range(1, max_doublings + 1):
        mid = a + h * (np.arange(n) + 0.5)
        total = total + np.sum(f(mid), axis=-1)
        n *= 2
        h /= 2
        row = [total * h]
        # extrapolation depth capped: higher columns only amplify rounding
        for j in range(1, min(k, _ROMBERG_DEPTH) + 1):
            row.append(row[j - 1] + (row[j - 1] - prev[j - 1]) / (4.0**j - 1.0))
        prev = row
        ok, worst = _converged(row[-1], best, rtol, scale)
        best = row[-1]
        if ok and k >= min_doublings:
            return QuadResult(best, k, n + 1, worst)
    raise QuadratureError(
        f"romberg did not converge after {max_doublings} doublings "
        f"(relative change {worst:.3e})",
        where=where,
        change=worst,
    )


def periodic_trapezoid_bilinear(
    rows,
    cols,
    a: float,
    b: float,
    n0: int = 16,
    rtol: float = DEFAULT_RTOL,
    scale=None,
    max_doublings: int = MAX_DOUBLINGS,
    where=None,
) -> QuadResult:
    """Periodic trapezoid for the matrix of integrals ``int rows_i(t) cols_j(t) dt``.

    ``rows(t)`` and ``cols(t)`` return arrays ``(m, len(t))`` and
    ``(p, len(t))``; each refinement costs one matrix product instead of an
    ``(m * p, len(t))`` integrand.
    """
    h = (b - a) / n0
    x = a + h * np.arange(n0)
    total = rows(x) @ cols(x).T
    value = total * h
    n = n0
    for k in range(1, max_doublings + 1):
        mid = a + h * (np.arange(n) + 0.5)
        old = value
        total = total + rows(mid) @ cols(mid).T
        n *= 2
        h /= 2
        new = total * h
        ok, worst = _converged(new, value, rtol, scale)
        value = new
        if ok:
            return QuadResult(value, k, n, worst)
        last = old, new
    ref = np.maximum(np.abs(last[1]), _scale_array(scale, last[1].shape))
    rel = np.abs(last[1] - last[0]) / np.where(ref > 0, ref, 1.0)
    i, j = np.unravel_index(int(np.argmax(rel)), rel.shape)
    raise QuadratureError(
        f"periodic trapezoid did not converge after {max_doublings} doublings "
        f"(relative change {worst:.3e} at entry ({i}, {j}))",
        where=(where, int(i), int(j)),
        change=worst,
    )
