"""Fractional ``W^{eps,1}`` seminorms of indicator functions on an interval.

For a set ``E`` inside an ambient interval ``G = (0, L)``,

    [1_E] = 2 * int_E int_{G \\ E} |x - y|^(-1-eps) dx dy,

and for a finite union of intervals this is a finite sum of the closed-form
pair energy :func:`pair_energy`.  Everything here is exact up to floating
rounding; no quadrature is involved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

_PAIR_BLOCK = 2_000_000


@dataclass(frozen=True)
class IntervalUnion:
    """Disjoint open intervals ``(a_i, b_i)`` inside ``(0, L)``, sorted.

    Endpoints may be :class:`fractions.Fraction` for exact constructions; they
    are converted to floats only when energies are evaluated.
    """

    length: object
    intervals: tuple = field(default_factory=tuple)

    def __post_init__(self):
        ivs = tuple((a, b) for a, b in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        prev = 0
        for a, b in ivs:
            if not a < b:
                raise ValueError(f"empty or reversed interval ({a}, {b})")
            if a < prev:
                raise ValueError("intervals must be sorted, disjoint and inside (0, L)")
            prev = b
        if prev > self.length:
            raise ValueError("intervals must be sorted, disjoint and inside (0, L)")

    @property
    def measure(self):
        return sum((b - a for a, b in self.intervals), 0)

    def __len__(self):
        return len(self.intervals)

    def complement(self) -> "IntervalUnion":
        """Components of ``(0, L)`` minus the closure of this union."""
        out = []
        prev = 0
        for a, b in self.intervals:
            if a > prev:
                out.append((prev, a))
            prev = b
        if prev < self.length:
            out.append((prev, self.length))
        return IntervalUnion(self.length, tuple(out))

    def as_arrays(self):
        if not self.intervals:
            return np.zeros(0), np.zeros(0)
        arr = np.array([[float(a), float(b)] for a, b in self.intervals])
        return arr[:, 0], arr[:, 1]

    def contains(self, x):
        a, b = self.as_arrays()
        x = np.asarray(x, dtype=float)
        return np.any((x[..., None] > a) & (x[..., None] < b), axis=-1)

    def to_json(self) -> dict:
        return {"ambient": [0, _num(self.length)], "intervals": [[_num(a), _num(b)] for a, b in self.intervals]}

    @classmethod
    def from_json(cls, obj) -> "IntervalUnion":
        if isinstance(obj, str):
            obj = json.loads(obj)
        lo, hi = obj.get("ambient", [0, 1])
        if lo != 0:
            raise ValueError("ambient interval must start at 0")
        return cls(hi, tuple((a, b) for a, b in obj["intervals"]))


def _num(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else float(x)
    return x


def _second_difference(a, b, c, d, eps):
    """``F(c-a) - F(c-b) - F(d-a) + F(d-b)`` with ``F(x) = x^(1-eps)``.

    Each first difference is formed as ``F(base) * expm1((1-eps) log1p(h/base))``
    so small intervals far apart do not lose all their digits.
    """
    s = 1.0 - eps
    h = b - a

    def first(base):
        safe = np.where(base > 0, base, 1.0)
        val = np.where(base > 0, safe**s * np.expm1(s * np.log1p(h / safe)), h**s)
        return val

    return first(c - b) - first(d - b)


def pair_energy(I, J, eps: float) -> float:
    """``int_I int_J |x - y|^(-1-eps) dy dx`` for disjoint intervals ``I`` left of ``J``.

    >>> round(pair_energy((0, 0.5), (0.5, 1), 0.5), 12)
    1.656854249492
    """
    a, b = float(I[0]), float(I[1])
    c, d = float(J[0]), float(J[1])
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not (a <= b and c <= d):
        raise ValueError("intervals must satisfy left <= right")
    if b > c:
        raise ValueError(f"intervals ({a}, {b}) and ({c}, {d}) overlap or are misordered")
    val = _second_difference(np.float64(a), np.float64(b), np.float64(c), np.float64(d), eps)
    return float(val) / (eps * (1.0 - eps))


def _pair_energy_sum(left_a, left_b, right_a, right_b, eps):
    """Sum of pair energies over all (left, right) pairs with left before right."""
    total = np.zeros(0)
    parts = []
    block = max(1, _PAIR_BLOCK // max(len(right_a), 1))
    for s in range(0, len(left_a), block):
        a = left_a[s : s + block, None]
        b = left_b[s : s + block, None]
        val = _second_difference(a, b, right_a[None, :], right_b[None, :], eps)
        mask = right_a[None, :] >= b
        parts.append(np.sum(np.where(mask, val, 0.0)))
    if parts:
        total = np.sum(np.array(parts))
    return float(total) / (eps * (1.0 - eps))


def gagliardo_indicator(E: IntervalUnion, eps: float) -> float:
    """Exact seminorm ``[1_E]_{W^{eps,1}(0, L)}``.

    Twice the sum of pair energies between components of ``E`` and
    components of its complement in ``(0, L)``.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    ea, eb = E.as_arrays()
    ca, cb = E.complement().as_arrays()
    if len(ea) == 0 or len(ca) == 0:
        return 0.0
    # E-component left of complement-component, then the mirrored case.
    left = _pair_energy_sum(ea, eb, ca, cb, eps)
    right = _pair_energy_sum(ca, cb, ea, eb, eps)
    return 2.0 * (left + right)


def fat_cantor(alpha, depth: int) -> tuple[IntervalUnion, IntervalUnion]:
    """Kept and removed sets after ``depth`` steps of the fat Cantor construction.

    Step ``m`` removes the centered open subinterval of length ``alpha^(m+1)``
    from each of the ``2^m`` kept intervals.  Endpoints are exact fractions
    (``alpha`` is converted with :class:`fractions.Fraction`).
    """
    alpha = Fraction(alpha)
    if not 0 < alpha < Fraction(1, 3):
        raise ValueError("alpha must lie in (0, 1/3)")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    kept = [(Fraction(0), Fraction(1))]
    removed = []
    for m in range(depth):
        gap = alpha ** (m + 1)
        nxt = []
        for a, b in kept:
            if m and not b - a > alpha**m:
                raise AssertionError(f"kept interval ({a}, {b}) at depth {m} is not longer than alpha^{m}")
            mid = (a + b) / 2
            lo, hi = mid - gap / 2, mid + gap / 2
            removed.append((lo, hi))
            nxt.extend([(a, lo), (hi, b)])
        kept = nxt
    for a, b in kept:
        if depth and not b - a > alpha**depth:
            raise AssertionError(f"kept interval ({a}, {b}) at depth {depth} is not longer than alpha^{depth}")
    removed.sort()
    return IntervalUnion(Fraction(1), tuple(kept)), IntervalUnion(Fraction(1), tuple(removed))


def cantor_threshold(alpha: float) -> float:
    """Upper end ``1 + ln 2 / ln alpha`` of the convergent range of ``eps``."""
    return 1.0 + math.log(2.0) / math.log(float(alpha))


def cantor_geometric_bound(alpha, eps: float, levels: int) -> float:
    """``sum_{m<levels} 2^(m+1) alpha^((m+1)(1-eps)) / (eps (1-eps))``."""
    a = float(alpha)
    terms = [2.0 ** (m + 1) * a ** ((m + 1) * (1.0 - eps)) for m in range(levels)]
    return math.fsum(terms) / (eps * (1.0 - eps))


def cantor_bound_check(alpha, eps: float, depth: int) -> dict:
    """Energy of the removed set at every depth against the geometric bound.

    The bound ``sum 2^(m+1) alpha^((m+1)(1-eps)) / (eps(1-eps))`` controls the
    one-sided energy ``int_E int_{(0,1) \\ E}``, i.e. half of
    :func:`gagliardo_indicator`; both values are reported and the one-sided
    one is checked.  The removed set at depth ``D`` holds the gaps of levels
    ``m < D`` and the bound sums exactly those levels.

    Outside the convergent range the check still runs and reports
    ``divergent_regime_expected``.
    """
    rows = []
    for m in range(1, depth + 1):
        _, removed = fat_cantor(alpha, m)
        seminorm = gagliardo_indicator(removed, eps)
        partial = 0.5 * seminorm
        bound = cantor_geometric_bound(alpha, eps, m)
        rows.append({"depth": m, "seminorm": seminorm, "partial": partial, "bound": bound, "ratio": partial / bound})
    increments = [rows[0]["partial"]] + [rows[i]["partial"] - rows[i - 1]["partial"] for i in range(1, len(rows))]
    shrink = [increments[i - 1] / increments[i] if increments[i] > 0 else math.inf for i in range(1, len(increments))]
    for row, inc in zip(rows, increments):
        row["increment"] = inc
    divergent = not eps < cantor_threshold(alpha)
    return {
        "alpha": float(alpha),
        "eps": eps,
        "depth": depth,
        "threshold": cantor_threshold(alpha),
        "divergent_regime_expected": divergent,
        "rows": rows,
        "increment_shrink_factors": shrink,
        "passed": all(r["partial"] <= r["bound"] for r in rows),
    }


def irregular_set(N: int) -> IntervalUnion:
    """``A_N = union_{3<=n<=N} (a_n, a_n + h_n)`` with ``h_n = 1/(n ln^2 n)``.

    Gaps satisfy ``a_{n-1} - a_n = 2 h_n``; the construction is anchored at
    ``a_N = h_N`` and built upward inside the ambient interval ``(0, 3)``.
    """
    if N < 3:
        raise ValueError("N must be >= 3")
    n = np.arange(3, N + 1, dtype=float)
    h = 1.0 / (n * np.log(n) ** 2)
    a = np.empty_like(h)
    a[-1] = h[-1]
    # a_{n-1} = a_n + 2 h_n, accumulated from the top index down
    steps = 2.0 * h[1:][::-1]
    a[:-1] = (h[-1] + np.cumsum(steps))[::-1]
    ivs = tuple(sorted(zip(a.tolist(), (a + h).tolist())))
    return IntervalUnion(3.0, ivs)


def irregular_divergence_audit(N: int, eps: float) -> dict:
    """Lower-bound partial sum for the irregular set, and its growth.

    ``partial(N) = sum_{n=4}^N pair_energy((a_n, a_n+h_n), (a_n+h_n, a_n+2h_n))``
    is compared with the closed form ``(2 - 2^(1-eps))/(eps(1-eps)) sum h_n^(1-eps)``
    and with ``partial(N // 10)``.
    """
    if N < 10:
        raise ValueError("N must be >= 10")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    A = irregular_set(N)
    starts, ends = A.as_arrays()
    # sorted ascending in position: n decreases left to right
    order = np.argsort(-starts)
    a = starts[order]
    h = (ends - starts)[order]
    n_idx = np.arange(3, N + 1)

    def partial(upto):
        sel = (n_idx >= 4) & (n_idx <= upto)
        val = _second_difference(a[sel], a[sel] + h[sel], a[sel] + h[sel], a[sel] + 2 * h[sel], eps)
        return float(np.sum(val)) / (eps * (1.0 - eps))

    def closed(upto):
        nn = np.arange(4, upto + 1, dtype=float)
        hh = 1.0 / (nn * np.log(nn) ** 2)
        return (2.0 - 2.0 ** (1.0 - eps)) / (eps * (1.0 - eps)) * float(np.sum(hh ** (1.0 - eps)))

    value = partial(N)
    lower = closed(N)
    tenth = partial(N // 10) if N // 10 >= 4 else 0.0
    growth_ok = value >= 2.0 * tenth if N >= 10**4 else value > tenth
    return {
        "N": N,
        "eps": eps,
        "anchor": "a_N = h_N",
        "ambient": [0, 3],
        "max_endpoint": float(np.max(ends)),
        "partial": value,
        "closed_form": lower,
        "relative_gap": abs(value - lower) / lower,
        "partial_tenth": tenth,
        "growth_ratio": value / tenth if tenth > 0 else math.inf,
        "passed": bool(value >= lower * (1 - 1e-9) and growth_ok and np.max(ends) < 3.0),
    }
