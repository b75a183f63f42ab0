"""Integer arithmetic behind shell sizes.

Representation counts of ``n`` as a sum of ``d`` squares, divisor-class counts
(Jacobi's two-square formula), primorials of primes ``1 mod 4`` and the
pigeonhole choice of a rich shell near a given radius.

All routines are exact and work on Python integers; results that must fit in
a signed 64-bit word are checked explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IntegerOverflowError

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class ShellCount:
    """Number of integer points ``k`` in ``Z^d`` with ``|k|^2 = n``."""

    d: int
    n: int
    count: int

    @property
    def radius(self) -> float:
        return math.sqrt(self.n)


def _check_dn(d, n):
    if int(d) != d or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d!r}")
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")


def isqrt_array(m):
    """Exact floor square root of a nonnegative int64 array."""
    m = np.asarray(m, dtype=np.int64)
    s = np.floor(np.sqrt(m.astype(np.float64))).astype(np.int64)
    s -= (s * s > m).astype(np.int64)
    s += ((s + 1) * (s + 1) <= m).astype(np.int64)
    return s


def _count_two_squares(n):
    r = math.isqrt(n)
    a = np.arange(-r, r + 1, dtype=np.int64)
    m = n - a * a
    s = isqrt_array(m)
    hit = s * s == m
    return int(np.sum(np.where(s[hit] > 0, 2, 1)))


@lru_cache(maxsize=1 << 18)
def _count(d, n):
    if n < 0:
        return 0
    if d == 1:
        s = math.isqrt(n)
        if s * s != n:
            return 0
        return 1 if n == 0 else 2
    if d == 2:
        return _count_two_squares(n)
    r = math.isqrt(n)
    total = _count(d - 1, n)
    for a in range(1, r + 1):
        total += 2 * _count(d - 1, n - a * a)
    return total


def sum_of_squares_count(d: int, n: int) -> ShellCount:
    """Exact ``N_d(sqrt(n))`` by enumeration over the first coordinate.

    Every coordinate is bounded by ``isqrt(n)``; the recursion peels off one
    coordinate at a time, so the result is an exhaustive count.

    >>> sum_of_squares_count(2, 25).count
    12
    """
    _check_dn(d, n)
    return ShellCount(int(d), int(n), _count(int(d), int(n)))


def count_table(d: int, n_max: int) -> np.ndarray:
    """``r_d(m)`` for every ``0 <= m <= n_max`` as an int64 array.

    Built by repeated convolution with the indicator of the squares.
    """
    _check_dn(d, n_max)
    r = math.isqrt(n_max)
    sq = np.arange(-r, r + 1, dtype=np.int64) ** 2
    one = np.bincount(sq, minlength=n_max + 1)[: n_max + 1].astype(np.int64)
    table = one.copy()
    for _ in range(d - 1):
        nxt = np.zeros_like(table)
        for a in range(-r, r + 1):
            s = a * a
            nxt[s:] += table[: n_max + 1 - s]
        table = nxt
    return table


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division up to ``sqrt(n)``."""
    if int(n) != n or n < 1:
        raise ValueError(f"factorize needs a positive integer, got {n!r}")
    n = int(n)
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 5
    step = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += step
        step = 6 - step
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n: int) -> list[int]:
    """All positive divisors of ``n``, sorted."""
    divs = [1]
    for p, e in factorize(n).items():
        divs = [q * p**i for q in divs for i in range(e + 1)]
    return sorted(divs)


def jacobi_count(n: int) -> int:
    """Jacobi's formula ``r_2(n) = 4 (d_1(n) - d_3(n))``.

    ``d_j(n)`` is the number of divisors of ``n`` congruent to ``j`` mod 4.
    """
    if int(n) != n or n <= 0:
        raise ValueError(f"jacobi_count needs n >= 1, got {n!r}")
    d1 = d3 = 0
    for q in divisors(int(n)):
        r = q % 4
        if r == 1:
            d1 += 1
        elif r == 3:
            d3 += 1
    return 4 * (d1 - d3)


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return factorize(p) == {p: 1}


def primes_1mod4(bound: int) -> list[int]:
    """Primes ``p <= bound`` with ``p % 4 == 1``."""
    if bound < 5:
        return []
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(bound) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(sieve) if p % 4 == 1]


def primorial_1mod4(bound: int) -> int:
    """Product of all primes ``p <= bound`` with ``p = 1 (mod 4)``.

    Raises
    ------
    IntegerOverflowError
        If the product leaves the signed 64-bit range. The error carries the
        largest bound whose primorial still fits.
    """
    if int(bound) != bound or bound < 5:
        raise ValueError(f"bound must be an integer >= 5, got {bound!r}")
    prod = 1
    for p in primes_1mod4(int(bound)):
        if prod > INT64_MAX // p:
            raise IntegerOverflowError(
                f"primorial of primes 1 mod 4 up to {bound} exceeds 2^63-1; "
                f"largest safe bound is {p - 1}",
                largest_safe=p - 1,
            )
        prod *= p
    return prod


def rich_shell_near(d: int, R: float, window: float = 1.0) -> ShellCount:
    """Most populated shell with radius in ``[R - window, R + window]``.

    Scans every integer ``n`` with ``(R-window)^2 <= n <= (R+window)^2`` and
    returns the one maximizing ``N_d(sqrt(n))``; ties go to the smallest ``n``.
    """
    if R < 2:
        raise ValueError("R must be >= 2")
    if not 0 < window <= R:
        raise ValueError("window must lie in (0, R]")
    lo = math.ceil((R - window) ** 2)
    hi = math.floor((R + window) ** 2)
    if hi < lo:
        raise ValueError(f"no integer n in [{(R - window) ** 2}, {(R + window) ** 2}]")
    best = None
    for n in range(lo, hi + 1):
        c = _count(int(d), n)
        if best is None or c > best.count:
            best = ShellCount(int(d), n, c)
    return best
