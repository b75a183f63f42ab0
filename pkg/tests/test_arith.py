import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toraltrace import arith
from toraltrace.errors import IntegerOverflowError


def brute_counts(d, n_max):
    r = math.isqrt(n_max)
    axis = np.arange(-r, r + 1)
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    n2 = np.sum(grid * grid, axis=1)
    return np.bincount(n2[n2 <= n_max], minlength=n_max + 1)


@pytest.mark.parametrize("d,n,expected", [(2, 25, 12), (3, 2, 12), (2, 3, 0), (3, 7, 0), (4, 1, 8), (2, 0, 1)])
def test_known_counts(d, n, expected):
    assert arith.sum_of_squares_count(d, n).count == expected


@pytest.mark.parametrize("d", [2, 3, 4])
def test_count_table_matches_brute_force(d):
    n_max = {2: 400, 3: 300, 4: 120}[d]
    assert np.array_equal(arith.count_table(d, n_max), brute_counts(d, n_max))


@given(st.integers(1, 3000))
@settings(max_examples=60, deadline=None)
def test_count_matches_table(n):
    assert arith.sum_of_squares_count(3, n).count == arith.count_table(3, n)[n]


def test_shell_count_radius():
    assert arith.sum_of_squares_count(2, 25).radius == 5.0


def test_invalid_arguments():
    with pytest.raises(ValueError):
        arith.sum_of_squares_count(1, 4)
    with pytest.raises(ValueError):
        arith.sum_of_squares_count(2, -1)


@given(st.integers(1, 10**6))
@settings(max_examples=80, deadline=None)
def test_factorize_roundtrip(n):
    f = arith.factorize(n)
    prod = 1
    for p, e in f.items():
        assert arith.is_prime(p)
        prod *= p**e
    assert prod == n


def test_divisors():
    assert arith.divisors(12) == [1, 2, 3, 4, 6, 12]
    assert arith.divisors(1) == [1]


def test_jacobi_small_values():
    ref = brute_counts(2, 2000)
    assert all(arith.jacobi_count(n) == ref[n] for n in range(1, 2001))
    assert arith.jacobi_count(1105) == 32


def test_primes_1mod4():
    assert arith.primes_1mod4(30) == [5, 13, 17, 29]


def test_primorial_values():
    assert arith.primorial_1mod4(5) == 5
    assert arith.primorial_1mod4(13) == 65
    assert arith.primorial_1mod4(17) == 1105
    assert arith.primorial_1mod4(29) == 32045


def test_primorial_overflow_reports_largest_safe_bound():
    with pytest.raises(IntegerOverflowError) as info:
        arith.primorial_1mod4(200)
    safe = info.value.largest_safe
    assert arith.primorial_1mod4(safe) <= arith.INT64_MAX
    assert safe == 100


def test_rich_shell_near():
    sc = arith.rich_shell_near(3, 3.0, 1.0)
    assert (sc.n, sc.count) == (14, 48)
    table = arith.count_table(3, 16)
    assert sc.count == table[4:17].max()
