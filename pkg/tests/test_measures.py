import json
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma, j0

from toraltrace import measures as M
from toraltrace.errors import UnsupportedError
from toraltrace.patches import Patch
from toraltrace.sobolev import IntervalUnion

LINE = Patch.from_json({"beta": 1, "kind": "line", "slope": [0.3, 0.1], "offset": [0.0, 0.0]})


def all_variants():
    return {
        "lebesgue": M.Lebesgue(2),
        "dirac": M.Dirac(3, [0.1, 0.2, 0.3]),
        "atomic": M.Atomic(2, (0.25, 0.75), ((0.0, 0.0), (0.3, 0.6))),
        "fourier_table": M.squared_polynomial_density({(0, 0): 1.0, (1, 2): 0.5 + 0.2j, (-1, 0): 0.3}),
        "circle": M.Circle((0.1, 0.2), 0.2),
        "sphere": M.Sphere((0.0, 0.5, 0.25), 0.3),
        "hyperplane_cylinder": M.HyperplaneCylinder(3, (1, 2)),
        "periodized_power": M.PeriodizedPower(3, 0.5),
        "interval_indicator": M.IntervalIndicator((IntervalUnion(1, ((0.1, 0.3), (0.5, 0.55))),)),
        "surface_patch": M.SurfacePatch(LINE, 0.05),
        "mixture": M.Mixture((M.Dirac(2, [0, 0]), M.Lebesgue(2)), (0.5, 0.5)),
    }


VARIANTS = all_variants()


def test_basic_values():
    assert M.fourier_coeff(M.Lebesgue(2), [3, 4]) == 0
    assert M.fourier_coeff(M.Dirac(2, [0, 0]), [7, -3]) == 1
    assert M.fourier_coeff(M.Circle((0, 0), 0.2), [1, 0]) == pytest.approx(j0(0.4 * math.pi), abs=1e-15)
    h = M.HyperplaneCylinder(3, (1, 2))
    assert M.fourier_coeff(h, [7, -2, 0]) == 1
    assert M.fourier_coeff(h, [0, 0, 1]) == 0


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        M.fourier_coeff(M.Lebesgue(2), [1, 2, 3])


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_invariants(name):
    K = 4 if name in ("surface_patch", "periodized_power", "sphere") else 8
    inv = M.check_invariants(VARIANTS[name], K=K)
    assert inv["mu0_error"] <= 1e-10
    assert inv["conjugate_error"] <= 1e-10
    assert inv["max_modulus"] <= 1 + 1e-10


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_bochner_psd_on_random_sets(name):
    from toraltrace.quadform import gram_matrix

    m = VARIANTS[name]
    rng = np.random.default_rng(7)
    for _ in range(3):
        F = np.unique(rng.integers(-6, 7, size=(40, m.d)), axis=0)
        w = np.linalg.eigvalsh(gram_matrix(F, m))
        assert w[0] >= -1e-8


@pytest.mark.parametrize("name", sorted(VARIANTS))
def test_json_roundtrip(name):
    m = VARIANTS[name]
    again = M.from_json(json.dumps(m.to_json()))
    ks = M.cube_frequencies(m.d, 2, include_zero=True)
    assert np.allclose(again.coeffs(ks), m.coeffs(ks), atol=1e-14)


def test_circle_against_curve_quadrature():
    c = M.Circle((0.1, 0.2), 0.2)
    rng = np.random.default_rng(1)
    ks = rng.integers(-45, 46, size=(12, 2))
    ks = ks[np.linalg.norm(ks, axis=1) <= 64]
    for k in ks:
        def part(fn):
            return quad(lambda t: fn(-2 * np.pi * (k[0] * (0.1 + 0.2 * np.cos(t)) + k[1] * (0.2 + 0.2 * np.sin(t)))),
                        0, 2 * np.pi, limit=400, epsabs=1e-13)[0] / (2 * np.pi)
        ref = part(np.cos) + 1j * part(np.sin)
        assert abs(M.fourier_coeff(c, k) - ref) < 1e-8


def test_sphere_value_and_zero():
    s = M.Sphere((0, 0, 0), 0.3)
    assert M.fourier_coeff(s, [0, 0, 0]) == 1
    z = 2 * math.pi * 0.3 * math.sqrt(14)
    assert M.fourier_coeff(s, [1, 2, 3]).real == pytest.approx(math.sin(z) / z, abs=1e-15)


def test_interval_indicator_against_quad():
    E = IntervalUnion(1, ((0.1, 0.3), (0.5, 0.55)))
    m = M.IntervalIndicator((E,))
    for k in (1, 3, -7):
        re = sum(quad(lambda x: math.cos(2 * math.pi * k * x), a, b)[0] for a, b in E.intervals) / 0.25
        im = -sum(quad(lambda x: math.sin(2 * math.pi * k * x), a, b)[0] for a, b in E.intervals) / 0.25
        assert abs(M.fourier_coeff(m, [k]) - complex(re, im)) < 1e-12


@pytest.mark.parametrize("eps", [0.3, 0.5, 0.7])
def test_power_normalization_closed_form(eps):
    pp = M.PeriodizedPower(3, eps)
    assert pp.normalization == pytest.approx(2 * math.pi * gamma((1 - eps) / 2), rel=1e-9)


@pytest.mark.parametrize("rho", [1.0, math.sqrt(6), 7.5])
def test_power_transform_against_quad(rho):
    eps = 0.5
    w = 2 * math.pi * rho
    inner = quad(lambda r: math.exp(-r * r) * r ** (-eps) * (math.sin(w * r) / (w * r) if r > 0 else 1.0) * w,
                 0, 1, limit=400)[0]
    outer = quad(lambda r: math.exp(-r * r) * r ** (-1 - eps), 1, 30, weight="sin", wvar=w, limit=400)[0]
    ref = 2 / rho * (inner + outer)
    assert M._power_transform(eps, rho) == pytest.approx(ref, rel=1e-8)


def test_power_density_positive():
    pp = M.PeriodizedPower(3, 0.5)
    vals = pp.density(np.random.default_rng(0).random((50, 3)))
    assert np.all(vals > 0)


def test_squared_polynomial_density():
    m = VARIANTS["fourier_table"]
    g = np.linspace(0, 1, 64, endpoint=False)
    X = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    f = m.density(X)
    assert f.min() >= -1e-12
    assert np.mean(f) == pytest.approx(1.0, abs=1e-12)
    assert math.sqrt(np.mean(f * f)) == pytest.approx(m.l2_norm(), rel=1e-12)


def test_mixture_coefficients():
    m = VARIANTS["mixture"]
    assert M.fourier_coeff(m, [0, 0]) == 1
    assert M.fourier_coeff(m, [1, 0]) == pytest.approx(0.5)


def test_sup_offzero():
    assert M.sup_offzero(M.Dirac(2, [0.3, 0.1]), 5)[0] == pytest.approx(1.0)
    assert M.sup_offzero(M.Lebesgue(2), 5)[0] == 0.0
    val, k = M.sup_offzero(M.Circle((0, 0), 0.2), 20)
    assert val < 1
    assert val == pytest.approx(abs(j0(2 * math.pi * 0.2 * math.hypot(*k))), abs=1e-14)


def test_decay_fit_trivial_cases():
    assert M.decay_fit(M.Dirac(2, [0, 0]), 64).exponent == pytest.approx(0.0, abs=1e-12)
    assert M.decay_fit(M.Lebesgue(2), 64).exponent == math.inf
    with pytest.raises(ValueError):
        M.decay_fit(M.Lebesgue(2), 4)


def test_decay_fit_sphere():
    # sinc decay: |k|^-1
    fit = M.decay_fit(M.Sphere((0, 0, 0), 0.3), 256)
    assert fit.exponent == pytest.approx(1.0, abs=0.15)


def test_ball_mass_exact_cases():
    assert M.ball_mass(M.Dirac(2, [0.3, 0.4]), [0.3, 0.4], 0.01) == 1
    assert M.ball_mass(M.Dirac(2, [0.95, 0.0]), [0.05, 0.0], 0.2) == 1  # across the seam
    assert M.ball_mass(M.Lebesgue(2), [0.5, 0.5], 0.1) == pytest.approx(math.pi * 0.01)
    E = IntervalUnion(1, ((0.1, 0.3),))
    assert M.ball_mass(M.IntervalIndicator((E,)), [0.3], 0.05) == pytest.approx(0.25)


def test_ball_mass_unsupported():
    with pytest.raises(UnsupportedError):
        M.ball_mass(VARIANTS["fourier_table"], [0, 0], 0.1)
    with pytest.raises(UnsupportedError):
        M.ball_mass(VARIANTS["periodized_power"], [0, 0, 0], 0.1)


def test_circle_ball_mass_sampling_oracle():
    c = M.Circle((0.0, 0.0), 0.2)
    rng = np.random.default_rng(3)
    n = 10**6
    t = 2 * np.pi * (np.arange(n) + rng.random(n)) / n  # stratified
    pts = 0.2 * np.c_[np.cos(t), np.sin(t)]
    for y, r in (((0.2, 0.0), 0.05), ((0.25, 0.1), 0.12), ((0.9, 0.0), 0.15)):
        est = np.mean(M.torus_distance(pts, np.array(y)) < r)
        assert abs(M.ball_mass(c, y, r) - est) < 1e-4


def test_sphere_ball_mass_sampling_oracle():
    s = M.Sphere((0.0, 0.0, 0.0), 0.3)
    n = 2 * 10**6
    # Fibonacci lattice: equal-area quasi-random points on the sphere
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    phi = np.pi * (1 + 5**0.5) * i
    rho = np.sqrt(1 - z * z)
    pts = 0.3 * np.c_[rho * np.cos(phi), rho * np.sin(phi), z]
    for y, r in (((0.3, 0.0, 0.1), 0.15), ((0.1, 0.1, 0.1), 0.35)):
        est = np.mean(M.torus_distance(pts, np.array(y)) < r)
        assert abs(M.ball_mass(s, y, r) - est) < 1e-4


def test_cylinder_ball_mass():
    h = M.HyperplaneCylinder(3, (1, 2))
    assert M.ball_mass(h, [0, 0, 0.5], 0.1) == pytest.approx(0.2)
    assert M.ball_mass(h, [0.07, 0.08, 0.5], 0.1) == 0.0
    assert M.ball_mass(h, [0.06, 0, 0.5], 0.1) == pytest.approx(0.16)


def test_surface_patch_mass_and_ball():
    m = M.SurfacePatch(LINE, 0.05)
    # a straight segment of arclength 2 * eps
    assert m.mass == pytest.approx(0.1, rel=1e-12)
    assert M.ball_mass(m, LINE.center, 0.02) == pytest.approx(0.4, rel=1e-9)
    assert M.ball_mass(m, LINE.center, 0.2) == pytest.approx(1.0, rel=1e-12)


def test_surface_patch_coefficient_closed_form():
    m = M.SurfacePatch(LINE, 0.05)
    k = np.array([3, -2, 5])
    direction = np.array([1.0, 0.3, 0.1]) / math.sqrt(1.1)
    a = 2 * math.pi * float(k @ direction) * 0.05
    assert M.fourier_coeff(m, k) == pytest.approx(math.sin(a) / a, abs=1e-10)


def test_bump_profile():
    x = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    b = M.bump(x)
    assert b[0] == b[1] == b[2] == 1.0
    assert 0 < b[3] < 1
    assert b[4] == b[5] == 0.0
