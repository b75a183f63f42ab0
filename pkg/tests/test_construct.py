import math

import numpy as np
import pytest
from scipy.integrate import quad

from toraltrace import arith, construct as C, lattice, measures as M
from toraltrace.patches import Patch
from toraltrace.quadform import assemble_gram

SHELL25 = lattice.enumerate_shell(2, 25)
FLAT = Patch.from_json({"beta": 1, "kind": "line", "slope": [0.0, 0.0]})
LINE = Patch.from_json({"beta": 1, "kind": "line", "slope": [0.3, 0.1], "offset": [0.0, 0.0]})


def test_bourgain_values():
    u = C.bourgain(SHELL25, [0, 0])
    assert np.allclose(u.coeffs, 1)
    assert u.evaluate([0, 0])[0] == pytest.approx(12)
    assert u.norm2 == pytest.approx(12)
    assert C.bourgain(SHELL25, [0.5, 0]).evaluate([0.5, 0])[0] == pytest.approx(12)


def test_bourgain_attains_dirac_trace():
    shell = lattice.enumerate_shell(3, 101)
    x0 = np.array([0.1, 0.7, 0.3])
    v = C.bourgain(shell, x0).coeffs
    g = assemble_gram(shell.points, M.Dirac(3, x0))
    assert g.quadratic_form(v) == pytest.approx(shell.size**2, rel=1e-12)
    assert g.lambda_max == pytest.approx(shell.size, rel=1e-12)


@pytest.mark.parametrize("m", [M.Circle((0.1, 0.2), 0.2), M.SurfacePatch(LINE, 0.05)])
def test_bourgain_quadratic_form_matches_quadrature(m):
    shell = SHELL25 if m.d == 2 else lattice.enumerate_shell(3, 50)
    x0 = np.full(m.d, 0.13)
    u = C.bourgain(shell, x0)
    q = assemble_gram(shell.points, m).quadratic_form(u.coeffs)
    assert q == pytest.approx(C.measure_integral(u, m), rel=1e-6)


def test_coeffs_json_roundtrip():
    u = C.bourgain(SHELL25, [0.2, 0.1])
    again = C.EigenfunctionCoeffs.from_json(u.to_json())
    assert np.array_equal(again.F, u.F) and np.allclose(again.coeffs, u.coeffs)


def test_concentration_examples():
    assert C.concentration_check(SHELL25, [0, 0], 1 / 6, 1000, seed=1).passed
    rng = np.random.default_rng(5)
    assert C.concentration_check(lattice.enumerate_shell(3, 101), rng.random(3), 1 / 6, 1000, seed=2).passed


def test_concentration_report_consistent_for_large_c0():
    rep = C.concentration_check(SHELL25, [0, 0], 0.5, 1000, seed=0)
    assert (rep.min_ratio < 0.5) == (not rep.passed)
    assert len(rep.violations) == sum(1 for _ in rep.violations)


def test_concentration_deterministic():
    a = C.concentration_check(SHELL25, [0, 0], 1 / 6, 200, seed=9)
    b = C.concentration_check(SHELL25, [0, 0], 1 / 6, 200, seed=9)
    assert a.min_ratio == b.min_ratio


def test_ball_samples_inside_unit_ball():
    x = C.ball_samples(3, 5000, np.random.default_rng(0))
    assert np.all(np.linalg.norm(x, axis=1) <= 1)
    # uniform: P(|x| < 1/2) = 1/8
    assert np.mean(np.linalg.norm(x, axis=1) < 0.5) == pytest.approx(1 / 8, abs=0.02)


def test_frostman_lebesgue():
    rows = C.frostman_audit(M.Lebesgue(3), 3, range(1, 60), np.zeros(3))
    assert all(r["chain_ok"] for r in rows)
    for r in rows:
        assert r["ball_mass"] == pytest.approx(4 / 3 * math.pi * r["r"] ** 3)
        assert r["ball_mass"] <= 5 * r["r"]


def test_frostman_dirac_trace_failure_mechanism():
    rows = C.frostman_audit(M.Dirac(3, [0, 0, 0]), 3, [9, 50, 101, 1105], [0, 0, 0])
    for r in rows:
        assert r["ball_mass"] == 1 and r["chain_ok"]
        assert r["trace_bound"] == pytest.approx(4.0)
    ratios = [r["mass_over_r_d2"] for r in rows]
    assert ratios == sorted(ratios)


def test_frostman_circle():
    rows = C.frostman_audit(M.Circle((0.0, 0.0), 0.2), 2, [25, 65, 1105], [0.2, 0.0])
    assert all(r["chain_ok"] for r in rows)
    for r in rows:
        assert r["ball_mass"] == pytest.approx(r["r"] / (math.pi * 0.2), rel=1e-2)


@pytest.mark.parametrize("n,d,expected", [(25, 3, 12), (65, 3, 16), (1105, 4, 32)])
def test_cylinder_examples(n, d, expected):
    ratio, exp = C.cylinder_witness(n, d)
    assert exp == expected == arith.jacobi_count(n)
    assert abs(ratio - expected) <= 1e-8 * expected


def test_cylinder_empty_shell():
    with pytest.raises(ValueError):
        C.cylinder_witness(3, 3)


def test_amatrix_flat_patch_against_oracle():
    shell = lattice.enumerate_shell(3, 50)
    eps = 0.05
    A = C.amatrix(FLAT, eps, 0.2, shell)
    chi_mass = quad(lambda t: float(M.bump(t / eps)), -2 * eps, 2 * eps, epsabs=1e-14)[0]
    zero_col = [i for i, k in enumerate(shell.points) if k[0] == 0][0]
    zero_row = int(np.flatnonzero(A.ells == 0)[0])
    assert A.A[zero_row, zero_col] == pytest.approx(chi_mass, rel=1e-10)
    assert C.bump_mass(eps) == pytest.approx(chi_mass, rel=1e-12)
    for r, ell in enumerate(A.ells):
        for c in (0, 7, 20):
            w = 2 * np.pi * (shell.points[c][0] - ell / (4 * eps))
            re = quad(lambda t: float(M.bump(t / eps)) * math.cos(w * t), -2 * eps, 2 * eps, epsabs=1e-14)[0]
            im = quad(lambda t: float(M.bump(t / eps)) * math.sin(w * t), -2 * eps, 2 * eps, epsabs=1e-14)[0]
            assert abs(A.A[r, c] - complex(re, im)) <= 1e-8 * chi_mass


def test_amatrix_rows_limited_by_eta():
    shell = lattice.enumerate_shell(3, 374)
    A = C.amatrix(LINE, 0.05, 0.2, shell)
    assert np.max(np.abs(A.ells)) <= 0.2 * shell.lam
    assert A.certificate()["kernel_expected"]


def test_nonstat_audit_decays():
    ratios = []
    for lam in (20, 40, 80):
        shell = lattice.enumerate_shell(3, arith.rich_shell_near(3, lam).n)
        ratios.append(C.nonstat_audit(C.amatrix(FLAT, 0.05, 0.2, shell))["ratio"])
    assert ratios[0] > ratios[1] > ratios[2]


def test_nonstat_audit_small_at_large_lambda():
    shell = lattice.enumerate_shell(3, arith.rich_shell_near(3, 320).n)
    assert C.nonstat_audit(C.amatrix(FLAT, 0.05, 0.2, shell))["ratio"] < 1e-6


def _synthetic(A):
    rows, cols = A.shape
    F = np.zeros((cols, 3), dtype=np.int64)
    F[:, 0] = np.arange(cols)
    return C.OscMatrix(10.0, 0.05, 0.2, FLAT, np.arange(rows) - rows // 2, F, A, 0, 0, 0.0)


def test_nullspace_wide_matrix():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((5, 9)) + 1j * rng.standard_normal((5, 9))
    res = C.nullspace_eigenfunction(_synthetic(A), guard=None)
    assert res.residual <= 1e-10 and not res.no_kernel
    assert res.kernel_dim == 4
    assert res.u.norm2 == pytest.approx(1.0)


def test_nullspace_square_matrix_flags_no_kernel():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    res = C.nullspace_eigenfunction(_synthetic(A), guard=None)
    smin = np.linalg.svd(A, compute_uv=False)[-1]
    assert res.no_kernel and res.residual == pytest.approx(smin, rel=1e-10)


def test_nullspace_residual_phase_invariant():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    phases = np.exp(2j * np.pi * rng.random(6))
    r1 = C.nullspace_eigenfunction(_synthetic(A), guard=None).residual
    r2 = C.nullspace_eigenfunction(_synthetic(A * phases[None, :]), guard=None).residual
    assert r1 == pytest.approx(r2, rel=1e-10)


def test_guard_keeps_kernel_residual():
    shell = lattice.enumerate_shell(3, 941)
    A = C.amatrix(LINE, 0.05, 0.2, shell)
    guarded = C.nullspace_eigenfunction(A, shell, guard=1.5)
    plain = C.nullspace_eigenfunction(A, shell, guard=None)
    assert guarded.residual <= 1e-12 and plain.residual <= 1e-12
    mu = M.SurfacePatch(LINE, 0.05)
    assert C.vanish_audit(guarded.u, mu) < C.vanish_audit(plain.u, mu)


def test_vanish_examples():
    mu = M.SurfacePatch(LINE, 0.05)
    shell = lattice.enumerate_shell(3, 374)
    on_patch = C.bourgain(shell, LINE.center)
    assert C.vanish_audit(on_patch, mu) > 10
    rng = np.random.default_rng(0)
    u = C.EigenfunctionCoeffs(shell.points, rng.standard_normal(shell.size) + 0j)
    assert C.vanish_audit(u, M.Lebesgue(3)) == pytest.approx(1.0, rel=1e-12)


def test_amatrix_non_convergence_names_entry(monkeypatch):
    import toraltrace.construct as mod
    from toraltrace.errors import QuadratureError
    from toraltrace.quadrature import periodic_trapezoid_bilinear

    def starved(*args, **kw):
        kw["max_doublings"] = 1
        kw["rtol"] = 1e-300
        return periodic_trapezoid_bilinear(*args, **kw)

    monkeypatch.setattr(mod, "periodic_trapezoid_bilinear", starved)
    with pytest.raises(QuadratureError) as info:
        C.amatrix(LINE, 0.05, 0.2, lattice.enumerate_shell(3, 50))
    assert "entry k=" in str(info.value)
    _, k, ell = info.value.where
    assert len(k) == 3 and isinstance(ell, int)
