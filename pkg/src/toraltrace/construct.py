"""Explicit toral eigenfunctions used as witnesses.

* Bourgain functions ``sum_k e(k.(x - x0))`` concentrate at ``x0``.
* Frostman audits turn that concentration into ball-mass bounds.
* Cylinder witnesses saturate the trace constant of ``{x1 = x2 = 0}``.
* Null-space eigenfunctions vanish to high accuracy on a curve patch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import arith, lattice
from .errors import AuditFailure, QuadratureError
from .measures import Atomic, Circle, HyperplaneCylinder, Lebesgue, Measure, Mixture, SurfacePatch, bump
from .patches import Patch
from .quadform import DEFAULT_CAP, assemble_gram
from .quadrature import DEFAULT_RTOL, nyquist_points, periodic_trapezoid, periodic_trapezoid_bilinear

_EVAL_CHUNK = 4096


@dataclass(frozen=True)
class EigenfunctionCoeffs:
    """``u(x) = sum_k c_k e^{2 pi i k.x}`` over a finite frequency set."""

    F: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.F.shape[1]

    @property
    def norm2(self) -> float:
        """``||u||^2_{L^2}``, by Parseval."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def evaluate(self, x) -> np.ndarray:
        """Values at points ``x`` of shape ``(n, d)`` (or a single point)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(len(x), dtype=complex)
        for s in range(0, len(x), _EVAL_CHUNK):
            phase = np.exp(2j * np.pi * (x[s : s + _EVAL_CHUNK] @ self.F.T))
            out[s : s + _EVAL_CHUNK] = phase @ self.coeffs
        return out

    def normalized(self) -> "EigenfunctionCoeffs":
        return EigenfunctionCoeffs(self.F, self.coeffs / math.sqrt(self.norm2))

    def to_json(self) -> list:
        return [[k.tolist(), float(c.real), float(c.imag)] for k, c in zip(self.F, self.coeffs)]

    @classmethod
    def from_json(cls, rows) -> "EigenfunctionCoeffs":
        if isinstance(rows, str):
            rows = json.loads(rows)
        F = np.array([r[0] for r in rows], dtype=np.int64)
        c = np.array([complex(r[1], r[2]) for r in rows])
        return cls(F, c)


def bourgain(shell: lattice.LatticeShell, x0) -> EigenfunctionCoeffs:
    """Coefficients ``e^{-2 pi i k.x0}``: the eigenfunction peaking at ``x0`` with ``u(x0) = N``."""
    if shell.size == 0:
        raise ValueError("bourgain needs a nonempty shell")
    x0 = np.asarray(x0, dtype=float)
    return EigenfunctionCoeffs(shell.points, np.exp(-2j * np.pi * (shell.points @ x0)))


# ------------------------------------------------------------- concentration


@dataclass
class ConcentrationReport:
    d: int
    n: int
    N: int
    c0: float
    samples: int
    min_ratio: float
    violations: list

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self):
        return {"d": self.d, "n": self.n, "N": self.N, "c0": self.c0, "samples": self.samples,
                "min_ratio": self.min_ratio, "passed": self.passed, "violations": self.violations[:10]}


def ball_samples(d: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points in the unit ball of ``R^d``."""
    g = rng.standard_normal((samples, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.random((samples, 1)) ** (1.0 / d)


def concentration_check(shell: lattice.LatticeShell, x0, c0: float = 1 / 6, samples: int = 1000,
                        seed: int = 0, unit_samples: np.ndarray | None = None) -> ConcentrationReport:
    """Sample ``B_{c0/lambda}(x0)`` and check ``|u(x)| >= N/2`` for the Bourgain function.

    ``unit_samples`` (points of the unit ball) may be passed to reuse one
    draw across many shells; otherwise they come from ``seed``.
    """
    if shell.size == 0 or shell.n == 0:
        raise ValueError("concentration_check needs a nonempty shell with n >= 1")
    if unit_samples is None:
        unit_samples = ball_samples(shell.d, samples, np.random.default_rng(seed))
    delta = unit_samples * (c0 / shell.lam)
    # the sorted shell is symmetric under k -> -k: its upper half holds one
    # point of each pair and u(x0 + delta) = 2 sum_half cos(2 pi k.delta)
    half = shell.points[shell.size // 2 :].astype(float)
    phase = 2.0 * np.pi * (delta @ half.T)
    vals = np.abs(2.0 * np.cos(phase).sum(axis=1))
    ratio = vals / shell.size
    bad = np.flatnonzero(ratio < 0.5)
    x0 = np.asarray(x0, dtype=float)
    violations = [(x0 + delta[i]).tolist() for i in bad]
    return ConcentrationReport(shell.d, shell.n, shell.size, c0, len(delta), float(ratio.min()), violations)


def concentration_sweep(d: int, n_max: int, c0: float = 1 / 6, samples: int = 1000, seed: int = 0, x0=None):
    """``concentration_check`` on every nonempty shell ``1 <= n <= n_max``."""
    rng = np.random.default_rng(seed)
    unit = ball_samples(d, samples, rng)
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float)
    reports = []
    for shell in lattice.iter_shells(d, n_max, n_min=1):
        reports.append(concentration_check(shell, x0, c0, unit_samples=unit))
    return reports


# ------------------------------------------------------------------ Frostman


def frostman_audit(m: Measure, d: int, n_list, x0, c0: float = 1 / 6, cap: int = DEFAULT_CAP) -> list[dict]:
    """Rows ``(n, r, mu(B_r), 4 v*Mv/N^2, 4 lambda_max/N)`` with ``r = c0/lambda``.

    On ``B_r(x0)`` the Bourgain function has ``|u| >= N/2``, hence
    ``mu(B_r) <= 4 int|u|^2 dmu / N^2 <= 4 lambda_max / N``.
    """
    x0 = np.asarray(x0, dtype=float)
    rows = []
    for n in n_list:
        shell = lattice.enumerate_shell(d, int(n))
        if shell.size == 0:
            continue
        r = c0 / shell.lam
        mass = m.ball_mass(x0, r)
        g = assemble_gram(shell.points, m, cap)
        v = bourgain(shell, x0).coeffs
        q = g.quadratic_form(v)
        N = shell.size
        b1, b2 = 4 * q / N**2, 4 * g.lambda_max / N
        tol = 1e-9 * max(1.0, b2)
        rows.append({
            "n": int(n), "N": N, "r": r, "ball_mass": mass, "quad_bound": b1, "trace_bound": b2,
            "lambda_max": g.lambda_max, "mass_over_r_d2": mass / r ** (d - 2),
            "chain_ok": bool(mass <= b1 + tol and b1 <= b2 + tol),
        })
    return rows


# ------------------------------------------------------------------ cylinder


def cylinder_witness(n: int, d: int = 3) -> tuple[float, int]:
    """Rayleigh quotient of the planar Bourgain function for ``{x1 = x2 = 0}``.

    Returns ``(ratio, N_2(sqrt n))``; every difference of the embedded shell
    has ``k_3 = ... = 0``, so the Gram matrix is all ones.
    """
    if d < 3:
        raise ValueError("cylinder_witness needs d >= 3")
    planar = lattice.enumerate_shell(2, n)
    if planar.size == 0:
        raise ValueError(f"N_2(sqrt({n})) = 0")
    F = np.zeros((planar.size, d), dtype=np.int64)
    F[:, :2] = planar.points
    g = assemble_gram(F, HyperplaneCylinder(d, (1, 2)))
    v = np.ones(planar.size, dtype=complex)
    ratio = g.quadratic_form(v) / planar.size
    expected = planar.size
    if abs(ratio - expected) > 1e-8 * expected:
        raise AuditFailure("cylinder ratio differs from N_2", [(ratio, expected)])
    return ratio, expected


# ------------------------------------------------------ oscillatory matrices


@dataclass
class OscMatrix:
    """``A[l, k] = int chi(t/eps) e^{-2 pi i l t/(4 eps)} e^{2 pi i k.gamma(t)} dt``.

    Rows are ``l`` with ``|l| <= eta * lambda``; columns are shell points.
    The integral runs over ``(-2 eps, 2 eps)``, the support of the cutoff.
    """

    lam: float
    eps: float
    eta: float
    patch: Patch
    ells: np.ndarray
    F: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    doublings: int
    points: int
    change: float

    @property
    def shape(self):
        return self.A.shape

    def certificate(self) -> dict:
        rows, cols = self.shape
        return {"rows": rows, "cols": cols, "doublings": self.doublings, "points": self.points,
                "change": self.change, "kernel_expected": rows < cols}


def bump_mass(eps: float) -> float:
    """``int chi(t/eps) dt`` over the real line."""
    res = periodic_trapezoid(bump, -2.0, 2.0, n0=64, rtol=1e-14, scale=1.0)
    return eps * float(res.value)


def _osc_entries(patch: Patch, eps: float, ells, F, rtol: float, where: str):
    """Entries for the given rows and columns plus the doubling certificate."""
    ells = np.asarray(ells, dtype=float)
    F = np.asarray(F, dtype=float)
    lo, hi = -2.0 * eps, 2.0 * eps
    kmax = float(np.max(np.linalg.norm(F, axis=1))) if len(F) else 0.0
    freq = float(np.max(np.abs(ells))) / (4 * eps) + kmax * patch.max_speed(hi) + 4.0 / eps
    n0 = nyquist_points(hi - lo, freq, minimum=64)

    def row_wave(t):
        return np.exp(-2j * np.pi * np.outer(ells, t) / (4 * eps))

    def col_wave(t):
        return bump(t / eps) * np.exp(2j * np.pi * (F @ patch.gamma(t)))

    try:
        res = periodic_trapezoid_bilinear(row_wave, col_wave, lo, hi, n0=n0, rtol=rtol, scale=bump_mass(eps),
                                          where=where)
    except QuadratureError as exc:
        _, i, j = exc.where
        k, ell = F[j].astype(int).tolist(), int(ells[i])
        raise QuadratureError(f"{exc}; entry k={k}, l={ell}", where=(where, tuple(k), ell), change=exc.change)
    return res.value, [res.doublings, res.points, res.change]


def amatrix(patch: Patch, eps: float, eta: float, shell: lattice.LatticeShell,
            rtol: float = DEFAULT_RTOL) -> OscMatrix:
    """Assemble the oscillatory system whose kernel vanishes on the patch.

    Entry convergence is judged relative to ``max(|entry|, int chi(t/eps) dt)``:
    most entries are exponentially small and have no meaningful relative
    accuracy of their own.
    """
    if not 0 < eps < eta:
        raise ValueError("need 0 < eps < eta")
    if shell.d != patch.d:
        raise ValueError("shell and patch dimensions differ")
    if shell.size == 0:
        raise ValueError("empty shell")
    L = int(math.floor(eta * shell.lam))
    ells = np.arange(-L, L + 1)
    A, cert = _osc_entries(patch, eps, ells, shell.points, rtol, where=f"amatrix n={shell.n}")
    return OscMatrix(shell.lam, eps, eta, patch, ells, shell.points, A, *cert)


def nonstat_audit(A: OscMatrix, factor: float = 2.0) -> dict:
    """Size of the row ``l = factor * eta * lambda`` relative to the ``l = 0`` row."""
    ell = int(math.ceil(factor * A.eta * A.lam))
    far, _ = _osc_entries(A.patch, A.eps, [-ell, ell], A.F, DEFAULT_RTOL, where="nonstat audit")
    zero = np.abs(A.A[A.ells == 0]).max()
    ratio = float(np.abs(far).max() / zero)
    return {"ell": ell, "max_far": float(np.abs(far).max()), "max_zero_row": float(zero), "ratio": ratio}


@dataclass
class NullResult:
    u: EigenfunctionCoeffs
    residual: float
    singular_values: np.ndarray = field(repr=False)
    no_kernel: bool
    kernel_dim: int

    def as_dict(self):
        return {"residual": self.residual, "no_kernel": self.no_kernel, "kernel_dim": self.kernel_dim,
                "smallest_singular": float(self.singular_values[-1]) if len(self.singular_values) else 0.0}


def nullspace_eigenfunction(A: OscMatrix, shell: lattice.LatticeShell | None = None,
                            guard: float | None = 1.5) -> NullResult:
    """Unit vector along the smallest right singular direction of ``A``.

    When ``A`` has more columns than rows this is an exact kernel vector up
    to rounding.  A square or tall ``A`` is solved in the least-squares
    sense and flagged ``no_kernel``.

    The kernel is usually high dimensional, so the singular direction alone
    is arbitrary.  With ``guard`` set, the vector is picked inside the kernel
    to also minimize the rows ``eta*lambda < |l| <= guard*eta*lambda``, the
    first frequencies that the cutoff leaks past the band.  The residual on
    ``A`` itself is unchanged.
    """
    F = A.F if shell is None else shell.points
    rows, cols = A.A.shape
    U, s, Vh = np.linalg.svd(A.A, full_matrices=True)
    tol = max(rows, cols) * np.finfo(float).eps * (s[0] if len(s) else 0.0)
    rank = int(np.sum(s > tol))
    a = Vh[-1].conj()
    L = int(A.ells.max())
    L_ext = int(math.floor(guard * A.eta * A.lam)) if guard else L
    if cols - rank > 1 and L_ext > L:
        ext = np.concatenate([np.arange(-L_ext, -L), np.arange(L + 1, L_ext + 1)])
        E, _ = _osc_entries(A.patch, A.eps, ext, A.F, DEFAULT_RTOL, where="guard rows")
        K = Vh[rank:].conj().T
        _, _, W = np.linalg.svd(E @ K, full_matrices=True)
        a = K @ W[-1].conj()
        a /= np.linalg.norm(a)
    residual = float(np.linalg.norm(A.A @ a))
    return NullResult(EigenfunctionCoeffs(np.asarray(F), a), residual, s, rows >= cols, cols - rank)


# -------------------------------------------------------------- vanish audit


def _grid_integral(u: EigenfunctionCoeffs) -> float:
    """``int_{T^d} |u|^2 dx`` by the trapezoid rule, exact for trig polynomials."""
    kmax = int(np.max(np.abs(u.F))) if u.F.size else 0
    n = 2 * kmax + 2
    axis = np.arange(n) / n
    pts = np.stack(np.meshgrid(*([axis] * u.d), indexing="ij"), axis=-1).reshape(-1, u.d)
    return float(np.mean(np.abs(u.evaluate(pts)) ** 2))


def measure_integral(u: EigenfunctionCoeffs, m: Measure) -> float:
    """``int |u|^2 dmu`` by direct quadrature (not through Fourier coefficients)."""
    if isinstance(m, Lebesgue):
        return _grid_integral(u)
    if isinstance(m, Atomic):
        return float(np.dot(m.weights, np.abs(u.evaluate(np.asarray(m.points))) ** 2))
    if isinstance(m, Mixture):
        return sum(w * measure_integral(u, c) for w, c in zip(m.weights, m.components))
    kmax = float(np.max(np.linalg.norm(u.F, axis=1)))
    if isinstance(m, (SurfacePatch, Circle)):
        res = m.integrate(lambda x: np.abs(u.evaluate(x.T)) ** 2, kmax=2 * kmax, where="vanish audit")
        return float(np.real(res.value))
    raise NotImplementedError(f"no direct quadrature for {m.type} measures")


def vanish_audit(u: EigenfunctionCoeffs, m: Measure) -> float:
    """``int |u|^2 dmu / ||u||^2_{L^2}``."""
    return measure_integral(u, m) / u.norm2


@dataclass
class NullSweepRow:
    lam_target: float
    n: int
    N: int
    rows: int
    residual: float
    kernel_dim: int
    vanish: float
    vanish_unguarded: float
    certificate: dict

    def as_dict(self):
        return dict(self.__dict__)


def null_sweep(patch: Patch, eps: float, eta: float, lams, window: float = 1.0, weight: str = "ball",
               guard: float | None = 1.5):
    """Null-space eigenfunctions on rich shells near each ``lambda`` and their vanish ratios."""
    mu = SurfacePatch(patch, eps, weight)
    out = []
    for lam in lams:
        sc = arith.rich_shell_near(patch.d, float(lam), window)
        shell = lattice.enumerate_shell(patch.d, sc.n)
        A = amatrix(patch, eps, eta, shell)
        res = nullspace_eigenfunction(A, shell, guard)
        plain = nullspace_eigenfunction(A, shell, None) if guard else res
        out.append(NullSweepRow(float(lam), shell.n, shell.size, len(A.ells), res.residual, res.kernel_dim,
                                vanish_audit(res.u, mu), vanish_audit(plain.u, mu), A.certificate()))
    return out
