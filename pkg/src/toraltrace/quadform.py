"""Gram matrices ``M[k, l] = mu_hat(k - l)`` and their extremal eigenvalues.

For ``u = sum_k a_k e(k.x)`` supported on a frequency set ``F`` one has
``int |u|^2 dmu = a* M a`` and ``||u||^2 = |a|^2``, so the extreme
eigenvalues of ``M`` are the best constants of the trace and observability
inequalities restricted to ``F``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lattice
from .errors import ResourceError, ToralTraceError
from .measures import Measure

DEFAULT_CAP = 4096
RESIDUAL_TOL = 1e-8
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class GramSpectrum:
    F: np.ndarray
    measure: dict
    M: np.ndarray = field(repr=False)
    lambda_min: float
    lambda_max: float
    eigvec_min: np.ndarray = field(repr=False)
    eigvec_max: np.ndarray = field(repr=False)
    residuals: tuple

    @property
    def size(self) -> int:
        return len(self.F)

    def quadratic_form(self, v) -> float:
        v = np.asarray(v, dtype=complex)
        return float(np.real(np.vdot(v, self.M @ v)))

    def certificate(self) -> dict:
        return {"size": self.size, "residual_min": self.residuals[0], "residual_max": self.residuals[1]}


def _difference_keys(F: np.ndarray):
    """Pack all differences ``F[i] - F[j]`` into int64 keys; returns keys and decoder."""
    span = int(F.max() - F.min()) if F.size else 0
    base = 2 * span + 1
    d = F.shape[1]
    if base ** d >= 2**62:
        raise ResourceError("frequency set too spread out to pack differences")
    weights = base ** np.arange(d, dtype=np.int64)
    packed = (F - F.min()) @ weights  # shift so entries are >= 0; differences shift cancel
    keys = packed[:, None] - packed[None, :]
    offset = sum(span * w for w in weights.tolist())

    def decode(u):
        v = u + offset
        out = np.empty((len(u), d), dtype=np.int64)
        for i in range(d):
            out[:, i] = v % base - span
            v //= base
        return out

    return keys, decode


def gram_matrix(F, m: Measure, cap: int = DEFAULT_CAP) -> np.ndarray:
    """``M[i, j] = mu_hat(F[i] - F[j])`` with one coefficient call per distinct difference."""
    F = np.asarray(F, dtype=np.int64)
    if F.ndim != 2 or len(F) == 0:
        raise ValueError("frequency set must be a nonempty (N, d) array")
    if len(F) > cap:
        raise ResourceError(f"Gram matrix of size {len(F)} exceeds the cap {cap}")
    if F.shape[1] != m.d:
        raise ValueError(f"frequency dimension {F.shape[1]} does not match the measure (d = {m.d})")
    keys, decode = _difference_keys(F)
    uniq, inv = np.unique(keys, return_inverse=True)
    vals = m.coeffs(decode(uniq))
    return vals[inv].reshape(keys.shape)


def extremal_pairs(M: np.ndarray):
    """Eigenvalues, extremal eigenvectors and residuals ``|Mv - lam v| / |M|``."""
    w, V = np.linalg.eigh(M)
    norm = max(abs(w[0]), abs(w[-1]), 1.0)
    res = []
    for j in (0, -1):
        v = V[:, j]
        res.append(float(np.linalg.norm(M @ v - w[j] * v) / norm))
    return w, V[:, 0], V[:, -1], tuple(res)


def assemble_gram(F, m: Measure, cap: int = DEFAULT_CAP) -> GramSpectrum:
    M = gram_matrix(F, m, cap)
    herm = float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0
    if herm > HERMITIAN_TOL:
        raise ToralTraceError(f"Gram matrix not Hermitian (defect {herm:.2e})")
    M = 0.5 * (M + M.conj().T)
    w, vmin, vmax, res = extremal_pairs(M)
    if max(res) > RESIDUAL_TOL:
        raise ToralTraceError(f"eigen residual {max(res):.2e} exceeds {RESIDUAL_TOL}")
    return GramSpectrum(np.asarray(F), m.to_json(), M, float(w[0]), float(w[-1]), vmin, vmax, res)


def finite_support_constants(F, m: Measure, cap: int = DEFAULT_CAP) -> tuple[float, float]:
    g = assemble_gram(F, m, cap)
    return g.lambda_min, g.lambda_max


# ---------------------------------------------------------------- sweeps


@dataclass
class SweepResult:
    d: int
    rows: list
    tail_from: int | None

    @property
    def ok_rows(self):
        return [r for r in self.rows if r["status"] == "ok"]

    def running_extrema(self):
        """Running sup of lambda_max and inf of lambda_min along the sweep."""
        sup, inf = -math.inf, math.inf
        out = []
        for r in self.ok_rows:
            sup = max(sup, r["lambda_max"])
            inf = min(inf, r["lambda_min"])
            out.append((r["n"], inf, sup))
        return out

    def summary(self) -> dict:
        ok = self.ok_rows
        tail = [r["lambda_min"] for r in ok if self.tail_from is not None and r["n"] >= self.tail_from]
        return {
            "rows": len(self.rows),
            "ok": len(ok),
            "skipped_empty": sum(r["status"] == "empty" for r in self.rows),
            "errors": sum(r["status"].startswith("error") for r in self.rows),
            "trace_constant": max((r["lambda_max"] for r in ok), default=None),
            "inverse_observability": min((r["lambda_min"] for r in ok), default=None),
            "semiclassical_from": self.tail_from,
            "semiclassical_min": min(tail, default=None),
            "max_residual": max((r["residual"] for r in ok), default=None),
        }


def constants_sweep(d: int, n_list, m: Measure, cap: int = DEFAULT_CAP, tail_fraction: float = 0.5) -> SweepResult:
    """Per-shell extreme eigenvalues for every ``n`` in ``n_list``.

    Empty shells are kept as ``status="empty"`` rows; errors are recorded per
    row and do not stop the sweep.  The semiclassical proxy is the minimum of
    ``lambda_min`` over the top ``tail_fraction`` of the ``n`` range.
    """
    n_list = sorted(int(n) for n in n_list)
    rows = []
    for n in n_list:
        row = {"n": n, "N": 0, "lambda_min": math.nan, "lambda_max": math.nan, "residual": math.nan}
        try:
            shell = lattice.enumerate_shell(d, n)
            row["N"] = shell.size
            if shell.size == 0:
                row["status"] = "empty"
            else:
                g = assemble_gram(shell.points, m, cap)
                row.update(lambda_min=g.lambda_min, lambda_max=g.lambda_max, residual=max(g.residuals), status="ok")
        except ToralTraceError as exc:
            row["status"] = f"error: {exc}"
        rows.append(row)
    tail_from = None
    if n_list:
        lo, hi = n_list[0], n_list[-1]
        tail_from = int(math.ceil(hi - tail_fraction * (hi - lo)))
    return SweepResult(d, rows, tail_from)


# ------------------------------------------------------ cluster-block split


@dataclass(frozen=True)
class BlockSplit:
    n: int
    d: int
    block_min: float
    block_max: float
    cross_bound: float
    lambda_min: float
    lambda_max: float
    clusters: int
    max_cluster_size: int
    dyadic_cross: tuple

    @property
    def sandwich_ok(self) -> bool:
        return self.sandwich_slack(1e-8)

    def sandwich_slack(self, tol: float) -> bool:
        return (self.block_min - self.cross_bound <= self.lambda_min + tol
                and self.lambda_max <= self.block_max + self.cross_bound + tol)

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("n", "d", "block_min", "block_max", "cross_bound", "lambda_min",
                                             "lambda_max", "clusters", "max_cluster_size")}
        out["dyadic_cross"] = [list(x) for x in self.dyadic_cross]
        out["sandwich_ok"] = self.sandwich_ok
        return out


def cluster_block_split(n: int, d: int, m: Measure, c: float = 1.0, exponent: float | None = None,
                        cap: int = DEFAULT_CAP) -> BlockSplit:
    """Split the shell Gram matrix into cluster blocks plus a cross term.

    ``block_min``/``block_max`` are the extreme eigenvalues of the
    block-diagonal part; ``cross_bound`` is the largest row sum of
    ``|M[k, l]|`` over ``l`` outside the cluster of ``k``, which bounds the
    norm of the off-block part.  ``dyadic_cross`` lists, per dyadic range
    ``2^j <= |k - l| < 2^(j+1)``, the largest cross-cluster ``|mu_hat|``.
    """
    shell = lattice.enumerate_shell(d, n)
    if shell.size == 0:
        raise ValueError(f"shell d={d}, n={n} is empty")
    dec = lattice.cluster_decompose(shell, c=c, exponent=exponent, geometry=False)
    g = assemble_gram(shell.points, m, cap)
    labels = dec.labels
    same = labels[:, None] == labels[None, :]
    absM = np.abs(g.M)
    cross_rows = np.where(same, 0.0, absM).sum(axis=1)
    cross_bound = float(cross_rows.max())
    bmin, bmax = math.inf, -math.inf
    for cl in dec.clusters:
        idx = np.asarray(cl.indices)
        w = np.linalg.eigvalsh(g.M[np.ix_(idx, idx)])
        bmin, bmax = min(bmin, float(w[0])), max(bmax, float(w[-1]))
    diffs = shell.points[:, None, :] - shell.points[None, :, :]
    dist = np.sqrt(np.sum(diffs.astype(float) ** 2, axis=-1))
    cross = ~same
    dyadic = []
    if cross.any():
        jmax = int(math.floor(math.log2(dist[cross].max())))
        for j in range(jmax + 1):
            sel = cross & (dist >= 2.0**j) & (dist < 2.0 ** (j + 1))
            if sel.any():
                dyadic.append((j, float(absM[sel].max())))
    return BlockSplit(n, d, bmin, bmax, cross_bound, g.lambda_min, g.lambda_max, len(dec.clusters),
                      dec.max_cluster_size, tuple(dyadic))
