"""Lattice points on spheres: enumeration, caps, clusters, affine geometry.

Structural quantities (affine rank, circumspheres) are computed in exact
integer/rational arithmetic.  Distances are only ever compared through
squared integer norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import arith
from .errors import ResourceError

DEFAULT_POINT_CAP = 10**6
_PAIR_CHUNK = 4_000_000


@dataclass(frozen=True)
class LatticeShell:
    """Integer points of ``Z^d`` on the sphere ``|k|^2 = n``.

    ``points`` is an ``(N, d)`` int64 array sorted lexicographically.
    """

    d: int
    n: int
    points: np.ndarray = field(repr=False)

    @property
    def lam(self) -> float:
        return math.sqrt(self.n)

    @property
    def size(self) -> int:
        return len(self.points)

    def __len__(self):
        return len(self.points)


def _sorted_rows(pts):
    if len(pts) == 0:
        return pts
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def _shell_points(d, n):
    if d == 1:
        s = math.isqrt(n)
        if s * s != n:
            return np.zeros((0, 1), dtype=np.int64)
        return np.array([[-s], [s]] if s else [[0]], dtype=np.int64)
    r = math.isqrt(n)
    blocks = []
    for a in range(-r, r + 1):
        sub = _shell_points(d - 1, n - a * a)
        if len(sub):
            col = np.full((len(sub), 1), a, dtype=np.int64)
            blocks.append(np.hstack([col, sub]))
    if not blocks:
        return np.zeros((0, d), dtype=np.int64)
    return np.vstack(blocks)


def enumerate_shell(d: int, n: int, cap: int = DEFAULT_POINT_CAP) -> LatticeShell:
    """All ``k`` in ``Z^d`` with ``|k|^2 = n``, sorted lexicographically.

    Raises
    ------
    ResourceError
        When the exact point count exceeds ``cap``.
    """
    predicted = arith.sum_of_squares_count(d, n).count
    if predicted > cap:
        raise ResourceError(f"shell (d={d}, n={n}) has {predicted} points > cap {cap}")
    pts = _sorted_rows(_shell_points(int(d), int(n)))
    return LatticeShell(int(d), int(n), pts)


def iter_shells(d: int, n_max: int, n_min: int = 0, skip_empty: bool = True) -> Iterator[LatticeShell]:
    """Yield every shell with ``n_min <= n <= n_max`` from one grid pass.

    Equivalent to calling :func:`enumerate_shell` for each ``n`` but much
    faster for long ranges in low dimension.
    """
    r = math.isqrt(n_max)
    axis = np.arange(-r, r + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    norms = np.einsum("ij,ij->i", pts, pts)
    keep = (norms <= n_max) & (norms >= n_min)
    pts, norms = pts[keep], norms[keep]
    keys = [pts[:, j] for j in range(d - 1, -1, -1)] + [norms]
    order = np.lexsort(keys)
    pts, norms = pts[order], norms[order]
    starts = np.searchsorted(norms, np.arange(n_min, n_max + 2))
    for i, n in enumerate(range(n_min, n_max + 1)):
        block = pts[starts[i] : starts[i + 1]]
        if skip_empty and len(block) == 0:
            continue
        yield LatticeShell(d, n, block)


def _pair_sqdist_blocks(pts, chunk_rows=None):
    """Yield ``(row_slice, squared distance block)`` over all pairs."""
    n = len(pts)
    if chunk_rows is None:
        chunk_rows = max(1, _PAIR_CHUNK // max(n, 1))
    for s in range(0, n, chunk_rows):
        blk = pts[s : s + chunk_rows]
        diff = blk[:, None, :] - pts[None, :, :]
        yield s, np.einsum("ijk,ijk->ij", diff, diff)


def cap_count(shell: LatticeShell, r: float) -> int:
    """Largest number of shell points in an open ball ``B_r(p)``, ``p`` in the shell.

    Centers are restricted to the shell's own points, so this is a lower
    estimator of the supremum over all centers in ``R^d``.
    """
    if shell.size == 0:
        raise ValueError("cap_count needs a nonempty shell")
    r2 = r * r
    best = 0
    for _, d2 in _pair_sqdist_blocks(shell.points):
        best = max(best, int(np.max(np.sum(d2 < r2, axis=1))))
    return best


def cap_audit(d: int, ns: Sequence[int], r_exponent: float = 0.5, eps: float = 0.1) -> list[dict]:
    """Cap counts at radius ``lambda**r_exponent`` against ``lambda**eps r**(d-2)``.

    The implied constant is unknown, so rows only report the ratio.
    """
    rows = []
    for n in ns:
        shell = enumerate_shell(d, n)
        if shell.size == 0:
            continue
        lam = shell.lam
        r = lam**r_exponent
        v = cap_count(shell, r)
        scale = lam**eps * r ** (d - 2)
        rows.append({"n": n, "N": shell.size, "r": r, "cap": v, "ratio": v / scale})
    return rows


def affine_dimension(points) -> int:
    """Dimension of the affine hull, by exact fraction-free elimination."""
    pts = [tuple(int(x) for x in p) for p in points]
    if not pts:
        raise ValueError("affine_dimension needs at least one point")
    p0 = pts[0]
    rows = [[a - b for a, b in zip(p, p0)] for p in pts[1:]]
    return _integer_rank(rows)


def _integer_rank(rows) -> int:
    # Bareiss elimination; all intermediate values stay integral.
    m = [list(r) for r in rows if any(r)]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(rank + 1, len(m)):
            for j in range(col + 1, ncols):
                m[i][j] = (m[i][j] * m[rank][col] - m[rank][j] * m[i][col]) // prev
            m[i][col] = 0
        prev = m[rank][col]
        rank += 1
        if rank == len(m):
            break
    return rank


def _affine_basis(pts):
    """Indices of points forming a maximal affinely independent subset."""
    p0 = pts[0]
    chosen = [0]
    rows = []
    for i, p in enumerate(pts[1:], start=1):
        cand = rows + [[a - b for a, b in zip(p, p0)]]
        if _integer_rank(cand) == len(cand):
            rows = cand
            chosen.append(i)
    return chosen, rows


def _solve_fraction(a, b):
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a, b)]
    for col in range(n):
        piv = next(i for i in range(col, n) if m[i][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[col])]
    return [m[i][n] for i in range(n)]


def circumsphere(points) -> tuple[tuple[Fraction, ...], Fraction]:
    """Exact center and squared radius of the sphere through ``points``.

    The sphere lives in the affine hull of the points, so its center is the
    unique point of that hull equidistant from all of them.

    Raises
    ------
    ValueError
        If all points coincide, or if the points are not cospherical.
    """
    pts = [tuple(int(x) for x in p) for p in points]
    if len(pts) < 2:
        raise ValueError("circumsphere needs at least two points")
    idx, basis = _affine_basis(pts)
    if not basis:
        raise ValueError("degenerate input: all points are equal")
    p0 = pts[0]
    gram = [[sum(a * b for a, b in zip(u, v)) for v in basis] for u in basis]
    rhs = [Fraction(sum(a * a for a in u), 2) for u in basis]
    t = _solve_fraction(gram, rhs)
    center = tuple(Fraction(p0[j]) + sum(ti * u[j] for ti, u in zip(t, basis)) for j in range(len(p0)))
    radius_sq = sum((c - x) ** 2 for c, x in zip(center, p0))
    for p in pts:
        if sum((c - x) ** 2 for c, x in zip(center, p)) != radius_sq:
            raise ValueError("points do not lie on a common sphere")
    return center, radius_sq


@dataclass
class Cluster:
    indices: np.ndarray
    diameter: float
    affine_dimension: int
    center: tuple | None
    radius_sq: Fraction | None

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass
class ClusterDecomposition:
    shell: LatticeShell
    threshold: float
    clusters: list[Cluster]
    min_intercluster_distance: float

    @property
    def labels(self) -> np.ndarray:
        lab = np.empty(self.shell.size, dtype=np.int64)
        for i, c in enumerate(self.clusters):
            lab[c.indices] = i
        return lab

    @property
    def max_cluster_size(self) -> int:
        return max(c.size for c in self.clusters)


def connes_exponent(d: int) -> float:
    return 2.0 / math.factorial(d + 1)


def cluster_decompose(
    shell: LatticeShell,
    c: float = 1.0,
    exponent: float | None = None,
    geometry: bool = True,
) -> ClusterDecomposition:
    """Split a shell into connected components at distance ``c * lambda**exponent``.

    The default exponent is ``2/(d+1)!``.  Two points are joined when their
    distance is at most the threshold.  ``geometry=False`` skips the exact
    affine dimension and circumsphere of every cluster.
    """
    if shell.size == 0:
        raise ValueError("cluster_decompose needs a nonempty shell")
    if exponent is None:
        exponent = connes_exponent(shell.d)
    threshold = c * shell.lam**exponent
    thr2 = threshold * threshold
    pts = shell.points
    n = len(pts)
    rows, cols = [], []
    min_cross = math.inf
    for s, d2 in _pair_sqdist_blocks(pts):
        i, j = np.nonzero(d2 <= thr2)
        keep = i + s < j
        rows.append(i[keep] + s)
        cols.append(j[keep])
    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, raw = connected_components(graph, directed=False)
    # canonical labels: clusters ordered by their smallest point index
    first = {}
    for idx, lab in enumerate(raw):
        first.setdefault(lab, len(first))
    labels = np.array([first[lab] for lab in raw], dtype=np.int64)

    for s, d2 in _pair_sqdist_blocks(pts):
        cross = labels[s : s + d2.shape[0], None] != labels[None, :]
        if np.any(cross):
            min_cross = min(min_cross, math.sqrt(float(np.min(d2[cross]))))

    clusters = []
    if len(first) == n:
        for idx in range(n):
            p = pts[idx]
            center = tuple(Fraction(int(x)) for x in p) if geometry else None
            clusters.append(Cluster(np.array([idx]), 0.0, 0 if geometry else -1, center,
                                    Fraction(0) if geometry else None))
        return ClusterDecomposition(shell, threshold, clusters, min_cross)
    for lab in range(len(first)):
        idx = np.flatnonzero(labels == lab)
        sub = pts[idx]
        diff = sub[:, None, :] - sub[None, :, :]
        diam = math.sqrt(float(np.max(np.einsum("ijk,ijk->ij", diff, diff))))
        if geometry:
            adim = affine_dimension(sub)
            if len(sub) == 1:
                center, rsq = tuple(Fraction(int(x)) for x in sub[0]), Fraction(0)
            else:
                center, rsq = circumsphere(sub)
        else:
            adim, center, rsq = -1, None, None
        clusters.append(Cluster(idx, diam, adim, center, rsq))
    return ClusterDecomposition(shell, threshold, clusters, min_cross)


def jarnik_audit(n_max: int, c: float = 0.1) -> dict:
    """Cluster every nonempty planar shell with ``n <= n_max`` at ``c * lambda**(1/3)``.

    Passes when no cluster has more than two points.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    max_size = 0
    max_ratio = 0.0
    offending = []
    audited = 0
    for shell in iter_shells(2, n_max, n_min=1):
        audited += 1
        dec = cluster_decompose(shell, c, exponent=1.0 / 3.0, geometry=False)
        size = dec.max_cluster_size
        ratio = max(cl.diameter for cl in dec.clusters) / shell.lam ** (1.0 / 3.0)
        max_size = max(max_size, size)
        max_ratio = max(max_ratio, ratio)
        if size > 2:
            offending.append(shell.n)
    return {
        "n_max": n_max,
        "c": c,
        "shells_audited": audited,
        "max_cluster_size": max_size,
        "max_diameter_ratio": max_ratio,
        "offending_n": offending,
        "passed": not offending,
    }
