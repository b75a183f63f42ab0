"""Probability measures on the torus ``T^d`` and their Fourier coefficients.

Convention: ``mu_hat(k) = int exp(-2 pi i k.x) dmu(x)`` for ``k`` in ``Z^d``.

Every variant is an immutable object exposing a batched
``coeffs(ks)`` for an ``(m, d)`` integer array; :func:`fourier_coeff`,
:func:`ball_mass`, :func:`sup_offzero` and :func:`decay_fit` are the public
entry points.  Measures are read from JSON objects of the form
``{"type": <variant>, ...}``, see :func:`from_json`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from . import arith
from .errors import QuadratureError, ResourceError, UnsupportedError
from .patches import Patch
from .quadrature import DEFAULT_RTOL, nyquist_points, periodic_trapezoid, romberg
from .sobolev import IntervalUnion

TWO_PI = 2.0 * math.pi
_COEFF_CHUNK = 256


def torus_delta(x, y):
    """Componentwise signed difference ``x - y`` reduced to ``[-1/2, 1/2)``."""
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return diff - np.floor(diff + 0.5)


def torus_distance(x, y):
    delta = torus_delta(x, y)
    return np.sqrt(np.sum(delta * delta, axis=-1))


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _as_ks(ks, d):
    ks = np.asarray(ks, dtype=np.int64)
    if ks.ndim == 1:
        ks = ks[None, :]
    if ks.shape[1] != d:
        raise ValueError(f"frequency of dimension {ks.shape[1]} given to a measure on T^{d}")
    return ks


def _check_radius(r):
    if not 0 < r <= 0.5:
        raise ValueError("ball radius must lie in (0, 1/2]")


class Measure:
    """Common interface of all measure variants."""

    type = "abstract"
    d: int

    def coeffs(self, ks) -> np.ndarray:
        raise NotImplementedError

    def ball_mass(self, x0, r) -> float:
        raise UnsupportedError(f"ball_mass is not available for {self.type} measures")

    def radial_modulus(self, rho) -> np.ndarray | None:
        """``|mu_hat|`` as a function of ``|k|`` when it depends on ``|k|`` only."""
        return None

    #: cycles per unit of ``|k|`` in ``radial_modulus``; guides block sampling.
    oscillation = 0.0

    def params(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"type": self.type, **self.params()}

    def describe(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class Lebesgue(Measure):
    d: int
    type = "lebesgue"

    def coeffs(self, ks):
        ks = _as_ks(ks, self.d)
        return np.all(ks == 0, axis=1).astype(complex)

    def ball_mass(self, x0, r):
        _check_radius(r)
        return unit_ball_volume(self.d) * r**self.d

    def radial_modulus(self, rho):
        rho = np.asarray(rho, dtype=float)
        return (rho == 0).astype(float)

    def params(self):
        return {"d": self.d}


@dataclass(frozen=True)
class Atomic(Measure):
    """Finite convex combination of Dirac masses."""

    d: int
    weights: tuple
    points: tuple
    type = "atomic"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        p = np.asarray(self.points, dtype=float).reshape(len(w), self.d)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("atomic weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", tuple(w.tolist()))
        object.__setattr__(self, "points", tuple(map(tuple, p.tolist())))

    def coeffs(self, ks):
        ks = _as_ks(ks, self.d)
        p = np.asarray(self.points)
        w = np.asarray(self.weights)
        phase = np.exp(-2j * np.pi * (ks @ p.T))
        return phase @ w

    def ball_mass(self, x0, r):
        _check_radius(r)
        dist = torus_distance(np.asarray(self.points), np.asarray(x0, dtype=float))
        return float(np.sum(np.asarray(self.weights)[dist < r]))

    def params(self):
        return {"d": self.d, "weights": list(self.weights), "points": [list(p) for p in self.points]}


class Dirac(Atomic):
    type = "dirac"

    def __init__(self, d, x0):
        super().__init__(d, (1.0,), (tuple(np.asarray(x0, dtype=float).tolist()),))

    @property
    def x0(self):
        return self.points[0]

    def radial_modulus(self, rho):
        return np.ones_like(np.asarray(rho, dtype=float))

    def params(self):
        return {"d": self.d, "x0": list(self.x0)}


@dataclass(frozen=True)
class FourierTable(Measure):
    """Measure given by finitely many Fourier coefficients (zero elsewhere).

    Missing conjugate partners ``-k`` are filled in; ``mu_hat(0)`` must be 1.
    """

    d: int
    table: dict = field(hash=False)
    type = "fourier_table"

    def __post_init__(self):
        tab = {}
        for k, v in self.table.items():
            k = tuple(int(x) for x in k)
            if len(k) != self.d:
                raise ValueError("table key of wrong dimension")
            tab[k] = complex(v)
        for k, v in list(tab.items()):
            neg = tuple(-x for x in k)
            if neg not in tab:
                tab[neg] = v.conjugate()
            elif abs(tab[neg] - v.conjugate()) > 1e-10:
                raise ValueError(f"table violates conjugate symmetry at {k}")
        zero = (0,) * self.d
        if abs(tab.get(zero, 0) - 1) > 1e-10:
            raise ValueError("fourier_table needs mu_hat(0) = 1")
        object.__setattr__(self, "table", tab)

    def coeffs(self, ks):
        ks = _as_ks(ks, self.d)
        return np.array([self.table.get(tuple(int(x) for x in k), 0.0) for k in ks], dtype=complex)

    def l2_norm(self) -> float:
        """``||f||_{L^2}`` of the density, from Parseval."""
        return math.sqrt(math.fsum(abs(v) ** 2 for v in self.table.values()))

    def density(self, x):
        """Evaluate the density at points ``x`` of shape ``(..., d)``."""
        x = np.asarray(x, dtype=float)
        ks = np.array(list(self.table.keys()), dtype=float)
        vals = np.array(list(self.table.values()))
        return np.real(np.exp(2j * np.pi * (x @ ks.T)) @ vals)

    def params(self):
        items = sorted(self.table.items())
        return {"d": self.d, "table": [[list(k), v.real, v.imag] for k, v in items]}


def squared_polynomial_density(coeffs: dict) -> FourierTable:
    """Density ``|p|^2 / ||p||^2`` for a trigonometric polynomial ``p``.

    ``coeffs`` maps frequency tuples to complex coefficients of ``p``.  The
    result is a nonnegative density whose Fourier table is the normalized
    autocorrelation of the coefficients.
    """
    keys = list(coeffs)
    d = len(keys[0])
    norm2 = sum(abs(v) ** 2 for v in coeffs.values())
    tab: dict = {}
    for a in keys:
        for b in keys:
            xi = tuple(x - y for x, y in zip(a, b))
            tab[xi] = tab.get(xi, 0) + coeffs[a] * np.conj(coeffs[b]) / norm2
    return FourierTable(d, tab)


@lru_cache(maxsize=1 << 16)
def _j0_cached(z: float) -> float:
    return float(bessel_j0_batch(np.array([z]))[0])


def bessel_j0_batch(z) -> np.ndarray:
    """``J_0(z) = (1/pi) int_0^pi cos(z sin t) dt`` via the doubling trapezoid.

    The integrand is smooth and ``pi``-periodic, so the trapezoid rule
    converges spectrally once the nodes resolve the phase.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    order = np.argsort(z)
    for s in range(0, len(z), _COEFF_CHUNK):
        idx = order[s : s + _COEFF_CHUNK]
        zz = z[idx]
        n0 = nyquist_points(math.pi, float(np.max(zz)) / TWO_PI, minimum=32)
        res = periodic_trapezoid(
            lambda t: np.cos(zz[:, None] * np.sin(t)[None, :]) / math.pi,
            0.0,
            math.pi,
            n0=n0,
            scale=1.0,
            where="J0",
        )
        out[idx] = res.value
    return out


@dataclass(frozen=True)
class Circle(Measure):
    """Uniform arclength measure on a circle of radius ``R`` in ``T^2``."""

    x0: tuple
    R: float
    type = "circle"
    d = 2

    def __post_init__(self):
        if not 0 < self.R < 0.5:
            raise ValueError("circle radius must lie in (0, 1/2)")
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        if len(self.x0) != 2:
            raise ValueError("circle center must be a point of T^2")

    @property
    def oscillation(self):
        return self.R

    def radial_modulus(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.abs(bessel_j0_batch(TWO_PI * self.R * rho))

    def coeffs(self, ks):
        ks = _as_ks(ks, 2)
        norms2 = np.einsum("ij,ij->i", ks, ks)
        uniq, inv = np.unique(norms2, return_inverse=True)
        j0 = bessel_j0_batch(TWO_PI * self.R * np.sqrt(uniq.astype(float)))
        phase = np.exp(-2j * np.pi * (ks @ np.asarray(self.x0)))
        return phase * j0[inv]

    def integrate(self, f, kmax: float = 0.0, rtol: float = DEFAULT_RTOL, where=None):
        """``int f dmu`` for a vectorized ``f`` of points ``(2, n)``, over one turn."""
        c = np.asarray(self.x0)[:, None]

        def g(s):
            ang = TWO_PI * s
            return f(c + self.R * np.vstack([np.cos(ang), np.sin(ang)]))

        n0 = nyquist_points(1.0, kmax * TWO_PI * self.R, minimum=32)
        return periodic_trapezoid(g, 0.0, 1.0, n0=n0, rtol=rtol, scale=1.0, where=where)

    def ball_mass(self, x0, r):
        _check_radius(r)
        return _sphere_cap_fraction(np.asarray(self.x0), self.R, np.asarray(x0, dtype=float), r, dim=2)

    def params(self):
        return {"x0": list(self.x0), "R": self.R}


@dataclass(frozen=True)
class Sphere(Measure):
    """Uniform surface measure on a sphere of radius ``R`` in ``T^3``."""

    x0: tuple
    R: float
    type = "sphere"
    d = 3

    def __post_init__(self):
        if not 0 < self.R < 0.5:
            raise ValueError("sphere radius must lie in (0, 1/2)")
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        if len(self.x0) != 3:
            raise ValueError("sphere center must be a point of T^3")

    @property
    def oscillation(self):
        return self.R

    def radial_modulus(self, rho):
        z = TWO_PI * self.R * np.asarray(rho, dtype=float)
        return np.abs(np.sinc(z / math.pi))

    def coeffs(self, ks):
        ks = _as_ks(ks, 3)
        z = TWO_PI * self.R * np.sqrt(np.einsum("ij,ij->i", ks, ks).astype(float))
        phase = np.exp(-2j * np.pi * (ks @ np.asarray(self.x0)))
        return phase * np.sinc(z / math.pi)

    def ball_mass(self, x0, r):
        _check_radius(r)
        return _sphere_cap_fraction(np.asarray(self.x0), self.R, np.asarray(x0, dtype=float), r, dim=3)

    def params(self):
        return {"x0": list(self.x0), "R": self.R}


def _sphere_cap_fraction(center, R, y, r, dim):
    """Fraction of a circle/sphere lying in the ball ``B_r(y)`` of the torus."""
    total = 0.0
    base = center + torus_delta(y, center)
    for shift in np.ndindex(*([3] * dim)):
        yy = base + np.array(shift) - 1
        D = float(np.linalg.norm(yy - center))
        if D > R + r:
            continue
        if D == 0:
            total += 1.0 if R < r else 0.0
            continue
        c = (R * R + D * D - r * r) / (2 * R * D)
        c = min(1.0, max(-1.0, c))
        if dim == 2:
            total += math.acos(c) / math.pi
        else:
            total += (1.0 - c) / 2.0
    return total


@dataclass(frozen=True)
class HyperplaneCylinder(Measure):
    """Dirac at 0 in the coordinates ``J``, Lebesgue in the others.

    ``J`` holds 1-based coordinate indices, as in the JSON schema.
    """

    d: int
    J: tuple
    type = "hyperplane_cylinder"

    def __post_init__(self):
        J = tuple(sorted(int(j) for j in self.J))
        if not J or J[0] < 1 or J[-1] > self.d or len(set(J)) != len(J):
            raise ValueError("J must be a nonempty set of indices in 1..d")
        object.__setattr__(self, "J", J)

    @property
    def free(self):
        return [i for i in range(self.d) if i + 1 not in self.J]

    def coeffs(self, ks):
        ks = _as_ks(ks, self.d)
        if not self.free:
            return np.ones(len(ks), dtype=complex)
        return np.all(ks[:, self.free] == 0, axis=1).astype(complex)

    def ball_mass(self, x0, r):
        _check_radius(r)
        x0 = np.asarray(x0, dtype=float)
        J0 = [j - 1 for j in self.J]
        s2 = float(np.sum(torus_delta(x0[J0], 0.0) ** 2))
        if s2 >= r * r:
            return 0.0
        m = len(self.free)
        if m == 0:
            return 1.0
        return unit_ball_volume(m) * (r * r - s2) ** (m / 2)

    def params(self):
        return {"d": self.d, "J": list(self.J)}


@dataclass(frozen=True)
class PeriodizedPower(Measure):
    """Normalized periodization of ``phi(x) = exp(-|x|^2) / |x|^(2+eps)`` on ``T^3``.

    The Fourier coefficients are the Euclidean transform of ``phi`` at
    integer points, computed by a radial integral split at ``r = 1``.  The
    inner piece uses ``r = s^(1/(1-eps))``, which absorbs the ``r^(-eps)``
    singularity exactly.
    """

    d: int
    eps: float
    type = "periodized_power"
    R_MAX = 7.0
    LATTICE_TRUNCATION = 6

    def __post_init__(self):
        if self.d != 3:
            raise ValueError("periodized_power is implemented for d = 3")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1) for an integrable singularity in d = 3")

    @property
    def normalization(self) -> float:
        """``Phi(0)``, the total mass of ``phi``; the density carries ``1/Phi(0)``."""
        return _power_transform(self.eps, 0.0)

    def _phi_hat(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.array([_power_transform(self.eps, float(x)) for x in rho])

    def radial_modulus(self, rho):
        return np.abs(self._phi_hat(rho)) / self.normalization

    def coeffs(self, ks):
        ks = _as_ks(ks, 3)
        norms2 = np.einsum("ij,ij->i", ks, ks)
        uniq, inv = np.unique(norms2, return_inverse=True)
        vals = self._phi_hat(np.sqrt(uniq.astype(float))) / self.normalization
        return vals[inv].astype(complex)

    def density(self, x):
        """Normalized density, lattice sum truncated at ``|q|_inf <= 6``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        q = np.arange(-self.LATTICE_TRUNCATION, self.LATTICE_TRUNCATION + 1)
        shifts = np.stack(np.meshgrid(q, q, q, indexing="ij"), axis=-1).reshape(-1, 3)
        out = np.zeros(len(x))
        for s in shifts:
            r2 = np.sum((x + s) ** 2, axis=1)
            out += np.exp(-r2) / r2 ** ((2 + self.eps) / 2)
        return out / self.normalization

    def params(self):
        return {"d": self.d, "eps": self.eps}


@lru_cache(maxsize=1 << 16)
def _power_transform(eps: float, rho: float) -> float:
    """Fourier transform in ``R^3`` of ``exp(-r^2) r^(-2-eps)`` at radius ``rho``."""
    p = 1.0 / (1.0 - eps)
    if rho == 0.0:
        def inner(s):
            r = s**p
            return p * np.exp(-r * r)

        def outer(r):
            return np.exp(-r * r) * r ** (-eps)

        factor = 4.0 * math.pi
        freq = 0.0
    else:
        w = TWO_PI * rho

        def inner(s):
            r = s**p
            safe = np.where(r > 0, r, 1.0)
            g = np.where(r > 0, np.sin(w * safe) / safe, w)
            return p * np.exp(-r * r) * g

        def outer(r):
            return np.exp(-r * r) * r ** (-1.0 - eps) * np.sin(w * r)

        factor = 2.0 / rho
        freq = rho
    scale = 1e-6
    a = romberg(inner, 0.0, 1.0, n0=nyquist_points(1.0, freq, 32), scale=scale, where=("inner", rho))
    b = romberg(outer, 1.0, PeriodizedPower.R_MAX, n0=nyquist_points(PeriodizedPower.R_MAX - 1, freq, 64),
                scale=scale, where=("outer", rho))
    return factor * float(a.value + b.value)


@dataclass(frozen=True)
class IntervalIndicator(Measure):
    """Density ``1_E / |E|`` on ``T^1``, or a product of such densities."""

    sets: tuple
    type = "interval_indicator"

    def __post_init__(self):
        sets = tuple(self.sets)
        for E in sets:
            if E.length != 1:
                raise ValueError("interval_indicator sets must live in the ambient (0, 1)")
            if E.measure <= 0:
                raise ValueError("interval_indicator sets must have positive length")
        object.__setattr__(self, "sets", sets)

    @property
    def d(self):
        return len(self.sets)

    def coeffs(self, ks):
        ks = _as_ks(ks, self.d)
        out = np.ones(len(ks), dtype=complex)
        for j, E in enumerate(self.sets):
            a, b = E.as_arrays()
            k = ks[:, j].astype(float)
            mass = float(E.measure)
            safe = np.where(k != 0, k, 1.0)
            terms = (np.exp(-2j * np.pi * np.outer(safe, a)) - np.exp(-2j * np.pi * np.outer(safe, b))).sum(axis=1)
            factor = np.where(k != 0, terms / (2j * np.pi * safe * mass), 1.0)
            out *= factor
        return out

    def ball_mass(self, x0, r):
        _check_radius(r)
        if self.d != 1:
            raise UnsupportedError("interval_indicator ball_mass is implemented for d = 1 only")
        E = self.sets[0]
        y = float(np.asarray(x0, dtype=float).ravel()[0]) % 1.0
        lo, hi = y - r, y + r
        total = 0.0
        for a, b in E.intervals:
            for shift in (-1.0, 0.0, 1.0):
                total += max(0.0, min(float(b) + shift, hi) - max(float(a) + shift, lo))
        return total / float(E.measure)

    def params(self):
        if self.d == 1:
            return {"d": 1, **self.sets[0].to_json()}
        return {"d": self.d, "sets": [E.to_json() for E in self.sets]}


@dataclass(frozen=True)
class SurfacePatch(Measure):
    """Normalized arclength on the piece of a curve patch near its center.

    ``weight="ball"`` (default) restricts to ``B_eps(center)``, the measure
    ``1_{B_eps(x0) cap S} dH^1 / H^1(B_eps(x0) cap S)``.  ``weight="bump"``
    uses the smooth weight ``chi(t/eps)`` in the graph parameter instead.
    The normalizing mass is computed by quadrature and kept in ``mass``.
    """

    patch: Patch
    eps: float
    weight: str = "ball"
    type = "surface_patch"

    def __post_init__(self):
        if self.weight not in ("ball", "bump"):
            raise ValueError("weight must be 'ball' or 'bump'")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.weight == "bump" and 2 * self.eps >= self.patch.half_width:
            raise ValueError("bump support exceeds the patch parametrization")
        lo, hi = self._domain()
        object.__setattr__(self, "t_range", (lo, hi))
        res = romberg(lambda t: self._density(t), lo, hi, n0=64, where="patch mass")
        object.__setattr__(self, "mass", float(res.value))

    @property
    def d(self):
        return self.patch.d

    def _domain(self):
        if self.weight == "bump":
            return -2.0 * self.eps, 2.0 * self.eps
        c = self.patch.center
        limit = min(self.patch.half_width, 4.0 * self.eps) * (1 - 1e-12)

        def excess(t):
            p = self.patch.gamma(np.array([t]))[:, 0]
            return float(np.sum((p - c) ** 2)) - self.eps**2

        ends = []
        for sign in (-1.0, 1.0):
            if excess(sign * limit) <= 0:
                raise ValueError("patch does not leave B_eps(center) within its parametrization")
            ends.append(brentq(lambda s: excess(sign * s), 0.0, limit, xtol=1e-15, rtol=1e-15))
        return -ends[0], ends[1]

    def _density(self, t):
        w = self.patch.speed(t)
        if self.weight == "bump":
            w = w * bump(t / self.eps)
        return w

    def _max_rate(self, kmax):
        lo, hi = self.t_range
        return kmax * self.patch.max_speed(max(abs(lo), abs(hi)))

    def integrate(self, f, kmax: float = 0.0, rtol: float = DEFAULT_RTOL, where=None):
        """``int f(gamma(t)) dmu`` for a vectorized ``f`` of points ``(d, n)``.

        ``kmax`` is the largest frequency (cycles per unit length) present in
        ``f`` and sets the initial Nyquist sampling.
        """
        lo, hi = self.t_range
        n0 = nyquist_points(hi - lo, self._max_rate(kmax), minimum=64)
        g = lambda t: f(self.patch.gamma(t)) * self._density(t) / self.mass
        rule = periodic_trapezoid if self.weight == "bump" else romberg
        return rule(g, lo, hi, n0=n0, rtol=rtol, scale=1.0, where=where)

    def coeffs(self, ks):
        ks = _as_ks(ks, self.d)
        out = np.empty(len(ks), dtype=complex)
        for s in range(0, len(ks), _COEFF_CHUNK):
            kk = ks[s : s + _COEFF_CHUNK].astype(float)
            kmax = float(np.max(np.linalg.norm(kk, axis=1))) if len(kk) else 0.0
            res = self.integrate(lambda x: np.exp(-2j * np.pi * (kk @ x)), kmax, where=("surface_patch", s))
            out[s : s + len(kk)] = res.value
        return out

    def ball_mass(self, x0, r):
        _check_radius(r)
        lo, hi = self.t_range
        y = np.asarray(x0, dtype=float)

        def excess(t):
            pts = self.patch.gamma(np.atleast_1d(t))
            return torus_distance(pts.T, y) - r

        grid = np.linspace(lo, hi, 4097)
        vals = excess(grid)
        cuts = [lo]
        for i in np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:])):
            cuts.append(brentq(lambda t: float(excess(t)[0]), grid[i], grid[i + 1], xtol=1e-15))
        cuts.append(hi)
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            mid = 0.5 * (a + b)
            if b > a and excess(mid)[0] < 0:
                total += float(romberg(self._density, a, b, n0=32).value)
        return total / self.mass

    def params(self):
        out = {"d": self.d, "patch": self.patch.to_json(), "eps": self.eps}
        if self.weight != "ball":
            out["weight"] = self.weight
        return out


def _f_exp(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / safe), 0.0)


def bump(x):
    """Smooth radial cutoff: 1 on ``|x| <= 1``, 0 on ``|x| >= 2``.

    ``psi(r) = f(2 - r) / (f(2 - r) + f(r - 1))`` with ``f(t) = exp(-1/t)``
    for ``t > 0`` and ``0`` otherwise.
    """
    r = np.abs(np.asarray(x, dtype=float))
    a = _f_exp(2.0 - r)
    b = _f_exp(r - 1.0)
    return a / (a + b)


@dataclass(frozen=True)
class Mixture(Measure):
    """Convex combination of measures on the same torus."""

    components: tuple
    weights: tuple
    type = "mixture"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.components) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise ValueError("mixture weights must be nonnegative, one per component, summing to 1")
        if len({c.d for c in self.components}) != 1:
            raise ValueError("mixture components must share the dimension")

    @property
    def d(self):
        return self.components[0].d

    def coeffs(self, ks):
        return sum(w * c.coeffs(ks) for w, c in zip(self.weights, self.components))

    def ball_mass(self, x0, r):
        return sum(w * c.ball_mass(x0, r) for w, c in zip(self.weights, self.components))

    def params(self):
        return {"components": [c.to_json() for c in self.components], "weights": list(self.weights)}


# --------------------------------------------------------------------- public API


def fourier_coeff(m: Measure, k) -> complex:
    """``mu_hat(k)`` for a single frequency ``k``."""
    k = np.asarray(k, dtype=np.int64)
    if k.ndim != 1 or len(k) != m.d:
        raise ValueError(f"frequency {k.tolist()} does not match dimension {m.d}")
    return complex(m.coeffs(k[None, :])[0])


def ball_mass(m: Measure, x0, r: float) -> float:
    """``mu(B_r(x0))`` for the geodesic ball of the torus (``r <= 1/2``)."""
    return float(m.ball_mass(x0, r))


def cube_frequencies(d: int, K: int, include_zero: bool = False) -> np.ndarray:
    """All ``k`` with ``|k|_inf <= K`` (optionally without ``0``)."""
    axis = np.arange(-K, K + 1)
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    if not include_zero:
        grid = grid[np.any(grid != 0, axis=1)]
    return grid


def sup_offzero(m: Measure, K: int) -> tuple[float, tuple]:
    """``max |mu_hat(k)|`` over ``0 < |k|_inf <= K`` and an arg-max ``k``."""
    if K < 1:
        raise ValueError("K must be >= 1")
    ks = cube_frequencies(m.d, K)
    vals = np.abs(m.coeffs(ks))
    i = int(np.argmax(vals))
    return float(vals[i]), tuple(int(x) for x in ks[i])


@dataclass
class DecayFit:
    exponent: float
    constant: float
    dyadic_sum: float
    blocks: list

    def as_dict(self):
        return {"exponent": self.exponent, "constant": self.constant, "dyadic_sum": self.dyadic_sum,
                "blocks": self.blocks}


@lru_cache(maxsize=8)
def _representable(d: int, m_max: int) -> np.ndarray:
    return np.flatnonzero(arith.count_table(d, m_max) > 0)


_BLOCK_ENUM_CAP = 2_000_000


def _block_max_radial(m, j, K):
    lo, hi = 2.0**j, min(2.0 ** (j + 1), float(K))
    reps = _representable(m.d, int(math.floor(hi * hi)))
    reps = reps[(reps >= lo * lo) & (reps < hi * hi)] if hi < K else reps[(reps >= lo * lo) & (reps <= hi * hi)]
    if len(reps) == 0:
        return 0.0
    samples = max(64, int(math.ceil(16 * m.oscillation * (hi - lo))))
    if len(reps) > samples:
        targets = np.linspace(lo * lo, reps[-1], samples)
        pick = np.unique(np.clip(np.searchsorted(reps, targets), 0, len(reps) - 1))
        reps = reps[pick]
    vals = m.radial_modulus(np.sqrt(reps.astype(float)))
    return float(np.max(vals))


def _block_max_enumerated(m, j, K):
    lo, hi = 2**j, min(2 ** (j + 1), K)
    count = (2 * hi + 1) ** m.d
    if count > _BLOCK_ENUM_CAP:
        raise ResourceError(f"decay_fit would enumerate {count} frequencies for a non-radial measure")
    ks = cube_frequencies(m.d, hi)
    n2 = np.einsum("ij,ij->i", ks, ks)
    sel = (n2 >= lo * lo) & ((n2 < hi * hi) if hi < K else (n2 <= hi * hi))
    ks = ks[sel]
    if len(ks) == 0:
        return 0.0
    return float(np.max(np.abs(m.coeffs(ks))))


def decay_fit(m: Measure, K: int) -> DecayFit:
    """Power-law fit of dyadic block maxima of ``|mu_hat|``.

    Block ``j`` holds frequencies with ``2^j <= |k| < 2^(j+1)``, for every
    ``j`` with ``2^(j+1) <= K``.  The exponent is the least-squares slope of
    ``log M_j`` against ``-j log 2``.  Also returns the dyadic sum
    ``sum_j 2^(j(d-2)) M_j``.

    For measures whose ``|mu_hat|`` depends on ``|k|`` only, each block is
    evaluated on achievable radii ``sqrt(n)``, subsampled to at least 64 and
    at least 16 per oscillation period.
    """
    if K < 8:
        raise ValueError("K must be >= 8")
    J = int(math.floor(math.log2(K)))
    radial = m.radial_modulus(np.array([1.0])) is not None
    blocks = []
    for j in range(J):
        M = _block_max_radial(m, j, K) if radial else _block_max_enumerated(m, j, K)
        blocks.append({"j": j, "lo": 2**j, "hi": 2 ** (j + 1), "max": M})
    maxima = np.array([b["max"] for b in blocks])
    dyadic = float(np.sum(2.0 ** (np.arange(J) * (m.d - 2)) * maxima))
    if np.all(maxima == 0):
        return DecayFit(math.inf, 0.0, dyadic, blocks)
    keep = maxima > 0
    x = -np.arange(J)[keep] * math.log(2.0)
    y = np.log(maxima[keep])
    if keep.sum() == 1:
        return DecayFit(0.0, float(math.exp(y[0])), dyadic, blocks)
    slope, intercept = np.polyfit(x, y, 1)
    return DecayFit(float(slope), float(math.exp(intercept)), dyadic, blocks)


# ------------------------------------------------------------------ JSON schema


def from_json(spec) -> Measure:
    """Build a measure from its JSON description (dict or string)."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("type")
    if kind == "lebesgue":
        return Lebesgue(int(spec["d"]))
    if kind == "dirac":
        x0 = spec["x0"]
        return Dirac(int(spec.get("d", len(x0))), x0)
    if kind == "atomic":
        if "atoms" in spec:
            weights = [a[0] for a in spec["atoms"]]
            points = [a[1] for a in spec["atoms"]]
        else:
            weights, points = spec["weights"], spec["points"]
        return Atomic(int(spec.get("d", len(points[0]))), tuple(weights), tuple(map(tuple, points)))
    if kind == "fourier_table":
        table = {tuple(row[0]): complex(row[1], row[2] if len(row) > 2 else 0.0) for row in spec["table"]}
        return FourierTable(int(spec["d"]), table)
    if kind == "circle":
        return Circle(tuple(spec.get("x0", (0.0, 0.0))), float(spec["R"]))
    if kind == "sphere":
        return Sphere(tuple(spec.get("x0", (0.0, 0.0, 0.0))), float(spec["R"]))
    if kind == "hyperplane_cylinder":
        return HyperplaneCylinder(int(spec["d"]), tuple(spec["J"]))
    if kind == "periodized_power":
        return PeriodizedPower(int(spec.get("d", 3)), float(spec["eps"]))
    if kind == "interval_indicator":
        if "sets" in spec:
            sets = tuple(IntervalUnion.from_json(s) for s in spec["sets"])
        else:
            sets = (IntervalUnion.from_json(spec),)
        return IntervalIndicator(sets)
    if kind == "surface_patch":
        patch = Patch.from_json(spec["patch"], d=spec.get("d"))
        return SurfacePatch(patch, float(spec["eps"]), spec.get("weight", "ball"))
    if kind == "mixture":
        comps = tuple(from_json(c) for c in spec["components"])
        return Mixture(comps, tuple(spec["weights"]))
    raise ValueError(f"unknown measure type {kind!r}")


def load_measure(path) -> tuple[Measure, str]:
    """Read a measure spec file; returns the measure and the raw text for echoing."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return from_json(json.loads(text)), text


def check_invariants(m: Measure, K: int = 8, tol: float = 1e-10) -> dict:
    """``mu_hat(0) = 1``, conjugate symmetry and ``|mu_hat| <= 1`` on ``|k|_inf <= K``."""
    ks = cube_frequencies(m.d, K, include_zero=True)
    vals = m.coeffs(ks)
    neg = m.coeffs(-ks)
    zero = vals[np.all(ks == 0, axis=1)][0]
    return {
        "mu0_error": float(abs(zero - 1)),
        "conjugate_error": float(np.max(np.abs(neg - np.conj(vals)))),
        "max_modulus": float(np.max(np.abs(vals))),
        "ok": bool(abs(zero - 1) <= tol and np.max(np.abs(neg - np.conj(vals))) <= tol
                   and np.max(np.abs(vals)) <= 1 + tol),
    }
