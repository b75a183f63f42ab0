"""Curve patches ``t -> origin + (t, phi(t))`` in ``T^d``.

Only graphs over one coordinate are supported (``beta = 1``).  A patch is
read from JSON of the form::

    {"beta": 1, "kind": "line", "slope": [0.3, 0.1], "offset": [0, 0]}
    {"beta": 1, "kind": "circle_arc", "radius": 0.5, "normal": [1, 0]}
    {"beta": 1, "kind": "poly", "coefficients": [[0, 0.2, 1.0], [0, 0, 0]]}

``offset``/``slope``/``normal``/``coefficients`` have one entry per graph
coordinate (``d - 1`` of them).  An optional ``origin`` (length ``d``) shifts
the whole curve.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

KINDS = ("line", "circle_arc", "poly")


@dataclass(frozen=True)
class Patch:
    d: int
    kind: str
    params: dict = field(default_factory=dict)
    origin: tuple = ()

    def __post_init__(self):
        if self.d < 3:
            raise ValueError("patches need d >= 3 (beta = 1 <= d - 2)")
        if self.kind not in KINDS:
            raise ValueError(f"unknown patch kind {self.kind!r}; expected one of {KINDS}")
        if not self.origin:
            object.__setattr__(self, "origin", (0.0,) * self.d)
        if len(self.origin) != self.d:
            raise ValueError("origin must have length d")
        m = self.d - 1
        for key in ("slope", "offset", "normal"):
            if key in self.params and len(self.params[key]) != m:
                raise ValueError(f"{key} must have {m} entries")
        if self.kind == "poly":
            coeffs = self.params.get("coefficients")
            if coeffs is None or len(coeffs) != m:
                raise ValueError(f"poly patch needs {m} coefficient lists")
        if self.kind == "circle_arc" and not self.params.get("radius", 0) > 0:
            raise ValueError("circle_arc needs a positive radius")

    @property
    def beta(self) -> int:
        return 1

    @property
    def half_width(self) -> float:
        """Largest ``|t|`` on which the parametrization is defined."""
        if self.kind == "circle_arc":
            return float(self.params["radius"])
        return np.inf

    def _vec(self, key):
        return np.asarray(self.params.get(key, [0.0] * (self.d - 1)), dtype=float)

    def phi(self, t):
        t = np.asarray(t, dtype=float)
        off = self._vec("offset")[:, None]
        if self.kind == "line":
            return off + self._vec("slope")[:, None] * t[None, :]
        if self.kind == "circle_arc":
            r = float(self.params["radius"])
            sag = r - np.sqrt(r * r - t * t)
            return off + self._vec("normal")[:, None] * sag[None, :]
        out = np.zeros((self.d - 1, len(t)))
        for j, cs in enumerate(self.params["coefficients"]):
            out[j] = np.polynomial.polynomial.polyval(t, cs)
        return off + out

    def dphi(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "line":
            return np.repeat(self._vec("slope")[:, None], len(t), axis=1)
        if self.kind == "circle_arc":
            r = float(self.params["radius"])
            return self._vec("normal")[:, None] * (t / np.sqrt(r * r - t * t))[None, :]
        out = np.zeros((self.d - 1, len(t)))
        for j, cs in enumerate(self.params["coefficients"]):
            out[j] = np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyder(cs))
        return out

    def gamma(self, t):
        """Points of the curve, shape ``(d, len(t))``."""
        t = np.asarray(t, dtype=float)
        return np.asarray(self.origin, dtype=float)[:, None] + np.vstack([t[None, :], self.phi(t)])

    def speed(self, t):
        """Arclength density ``sqrt(1 + |phi'(t)|^2)``."""
        g = self.dphi(t)
        return np.sqrt(1.0 + np.sum(g * g, axis=0))

    def max_speed(self, half: float) -> float:
        t = np.linspace(-half, half, 257)
        return float(np.max(self.speed(t)))

    @property
    def center(self) -> np.ndarray:
        return self.gamma(np.array([0.0]))[:, 0]

    def to_json(self) -> dict:
        out = {"beta": 1, "kind": self.kind, **self.params}
        if any(self.origin):
            out["origin"] = list(self.origin)
        return out

    @classmethod
    def from_json(cls, obj, d: int | None = None) -> "Patch":
        if isinstance(obj, str):
            obj = json.loads(obj)
        obj = dict(obj)
        beta = obj.pop("beta", 1)
        if beta != 1:
            raise ValueError("only beta = 1 patches are supported")
        kind = obj.pop("kind")
        origin = tuple(float(x) for x in obj.pop("origin", ()))
        obj.pop("d", None)
        if d is None:
            d = _infer_d(kind, obj, origin)
        return cls(int(d), kind, obj, origin)


def _infer_d(kind, params, origin):
    if origin:
        return len(origin)
    for key in ("slope", "offset", "normal"):
        if key in params:
            return len(params[key]) + 1
    if kind == "poly":
        return len(params["coefficients"]) + 1
    raise ValueError("cannot infer the dimension of the patch; give 'origin' or 'd'")
