"""Slope currents on the torus: finitely many weighted directions (p, q)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

_PARALLEL_TOL = 1e-12


@dataclass(frozen=True)
class SlopeCurrent:
    """A weighted multicurve  sum_i w_i (p_i, q_i)  with unoriented directions.

    Atoms along the same direction are merged into the first one seen; the
    merged weight is rescaled by the ratio of vector norms so every
    homogeneous functional (length, intersection) is unchanged.
    """

    atoms: tuple

    def __post_init__(self):
        merged: list[list[float]] = []
        for atom in self.atoms:
            if len(atom) != 3:
                raise ValueError(f"atom must be (p, q, w), got {atom!r}")
            p, q, w = (float(a) for a in atom)
            if not all(math.isfinite(a) for a in (p, q, w)):
                raise ValueError("slope atoms must be finite")
            if p == 0.0 and q == 0.0:
                raise ValueError("slope (0, 0) is not a direction")
            if not w > 0:
                raise ValueError(f"weights must be strictly positive, got {w}")
            r = math.hypot(p, q)
            for m in merged:
                rm = math.hypot(m[0], m[1])
                if abs(p * m[1] - q * m[0]) <= _PARALLEL_TOL * r * rm:
                    m[2] += w * r / rm
                    break
            else:
                merged.append([p, q, w])
        if not merged:
            raise ValueError("a slope current needs at least one atom")
        object.__setattr__(self, "atoms", tuple(tuple(m) for m in merged))

    @classmethod
    def single(cls, p: float, q: float, w: float = 1.0) -> "SlopeCurrent":
        return cls(((p, q, w),))

    @classmethod
    def direction(cls, theta: float, w: float = 1.0) -> "SlopeCurrent":
        return cls(((math.cos(theta), math.sin(theta), w),))

    @classmethod
    def from_any(cls, obj) -> "SlopeCurrent":
        if isinstance(obj, SlopeCurrent):
            return obj
        if isinstance(obj, str):
            obj = json.loads(obj)
        obj = list(obj)
        if obj and not isinstance(obj[0], (list, tuple, np.ndarray)):
            # a bare (p, q) or (p, q, w)
            obj = [tuple(obj) + ((1.0,) if len(obj) == 2 else ())]
        return cls(tuple(tuple(a) for a in obj))

    @cached_property
    def p(self) -> np.ndarray:
        return np.array([a[0] for a in self.atoms])

    @cached_property
    def q(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms])

    @cached_property
    def w(self) -> np.ndarray:
        return np.array([a[2] for a in self.atoms])

    def scaled(self, k: float) -> "SlopeCurrent":
        return SlopeCurrent(tuple((p, q, w * k) for p, q, w in self.atoms))

    def transformed(self, m) -> "SlopeCurrent":
        """Apply the linear map m (2x2) to every direction vector."""
        (a, b), (c, d) = m
        return SlopeCurrent(tuple((a * p + b * q, c * p + d * q, w) for p, q, w in self.atoms))

    def to_json(self) -> list:
        return [list(a) for a in self.atoms]

    def close_to(self, other: "SlopeCurrent", tol: float = 1e-12) -> bool:
        if len(self.atoms) != len(other.atoms):
            return False
        for (p, q, w), (p2, q2, w2) in zip(self.atoms, other.atoms):
            # compare the vectors w*(p,q) up to sign
            u = np.array([p * w, q * w])
            v = np.array([p2 * w2, q2 * w2])
            if not (np.allclose(u, v, atol=tol, rtol=0) or np.allclose(u, -v, atol=tol, rtol=0)):
                return False
        return True

    def __len__(self):
        return len(self.atoms)
