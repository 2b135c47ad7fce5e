"""Point domains for the two arguments of a bifunctional.

A domain validates points, tests them for equality, and (when the domain is
continuous) maps points to and from a flat coordinate vector so the
supremum search can perturb them.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np


class DomainError(ValueError):
    """A point does not belong to the domain it was passed to."""


class Domain:
    """Base class.  Subclasses override ``check`` and, if refinable, the chart."""

    kind = "abstract"
    refinable = False

    def check(self, point: Any) -> Any:
        raise NotImplementedError

    def same(self, a: Any, b: Any, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.to_coords(a), self.to_coords(b), rtol=0.0, atol=tol))

    def to_coords(self, point: Any) -> np.ndarray:
        raise NotImplementedError(f"{self.kind} domain has no coordinate chart")

    def from_coords(self, coords: np.ndarray) -> Any:
        raise NotImplementedError(f"{self.kind} domain has no coordinate chart")

    def project(self, coords: np.ndarray) -> np.ndarray:
        """Clamp chart coordinates back into the valid region."""
        return coords

    def initial_step(self) -> float:
        return 0.1

    def describe(self) -> str:
        return self.kind


class RealVectors(Domain):
    kind = "real-vector"
    refinable = True

    def __init__(self, dim: int, exclude_zero: bool = False):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.exclude_zero = exclude_zero

    def check(self, point):
        try:
            v = np.asarray(point, dtype=float).reshape(-1)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"not a real vector: {point!r}") from exc
        if v.shape != (self.dim,):
            raise DomainError(f"expected a vector of length {self.dim}, got {v.shape[0]}")
        if not np.all(np.isfinite(v)):
            raise DomainError("vector has non-finite entries")
        if self.exclude_zero and not np.any(v):
            raise DomainError("zero vector is not allowed here")
        return v

    def to_coords(self, point):
        return np.asarray(point, dtype=float).copy()

    def from_coords(self, coords):
        return np.asarray(coords, dtype=float).copy()

    def project(self, coords):
        if self.exclude_zero and not coords.any():
            coords = coords.copy()
            coords[0] = 1e-12
        return coords

    def describe(self):
        return f"R^{self.dim}" + (" minus 0" if self.exclude_zero else "")


class UpperHalfPlane(Domain):
    """Complex numbers with positive imaginary part.

    ``chart`` selects the coordinates used by the refinement search:
    ``"log"`` is (Re, log Im); ``"disk"`` is the Cayley image in the unit
    disk, which reaches the whole ideal boundary inside a bounded box.
    """

    kind = "complex-upper-half-plane"
    refinable = True

    def __init__(self, min_imag: float = 0.0, chart: str = "log"):
        if chart not in ("log", "disk"):
            raise ValueError(f"unknown chart {chart!r}")
        self.min_imag = min_imag
        self.chart = chart

    def check(self, point):
        if isinstance(point, (bool, np.bool_)):
            raise DomainError(f"not a complex number: {point!r}")
        try:
            z = complex(point)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"not a complex number: {point!r}") from exc
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError("complex point has non-finite parts")
        if not z.imag > 0 or z.imag < self.min_imag:
            raise DomainError(f"imaginary part must be > {self.min_imag or 0}, got {z.imag!r}")
        return z

    def same(self, a, b, tol=1e-12):
        return abs(complex(a) - complex(b)) <= tol

    def to_coords(self, point):
        z = complex(point)
        if self.chart == "log":
            return np.array([z.real, math.log(z.imag)])
        w = (z - 1j) / (z + 1j)
        return np.array([w.real, w.imag])

    def from_coords(self, coords):
        if self.chart == "log":
            return complex(coords[0], math.exp(coords[1]))
        w = complex(coords[0], coords[1])
        return 1j * (1 + w) / (1 - w)

    def project(self, coords):
        if self.chart == "log":
            lo = math.log(max(self.min_imag, 1e-300))
            return np.array([coords[0], max(coords[1], lo)])
        r = math.hypot(coords[0], coords[1])
        rmax = 1.0 - 1e-9
        if r > rmax:
            return coords * (rmax / r)
        return coords


class RealLine(Domain):
    """The real line, searched through t = tan(u) so both ends are reachable."""

    kind = "real-parameter"
    refinable = True
    _EDGE = math.pi / 2 - 1e-9

    def check(self, point):
        if isinstance(point, (bool, np.bool_, complex)):
            raise DomainError(f"not a real number: {point!r}")
        try:
            t = float(point)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"not a real number: {point!r}") from exc
        if not math.isfinite(t):
            raise DomainError("real parameter must be finite")
        return t

    def same(self, a, b, tol=1e-12):
        return abs(float(a) - float(b)) <= tol

    def to_coords(self, point):
        return np.array([math.atan(float(point))])

    def from_coords(self, coords):
        return math.tan(float(coords[0]))

    def project(self, coords):
        return np.clip(coords, -self._EDGE, self._EDGE)


class FacetIndices(Domain):
    """A finite set {0, ..., count-1}; the supremum over it is an exact max."""

    kind = "facet-index"
    refinable = False

    def __init__(self, count: int):
        self.count = count

    def check(self, point):
        if isinstance(point, (bool, np.bool_)) or not isinstance(point, (int, np.integer)):
            raise DomainError(f"facet index must be an integer, got {point!r}")
        if not 0 <= int(point) < self.count:
            raise DomainError(f"facet index {point} out of range [0, {self.count})")
        return int(point)

    def same(self, a, b, tol=1e-12):
        return int(a) == int(b)


class SlopeDirections(Domain):
    """Slope currents; the search chart covers single-atom, unit-weight slopes by angle."""

    kind = "slope-current"
    refinable = True

    def check(self, point):
        from horoforge.geometries.currents import SlopeCurrent

        if isinstance(point, SlopeCurrent):
            return point
        try:
            return SlopeCurrent.from_any(point)
        except (TypeError, ValueError) as exc:
            raise DomainError(str(exc)) from exc

    def same(self, a, b, tol=1e-12):
        return a.close_to(b, tol)

    def to_coords(self, point):
        p, q, _ = point.atoms[0]
        theta = math.atan2(q, p) % math.pi
        return np.array([theta])

    def from_coords(self, coords):
        from horoforge.geometries.currents import SlopeCurrent

        theta = float(coords[0])
        return SlopeCurrent.direction(theta)

    def initial_step(self):
        return math.pi / 64
