"""Horofunctions l_z = I(., z) - I(b, z), evaluated on a finite landmark set."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Optional, Sequence

import numpy as np

from horoforge.core import Bifunctional

SOURCES = ("witness", "boundary-limit", "group-translate")


class LandmarkMismatch(ValueError):
    pass


class NotReevaluatable(ValueError):
    """The horofunction carries landmark values only, no formula."""


class DivergenceError(RuntimeError):
    def __init__(self, oscillation: float, trajectory: list):
        super().__init__(f"horofunction sequence did not converge (oscillation {oscillation:.3g})")
        self.oscillation = oscillation
        self.trajectory = trajectory


@dataclass(frozen=True, eq=False)
class LandmarkSet:
    points: tuple
    base_index: int = 0

    @classmethod
    def build(cls, I: Bifunctional, points: Sequence, basepoint=None, tol: float = 1e-12) -> "LandmarkSet":
        pts = [I.M.check(p) for p in points]
        for i in range(len(pts)):
            for j in range(i):
                if I.M.same(pts[i], pts[j], tol):
                    raise ValueError(f"landmarks {j} and {i} coincide")
        if basepoint is None:
            return cls(tuple(pts), 0)
        b = I.M.check(basepoint)
        for i, p in enumerate(pts):
            if I.M.same(p, b, tol):
                return cls(tuple(pts), i)
        return cls((b,) + tuple(pts), 0)

    @property
    def basepoint(self):
        return self.points[self.base_index]

    def __len__(self):
        return len(self.points)

    def index(self, point, domain) -> int:
        for i, p in enumerate(self.points):
            if domain.same(p, point):
                return i
        raise LandmarkMismatch(f"{point!r} is not a landmark")


@dataclass(frozen=True, eq=False)
class Horofunction:
    """Landmark values of a basepoint-normalized function on M.

    ``raw`` is an un-normalized formula for the function (e.g. I(., z)),
    present when the horofunction can be re-evaluated off the landmarks.
    """

    values: np.ndarray
    landmarks: LandmarkSet
    source: str
    raw: Optional[Callable[[Any], float]] = field(default=None, repr=False)
    label: Any = None
    raw_values: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        for name in ("values", "raw_values"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.array(arr, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def difference(self, i: int, j: int) -> float:
        """h(p_i) - h(p_j), taken from un-normalized values when available."""
        src = self.values if self.raw_values is None else self.raw_values
        return float(src[i] - src[j])

    def at(self, point) -> float:
        if self.raw is None:
            raise NotReevaluatable(f"horofunction from {self.source!r} has no formula")
        return float(self.raw(point) - self.raw(self.landmarks.basepoint))

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])


def _normalized(raw, L: LandmarkSet):
    rv = np.array([raw(p) for p in L.points], dtype=float)
    vals = rv - rv[L.base_index]
    vals[L.base_index] = 0.0
    return vals, rv


def horofunction(I: Bifunctional, z, L: LandmarkSet) -> Horofunction:
    z = I.N.check(z)
    raw = lambda p, _z=z: I.eval(p, _z)
    vals, rv = _normalized(raw, L)
    return Horofunction(vals, L, "witness", raw, label=z, raw_values=rv)


def horofunction_from(raw: Callable[[Any], float], L: LandmarkSet, source: str = "boundary-limit", label=None) -> Horofunction:
    """Wrap an arbitrary function on M (e.g. an analytic boundary limit)."""
    vals, rv = _normalized(raw, L)
    return Horofunction(vals, L, source, raw, label, rv)


def horo_sup_distance(h1: Horofunction, h2: Horofunction) -> float:
    if h1.landmarks is not h2.landmarks:
        raise LandmarkMismatch("horofunctions live on different landmark sets")
    return float(np.max(np.abs(h1.values - h2.values)))


@dataclass(frozen=True)
class EmbeddingReport:
    horofunctions: list
    collisions: list  # (i, j, sup distance) with distance < tol

    @property
    def injective(self) -> bool:
        return not self.collisions


def embed_sample(I: Bifunctional, sample_N: Sequence, L: LandmarkSet, tol: float = 1e-9) -> EmbeddingReport:
    hs = [horofunction(I, z, L) for z in sample_N]
    coll = []
    for i in range(len(hs)):
        for j in range(i + 1, len(hs)):
            dist = horo_sup_distance(hs[i], hs[j])
            if dist < tol:
                coll.append((i, j, dist))
    return EmbeddingReport(hs, coll)


def boundary_trace(I: Bifunctional, seq: Callable[[int], Any], L: LandmarkSet, k_max: int) -> Iterator[Horofunction]:
    for k in range(k_max + 1):
        yield horofunction(I, seq(k), L)


def boundary_limit(I: Bifunctional, seq: Callable[[int], Any], L: LandmarkSet, tol: float = 1e-10, k_max: int = 80, patience: int = 3) -> Horofunction:
    """Limit of l_{z_k} on the landmarks.

    Declared once ``patience`` consecutive steps move by less than tol in
    sup norm; otherwise DivergenceError carries the trajectory and the
    spread of its last few iterates.
    """
    traj: list[Horofunction] = []
    calm = 0
    for h in boundary_trace(I, seq, L, k_max):
        if traj:
            calm = calm + 1 if horo_sup_distance(h, traj[-1]) < tol else 0
        traj.append(h)
        if calm >= patience:
            return Horofunction(h.values, L, "boundary-limit", None, label=("limit", len(traj) - 1))
    tail = np.array([t.values for t in traj[-(patience + 1):]])
    osc = float(np.max(tail.max(axis=0) - tail.min(axis=0)))
    raise DivergenceError(osc, traj)


def attain_sup(I: Bifunctional, x, y, H: Sequence[Horofunction]) -> tuple[Horofunction, float]:
    """argmax over H of h(x) - h(y); x and y must be landmarks."""
    if not H:
        raise ValueError("empty horofunction family")
    L = H[0].landmarks
    ix = L.index(I.M.check(x), I.M)
    iy = L.index(I.M.check(y), I.M)
    best, best_val = None, -np.inf
    for h in H:
        if h.landmarks is not L:
            raise LandmarkMismatch("horofunctions live on different landmark sets")
        v = h.difference(ix, iy)
        if v > best_val:
            best, best_val = h, v
    return best, float(best_val)
