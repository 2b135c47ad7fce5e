"""Bifunctionals I: M x N -> R and the point-separation checks built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from horoforge.domains import Domain, DomainError

Point = Any


@dataclass(frozen=True)
class Bifunctional:
    """A real-valued map on M x N together with its domains.

    ``witness_grid(x, y, size, rng)`` proposes witnesses in N for the pair
    (x, y); ``oracle_d`` is a closed-form distance on M when one is known;
    ``action_builder`` turns group data (e.g. a matrix) into a GroupElement.
    """

    name: str
    eval: Callable[[Point, Point], float]
    M: Domain
    N: Domain
    oracle_d: Optional[Callable[[Point, Point], float]] = None
    action_builder: Optional[Callable[..., Any]] = None
    witness_grid: Optional[Callable[..., list]] = None
    same_space: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, m, n):
        return evaluate(self, m, n)


@dataclass(frozen=True)
class WitnessSet:
    points: tuple
    provenance: str = "user"

    def __post_init__(self):
        if len(self.points) == 0:
            raise ValueError("a witness set must be nonempty")
        if self.provenance not in ("user", "grid", "refined"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def witnesses(I: Bifunctional, points: Iterable, provenance: str = "user") -> WitnessSet:
    """Validate ``points`` against I.N and wrap them."""
    return WitnessSet(tuple(I.N.check(p) for p in points), provenance)


def evaluate(I: Bifunctional, m, n) -> float:
    m = I.M.check(m)
    n = I.N.check(n)
    return float(I.eval(m, n))


def _values(I: Bifunctional, m, W: WitnessSet) -> np.ndarray:
    return np.array([I.eval(m, z) for z in W.points], dtype=float)


@dataclass(frozen=True)
class PairSeparation:
    i: int
    j: int
    best_gap: float
    spread: float
    condition1: bool
    condition2: bool


@dataclass(frozen=True)
class SeparationReport:
    pairs: tuple
    tol: float
    witness_count: int
    # Passing on finitely many witnesses is evidence only; a failure certifies
    # non-separation of the witness-restricted problem, not of I itself.
    restricted_certificate: bool = True

    @property
    def passed(self) -> bool:
        return all(p.condition1 and p.condition2 for p in self.pairs)

    def failures(self):
        return [p for p in self.pairs if not (p.condition1 and p.condition2)]


def check_separation(I: Bifunctional, sample_M: Sequence, W: WitnessSet, tol: float = 1e-12) -> SeparationReport:
    if len(sample_M) < 2:
        raise ValueError("need at least two sample points")
    pts = [I.M.check(x) for x in sample_M]
    W = witnesses(I, W.points, W.provenance)
    rows = [_values(I, x, W) for x in pts]
    out = []
    for i, ri in enumerate(rows):
        for j, rj in enumerate(rows):
            if i == j:
                continue
            diff = ri - rj
            gap = float(diff.max())
            spread = float(np.abs(diff - diff.mean()).max())
            out.append(PairSeparation(i, j, gap, spread, gap > tol, spread > tol))
    return SeparationReport(tuple(out), tol, len(W))


def quotient_points(I: Bifunctional, sample_M: Sequence, W: WitnessSet, tol: float = 1e-12) -> list[list[int]]:
    """Partition sample indices by 'I(x,.) - I(y,.) is constant on W'.

    The constant is fitted as the mean difference; classes are the
    connected components of the resulting relation, so the partition is an
    equivalence even when the tolerance test alone is not transitive.
    """
    pts = [I.M.check(x) for x in sample_M]
    n = len(pts)
    if n == 0:
        return []
    rows = [_values(I, x, W) for x in pts]
    src, dst = [], []
    for i in range(n):
        for j in range(i + 1, n):
            diff = rows[i] - rows[j]
            if np.abs(diff - diff.mean()).max() <= tol:
                src.append(i)
                dst.append(j)
    graph = coo_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    classes: dict[int, list[int]] = {}
    for idx, lab in enumerate(labels):
        classes.setdefault(int(lab), []).append(idx)
    return sorted(classes.values(), key=lambda c: c[0])


def _as_float(d) -> float:
    return float(getattr(d, "lower_bound", d))


def lipschitz_defect(I: Bifunctional, d: Callable, pairs: Sequence, W: WitnessSet) -> float:
    """max over pairs and witnesses of |I(x,z) - I(y,z)| - d_sym(x, y).

    ``d`` may return a float or a DistanceEstimate.  A non-positive result
    means I is 1-Lipschitz for d on the sampled data.
    """
    worst = -math.inf
    for x, y in pairs:
        x = I.M.check(x)
        y = I.M.check(y)
        dsym = max(_as_float(d(x, y)), _as_float(d(y, x)))
        gap = float(np.abs(_values(I, x, W) - _values(I, y, W)).max())
        worst = max(worst, gap - dsym)
    return worst


__all__ = [
    "Bifunctional",
    "DomainError",
    "PairSeparation",
    "SeparationReport",
    "WitnessSet",
    "check_separation",
    "evaluate",
    "lipschitz_defect",
    "quotient_points",
    "witnesses",
]
