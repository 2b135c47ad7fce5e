"""Distances d(x, y) = sup_z I(x,z) - I(y,z), estimated from below.

Every estimate is an exact maximum over a finite witness set, so it is a
certified lower bound for the true supremum.  Refinement enlarges the
witness set with a derivative-free pattern search in the chart of N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Optional, Sequence

import numpy as np

from horoforge.core import Bifunctional, WitnessSet, witnesses


@dataclass(frozen=True)
class SearchConfig:
    initial_grid_size: int = 64
    local_search_steps: int = 400
    step_shrink: float = 0.5
    restarts: int = 3
    seed: int = 0
    min_step: float = 1e-11

    def __post_init__(self):
        if min(self.initial_grid_size, self.local_search_steps, self.restarts) < 1:
            raise ValueError("grid size, search steps and restarts must be positive")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("step_shrink must lie in (0, 1)")
        if self.min_step <= 0:
            raise ValueError("min_step must be positive")


DEFAULT_CONFIG = SearchConfig()


@dataclass(frozen=True)
class DistanceEstimate:
    lower_bound: float
    argmax_witness: Any
    oracle_value: Optional[float] = None
    refinement_iterations: int = 0
    witness_count: int = 0
    flags: tuple = ()

    @property
    def gap(self) -> Optional[float]:
        if self.oracle_value is None:
            return None
        return self.oracle_value - self.lower_bound


class NotCauchyError(ValueError):
    def __init__(self, i: int, j: int, distance: float):
        super().__init__(f"sequence is not Cauchy: d(x_{i}, x_{j}) = {distance:.3g}")
        self.i, self.j, self.distance = i, j, distance


@dataclass(frozen=True)
class CauchySequence:
    points: Callable[[int], Any]
    metric: Callable[[Any, Any], float]


@dataclass(frozen=True)
class CompletionValue:
    witness: Any
    value: float
    index: int
    converged: bool


def _diffs(I: Bifunctional, x, y, pts: Sequence) -> np.ndarray:
    return np.array([I.eval(x, z) - I.eval(y, z) for z in pts], dtype=float)


def distance_on_witnesses(I: Bifunctional, x, y, W: WitnessSet) -> DistanceEstimate:
    """Exact max over W; ties go to the smallest witness index."""
    x = I.M.check(x)
    y = I.M.check(y)
    diffs = _diffs(I, x, y, W.points)
    k = int(np.argmax(diffs))
    return DistanceEstimate(float(diffs[k]), W.points[k], witness_count=len(W))


def _pattern_search(f, domain, start, step, cfg: SearchConfig):
    """Coordinate pattern search maximizing f over chart coordinates."""
    x = domain.project(np.asarray(start, dtype=float))
    fx = f(x)
    dim = x.size
    it = 0
    while it < cfg.local_search_steps:
        it += 1
        moved = False
        for i in range(dim):
            for sgn in (1.0, -1.0):
                cand = x.copy()
                cand[i] += sgn * step
                cand = domain.project(cand)
                fc = f(cand)
                if fc > fx:
                    x, fx, moved = cand, fc, True
                    break
            if moved:
                break
        if not moved:
            step *= cfg.step_shrink
            if step < cfg.min_step:
                return x, fx, it, True
    return x, fx, it, False


def refine_witnesses(I: Bifunctional, x, y, W: WitnessSet, cfg: SearchConfig = DEFAULT_CONFIG):
    """Grow W by pattern search started from its best witnesses.

    Returns the enlarged witness set and the estimate over it, which can
    only be >= the estimate over W.  Discrete N domains are returned
    unchanged with the flag ``refinement-unsupported``.
    """
    x = I.M.check(x)
    y = I.M.check(y)
    base = distance_on_witnesses(I, x, y, W)
    if not I.N.refinable:
        return W, replace(base, flags=base.flags + ("refinement-unsupported",))

    dom = I.N
    diffs = _diffs(I, x, y, W.points)
    order = np.argsort(-diffs, kind="stable")

    def f(c):
        z = dom.from_coords(c)
        v = I.eval(x, z) - I.eval(y, z)
        return v if math.isfinite(v) else -math.inf

    starts = []
    for k in order:
        c = dom.to_coords(W.points[k])
        if all(not np.allclose(c, s, rtol=0, atol=1e-12) for s in starts):
            starts.append(c)
        if len(starts) >= cfg.restarts:
            break

    new_points = []
    iterations = 0
    stable = True
    for s in starts:
        c, _, it, ok = _pattern_search(f, dom, s, dom.initial_step(), cfg)
        iterations += it
        stable &= ok
        new_points.append(dom.from_coords(c))

    W2 = WitnessSet(tuple(W.points) + tuple(new_points), "refined")
    est = distance_on_witnesses(I, x, y, W2)
    flags = () if stable else ("refinement-not-stabilized",)
    return W2, replace(est, refinement_iterations=iterations, flags=flags)


def witness_grid(I: Bifunctional, x, y, cfg: SearchConfig = DEFAULT_CONFIG) -> WitnessSet:
    if I.witness_grid is None:
        raise ValueError(f"bifunctional {I.name!r} has no witness grid; pass witnesses explicitly")
    rng = np.random.default_rng(cfg.seed)
    pts = I.witness_grid(x, y, cfg.initial_grid_size, rng)
    return witnesses(I, pts, "grid")


def distance(I: Bifunctional, x, y, cfg: SearchConfig = DEFAULT_CONFIG, W: Optional[WitnessSet] = None) -> DistanceEstimate:
    """Grid, exact max and refinement in one call; fills the oracle when known."""
    x = I.M.check(x)
    y = I.M.check(y)
    if W is None:
        W = witness_grid(I, x, y, cfg)
    _, est = refine_witnesses(I, x, y, W, cfg)
    if I.oracle_d is not None:
        est = replace(est, oracle_value=float(I.oracle_d(x, y)))
    return est


def symmetrize(v_xy: float, v_yx: float) -> float:
    if not (math.isfinite(v_xy) and math.isfinite(v_yx)):
        raise ValueError("symmetrize needs finite values")
    return max(v_xy, v_yx)


def triangle_deviation(I: Bifunctional, x, y, W: WitnessSet) -> float:
    """I(x,y) - d_W(x,y); zero for a genuine metric once y is a witness."""
    if not I.same_space:
        raise ValueError(f"triangle deviation needs M = N, but {I.name!r} has distinct domains")
    return I(x, y) - distance_on_witnesses(I, x, y, W).lower_bound


def extend_to_completion(I: Bifunctional, seq: CauchySequence, n_max: int, tol: float, targets: Sequence) -> list[CompletionValue]:
    """Extend I(., n) to the limit of a Cauchy sequence in M.

    The sequence must have a tail (at least three terms, ending at n_max)
    of diameter <= tol in the symmetrized declared metric.  Each limit is
    read off at the first index where successive values of I differ by
    less than tol.
    """
    pts = [I.M.check(seq.points(k)) for k in range(n_max + 1)]

    def dsym(a, b):
        return max(float(seq.metric(a, b)), float(seq.metric(b, a)))

    # smallest K whose tail has diameter <= tol
    tail_start = None
    worst = (0, 0, 0.0)
    for K in range(n_max - 2, -1, -1):
        bad = None
        for j in range(K + 1, n_max + 1):
            dist = dsym(pts[K], pts[j])
            if dist > tol:
                bad = (K, j, dist)
                break
        if bad is not None:
            worst = bad
            break
        tail_start = K
    if tail_start is None:
        raise NotCauchyError(*worst)

    out = []
    for n in targets:
        n = I.N.check(n)
        vals = [I.eval(p, n) for p in pts]
        hit = None
        for k in range(1, len(vals)):
            if abs(vals[k] - vals[k - 1]) < tol:
                hit = k
                break
        if hit is None:
            out.append(CompletionValue(n, float(vals[-1]), n_max, False))
        else:
            out.append(CompletionValue(n, float(vals[hit]), hit, True))
    return out
