"""Acceptance suite: twelve oracle and property checks over the built-in geometries.

Each check returns a ``CriterionResult``; ``run_all`` runs them in order.
``VerifyOptions`` exposes two negative controls: a corrupted slope-action
convention and a global tolerance override.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional

import numpy as np

from horoforge.core import lipschitz_defect, witnesses
from horoforge.dynamics import (
    detect_north_south,
    invariance_defect,
    translation_length_functional,
    translation_length_metric,
)
from horoforge.geometries.conformal_grid import grid_extremal_length
from horoforge.geometries.currents import SlopeCurrent
from horoforge.geometries.euclidean import euclidean_inner
from horoforge.geometries.funk import funk_polytope, funk_ray_exit, random_interior_point, random_polygon
from horoforge.geometries.minsky import hyperbolic_distance, minsky_half_plane
from horoforge.geometries.torus import (
    SLOPE_ACTION_SIGNS,
    axis_point,
    dilatation,
    liouville_discretize,
    make_torus_bifunctional,
    minsky_inequality_check,
    moebius,
    sl2z_action,
    teichmuller_distance,
    torus_extremal_length,
    torus_intersection,
)
from horoforge.horo import LandmarkSet, boundary_limit, horofunction
from horoforge.metric import SearchConfig, distance, distance_on_witnesses

CORRUPT_SIGNS = (1, 1, 1, 1)
HYPERBOLIC_TEST_MATRICES = ([[2, 1], [1, 1]], [[3, 2], [1, 1]])


@dataclass(frozen=True)
class VerifyOptions:
    seed: int = 0
    corrupt_convention: bool = False
    tol_override: Optional[float] = None
    only: Optional[tuple] = None

    def tol(self, default: float) -> float:
        return default if self.tol_override is None else self.tol_override

    @property
    def signs(self):
        return CORRUPT_SIGNS if self.corrupt_convention else SLOPE_ACTION_SIGNS


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: dict = field(default_factory=dict)
    failed_invariant: Optional[str] = None
    seconds: float = 0.0
    units: str = ""

    def line(self) -> str:
        unit = f" {self.units}" if self.units else ""
        return (f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.id:2d} {self.name}: "
                f"measured {self.measured:.3e}{unit} (tol {self.tolerance:.1e}{unit})")

    def to_json(self, timings: bool = False) -> dict:
        """Report record; wall-clock fields only with ``timings`` so reports stay byte-stable."""
        d = {"criterion": self.id, "name": self.name, "passed": self.passed, "measured": self.measured,
             "tolerance": self.tolerance, "units": self.units, "failed_invariant": self.failed_invariant,
             "detail": {k: v for k, v in self.detail.items() if timings or k != "runtime_s"}}
        if timings:
            d["seconds"] = self.seconds
        return d


def _rng(opts: VerifyOptions, k: int) -> np.random.Generator:
    return np.random.default_rng([opts.seed, k])


def _random_tau(rng, im=(0.5, 4.0), re=2.0) -> complex:
    return complex(rng.uniform(-re, re), math.exp(rng.uniform(math.log(im[0]), math.log(im[1]))))


def _random_sl2z(rng, length: int = 4) -> np.ndarray:
    gens = [np.array([[1, 1], [0, 1]]), np.array([[1, 0], [1, 1]]), np.array([[0, -1], [1, 0]])]
    gens += [np.array([[1, -1], [0, 1]]), np.array([[1, 0], [-1, 1]])]
    A = np.eye(2, dtype=int)
    for _ in range(length):
        A = A @ gens[rng.integers(len(gens))]
    return A


def _random_slope(rng, k: int = 4) -> tuple:
    while True:
        p, q = (int(v) for v in rng.integers(-k, k + 1, 2))
        if (p, q) != (0, 0):
            return p, q


def _random_current(rng, atoms: int) -> SlopeCurrent:
    return SlopeCurrent(tuple(_random_slope(rng) + (float(rng.uniform(0.1, 2.0)),) for _ in range(atoms)))


# --- 1-4: oracle equivalence ----------------------------------------------


def euclidean_oracle(opts: VerifyOptions) -> CriterionResult:
    rng = _rng(opts, 1)
    tol = opts.tol(1e-6)
    worst, t0 = 0.0, time.perf_counter()
    for k in range(200):
        dim = (2, 3, 5)[k % 3]
        I = euclidean_inner(dim)
        x, y = rng.normal(size=dim), rng.normal(size=dim)
        est = distance(I, x, y, SearchConfig(seed=opts.seed + k, restarts=1))
        worst = max(worst, abs(est.lower_bound - est.oracle_value))
    secs = time.perf_counter() - t0
    ok = worst <= tol and secs < 5.0
    return CriterionResult(1, "euclidean oracle equivalence", ok, worst, tol, {"pairs": 200, "runtime_s": secs},
                           None if ok else ("runtime" if worst <= tol else "oracle gap"))


def minsky_oracle(opts: VerifyOptions) -> CriterionResult:
    rng = _rng(opts, 2)
    tol = opts.tol(1e-6)
    I = minsky_half_plane()
    worst, t0 = 0.0, time.perf_counter()
    for _ in range(200):
        x = _random_tau(rng, (0.2, 5.0), 3.0)
        y = _random_tau(rng, (0.2, 5.0), 3.0)
        est = distance(I, x, y)
        worst = max(worst, abs(est.lower_bound - est.oracle_value))
    secs = time.perf_counter() - t0
    ok = worst <= tol and secs < 5.0
    return CriterionResult(2, "hyperbolic oracle equivalence", ok, worst, tol, {"pairs": 200, "runtime_s": secs},
                           None if ok else ("runtime" if worst <= tol else "oracle gap"))


def funk_exactness(opts: VerifyOptions) -> CriterionResult:
    rng = _rng(opts, 3)
    tol = opts.tol(1e-9)
    worst, asym, nondeg = 0.0, 0, 0
    for _ in range(20):
        P = random_polygon(rng)
        I = funk_polytope(P)
        W = witnesses(I, range(len(P.offsets)), "grid")
        for _ in range(10):
            x, y = random_interior_point(P, rng), random_interior_point(P, rng)
            fxy = distance_on_witnesses(I, x, y, W).lower_bound
            fyx = distance_on_witnesses(I, y, x, W).lower_bound
            worst = max(worst, abs(fxy - funk_ray_exit(P, x, y)), abs(fyx - funk_ray_exit(P, y, x)))
            if np.linalg.norm(x - y) > 1e-9:
                nondeg += 1
                asym += abs(fxy - fyx) > 1e-9
    frac = asym / max(nondeg, 1)
    ok = worst <= tol and frac >= 0.95
    return CriterionResult(3, "funk facet supremum is exact", ok, worst, tol, {"asymmetric_fraction": frac, "pairs": 200},
                           None if ok else ("asymmetry" if worst <= tol else "ray-exit closed form"))


def torus_e1_oracle(opts: VerifyOptions) -> CriterionResult:
    rng = _rng(opts, 4)
    tol = opts.tol(1e-6)
    I = make_torus_bifunctional("E1")
    worst = 0.0
    for _ in range(100):
        est = distance(I, _random_tau(rng), _random_tau(rng))
        worst = max(worst, abs(est.lower_bound - est.oracle_value))
    ok = worst <= tol
    return CriterionResult(4, "torus extremal-length distance is half the hyperbolic one", ok, worst, tol, {"pairs": 100},
                           None if ok else "oracle gap")


# --- 5-7: axioms, horofunctions, invariance --------------------------------


def _axiom_setups(rng):
    eu = euclidean_inner(3)
    u = rng.normal(size=(32, 3))
    yield eu, witnesses(eu, u / np.linalg.norm(u, axis=1, keepdims=True)), lambda r: r.normal(size=3)

    mi = minsky_half_plane()
    yield mi, witnesses(mi, mi.witness_grid(None, None, 32, rng)), lambda r: _random_tau(r, (0.2, 5.0), 3.0)

    P = random_polygon(rng)
    fu = funk_polytope(P)
    yield fu, witnesses(fu, range(len(P.offsets))), lambda r: random_interior_point(P, r)

    # torus triples come from a fixed random pool: every new E2 point costs a least-squares fit
    pool = [_random_tau(rng) for _ in range(150)]
    from_pool = lambda r: pool[r.integers(len(pool))]
    for kind in ("E1", "thurston_like"):
        T = make_torus_bifunctional(kind)
        yield T, witnesses(T, T.witness_grid(None, None, 32, rng)), from_pool

    e2 = make_torus_bifunctional("E2")
    yield e2, witnesses(e2, e2.witness_grid(None, None, 24, rng)), from_pool


def witness_metric_axioms(opts: VerifyOptions) -> CriterionResult:
    rng = _rng(opts, 5)
    ulps = 4 if opts.tol_override is None else 0
    worst_excess = -math.inf
    nonzero_self = 0
    per_geometry = {}
    for I, W, sample in _axiom_setups(rng):
        excess_g = -math.inf
        for _ in range(1000):
            x, y, z = sample(rng), sample(rng), sample(rng)
            dxy = distance_on_witnesses(I, x, y, W).lower_bound
            dyz = distance_on_witnesses(I, y, z, W).lower_bound
            dxz = distance_on_witnesses(I, x, z, W).lower_bound
            ulp = np.spacing(max(abs(dxy), abs(dyz), abs(dxz), np.finfo(float).tiny))
            excess_g = max(excess_g, (dxz - (dxy + dyz)) / ulp)
            nonzero_self += distance_on_witnesses(I, x, x, W).lower_bound != 0.0
        per_geometry[I.name] = float(excess_g)
        worst_excess = max(worst_excess, excess_g)
    ok = worst_excess <= ulps and nonzero_self == 0
    failed = None if ok else ("d_W(x,x) = 0" if nonzero_self else "triangle inequality")
    return CriterionResult(5, "witness metric axioms", ok, max(worst_excess, 0.0), float(ulps),
                           {"triples_per_geometry": 1000, "excess_ulps_by_geometry": per_geometry, "nonzero_self": nonzero_self},
                           failed, units="ulp")


def horofunction_contracts(opts: VerifyOptions) -> CriterionResult:
    rng = _rng(opts, 6)
    lip_tol = opts.tol(1e-9)
    bus_tol = opts.tol(1e-6)
    I = minsky_half_plane()
    pts = [1j] + [_random_tau(rng, (0.2, 5.0), 3.0) for _ in range(9)]
    L = LandmarkSet.build(I, pts, basepoint=1j)
    zs = [0.0] + list(rng.uniform(-20, 20, 30))
    hs = [horofunction(I, z, L) for z in zs]
    base_ok = all(h.values[L.base_index] == 0.0 and math.copysign(1, h.values[L.base_index]) > 0 for h in hs)

    pairs = [(p, q) for i, p in enumerate(L.points) for q in L.points[i + 1:]]
    W = witnesses(I, zs)
    lip = lipschitz_defect(I, hyperbolic_distance, pairs, W)

    T = make_torus_bifunctional("E1")
    LT = LandmarkSet.build(T, [1j] + [_random_tau(rng) for _ in range(9)], basepoint=1j)
    WT = witnesses(T, [SlopeCurrent.direction(t) for t in rng.uniform(0, math.pi, 30)])
    tpairs = [(p, q) for i, p in enumerate(LT.points) for q in LT.points[i + 1:]]
    lip = max(lip, lipschitz_defect(T, teichmuller_distance, tpairs, WT))

    lim = boundary_limit(I, lambda k: 2.0**k, L)
    expected = np.array([-math.log(p.imag) for p in L.points])
    bus = float(np.max(np.abs(lim.values - expected)))
    ok = base_ok and lip <= lip_tol and bus <= bus_tol
    failed = None
    if not base_ok:
        failed = "basepoint value"
    elif lip > lip_tol:
        failed = "1-Lipschitz on landmarks"
    elif bus > bus_tol:
        failed = "Busemann limit"
    return CriterionResult(6, "horofunction contracts", ok, max(lip, bus), max(lip_tol, bus_tol),
                           {"lipschitz_defect": lip, "busemann_error": bus, "landmarks": len(L), "basepoint_exact": base_ok}, failed)


def _slope_action(A, opts: VerifyOptions):
    return sl2z_action(A, "slopes", signs=opts.signs)


def sl2z_invariance(opts: VerifyOptions) -> CriterionResult:
    rng = _rng(opts, 7)
    tol = opts.tol(1e-9)
    worst_I = worst_ext = worst_int = 0.0
    kinds = [make_torus_bifunctional("E1"), make_torus_bifunctional("thurston_like")]
    for _ in range(20):
        A = _random_sl2z(rng)
        g = _slope_action(A, opts)
        for I in kinds:
            samples = [(_random_tau(rng, (0.5, 3.0), 1.0), SlopeCurrent.direction(rng.uniform(0, math.pi))) for _ in range(50)]
            worst_I = max(worst_I, invariance_defect(I, g, samples))
        for _ in range(50):
            tau = _random_tau(rng, (0.5, 3.0), 1.0)
            c1, c2 = _random_current(rng, 2), _random_current(rng, 3)
            e0 = torus_extremal_length(tau, c1)
            e1 = torus_extremal_length(g.act_M(tau), g.act_N(c1))
            worst_ext = max(worst_ext, abs(e1 - e0) / e0)
            worst_int = max(worst_int, abs(torus_intersection(g.act_N(c1), g.act_N(c2)) - torus_intersection(c1, c2)))
    measured = max(worst_I, worst_ext, worst_int)
    ok = measured <= tol
    failed = None
    if not ok:
        failed = "I invariance" if worst_I > tol else ("Ext invariance" if worst_ext > tol else "intersection invariance")
    return CriterionResult(7, "SL(2,Z) invariance", ok, measured, tol,
                           {"I_defect": worst_I, "ext_rel_defect": worst_ext, "intersection_defect": worst_int,
                            "elements": 20, "samples": 50, "slope_signs": list(opts.signs)}, failed)


# --- 8-9: translation lengths and north-south dynamics ---------------------


def translation_lengths(opts: VerifyOptions) -> CriterionResult:
    tol_d, tol_I, tol_sym = opts.tol(1e-3), opts.tol(1e-2), opts.tol(2e-2)
    I = make_torus_bifunctional("E1")
    detail = {}
    ok = True
    failed = None
    worst = 0.0
    for A in HYPERBOLIC_TEST_MATRICES:
        g = _slope_action(A, opts)
        target = math.log(dilatation(A))
        x = axis_point(A)
        dist = lambda a, b: distance(I, a, b)
        td = translation_length_metric(dist, g, x, range(1, 13))
        y = SlopeCurrent.single(1, 0)
        tf = translation_length_functional(I, g, x, y, (8, 10, 12))
        tb = translation_length_functional(I, g.inverse, x, y, (8, 10, 12))
        e_d = abs(td.extrapolated - target)
        e_I = abs(tf.extrapolated - target)
        e_s = abs(tf.extrapolated - tb.extrapolated)
        detail[str(A)] = {"log_lambda": target, "tau_d": td.extrapolated, "tau_I": tf.extrapolated,
                          "tau_I_inverse": tb.extrapolated, "basepoint": [x.real, x.imag]}
        worst = max(worst, e_d / tol_d, e_I / tol_I, e_s / tol_sym)
        if ok and e_d > tol_d:
            ok, failed = False, "metric translation length"
        elif ok and e_I > tol_I:
            ok, failed = False, "functional translation length"
        elif ok and e_s > tol_sym:
            ok, failed = False, "tau_I(g) vs tau_I(g^-1)"
    return CriterionResult(8, "translation lengths equal log dilatation", ok, worst, 1.0, detail, failed,
                           units="x own tolerance")


def north_south(opts: VerifyOptions) -> CriterionResult:
    rng = _rng(opts, 9)
    tol = opts.tol(2e-2)
    I = make_torus_bifunctional("E1")
    L = LandmarkSet.build(I, [1j, 2j, 1 + 1j, 0.5 + 0.8j, -0.7 + 1.5j, 0.2 + 3j], basepoint=1j)
    detail = {}
    ok, failed, worst = True, None, 0.0
    for A in HYPERBOLIC_TEST_MATRICES:
        g = _slope_action(A, opts)
        probes = [SlopeCurrent.direction(t) for t in rng.uniform(0, math.pi, 5)]
        rep = detect_north_south(I, g, probes, L)
        tc = rep.tau_comparison
        sep = rep.separation if rep.separation is not None else 0.0
        detail[str(A)] = {"status": rep.status, "separation": sep, **{k: tc[k] for k in tc}}
        if rep.status != "north-south" or sep <= 0.1:
            if ok:
                ok, failed = False, f"north-south dynamics ({rep.status})"
            worst = math.inf
            continue
        worst = max(worst, tc["plus_gap"])
        if ok and tc["plus_gap"] > tol:
            ok, failed = False, "h_plus(g^-1 b) = tau_I(g^-1)"
    return CriterionResult(9, "north-south dynamics", ok, worst, tol, detail, failed)


# --- 10-12: torus length functionals ---------------------------------------


def _orthogonal_partner(tau: complex, p: float, q: float) -> SlopeCurrent:
    # real (p', q') with p' + q' tau = i (p + q tau)
    v = 1j * (p + q * tau)
    q2 = v.imag / tau.imag
    return SlopeCurrent.single(v.real - q2 * tau.real, q2)


def minsky_inequality(opts: VerifyOptions) -> CriterionResult:
    rng = _rng(opts, 10)
    tol = opts.tol(1e-12)
    worst = math.inf
    for _ in range(5000):
        tau = _random_tau(rng, (0.2, 5.0), 3.0)
        alpha = SlopeCurrent.single(*_random_slope(rng), float(rng.uniform(0.1, 2.0)))
        G = _random_current(rng, int(rng.integers(1, 5)))
        worst = min(worst, minsky_inequality_check(tau, alpha, G))
    eq = [abs(minsky_inequality_check(t, SlopeCurrent.single(1, 0), SlopeCurrent.single(0, 1))) for t in (1j, 2j, 0.5j)]
    for _ in range(20):
        tau = _random_tau(rng)
        p, q = _random_slope(rng)
        a = SlopeCurrent.single(p, q)
        G = _orthogonal_partner(tau, p, q)
        scale = torus_intersection(a, G)
        eq.append(abs(minsky_inequality_check(tau, a, G)) / scale)
    eq_err = max(eq)
    ok = worst >= -tol and eq_err <= 1e-12
    failed = None if ok else ("inequality gap" if worst < -tol else "equality at orthogonal slopes")
    return CriterionResult(10, "minsky inequality on the torus", ok, -worst if worst < 0 else 0.0, tol,
                           {"min_gap": worst, "equality_error": eq_err, "triples": 5000}, failed)


def e2_pairs(seed: int = 0, count: int = 50) -> list:
    rng = np.random.default_rng([seed, 11])
    return [(_random_tau(rng, (0.5, 3.0), 1.5), _random_tau(rng, (0.5, 3.0), 1.5)) for _ in range(count)]


def e2_lower_bound_values(seed: int = 0) -> list:
    I = make_torus_bifunctional("E2")
    return [distance(I, x, y).lower_bound for x, y in e2_pairs(seed)]


def load_baselines() -> dict:
    return json.loads(resources.files("horoforge").joinpath("data/baselines.json").read_text())


def e2_lower_bound(opts: VerifyOptions) -> CriterionResult:
    tol = opts.tol(2e-2)
    pairs = e2_pairs(opts.seed)
    vals = e2_lower_bound_values(opts.seed)
    margins = [v - teichmuller_distance(y, x) for v, (x, y) in zip(vals, pairs)]
    worst = min(margins)
    ok = worst >= -tol
    detail = {"pairs": len(pairs), "min_margin": worst, "max_margin": max(margins), "values": vals,
              "liouville_residual_at_i": liouville_discretize(1j).residual}
    return CriterionResult(11, "second extremal-length distance bounds the spectral one", ok, max(-worst, 0.0), tol, detail,
                           None if ok else "lower bound")


def grid_cases(seed: int = 0) -> list:
    rng = np.random.default_rng([seed, 12])
    cases = [(1j, SlopeCurrent.single(1, 0)), (2j, SlopeCurrent.single(0, 1))]
    while len(cases) < 10:
        cases.append((_random_tau(rng, (0.6, 2.0), 0.5), _random_current(rng, int(rng.integers(1, 4)))))
    return cases


def conformal_grid_oracle(opts: VerifyOptions) -> CriterionResult:
    tol = opts.tol(1e-2)
    rows = []
    worst = 0.0
    for tau, cur in grid_cases(opts.seed):
        r = grid_extremal_length(tau, cur, n=64)
        worst = max(worst, r.relative_gap)
        rows.append({"tau": [tau.real, tau.imag], "current": cur.to_json(), "grid_value": r.upper_bound, "formula": r.closed_form})
    ok = worst <= tol
    return CriterionResult(12, "conformal-grid extremal length matches the flat formula", ok, worst, tol,
                           {"grid": 64, "cases": rows}, None if ok else "flat extremal-length formula")


CRITERIA: dict[int, Callable[[VerifyOptions], CriterionResult]] = {
    1: euclidean_oracle,
    2: minsky_oracle,
    3: funk_exactness,
    4: torus_e1_oracle,
    5: witness_metric_axioms,
    6: horofunction_contracts,
    7: sl2z_invariance,
    8: translation_lengths,
    9: north_south,
    10: minsky_inequality,
    11: e2_lower_bound,
    12: conformal_grid_oracle,
}


def run_criterion(k: int, opts: VerifyOptions = VerifyOptions()) -> CriterionResult:
    if k not in CRITERIA:
        raise ValueError(f"unknown criterion {k}; choose from 1-{max(CRITERIA)}")
    t0 = time.perf_counter()
    res = CRITERIA[k](opts)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(opts: VerifyOptions = VerifyOptions()) -> list[CriterionResult]:
    ids = sorted(CRITERIA) if opts.only is None else sorted(opts.only)
    unknown = [k for k in ids if k not in CRITERIA]
    if unknown:
        raise ValueError(f"unknown criteria {unknown}; choose from 1-{max(CRITERIA)}")
    return [run_criterion(k, opts) for k in ids]
