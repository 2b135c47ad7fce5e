"""Group actions preserving I, translation lengths, north-south detection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from horoforge.core import Bifunctional
from horoforge.horo import (
    Horofunction,
    LandmarkSet,
    NotReevaluatable,
    _normalized,
    horo_sup_distance,
    horofunction,
)


@dataclass(frozen=True, eq=False)
class GroupElement:
    act_M: Callable[[Any], Any]
    act_N: Callable[[Any], Any]
    label: str = "g"
    _inverse: Optional["GroupElement"] = field(default=None, repr=False)

    @classmethod
    def pair(cls, act_M, act_N, inv_M, inv_N, label: str = "g") -> "GroupElement":
        g = cls(act_M, act_N, label)
        h = cls(inv_M, inv_N, f"{label}^-1", g)
        object.__setattr__(g, "_inverse", h)
        return g

    @property
    def inverse(self) -> "GroupElement":
        if self._inverse is None:
            raise ValueError(f"group element {self.label!r} has no inverse attached")
        return self._inverse

    def power_M(self, m, n: int):
        f = self.act_M if n >= 0 else self.inverse.act_M
        for _ in range(abs(n)):
            m = f(m)
        return m

    def power_N(self, z, n: int):
        f = self.act_N if n >= 0 else self.inverse.act_N
        for _ in range(abs(n)):
            z = f(z)
        return z


def identity_element() -> GroupElement:
    ident = lambda p: p
    return GroupElement.pair(ident, ident, ident, ident, "id")


def invariance_defect(I: Bifunctional, g: GroupElement, samples: Sequence) -> float:
    if not samples:
        raise ValueError("need at least one (m, n) sample")
    worst = 0.0
    for m, n in samples:
        m = I.M.check(m)
        n = I.N.check(n)
        worst = max(worst, abs(I.eval(g.act_M(m), g.act_N(n)) - I.eval(m, n)))
    return worst


def act_horofunction(g: GroupElement, h: Horofunction, L: Optional[LandmarkSet] = None) -> Horofunction:
    """(g.h)(x) = h(g^-1 x) - h(g^-1 b), renormalized at the basepoint."""
    if h.raw is None:
        raise NotReevaluatable(f"cannot translate a {h.source!r} horofunction without a formula")
    L = h.landmarks if L is None else L
    ginv = g.inverse.act_M
    raw = lambda x, _r=h.raw: _r(ginv(x))
    vals, rv = _normalized(raw, L)
    return Horofunction(vals, L, "group-translate", raw, label=(g.label, h.label), raw_values=rv)


@dataclass(frozen=True)
class TranslationEstimate:
    values: tuple  # (n, v_n)
    extrapolated: float
    method: str
    uncertainty: float
    last_value: float
    flags: tuple = ()

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "values": [[int(n), float(v)] for n, v in self.values],
            "extrapolated": self.extrapolated,
            "uncertainty": self.uncertainty,
            "last_value": self.last_value,
            "flags": list(self.flags),
        }


def _check_n_list(n_list):
    ns = [int(n) for n in n_list]
    if not ns or ns[0] < 1 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_list must be a strictly increasing list of positive integers")
    return ns


def _split(n: int) -> tuple[int, int]:
    # g^n x = g^a (g^(a-n) ... ): share the n steps between the two arguments
    a = (n + 1) // 2
    return a, a - n


def translation_length_metric(dist: Callable, g: GroupElement, x, n_list: Sequence[int]) -> TranslationEstimate:
    """tau_d(g) from v_n = d(g^n x, x) / n.

    Subadditivity of n -> d(g^n x, x) makes the limit equal to the
    infimum, so the estimate is min_n v_n.  The pair is evaluated as
    d(g^a x, g^(a-n) x), which equals d(g^n x, x) for an isometric action
    and keeps both points a bounded number of steps from x.
    """
    ns = _check_n_list(n_list)
    vals = []
    for n in ns:
        a, b = _split(n)
        d = dist(g.power_M(x, a), g.power_M(x, b))
        vals.append((n, float(getattr(d, "lower_bound", d)) / n))
    vs = [v for _, v in vals]
    unc = abs(vs[-1] - vs[-2]) if len(vs) > 1 else math.inf
    flags = ("negative-sampled-value",) if min(vs) < 0 else ()
    return TranslationEstimate(tuple(vals), min(vs), "metric-subadditive", unc, vs[-1], flags)


def translation_length_functional(I: Bifunctional, g: GroupElement, x, y, n_list: Sequence[int]) -> TranslationEstimate:
    """tau_{I,M}(g) from v_n = I(g^n x, y) / n.

    No subadditivity is available, so the reported limit removes the O(1/n)
    term by a two-point Richardson step, (I_n2 - I_n1) / (n2 - n1).  The
    uncertainty is the change between the last two Richardson values (or
    the Richardson correction itself when only two n are given).
    """
    ns = _check_n_list(n_list)
    x = I.M.check(x)
    y = I.N.check(y)
    raw = []
    for n in ns:
        a, b = _split(n)
        raw.append(I.eval(g.power_M(x, a), g.power_N(y, b)))
    vals = tuple((n, r / n) for n, r in zip(ns, raw))
    last = vals[-1][1]
    if len(ns) == 1:
        return TranslationEstimate(vals, last, "functional-limsup", math.inf, last)
    rich = [(raw[k] - raw[k - 1]) / (ns[k] - ns[k - 1]) for k in range(1, len(ns))]
    unc = abs(rich[-1] - rich[-2]) if len(rich) > 1 else abs(rich[-1] - last)
    flags = ("negative-sampled-value",) if min(v for _, v in vals) < 0 else ()
    return TranslationEstimate(vals, rich[-1], "functional-limsup", unc, last, flags)


@dataclass(frozen=True)
class ProbeTrace:
    probe: Any
    converged: bool
    steps: int
    last_step: float
    period: Optional[int] = None

    def to_json(self):
        return {"converged": self.converged, "steps": self.steps, "last_step": self.last_step, "period": self.period}


@dataclass(frozen=True)
class NSReport:
    status: str
    h_plus: Optional[Horofunction]
    h_minus: Optional[Horofunction]
    forward: tuple
    backward: tuple
    separation: Optional[float]
    tau_comparison: dict

    @property
    def north_south(self) -> bool:
        return self.status == "north-south"

    def to_json(self) -> dict:
        hv = lambda h: None if h is None else [float(v) for v in h.values]
        return {
            "status": self.status,
            "h_plus": hv(self.h_plus),
            "h_minus": hv(self.h_minus),
            "forward": [t.to_json() for t in self.forward],
            "backward": [t.to_json() for t in self.backward],
            "separation": self.separation,
            "tau_comparison": self.tau_comparison,
        }


def _trace(I, step, z, L, iters, tol, patience=3):
    hs = [horofunction(I, z, L)]
    calm = 0
    period = None
    last = math.inf
    for k in range(1, iters + 1):
        z = step(z)
        h = horofunction(I, z, L)
        last = horo_sup_distance(h, hs[-1])
        calm = calm + 1 if last < tol else 0
        if period is None and last >= tol and horo_sup_distance(h, hs[0]) < tol:
            period = k
        hs.append(h)
        if calm >= patience:
            return hs, ProbeTrace(z, True, k, last)
    return hs, ProbeTrace(z, False, iters, last, period)


def _common_limit(I, traces, hs_list, tol):
    if not all(t.converged for t in traces):
        return None
    finals = [hs[-1] for hs in hs_list]
    for a in finals[1:]:
        if horo_sup_distance(a, finals[0]) >= tol:
            return None
    return finals[0]


def detect_north_south(
    I: Bifunctional,
    g: GroupElement,
    probe_N: Sequence,
    L: LandmarkSet,
    iters: int = 40,
    tol: float = 1e-9,
    n_list: Sequence[int] = (8, 10, 12),
) -> NSReport:
    """Iterate probes under g and g^-1 and look for common attracting limits.

    h_plus and h_minus are the horofunctions of the final iterates, so they
    can be evaluated at g^-1 b for the comparison with translation lengths.
    Inconclusive outcomes are reported through ``status``, never raised.
    """
    if not probe_N:
        raise ValueError("need at least one probe")
    probes = [I.N.check(z) for z in probe_N]
    fw = [_trace(I, g.act_N, z, L, iters, tol) for z in probes]
    bw = [_trace(I, g.inverse.act_N, z, L, iters, tol) for z in probes]
    f_traces = tuple(t for _, t in fw)
    b_traces = tuple(t for _, t in bw)
    h_plus = _common_limit(I, f_traces, [h for h, _ in fw], tol)
    h_minus = _common_limit(I, b_traces, [h for h, _ in bw], tol)

    sep = None
    tau: dict = {}
    if h_plus is None or h_minus is None:
        if any(t.period for t in f_traces + b_traces):
            status = "finite-orbit"
        elif h_plus is None and h_minus is None:
            status = "divergent" if not any(t.converged for t in f_traces) else "no-common-limit"
        else:
            status = "no-common-limit"
    else:
        sep = horo_sup_distance(h_plus, h_minus)
        status = "north-south" if sep > 10 * tol else "not-distinct"

    if status == "north-south":
        b = L.basepoint
        ginv_b = g.inverse.act_M(b)
        tau_g = translation_length_functional(I, g, b, probes[0], n_list)
        tau_ginv = translation_length_functional(I, g.inverse, b, probes[0], n_list)
        hp = h_plus.at(ginv_b)
        hm = -h_minus.at(ginv_b)
        tau = {
            "h_plus_at_ginv_b": hp,
            "tau_I_ginv": tau_ginv.extrapolated,
            "plus_gap": abs(hp - tau_ginv.extrapolated),
            "minus_h_minus_at_ginv_b": hm,
            "tau_I_g": tau_g.extrapolated,
            "minus_gap": abs(hm - tau_g.extrapolated),
            "negative_tau_flag": min(tau_g.extrapolated, tau_ginv.extrapolated) < 0,
        }
    return NSReport(status, h_plus, h_minus, f_traces, b_traces, sep, tau)
