"""Flat-torus Teichmueller space with slope currents.

Conventions (fixed here, used everywhere):

* A point tau in H is the torus C / (Z + tau Z), rescaled to unit area.
* The slope (p, q) is the closed curve with displacement p + q tau, so its
  flat length is |p + q tau| / sqrt(Im tau).
* A in SL(2, Z) acts on tau by Moebius, tau -> (a tau + b) / (c tau + d),
  and on slopes by (p, q) -> (a p - b q, -c p + d q).  With this pair
  |p' + q' tau'| / sqrt(Im tau') = |p + q tau| / sqrt(Im tau) identically;
  ``SLOPE_ACTION_SIGNS`` records the sign pattern.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import nnls

from horoforge.core import Bifunctional
from horoforge.domains import SlopeDirections, UpperHalfPlane
from horoforge.dynamics import GroupElement
from horoforge.geometries.currents import SlopeCurrent
from horoforge.geometries.minsky import hyperbolic_distance

# (p, q) -> (s0*a*p + s1*b*q, s2*c*p + s3*d*q)
SLOPE_ACTION_SIGNS = (1, -1, -1, 1)

MIN_IMAG = 1e-12


def torus_point(tau) -> complex:
    return TORUS_POINTS.check(tau)


TORUS_POINTS = UpperHalfPlane(min_imag=MIN_IMAG)


def _abs_periods(tau: complex, c: SlopeCurrent) -> np.ndarray:
    return np.abs(c.p + c.q * tau)


def torus_flat_length(tau, c: SlopeCurrent) -> float:
    tau = complex(tau)
    return float(np.dot(c.w, _abs_periods(tau, c)) / math.sqrt(tau.imag))


def torus_extremal_length(tau, c: SlopeCurrent) -> float:
    """(total flat length)^2 on the unit-area flat torus; classical for one slope."""
    tau = complex(tau)
    total = float(np.dot(c.w, _abs_periods(tau, c)))
    return total * total / tau.imag


def torus_intersection(c1: SlopeCurrent, c2: SlopeCurrent) -> float:
    cross = np.abs(np.outer(c1.p, c2.q) - np.outer(c1.q, c2.p))
    return float(c1.w @ cross @ c2.w)


def minsky_inequality_check(tau, alpha: SlopeCurrent, G: SlopeCurrent) -> float:
    """sqrt(Ext(alpha)) sqrt(Ext(G)) - i(alpha, G); nonnegative on the torus."""
    if len(alpha) != 1:
        raise ValueError("alpha must be a single weighted slope")
    return math.sqrt(torus_extremal_length(tau, alpha)) * math.sqrt(torus_extremal_length(tau, G)) - torus_intersection(alpha, G)


def teichmuller_distance(tau1, tau2) -> float:
    """Teichmueller distance of unit-area flat tori: half the hyperbolic distance."""
    return 0.5 * hyperbolic_distance(complex(tau1), complex(tau2))


# --- systole ---------------------------------------------------------------


def _systole_bound(tau: complex) -> tuple[int, int]:
    # |p + q tau| <= 1 (slope (1,0)) forces |q| Im tau <= 1 and |p + q Re tau| <= 1
    qmax = int(math.floor(1.0 / tau.imag + 1e-9))
    pmax = int(math.ceil(1.0 + qmax * abs(tau.real)))
    return pmax, qmax


def torus_systole(tau) -> float:
    """Shortest flat length over primitive slopes with |p| <= P, 0 <= q <= Q.

    The box encloses every lattice vector no longer than 1 = |1|, hence the
    shortest one.
    """
    tau = complex(tau)
    pmax, qmax = _systole_bound(tau)
    best = math.inf
    for q in range(0, qmax + 1):
        ps = np.arange(-pmax, pmax + 1)
        if q == 0:
            ps = np.array([1])
        else:
            ps = ps[np.gcd(ps, q) == 1]
        if ps.size:
            best = min(best, float(np.min(np.abs(ps + q * tau))))
    return best / math.sqrt(tau.imag)


# --- SL(2, Z) ---------------------------------------------------------------


def _check_sl2z(A) -> tuple[int, int, int, int]:
    arr = np.asarray(A)
    if arr.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ValueError("matrix entries must be integers")
    a, b, c, d = (int(v) for v in arr.reshape(-1))
    if a * d - b * c != 1:
        raise ValueError(f"matrix {arr.tolist()} is not unimodular (det = {a * d - b * c})")
    return a, b, c, d


def moebius(A, tau: complex) -> complex:
    (a, b), (c, d) = A
    return (a * tau + b) / (c * tau + d)


def slope_matrix(A, signs=None) -> np.ndarray:
    a, b, c, d = np.asarray(A).reshape(-1)
    s = SLOPE_ACTION_SIGNS if signs is None else signs
    return np.array([[s[0] * a, s[1] * b], [s[2] * c, s[3] * d]], dtype=float)


def sl2z_action(A, target: str = "slopes", signs=None) -> GroupElement:
    """GroupElement of A on torus points and on slopes (or on torus points twice).

    ``signs`` overrides the slope convention; only useful for negative controls.
    """
    a, b, c, d = _check_sl2z(A)
    M = np.array([[a, b], [c, d]])
    Minv = np.array([[d, -b], [-c, a]])
    on_M = lambda tau: complex(moebius(M, tau))
    inv_M = lambda tau: complex(moebius(Minv, tau))
    if target == "points":
        return GroupElement.pair(on_M, on_M, inv_M, inv_M, f"A{M.tolist()}")
    if target != "slopes":
        raise ValueError(f"unknown target {target!r}")
    S = slope_matrix(M, signs)
    Sinv = slope_matrix(Minv, signs)
    return GroupElement.pair(
        on_M, lambda cur: cur.transformed(S), inv_M, lambda cur: cur.transformed(Sinv), f"A{M.tolist()}"
    )


def dilatation(A) -> float:
    a, b, c, d = _check_sl2z(A)
    tr = abs(a + d)
    if tr <= 2:
        return 1.0
    return (tr + math.sqrt(tr * tr - 4)) / 2


def axis_point(A) -> complex:
    """Highest point of the hyperbolic axis of A (A must be hyperbolic, c != 0)."""
    a, b, c, d = _check_sl2z(A)
    if abs(a + d) <= 2 or c == 0:
        raise ValueError("need a hyperbolic matrix with c != 0")
    # fixed points of (a t + b)/(c t + d):  c t^2 + (d - a) t - b = 0
    disc = (d - a) ** 2 + 4 * b * c
    centre = (a - d) / (2 * c)
    radius = math.sqrt(disc) / (2 * abs(c))
    return complex(centre, radius)


# --- Liouville surrogate ---------------------------------------------------


class LiouvilleFit(NamedTuple):
    current: SlopeCurrent
    residual: float


def _unit_dirs(n: int, offset: float = 0.0) -> np.ndarray:
    return (np.arange(n) + offset) * math.pi / n


def _flat_len_dirs(tau: complex, theta: np.ndarray) -> np.ndarray:
    return np.abs(np.cos(theta) + np.sin(theta) * tau) / math.sqrt(tau.imag)


@lru_cache(maxsize=4096)
def _liouville_cached(tau: complex, n_dirs: int, n_fit: int, n_val: int) -> LiouvilleFit:
    phi = _unit_dirs(n_dirs)
    th_fit = _unit_dirs(n_fit, 0.25)
    th_val = _unit_dirs(n_val, 0.5)
    b = _flat_len_dirs(tau, th_fit)
    A = np.abs(np.sin(th_fit[:, None] - phi[None, :]))
    try:
        w, _ = nnls(A / b[:, None], np.ones_like(b), maxiter=50 * n_dirs)
    except RuntimeError:
        return LiouvilleFit(SlopeCurrent.single(1.0, 0.0), math.inf)
    keep = w > 0
    if not np.any(keep):
        return LiouvilleFit(SlopeCurrent.single(1.0, 0.0), math.inf)
    cur = SlopeCurrent(tuple((math.cos(f), math.sin(f), float(v)) for f, v in zip(phi[keep], w[keep])))
    pred = np.abs(np.sin(th_val[:, None] - phi[None, keep])) @ w[keep]
    target = _flat_len_dirs(tau, th_val)
    return LiouvilleFit(cur, float(np.max(np.abs(pred - target) / target)))


def liouville_discretize(X, n_dirs: int = 64, n_val: int = 256) -> LiouvilleFit:
    """Current on n_dirs equally spaced directions whose intersection with
    every direction reproduces the flat length of X.

    Weights are a nonnegative least-squares fit (relative error) on 4*n_dirs
    directions; ``residual`` is the worst relative error on an offset
    validation grid of n_val directions.
    """
    if n_dirs < 8:
        raise ValueError("n_dirs must be at least 8")
    return _liouville_cached(torus_point(X), int(n_dirs), 4 * int(n_dirs), int(n_val))


# --- bifunctionals ----------------------------------------------------------


def _direction_grid(x, y, size, rng):
    return [SlopeCurrent.direction(t) for t in _unit_dirs(size)]


def _disk_grid(x, y, size, rng):
    """Points of H on rings of the disk model centred at i, dense toward the boundary."""
    radii = [0.0, 0.5, 0.8, 0.95, 0.99, 0.999, 0.9999]
    per_ring = max(4, size // (len(radii) - 1))
    pts = [1j]
    for r in radii[1:]:
        for a in _unit_dirs(2 * per_ring) * 1.0:
            w = r * complex(math.cos(a), math.sin(a))
            pts.append(1j * (1 + w) / (1 - w))
    return pts


def _e1_eval(tau, c):
    return 0.5 * math.log(torus_extremal_length(tau, c))


def _thurston_eval(tau, c):
    return math.log(torus_flat_length(tau, c))


def make_torus_bifunctional(kind: str, n_dirs: int = 64) -> Bifunctional:
    """kind in {"E1", "E2", "thurston_like"}.

    E1 and thurston_like pair torus points with slopes; both induce the
    Teichmueller distance (half the hyperbolic distance).  E2 pairs the
    Liouville surrogate of X with the conformal structure Z:
    I(X, Z) = 1/2 log Ext_Z(L_X); it has no closed-form oracle.
    """
    slopes = SlopeDirections()
    if kind == "E1":
        return Bifunctional(
            name="torus-e1",
            eval=_e1_eval,
            M=TORUS_POINTS,
            N=slopes,
            oracle_d=teichmuller_distance,
            action_builder=lambda A: sl2z_action(A, "slopes"),
            witness_grid=_direction_grid,
        )
    if kind == "thurston_like":
        return Bifunctional(
            name="torus-thurston",
            eval=_thurston_eval,
            M=TORUS_POINTS,
            N=slopes,
            oracle_d=teichmuller_distance,
            action_builder=lambda A: sl2z_action(A, "slopes"),
            witness_grid=_direction_grid,
        )
    if kind == "E2":

        def ev(X, Z):
            cur = liouville_discretize(X, n_dirs).current
            return 0.5 * math.log(torus_extremal_length(Z, cur))

        return Bifunctional(
            name="torus-e2",
            eval=ev,
            M=TORUS_POINTS,
            N=UpperHalfPlane(min_imag=MIN_IMAG, chart="disk"),
            action_builder=lambda A: sl2z_action(A, "points"),
            witness_grid=_disk_grid,
            meta={"n_dirs": n_dirs},
        )
    raise ValueError(f"unknown torus bifunctional kind {kind!r}")
