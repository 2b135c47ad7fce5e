"""Hyperbolic plane from Minsky's function I(x + iy, t) = log(y + (t + x)^2 / y).

Up to an additive constant, t -> I(., t) is the Busemann function of the
ideal point -t, so sup_t of differences recovers the hyperbolic distance.
"""

from __future__ import annotations

import math

import numpy as np

from horoforge.core import Bifunctional
from horoforge.domains import DomainError, RealLine, UpperHalfPlane
from horoforge.dynamics import GroupElement


def minsky_eval(z: complex, t: float) -> float:
    x, y = z.real, z.imag
    return math.log(y + (t + x) ** 2 / y)


def hyperbolic_distance(z1: complex, z2: complex) -> float:
    return math.acosh(1.0 + abs(z1 - z2) ** 2 / (2.0 * z1.imag * z2.imag))


def _grid(x, y, size, rng):
    half = max(1, (size - 1) // 2)
    ts = np.logspace(-3, 4, half)
    return [0.0] + [float(t) for t in ts] + [float(-t) for t in ts]


def mobius(m, z):
    (a, b), (c, d) = m
    return (a * z + b) / (c * z + d)


def psl2r_action(m) -> GroupElement:
    """Moebius action on H and the induced action on t = -(ideal point).

    I itself is only invariant up to a t-dependent constant (except for
    parabolics fixing infinity); horofunctions transform exactly.
    """
    m = np.asarray(m, dtype=float)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det <= 0:
        raise ValueError("matrix must have positive determinant")
    m = m / math.sqrt(det)
    inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])

    def on_t(mat):
        def f(t):
            s = -t
            den = mat[1, 0] * s + mat[1, 1]
            if den == 0:
                raise DomainError("ideal point mapped to infinity")
            return -(mat[0, 0] * s + mat[0, 1]) / den

        return f

    return GroupElement.pair(
        lambda z: complex(mobius(m, z)), on_t(m), lambda z: complex(mobius(inv, z)), on_t(inv), f"mobius{m.tolist()}"
    )


def rotation_about_i(angle: float) -> GroupElement:
    """Elliptic element rotating H about i by ``angle``."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return psl2r_action([[c, s], [-s, c]])


def minsky_half_plane() -> Bifunctional:
    return Bifunctional(
        name="minsky",
        eval=minsky_eval,
        M=UpperHalfPlane(),
        N=RealLine(),
        oracle_d=hyperbolic_distance,
        action_builder=psl2r_action,
        witness_grid=_grid,
    )
