"""R^n from the inner product with unit vectors, I(x, y) = <x, y/|y|>."""

from __future__ import annotations

import math

import numpy as np

from horoforge.core import Bifunctional
from horoforge.domains import RealVectors
from horoforge.dynamics import GroupElement


def _eval(x, y):
    return float(x @ y) / math.sqrt(float(y @ y))


def _grid(x, y, size, rng):
    dim = x.shape[0]
    u = rng.standard_normal((size, dim))
    pts = list(u / np.linalg.norm(u, axis=1, keepdims=True))
    diff = x - y
    nd = np.linalg.norm(diff)
    if nd > 0:
        pts.insert(0, diff / nd)
    return pts


def _oracle(x, y):
    return float(np.linalg.norm(np.subtract(x, y, dtype=float)))


def orthogonal_action(R) -> GroupElement:
    """Act by the orthogonal matrix R on both factors; I is invariant."""
    R = np.asarray(R, dtype=float)
    if not np.allclose(R @ R.T, np.eye(R.shape[0]), atol=1e-12):
        raise ValueError("matrix is not orthogonal")
    f = lambda v: R @ v
    finv = lambda v: R.T @ v
    return GroupElement.pair(f, f, finv, finv, "rotation")


def translation_action(v) -> GroupElement:
    """Translate M by v (N is left alone); an isometry of the induced metric."""
    v = np.asarray(v, dtype=float)
    ident = lambda z: z
    return GroupElement.pair(lambda x: x + v, ident, lambda x: x - v, ident, "translation")


def euclidean_inner(dim: int) -> Bifunctional:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return Bifunctional(
        name=f"euclidean-{dim}",
        eval=_eval,
        M=RealVectors(dim),
        N=RealVectors(dim, exclude_zero=True),
        oracle_d=_oracle,
        action_builder=orthogonal_action,
        witness_grid=_grid,
    )


def euclidean_distance_functional(dim: int) -> Bifunctional:
    """I = |x - y| on R^n x R^n; M = N, used for triangle-deviation checks."""
    return Bifunctional(
        name=f"euclidean-distance-{dim}",
        eval=lambda x, y: float(np.linalg.norm(x - y)),
        M=RealVectors(dim),
        N=RealVectors(dim),
        oracle_d=_oracle,
        same_space=True,
    )


def squared_distance_functional(dim: int) -> Bifunctional:
    return Bifunctional(
        name=f"squared-distance-{dim}",
        eval=lambda x, y: float(np.dot(x - y, x - y)),
        M=RealVectors(dim),
        N=RealVectors(dim),
        same_space=True,
    )
