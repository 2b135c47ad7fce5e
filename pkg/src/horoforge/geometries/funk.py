"""Funk geometry of a convex polytope.

I(x, H) = log dist(x, H) over the facet hyperplanes H.  For a polytope
the supremum over all supporting hyperplanes is attained on a facet, so the
induced distance over the finite facet set is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import ConvexHull

from horoforge.core import Bifunctional
from horoforge.domains import DomainError, FacetIndices, RealVectors


@dataclass(frozen=True)
class ConvexPolytope:
    vertices: np.ndarray
    normals: np.ndarray  # unit outward normals, one row per facet
    offsets: np.ndarray  # <n_i, v> <= c_i

    @classmethod
    def from_vertices(cls, vertices, tol: float = 1e-10) -> "ConvexPolytope":
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] < 2:
            raise ValueError("need an (n, d) vertex array with d >= 2")
        hull = ConvexHull(V)
        normals, offsets = [], []
        for eq in hull.equations:
            n, c = eq[:-1], -eq[-1]
            scale = np.linalg.norm(n)
            n, c = n / scale, c / scale
            # merge coplanar simplices returned by qhull
            if any(np.allclose(n, m, atol=tol) and abs(c - o) <= tol for m, o in zip(normals, offsets)):
                continue
            normals.append(n)
            offsets.append(c)
        return cls(V[hull.vertices], np.array(normals), np.array(offsets))

    @classmethod
    def load(cls, path) -> "ConvexPolytope":
        """Plain text, one vertex per line, whitespace-separated decimals."""
        rows = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                rows.append([float(tok) for tok in line.split()])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
        if len({len(r) for r in rows}) != 1:
            raise ValueError(f"{path}: vertices have inconsistent dimensions")
        return cls.from_vertices(rows)

    @classmethod
    def square(cls, half_width: float = 1.0) -> "ConvexPolytope":
        h = half_width
        return cls.from_vertices([[-h, -h], [h, -h], [h, h], [-h, h]])

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def slack(self, x) -> np.ndarray:
        return self.offsets - self.normals @ x

    def contains_interior(self, x) -> bool:
        return bool(np.all(self.slack(x) > 0))


class PolytopeInterior(RealVectors):
    kind = "polytope-interior"
    refinable = False

    def __init__(self, P: ConvexPolytope):
        super().__init__(P.dim)
        self.P = P

    def check(self, point):
        x = super().check(point)
        if not self.P.contains_interior(x):
            raise DomainError(f"point {x.tolist()} is not interior to the polytope")
        return x


def funk_ray_exit(P: ConvexPolytope, x, y) -> float:
    """Closed form F(x, y) = log(|x - a| / |y - a|), a = exit point of the ray x -> y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = y - x
    if not np.any(u):
        return 0.0
    rate = P.normals @ u
    ok = rate > 0
    s = np.min(P.slack(x)[ok] / rate[ok])  # a = x + s u, s > 1
    return math.log(s / (s - 1.0))


def funk_polytope(P: ConvexPolytope) -> Bifunctional:
    normals, offsets = P.normals, P.offsets

    def ev(x, k):
        return math.log(offsets[k] - float(normals[k] @ x))

    return Bifunctional(
        name="funk",
        eval=ev,
        M=PolytopeInterior(P),
        N=FacetIndices(len(offsets)),
        oracle_d=lambda x, y: funk_ray_exit(P, x, y),
        witness_grid=lambda x, y, size, rng: list(range(len(offsets))),
        meta={"polytope": P},
    )


def random_polygon(rng, n_points: int = 12) -> ConvexPolytope:
    """Convex hull of random points around the origin (origin stays inside)."""
    while True:
        ang = np.sort(rng.uniform(0, 2 * np.pi, n_points))
        rad = rng.uniform(0.5, 2.0, n_points)
        pts = np.c_[rad * np.cos(ang), rad * np.sin(ang)]
        P = ConvexPolytope.from_vertices(pts)
        if P.contains_interior(np.zeros(2)) and len(P.offsets) >= 3:
            return P


def random_interior_point(P: ConvexPolytope, rng) -> np.ndarray:
    """Uniform-in-barycentric mix of vertices, pulled slightly toward the centroid."""
    w = rng.dirichlet(np.ones(len(P.vertices)))
    c = P.vertices.mean(axis=0)
    return 0.05 * c + 0.95 * (w @ P.vertices)
