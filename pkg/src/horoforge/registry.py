"""Named geometries, plugin loading, and per-domain samplers and defaults."""

from __future__ import annotations

import importlib
import math
from typing import Callable

import numpy as np

from horoforge.core import Bifunctional
from horoforge.geometries.currents import SlopeCurrent
from horoforge.geometries.euclidean import euclidean_inner
from horoforge.geometries.funk import ConvexPolytope, funk_polytope, random_interior_point
from horoforge.geometries.minsky import minsky_half_plane
from horoforge.geometries.torus import make_torus_bifunctional


def _funk(cfg) -> Bifunctional:
    P = ConvexPolytope.load(cfg.polytope) if cfg.polytope else ConvexPolytope.square()
    return funk_polytope(P)


GEOMETRIES: dict[str, Callable] = {
    "euclidean": lambda cfg: euclidean_inner(cfg.dim),
    "minsky": lambda cfg: minsky_half_plane(),
    "funk": _funk,
    "torus-e1": lambda cfg: make_torus_bifunctional("E1"),
    "torus-e2": lambda cfg: make_torus_bifunctional("E2", cfg.n_dirs),
    "torus-thurston": lambda cfg: make_torus_bifunctional("thurston_like"),
}


def load_plugin(spec: str) -> Bifunctional:
    """``module:attr`` naming a Bifunctional or a zero-argument factory for one."""
    mod_name, sep, attr = spec.partition(":")
    if not sep or not mod_name or not attr:
        raise ValueError(f"plugin must look like 'module:attr', got {spec!r}")
    try:
        obj = getattr(importlib.import_module(mod_name), attr)
    except AttributeError:
        raise ValueError(f"module {mod_name!r} has no attribute {attr!r}") from None
    if not isinstance(obj, Bifunctional) and callable(obj):
        obj = obj()
    if not isinstance(obj, Bifunctional):
        raise ValueError(f"plugin {spec!r} did not produce a Bifunctional")
    return obj


def build_geometry(cfg) -> Bifunctional:
    name = cfg.geometry
    if name == "custom":
        if not cfg.plugin:
            raise ValueError("geometry 'custom' needs [geometry] plugin = module:attr")
        return load_plugin(cfg.plugin)
    if ":" in name:
        return load_plugin(name)
    if name not in GEOMETRIES:
        raise ValueError(f"unknown geometry {name!r}; choose from {', '.join(sorted(GEOMETRIES))} or custom")
    return GEOMETRIES[name](cfg)


def random_point(domain, rng: np.random.Generator):
    """A random valid point of a built-in domain kind."""
    kind = domain.kind
    if kind == "complex-upper-half-plane":
        return complex(rng.uniform(-1.0, 1.0), math.exp(rng.uniform(math.log(0.5), math.log(3.0))))
    if kind == "polytope-interior":
        return random_interior_point(domain.P, rng)
    if kind == "real-vector":
        return rng.normal(size=domain.dim)
    if kind == "slope-current":
        return SlopeCurrent.direction(float(rng.uniform(0.0, math.pi)))
    if kind == "real-parameter":
        return float(rng.normal(scale=3.0))
    if kind == "facet-index":
        return int(rng.integers(domain.count))
    raise ValueError(f"cannot sample {kind!r} points")


def default_landmarks(domain) -> list:
    kind = domain.kind
    if kind == "complex-upper-half-plane":
        return [1j, 2j, 1 + 1j, -1 + 1j, 0.5j]
    if kind == "polytope-interior":
        c = domain.P.vertices.mean(axis=0)
        return [c] + [0.5 * (c + v) for v in domain.P.vertices]
    if kind == "real-vector":
        eye = np.eye(domain.dim)
        return [np.zeros(domain.dim)] + list(eye) + list(-eye)
    raise ValueError(f"no default landmarks for {kind!r}; set [landmarks] points")
