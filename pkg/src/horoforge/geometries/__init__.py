"""Built-in geometries with closed-form checks."""

from horoforge.geometries.currents import SlopeCurrent
from horoforge.geometries.euclidean import euclidean_inner
from horoforge.geometries.funk import ConvexPolytope, funk_polytope
from horoforge.geometries.minsky import minsky_half_plane
from horoforge.geometries.torus import (
    liouville_discretize,
    make_torus_bifunctional,
    minsky_inequality_check,
    sl2z_action,
    torus_extremal_length,
    torus_flat_length,
    torus_intersection,
    torus_systole,
)

__all__ = [
    "ConvexPolytope",
    "SlopeCurrent",
    "euclidean_inner",
    "funk_polytope",
    "liouville_discretize",
    "make_torus_bifunctional",
    "minsky_half_plane",
    "minsky_inequality_check",
    "sl2z_action",
    "torus_extremal_length",
    "torus_flat_length",
    "torus_intersection",
    "torus_systole",
]
