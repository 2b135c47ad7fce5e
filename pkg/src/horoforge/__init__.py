"""Distances, horofunctions and translation lengths induced by a bifunctional I: M x N -> R."""

from horoforge.core import (
    Bifunctional,
    WitnessSet,
    check_separation,
    evaluate,
    lipschitz_defect,
    quotient_points,
    witnesses,
)
from horoforge.domains import DomainError
from horoforge.metric import SearchConfig, distance, distance_on_witnesses, refine_witnesses, symmetrize

__version__ = "0.1.0"
