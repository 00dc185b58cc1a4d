"""Saddle-loop polycycles: Dulac maps, sparkling splittings and their asymptotics.

The map layer (:mod:`polycycle.dulac`, :mod:`polycycle.models`) works in
configurable extended precision; :mod:`polycycle.flow` checks the map models
against planar vector fields integrated in double precision.
"""
from . import asymptotics, errors, precision
from .asymptotics import FitResult, band, band_stable, boundedness_check, limit_estimate, linear_fit
from .dulac import (
    DulacMap,
    LoopReturnMap,
    OrbitResult,
    SparklingTable,
    compose_dulac,
    count_turns,
    dulac_apply,
    loop_iterate,
    solve_sparkling,
    sparkling_table,
)
from .errors import PolycycleError
from .models import (
    BridgeTransition,
    CurveSet,
    FamilyComparison,
    PolycycleModel,
    StaircasePoint,
    bifurcation_diagram,
    compare_families,
    estimate_phi,
    holder_profile,
    index_profile,
    phi,
    staircase,
    staircase_eps,
    synchronize,
)
from .precision import DEFAULT_BITS, context, scalar

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BITS",
    "BridgeTransition",
    "CurveSet",
    "DulacMap",
    "FamilyComparison",
    "FitResult",
    "LoopReturnMap",
    "OrbitResult",
    "PolycycleError",
    "PolycycleModel",
    "SparklingTable",
    "StaircasePoint",
    "asymptotics",
    "band",
    "band_stable",
    "bifurcation_diagram",
    "boundedness_check",
    "compare_families",
    "compose_dulac",
    "context",
    "count_turns",
    "dulac_apply",
    "errors",
    "estimate_phi",
    "holder_profile",
    "index_profile",
    "limit_estimate",
    "linear_fit",
    "loop_iterate",
    "phi",
    "precision",
    "scalar",
    "solve_sparkling",
    "sparkling_table",
    "staircase",
    "staircase_eps",
    "synchronize",
]
