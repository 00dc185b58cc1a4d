"""Planar ODE layer: integration, saddles, separatrices and splittings."""
from .field import PlanarField, Saddle, Section
from .glued import GluedGeometry, GluedGlasses, GluedGlassesSpec, build_glued_glasses, glued_splittings
from .homoclinic import (
    LoopFamily,
    SparklingMeasurement,
    bt_family,
    cubic_family,
    find_homoclinic,
    measure_sparkling_flow,
    orbit_returns,
)
from .integrate import Crossing, Trajectory, integrate
from .mapfit import fit_map_model, predict_sparkling
from .saddle import find_saddle, first_crossing, splitting, trace_separatrix
from .systems import bogdanov_takens, cubic_energy, hamiltonian_cubic, linear_field, rotation

__all__ = [
    "Crossing",
    "GluedGeometry",
    "GluedGlasses",
    "GluedGlassesSpec",
    "LoopFamily",
    "PlanarField",
    "Saddle",
    "Section",
    "SparklingMeasurement",
    "Trajectory",
    "bogdanov_takens",
    "bt_family",
    "build_glued_glasses",
    "cubic_energy",
    "cubic_family",
    "find_homoclinic",
    "find_saddle",
    "first_crossing",
    "fit_map_model",
    "glued_splittings",
    "hamiltonian_cubic",
    "integrate",
    "linear_field",
    "measure_sparkling_flow",
    "orbit_returns",
    "predict_sparkling",
    "rotation",
    "splitting",
    "trace_separatrix",
]
