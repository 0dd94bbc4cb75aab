"""Polar transforms on cones, curve volumes and Zariski decompositions for numerical models."""

from .chow import ChowModel, ModelError, load_model, preset
from .cones import PolyhedralCone, dual_cone
from .polar import (NotBigError, PolarConvergenceError, PolarOptions, curve_volume, derivative, morse_check,
                    polar_eval, zariski)

__all__ = [
    "ChowModel", "ModelError", "NotBigError", "PolarConvergenceError", "PolarOptions", "PolyhedralCone",
    "curve_volume", "derivative", "dual_cone", "load_model", "morse_check", "polar_eval", "preset", "zariski",
]
