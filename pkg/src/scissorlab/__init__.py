"""Planar scissor-linkage mechanisms.

Exact and closed-form forward kinematics for chains of pin-jointed scissor
units, plus two gradient-based inverse-design solvers: morphing a deployed
chain into a target curvature profile, and making the distal tip write a
target curve during an actuation sweep.
"""

__version__ = "0.1.0"

from .geometry import (
    CurvatureReport,
    UnitGeometry,
    UnitState,
    closure_actuation,
    curvature_report,
    effective_curvature,
    face_normals,
    osculating_curvature,
    turning_curvature,
    unit_rotation_angle,
    unit_width,
)
from .kinematics import (
    ChainConfig,
    ChainSpec,
    SectionedSpec,
    TipTrajectory,
    assemble_chain,
    center_shift,
    perturbative_config,
    propagate_angles,
    sweep_tip,
    tip_segmented,
)

__all__ = [
    "__version__",
    "CurvatureReport",
    "UnitGeometry",
    "UnitState",
    "closure_actuation",
    "curvature_report",
    "effective_curvature",
    "face_normals",
    "osculating_curvature",
    "turning_curvature",
    "unit_rotation_angle",
    "unit_width",
    "ChainConfig",
    "ChainSpec",
    "SectionedSpec",
    "TipTrajectory",
    "assemble_chain",
    "center_shift",
    "perturbative_config",
    "propagate_angles",
    "sweep_tip",
    "tip_segmented",
]
