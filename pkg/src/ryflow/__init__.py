"""Numerical simulation and verification of the (alpha, beta)-Ricci-Yamabe flow.

    dg/dt = -2 alpha Ric - beta R g

on symmetry-reduced closed manifolds: conformal metrics on the flat torus T^2
and warped products S^1 x S^(n-1).
"""

from ryflow.errors import (
    DegenerateMetricError,
    InvalidCurvatureError,
    InvalidStateError,
    RegimeError,
    UnsupportedDimensionError,
)
from ryflow.params import FlowParams
from ryflow.geometry import (
    AlgebraicCurvature,
    ConformalTorusState,
    CurvatureFields,
    WarpedProductState,
    b_identity_residual,
    curvature_conformal2d,
    curvature_warped,
    hamilton_B,
    weyl_from_rm,
)
from ryflow.flow import IntegratorConfig, RunOutcome, rhs_conformal2d, rhs_warped, run, step

__version__ = "0.1.0"

__all__ = [
    "AlgebraicCurvature",
    "ConformalTorusState",
    "CurvatureFields",
    "DegenerateMetricError",
    "FlowParams",
    "IntegratorConfig",
    "InvalidCurvatureError",
    "InvalidStateError",
    "RegimeError",
    "RunOutcome",
    "UnsupportedDimensionError",
    "WarpedProductState",
    "b_identity_residual",
    "curvature_conformal2d",
    "curvature_warped",
    "hamilton_B",
    "rhs_conformal2d",
    "rhs_warped",
    "run",
    "step",
    "weyl_from_rm",
]
