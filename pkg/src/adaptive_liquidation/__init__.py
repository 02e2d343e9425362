"""Optimal signal-adaptive liquidation with temporary and transient price impact."""

from .model import (
    REFERENCE_PARAMS,
    AssumptionViolated,
    CoefficientSet,
    EigenSystem,
    ModelParams,
    build_eigen_system,
    check_assumption,
)

__all__ = [
    "REFERENCE_PARAMS",
    "AssumptionViolated",
    "CoefficientSet",
    "EigenSystem",
    "ModelParams",
    "build_eigen_system",
    "check_assumption",
]
