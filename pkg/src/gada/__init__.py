"""Geometry-aware dictionary attacks on hard-label face verification, at desk scale.

Subpackages: ``attacks`` (search spaces, EA and SFA engines, evasion), and
``harness`` (synthetic data, experiment runner, metrics). The top-level
modules hold the face model, the rasterizer, the toy verifier, the
perturbation dictionary and the stateful detector.
"""
from .errors import BudgetExhausted, InitFailed, InvalidArgument, NoFace, UndefinedFeature
from .facemodel import AlignmentParams, FaceModel, generate_synthetic_model, reconstruct_vertices
from .oracle import HardLabelOracle, VerifierConfig

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted", "InitFailed", "InvalidArgument", "NoFace", "UndefinedFeature",
    "AlignmentParams", "FaceModel", "generate_synthetic_model", "reconstruct_vertices",
    "HardLabelOracle", "VerifierConfig",
]
