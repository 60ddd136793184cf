"""Decision-based attack engines, search spaces and initializers."""
from .augment import augment_uv
from .ea import EAConfig, run_ea
from .evasion import EAGR, EAR, EvasionOracle, wrap_with_evasion
from .init import init_dodging, init_impersonation, init_impersonation_image
from .sfa import SFAConfig, run_sfa
from .spaces import ImageSpace, SearchSpace, UVSpace, make_image_space, make_uv_space
from .trace import BUDGET_EXHAUSTED, INIT_FAILED, SKIPPED, SUCCESS, AttackTrace, TraceRecord

__all__ = [
    "augment_uv", "EAConfig", "run_ea", "EAR", "EAGR", "EvasionOracle", "wrap_with_evasion",
    "init_dodging", "init_impersonation", "init_impersonation_image", "SFAConfig", "run_sfa",
    "ImageSpace", "SearchSpace", "UVSpace", "make_image_space", "make_uv_space",
    "BUDGET_EXHAUSTED", "INIT_FAILED", "SKIPPED", "SUCCESS", "AttackTrace", "TraceRecord",
]
