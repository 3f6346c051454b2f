from .estimates import IndexEstimate, estimate_alpha, estimate_beta, holder_transport
from .checks import CHECKS, Fixtures, VerifyConfig, VerifyReport, run_all, run_check

__all__ = [
    "IndexEstimate", "estimate_alpha", "estimate_beta", "holder_transport",
    "CHECKS", "Fixtures", "VerifyConfig", "VerifyReport", "run_all", "run_check",
]
