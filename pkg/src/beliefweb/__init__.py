"""Product extensions and intersection-overlap models for webs of probability tables."""

from .expansion import (
    AllZeroWeight,
    ConsistencyVerdict,
    ExpansionResult,
    alternative_model,
    check_conditional_consistency,
    check_consistency,
    product_extension,
)
from .maxent import Inconsistent, MaxentResult, NotConverged, maxent_fit, sample_K, verify_guarantee_chain
from .model import (
    JointDistribution,
    JointSpace,
    ProbTable,
    Variable,
    condition,
    enumerate_states,
    marginalize,
    uniform,
)
from .scoring import (
    ScoreReport,
    guaranteed_score_alt,
    guaranteed_score_standard,
    log_score,
    relative_score,
    score_report,
)
from .system import ProbabilitySystem
from .web import NotAWeb, Structure, Unpacking, classify, find_terminals, intersection_overlaps, unpack

__version__ = "0.1.0"
