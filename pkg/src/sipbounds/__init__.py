"""Semi-inner products on finite-dimensional real normed spaces and certified
bounds on the generalized triangle-inequality ratio."""

from .bounds import (
    BoundReport,
    BoundResult,
    Diagnostic,
    PreconditionError,
    WeightVector,
    best_lower_bound,
    reverse_ratio_bound,
    self_anchor_bound,
    sip_lower_bound,
    triangle_ratio,
    weighted_inequality_check,
)
from .sip import (
    Enclosure,
    SipQuery,
    diff_quotient,
    sip,
    sip_certified_lower,
    sip_certified_upper,
    sip_value,
    tau_one_sided,
)
from .space import NormKind, NormSpec, as_vector, norm_eval, validate_norm
from .witness import WitnessCase, sharpness_witness, slack_curve

__version__ = "0.1.0"
