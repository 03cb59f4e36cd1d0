"""Extremal families ``x_j = eps * a`` showing the bound constants cannot be improved.

For each kind the family is evaluated through :mod:`sipbounds.bounds` and
:mod:`sipbounds.sip`, and the largest constant the instance would admit is
measured from those evaluations.  As ``eps -> 0`` the admissible constant
decreases to 1/2 for the quadratic kinds; the norm-gap kinds are attained
with equality for every ``eps``.

===============  ================================  =========================
kind             bounded quantity                  admissible constant
===============  ================================  =========================
sip_quadratic    ``<x, a>_i``                      ``1 / (2 - eps)``
mean_quadratic   ``||mean|| ||a|| + 1/2 sum ...``  ``eps + (1 - eps)^2 / 2``
ratio_quadratic  triangle ratio                    ``1 / (2 - eps)``
sip_norm_gap     ``<x, a>_i``                      1 (equality)
ratio_norm_gap   triangle ratio                    1 (equality)
sip_coarse       ``<x, a>_i``                      none known; slack only
===============  ================================  =========================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .bounds import (
    WeightVector,
    reverse_ratio_bound,
    sip_lower_bound,
    triangle_ratio,
    weighted_inequality_check,
)
from .sip import sip
from .space import NormSpec, as_vector

__all__ = ["KINDS", "WitnessCase", "SlackRow", "admissible_constant", "sharpness_witness",
           "measure", "slack_curve", "row_violates"]

KINDS = (
    "sip_quadratic",
    "mean_quadratic",
    "ratio_quadratic",
    "sip_norm_gap",
    "ratio_norm_gap",
    "sip_coarse",
)
EQUALITY_KINDS = ("sip_norm_gap", "ratio_norm_gap")
_SINGLE = ("sip_quadratic", "sip_norm_gap", "sip_coarse")


def admissible_constant(kind: str, eps: float) -> Optional[float]:
    """Closed-form largest constant the ``eps`` family admits (``None`` if unknown)."""
    if kind in ("sip_quadratic", "ratio_quadratic"):
        return 1.0 / (2.0 - eps)
    if kind == "mean_quadratic":
        # eps + (1 - eps)^2 / 2, rearranged so tiny eps does not round to 1/2
        return 0.5 + 0.5 * eps * eps
    if kind in EQUALITY_KINDS:
        return 1.0
    if kind == "sip_coarse":
        return None
    raise ValueError(f"unknown witness kind {kind!r}")


@dataclass(frozen=True, eq=False)
class WitnessCase:
    kind: str
    epsilon: float
    a: np.ndarray
    xs: tuple[np.ndarray, ...]
    ps: WeightVector
    admissible_constant: Optional[float]


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return eps


def sharpness_witness(kind: str, a, eps: float, n_count: int = 3) -> WitnessCase:
    """Build the family ``x_1 = ... = x_n = eps * a`` with uniform weights.

    Single-vector kinds (the semi-inner-product ones) ignore `n_count`.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown witness kind {kind!r}; expected one of {KINDS}")
    eps = _check_eps(eps)
    a = as_vector(a, "a")
    if not np.any(a):
        raise ValueError("anchor a must be nonzero")
    if n_count < 1:
        raise ValueError("n_count must be positive")
    count = 1 if kind in _SINGLE else int(n_count)
    x = eps * a
    x.flags.writeable = False
    return WitnessCase(kind, eps, a, (x,) * count, WeightVector.uniform(count),
                       admissible_constant(kind, eps))


class SlackRow(NamedTuple):
    eps: float
    admissible_constant: Optional[float]
    measured_constant: float
    bound_value: float
    target: float
    measured_slack: float


def measure(case: WitnessCase, norm: NormSpec) -> SlackRow:
    """Evaluate the bound on `case` and derive the largest constant it would allow.

    `target` is the quantity being bounded and `bound_value` the bound's
    value; the slack is their difference.  For the quadratic kinds the bound
    carries a factor 1/2, so the measured constant is ``target / (2 bound)``.
    """
    kind, a, xs, ps = case.kind, case.a, case.xs, case.ps
    if kind in ("sip_quadratic", "sip_norm_gap", "sip_coarse"):
        variant = {"sip_quadratic": "quadratic", "sip_norm_gap": "norm_gap",
                   "sip_coarse": "coarse"}[kind]
        target = sip(xs[0], a, norm, "inferior").lo
        bound = sip_lower_bound(xs[0], a, norm, variant)
    elif kind == "mean_quadratic":
        check = weighted_inequality_check(xs, ps, a, norm, "quadratic")
        target, bound = check.lhs, check.rhs
    else:
        form = "quadratic" if kind == "ratio_quadratic" else "norm_gap"
        result = reverse_ratio_bound(xs, ps, a, norm, form)
        if not result.applicable:
            raise RuntimeError(f"witness instance failed its hypotheses: {result.diagnostics}")
        target, bound = triangle_ratio(xs, ps, norm), result.value
    if kind in EQUALITY_KINDS:
        constant = target / bound
    else:
        constant = target / (2.0 * bound)
    return SlackRow(case.epsilon, case.admissible_constant, float(constant), float(bound),
                    float(target), float(target - bound))


def slack_curve(
    kind: str,
    a,
    eps_list: Sequence[float],
    norm: Optional[NormSpec] = None,
    n_count: int = 3,
) -> list[SlackRow]:
    """Measure the witness family along a strictly decreasing list of ``eps``."""
    eps_values = [_check_eps(e) for e in eps_list]
    if not eps_values:
        raise ValueError("eps_list is empty")
    if any(b >= a_ for a_, b in zip(eps_values, eps_values[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    norm = NormSpec.lp(2) if norm is None else norm
    return [measure(sharpness_witness(kind, a, e, n_count), norm) for e in eps_values]


def row_violates(row: SlackRow, rtol: float = 1e-9) -> bool:
    """True if a measured constant beats the admissible one, or the slack is negative."""
    scale = max(1.0, abs(row.target))
    if row.measured_slack < -rtol * scale:
        return True
    if row.admissible_constant is None or math.isnan(row.admissible_constant):
        return False
    return row.measured_constant > row.admissible_constant * (1.0 + rtol)
