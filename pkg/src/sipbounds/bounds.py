"""Bounds on semi-inner products and on the weighted triangle ratio.

The central quantity is the triangle ratio ::

    ||sum_j p_j x_j|| / sum_j p_j ||x_j||        (a number in [0, 1])

Lower certificates compare every ``x_j`` with an anchor vector ``a`` (or with
the weighted mean itself); the upper certificate refines the triangle
inequality.  Each certificate comes back as a :class:`BoundResult` that says
whether its hypotheses held, and which index broke them if not.

Bound names used throughout (and in CLI reports):

=================  =====  ==============================================
name               side   value
=================  =====  ==============================================
anchor_quadratic   lower  ``1/2 min_j (|a|^2 - |a-x_j|^2) / (|x_j| |a|)``
anchor_coarse      lower  ``(|a| - max_j |x_j-a|) / (2 |a|)``
anchor_norm_gap    lower  ``min_j (|a| - |x_j-a|) / |x_j|``
fixed_ratio        lower  ``rho`` once ``|a| - |x_j-a| >= rho |x_j|`` for all j
self_lower         lower  ``min_j <x_j, m>_i / (|x_j| |m|)``, ``m = sum p_j x_j``
self_upper         upper  ``max_j <x_j, m>_s / (|x_j| |m|)``
=================  =====  ==============================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, NamedTuple, Optional, Sequence, Union

import numpy as np

from .sip import DEFAULT_TOL, sip_certified_lower, sip_certified_upper
from .space import EPS, NormSpec, _check_dim, _rows_norm, as_vector, norm_eval, pairwise_dims

__all__ = [
    "PreconditionError",
    "Diagnostic",
    "WeightVector",
    "BoundResult",
    "BoundReport",
    "WeightedCheck",
    "BOUND_NAMES",
    "sip_lower_bound",
    "weighted_inequality_check",
    "triangle_ratio",
    "weighted_mean",
    "reverse_ratio_bound",
    "self_anchor_bound",
    "best_lower_bound",
]

# Hypotheses are non-strict; boundary cases must count as satisfied.
PRECONDITION_RTOL = 1e-12
CERT_TOL = 1e-9

Side = Literal["lower", "upper"]

ANCHOR_FORMS = {
    "quadratic": "anchor_quadratic",
    "coarse": "anchor_coarse",
    "norm_gap": "anchor_norm_gap",
    "fixed_ratio": "fixed_ratio",
}
BOUND_NAMES = tuple(ANCHOR_FORMS.values()) + ("self_lower", "self_upper")


@dataclass(frozen=True)
class Diagnostic:
    """A failed hypothesis; `index` is the offending ``j`` or ``None`` for global ones."""

    index: Optional[int]
    condition: str

    def __str__(self) -> str:
        where = "" if self.index is None else f"j={self.index}: "
        return where + self.condition

    def to_dict(self) -> dict:
        return {"index": self.index, "condition": self.condition}


class PreconditionError(ValueError):
    """Raised by the pointwise checks when a hypothesis does not hold."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = tuple(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Nonnegative weights, normalized to sum to one at construction.

    ``raw_sum`` keeps the sum before normalization so callers can warn about it.
    """

    p: np.ndarray
    raw_sum: float = field(init=False)

    def __post_init__(self):
        raw = np.array(self.p, dtype=float, copy=True)
        if raw.ndim != 1 or raw.size == 0:
            raise ValueError("weights must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(raw)) or np.any(raw < 0):
            raise ValueError("weights must be finite and nonnegative")
        total = math.fsum(raw)
        if total <= 0:
            raise ValueError("weights must not all be zero")
        p = raw / total
        p.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "raw_sum", total)

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls(np.full(n, 1.0 / n))

    def __len__(self) -> int:
        return self.p.size


WeightsLike = Union[WeightVector, Sequence[float], np.ndarray, None]


def _weights(ps: WeightsLike, n: int) -> np.ndarray:
    if ps is None:
        return WeightVector.uniform(n).p
    w = ps if isinstance(ps, WeightVector) else WeightVector(ps)
    if len(w) != n:
        raise ValueError(f"{len(w)} weights for {n} vectors")
    return w.p


def _vectors(xs: Iterable) -> list[np.ndarray]:
    vs = [as_vector(x, f"x[{j}]") for j, x in enumerate(xs)]
    if not vs:
        raise ValueError("need at least one vector")
    pairwise_dims(vs)
    return vs


def _norms(vs: Sequence[np.ndarray], norm: NormSpec) -> np.ndarray:
    """Norms of several equal-length vectors in one vectorized pass."""
    rows = np.stack(vs)
    _check_dim(rows, norm)
    return _rows_norm(rows, norm)


def _leq(lhs: float, rhs: float, scale: float) -> bool:
    """``lhs <= rhs`` up to the precondition tolerance."""
    return lhs <= rhs + PRECONDITION_RTOL * max(1.0, scale)


def _worst(values: Sequence[float], side: Side) -> tuple[float, int]:
    """Least favourable per-index value: min for lower certificates, max for upper."""
    arr = np.asarray(values, dtype=float)
    j = int(np.argmin(arr)) if side == "lower" else int(np.argmax(arr))
    return float(arr[j]), j


@dataclass(frozen=True)
class BoundResult:
    """One evaluated certificate on the triangle ratio.

    `value` is ``None`` only when it cannot be computed at all (zero vectors);
    an inapplicable result may still carry a value for inspection.  `terms`
    holds the per-index quantities whose min (or max) gave the value.
    """

    name: str
    value: Optional[float]
    applicable: bool
    diagnostics: tuple[Diagnostic, ...] = ()
    certificate_side: Side = "lower"
    terms: tuple[float, ...] = ()
    anchor: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.applicable and self.diagnostics:
            raise ValueError("an applicable bound cannot carry diagnostics")
        if self.applicable and self.value is None:
            raise ValueError("an applicable bound needs a value")

    def violates(self, ratio: float, tol: float = CERT_TOL) -> bool:
        """True if this applicable certificate is on the wrong side of `ratio`."""
        if not self.applicable:
            return False
        if self.certificate_side == "lower":
            return self.value > ratio + tol
        return self.value < ratio - tol

    def terms_equal(self, rtol: float = 1e-9) -> bool:
        """Whether every index attains the extremal value (the tight configuration)."""
        if not self.terms:
            return False
        t = np.asarray(self.terms)
        return bool(np.all(np.abs(t - t[0]) <= rtol * max(1.0, abs(t[0]))))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "side": self.certificate_side,
            "value": self.value,
            "applicable": self.applicable,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "anchor": None if self.anchor is None else list(self.anchor),
        }


@dataclass(frozen=True)
class BoundReport:
    ratio: float
    anchor: Optional[tuple[float, ...]]
    results: tuple[BoundResult, ...]
    best_lower: Optional[BoundResult]
    upper_refinement: Optional[BoundResult]

    def violations(self, tol: float = CERT_TOL) -> list[BoundResult]:
        return [r for r in self.results if r.violates(self.ratio, tol)]


class WeightedCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def sip_lower_bound(x, a, norm: NormSpec, variant: str = "quadratic") -> float:
    """Lower bound for ``<x, a>_i`` built from ``||a||`` and ``||x - a||``.

    ``quadratic``  ``(||a||^2 - ||x-a||^2) / 2``, valid for all ``x, a``;
    ``coarse``     ``||x|| (||a|| - ||x-a||) / 2``, needs ``||a|| >= ||x-a||``;
    ``norm_gap``   ``||a|| (||a|| - ||x-a||)``, needs ``a != 0``.

    The quadratic form is evaluated as ``(||a|| - ||x-a||)(||a|| + ||x-a||) / 2``.
    """
    x = as_vector(x, "x")
    a = as_vector(a, "a")
    pairwise_dims([x, a])
    na = norm_eval(a, norm)
    dev = norm_eval(x - a, norm)
    if variant == "quadratic":
        return 0.5 * (na - dev) * (na + dev)
    if variant == "coarse":
        if not _leq(dev, na, na):
            raise PreconditionError([Diagnostic(None, "||x - a|| > ||a||")])
        return 0.5 * norm_eval(x, norm) * (na - dev)
    if variant == "norm_gap":
        if na == 0.0:
            raise PreconditionError([Diagnostic(None, "anchor a is zero")])
        return na * (na - dev)
    raise ValueError(f"unknown variant {variant!r}")


def weighted_mean(xs, ps: WeightsLike) -> np.ndarray:
    """``sum_j p_j x_j`` with weights normalized to sum to one."""
    vs = _vectors(xs)
    p = _weights(ps, len(vs))
    return np.einsum("j,jk->k", p, np.stack(vs))


def weighted_inequality_check(
    xs, ps: WeightsLike, a, norm: NormSpec, form: str = "quadratic"
) -> WeightedCheck:
    """Evaluate the weighted mean inequalities against an anchor ``a != 0``.

    ``quadratic``::

        ||sum p_j x_j|| ||a|| + 1/2 sum p_j ||x_j - a||^2  >=  1/2 ||a||^2

    ``coarse`` (requires ``||x_j - a|| <= ||a||`` for every j)::

        ||sum p_j x_j|| ||a|| + 1/2 sum p_j ||x_j|| ||x_j - a||  >=  1/2 ||a|| sum p_j ||x_j||
    """
    vs = _vectors(xs)
    p = _weights(ps, len(vs))
    a = as_vector(a, "a")
    pairwise_dims(vs + [a])
    na = norm_eval(a, norm)
    if na == 0.0:
        raise PreconditionError([Diagnostic(None, "anchor a is zero")])
    mean_norm = norm_eval(np.einsum("j,jk->k", p, np.stack(vs)), norm)
    devs = _norms([v - a for v in vs], norm)
    if form == "quadratic":
        lhs = mean_norm * na + 0.5 * math.fsum(p * devs**2)
        rhs = 0.5 * na * na
    elif form == "coarse":
        bad = [Diagnostic(j, "||x_j - a|| > ||a||") for j, d in enumerate(devs) if not _leq(d, na, na)]
        if bad:
            raise PreconditionError(bad)
        norms = _norms(vs, norm)
        lhs = mean_norm * na + 0.5 * math.fsum(p * norms * devs)
        rhs = 0.5 * na * math.fsum(p * norms)
    else:
        raise ValueError(f"unknown form {form!r}")
    scale = max(1.0, abs(lhs), abs(rhs))
    return WeightedCheck(float(lhs), float(rhs), bool(lhs >= rhs - CERT_TOL * scale))


def triangle_ratio(xs, ps: WeightsLike, norm: NormSpec) -> float:
    """``||sum p_j x_j|| / sum p_j ||x_j||``.

    Raises
    ------
    ValueError
        If every weighted norm ``p_j ||x_j||`` is zero.
    """
    vs = _vectors(xs)
    p = _weights(ps, len(vs))
    denom = math.fsum(p * _norms(vs, norm))
    if denom <= 0.0:
        raise ValueError("triangle ratio undefined: all weighted norms are zero")
    return norm_eval(np.einsum("j,jk->k", p, np.stack(vs)), norm) / denom


def _zero_diagnostics(vs, norms) -> list[Diagnostic]:
    return [Diagnostic(j, "x_j is zero") for j, nv in enumerate(norms) if nv == 0.0]


def reverse_ratio_bound(
    xs,
    ps: WeightsLike,
    a,
    norm: NormSpec,
    form: str = "norm_gap",
    rho: Optional[float] = None,
) -> BoundResult:
    """Anchor-based lower certificate on the triangle ratio.

    All forms need nonzero ``x_j`` and ``a`` and ``||x_j - a|| <= ||a||`` for
    every j; ``fixed_ratio`` instead checks ``||a|| - ||x_j - a|| >= rho ||x_j||``
    with ``0 < rho < 1`` and certifies ``rho`` itself.  Violated hypotheses are
    reported as diagnostics, never raised.
    """
    if form not in ANCHOR_FORMS:
        raise ValueError(f"unknown form {form!r}")
    name = ANCHOR_FORMS[form]
    vs = _vectors(xs)
    _weights(ps, len(vs))
    a = as_vector(a, "a")
    pairwise_dims(vs + [a])
    anchor = tuple(float(c) for c in a)
    na = norm_eval(a, norm)
    norms = _norms(vs, norm)
    diags = _zero_diagnostics(vs, norms)
    if na == 0.0:
        diags.insert(0, Diagnostic(None, "anchor a is zero"))
    if form == "fixed_ratio" and (rho is None or not 0.0 < rho < 1.0):
        diags.insert(0, Diagnostic(None, f"rho must lie in (0, 1), got {rho!r}"))
    if diags:
        return BoundResult(name, None, False, tuple(diags), "lower", (), anchor)

    devs = _norms([v - a for v in vs], norm)
    gaps = na - devs
    if form == "fixed_ratio":
        for j in range(len(vs)):
            if not _leq(rho * norms[j], gaps[j], na):
                diags.append(Diagnostic(j, "||a|| - ||x_j - a|| < rho ||x_j||"))
    else:
        for j in range(len(vs)):
            if not _leq(devs[j], na, na):
                diags.append(Diagnostic(j, "||x_j - a|| > ||a||"))

    if form == "quadratic":
        terms = gaps * (na + devs) / (norms * na)
        value = 0.5 * _worst(terms, "lower")[0]
    elif form == "coarse":
        terms = gaps / (2.0 * na)
        value = _worst(terms, "lower")[0]
    elif form == "norm_gap":
        terms = gaps / norms
        value = _worst(terms, "lower")[0]
    else:
        terms = gaps / norms
        value = float(rho)

    applicable = not diags
    if applicable:
        # the ratio lies in [0, 1], so clamping rounding overshoot is sound
        value = min(1.0, max(0.0, value))
    return BoundResult(name, float(value), applicable, tuple(diags), "lower",
                       tuple(float(t) for t in terms), anchor)


def self_anchor_bound(
    xs, ps: WeightsLike, norm: NormSpec, side: Side = "lower", tol: float = DEFAULT_TOL
) -> BoundResult:
    """Certificate anchored at the weighted mean ``m = sum p_j x_j``.

    ``lower``: ``r = min_j <x_j, m>_i / (||x_j|| ||m||)``; applicable iff ``r > 0``,
    and then ``||m|| >= r sum p_j ||x_j||``.

    ``upper``: ``R = max_j <x_j, m>_s / (||x_j|| ||m||)``; applicable iff ``R < 1``,
    and then ``||m|| <= R sum p_j ||x_j||``.

    Semi-inner products enter through their conservative enclosure endpoints
    (lower endpoint for ``r``, upper for ``R``).
    """
    if side not in ("lower", "upper"):
        raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    name = "self_lower" if side == "lower" else "self_upper"
    vs = _vectors(xs)
    p = _weights(ps, len(vs))
    mean = np.einsum("j,jk->k", p, np.stack(vs))
    nm = norm_eval(mean, norm)
    norms = [float(v) for v in _norms(vs, norm)]
    diags = _zero_diagnostics(vs, norms)
    if nm == 0.0:
        diags.insert(0, Diagnostic(None, "weighted mean is zero"))
    if diags:
        return BoundResult(name, None, False, tuple(diags), side)

    # closed-form enclosures are exact points; pad the normalized ratios by a
    # rounding bound so the certificate stays on the safe side
    pad = 8.0 * (mean.size + 4) * EPS
    if side == "lower":
        terms = [sip_certified_lower(v, mean, norm, tol) / (nv * nm) - pad
                 for v, nv in zip(vs, norms)]
    else:
        terms = [sip_certified_upper(v, mean, norm, tol) / (nv * nm) + pad
                 for v, nv in zip(vs, norms)]
    value, j = _worst(terms, side)
    if side == "lower" and not value > 0.0:
        diags.append(Diagnostic(j, "normalized <x_j, m>_i is not positive"))
    if side == "upper" and not value < 1.0:
        diags.append(Diagnostic(j, "normalized <x_j, m>_s is not below 1"))
    return BoundResult(name, value, not diags, tuple(diags), side, tuple(terms))


def best_lower_bound(
    xs,
    ps: WeightsLike,
    norm: NormSpec,
    anchors: Union[str, Sequence, None] = "mean",
    *,
    rho: Optional[float] = None,
    include: Optional[Iterable[str]] = None,
    tol: float = DEFAULT_TOL,
) -> BoundReport:
    """Evaluate every certificate and pick the strongest applicable lower one.

    `anchors` is ``"mean"`` (the default single anchor ``sum p_j x_j``) or a
    list of anchor vectors.  ``fixed_ratio`` is evaluated only when `rho` is
    given.  `include` restricts evaluation to the listed bound names.
    """
    vs = _vectors(xs)
    p = _weights(ps, len(vs))
    ratio = triangle_ratio(vs, p, norm)
    wanted = set(BOUND_NAMES if include is None else include)
    unknown = wanted - set(BOUND_NAMES)
    if unknown:
        raise ValueError(f"unknown bound names {sorted(unknown)}")

    if anchors is None or (isinstance(anchors, str) and anchors == "mean"):
        anchor_list = [np.einsum("j,jk->k", p, np.stack(vs))]
    elif isinstance(anchors, str):
        raise ValueError(f"unknown anchor strategy {anchors!r}")
    else:
        anchor_list = [as_vector(a, "anchor") for a in anchors]

    results: list[BoundResult] = []
    for a in anchor_list:
        for form, name in ANCHOR_FORMS.items():
            if name not in wanted or (form == "fixed_ratio" and rho is None):
                continue
            results.append(reverse_ratio_bound(vs, p, a, norm, form, rho=rho))
    for side in ("lower", "upper"):
        name = "self_lower" if side == "lower" else "self_upper"
        if name in wanted:
            results.append(self_anchor_bound(vs, p, norm, side, tol))

    lowers = [r for r in results if r.applicable and r.certificate_side == "lower"]
    uppers = [r for r in results if r.applicable and r.certificate_side == "upper"]
    best = max(lowers, key=lambda r: r.value, default=None)
    refinement = min(uppers, key=lambda r: r.value, default=None)
    anchor = tuple(float(c) for c in anchor_list[0]) if anchor_list else None
    return BoundReport(float(ratio), anchor, tuple(results), best, refinement)
