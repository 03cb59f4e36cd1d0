"""Superior and inferior semi-inner products.

For a norm on R^d the two semi-inner products are the one-sided limits at
``t = 0`` of the difference quotient ::

    q(t) = (||y + t x||^2 - ||y||^2) / (2 t)

(inferior: ``t -> 0-``, superior: ``t -> 0+``).  ``t -> ||y + t x||^2 / 2`` is
convex, so ``q`` is nondecreasing in ``t`` and every finite step brackets the
limits: ``q(s) <= <x,y>_i <= <x,y>_s <= q(t)`` for ``s < 0 < t``.

ell-p norms (weighted or not) use exact closed forms via the one-sided
derivative of ``s -> ||y + s x||``; every other norm goes through a
shrinking-step bracket that is widened by a rounding-error bound so its
endpoints stay valid bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .space import (
    EPS,
    P_CLOSED_FORM_MAX,
    DimensionError,
    NormKind,
    NormSpec,
    _scaled,
    as_vector,
    norm_eval,
    norm_increment,
)

__all__ = [
    "Enclosure",
    "SipQuery",
    "diff_quotient",
    "tau_one_sided",
    "sip",
    "sip_value",
    "sip_certified_lower",
    "sip_certified_upper",
]

Which = Literal["inferior", "superior"]
Side = Literal["minus", "plus"]

DEFAULT_TOL = 1e-10
SHRINK = 4.0
MAX_ITER = 40
ARGMAX_RTOL = 1e-12


@dataclass(frozen=True)
class Enclosure:
    """Interval ``[lo, hi]`` known to contain a semi-inner product value.

    Closed-form results are degenerate intervals.  A numeric enclosure
    brackets *both* one-sided limits, ``lo <= <x,y>_i <= <x,y>_s <= hi``.
    """

    lo: float
    hi: float
    method: Literal["closed-form", "numeric"]
    smooth_detected: bool
    iterations: int

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @property
    def value(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, v: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= v <= self.hi + slack

    def to_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "method": self.method,
            "smooth_detected": self.smooth_detected,
            "iterations": self.iterations,
        }


@dataclass(frozen=True, eq=False)
class SipQuery:
    """Validated arguments of one semi-inner product evaluation."""

    x: np.ndarray
    y: np.ndarray
    norm: NormSpec
    which: Which = "inferior"
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "x", as_vector(self.x, "x"))
        object.__setattr__(self, "y", as_vector(self.y, "y"))
        if self.x.size != self.y.size:
            raise DimensionError(f"x has dimension {self.x.size}, y has {self.y.size}")
        if self.which not in ("inferior", "superior"):
            raise ValueError(f"which must be 'inferior' or 'superior', got {self.which!r}")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ValueError("tol must be a positive finite number")


def diff_quotient(x, y, n: NormSpec, t: float) -> float:
    """``(||y + t x||^2 - ||y||^2) / (2t)`` in factored form.

    The squares are never differenced: the increment ``||y + t x|| - ||y||``
    is taken from :func:`~sipbounds.space.norm_increment` and multiplied by
    the average ``(||y + t x|| + ||y||) / 2``.
    """
    t = float(t)
    if t == 0.0 or not math.isfinite(t):
        raise ValueError("step t must be finite and nonzero")
    q, _ = _quotients(np.asarray(x, float), np.asarray(y, float), n, np.array([t]))
    return float(q[0])


def _quotients(x, y, n, ts):
    inc, err, n0 = norm_increment(y, x, ts, n)
    # grouped so that tiny ||y|| does not underflow the product
    slope = inc / ts
    q = slope * (n0 + 0.5 * inc)
    q_err = (err / np.abs(ts)) * (n0 + np.abs(inc)) + 4.0 * EPS * np.abs(q)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(q_err))):
        raise FloatingPointError("non-finite difference quotient")
    return q, q_err


def _steps(x, y, n) -> np.ndarray:
    nx, ny = norm_eval(x, n), norm_eval(y, n)
    t0 = ny / nx if nx > 0 and ny > 0 else 1.0
    return t0 * SHRINK ** -np.arange(MAX_ITER + 1, dtype=float)


def _stop_index(seq: np.ndarray, err: np.ndarray, tol: float, floor: float = 1.0) -> int:
    """First k >= 1 where the monotone sequence stalls below `tol` or its own noise.

    The stall test is relative to ``max(floor, |seq[k]|)``.
    """
    for k in range(1, seq.size):
        adv = abs(seq[k] - seq[k - 1])
        if adv < tol * max(floor, abs(seq[k])) or adv <= err[k] + err[k - 1]:
            return k
    return seq.size - 1


def _uses_closed_form(n: NormSpec) -> bool:
    if n.kind is NormKind.LINF:
        return True
    return n.kind is NormKind.LP and n.p <= P_CLOSED_FORM_MAX


def _tau_closed(x: np.ndarray, y: np.ndarray, n: NormSpec) -> tuple[float, float, float]:
    """Closed-form ``(tau_minus, tau_plus, ||y||)`` for ell-p families, ``y != 0``."""
    xs, ys = _scaled(x, n), _scaled(y, n)
    ay = np.abs(ys)
    m = float(ay.max())
    sy = np.sign(ys)
    if n.kind is NormKind.LINF:
        cand = (sy * xs)[ay >= m - ARGMAX_RTOL * m]
        return float(cand.min()) + 0.0, float(cand.max()) + 0.0, m
    p = n.p
    if p == 1.0:
        # sign(0) = 0 drops the free coordinates from the core sum
        core = float(sy @ xs)
        free = float(np.abs(xs) @ (ys == 0.0))
        return core - free + 0.0, core + free + 0.0, float(ay.sum())
    au = ay / m
    if p == 2.0:
        s2 = float(au @ au)
        tau = float(xs @ (sy * au)) / math.sqrt(s2)
        return tau, tau, m * math.sqrt(s2)
    powered = au ** (p - 1.0)
    sp = float(powered @ au)
    tau = float((powered * sy) @ xs) / sp ** ((p - 1.0) / p)
    return tau, tau, m * sp ** (1.0 / p)


def tau_one_sided(x, y, n: NormSpec, side: Side, tol: float = DEFAULT_TOL) -> float:
    """One-sided derivative at 0 of ``s -> ||y + s x||``.

    Closed forms cover every ell-p family (weighted or not, ``p <= 64`` or
    ``p = inf``); other norms return the converged one-sided difference
    quotient ``(||y + s x|| - ||y||) / s``.

    Raises
    ------
    ValueError
        If ``y == 0`` (the derivative of ``|s| ||x||`` is not one-sided linear).
    """
    q = SipQuery(x, y, n, "inferior", tol)
    if side not in ("minus", "plus"):
        raise ValueError(f"side must be 'minus' or 'plus', got {side!r}")
    if not np.any(q.y):
        raise ValueError("tau_one_sided requires y != 0")
    if _uses_closed_form(n):
        lo, hi, _ = _tau_closed(q.x, q.y, n)
        return lo if side == "minus" else hi
    ts = _steps(q.x, q.y, n)
    if side == "minus":
        ts = -ts
    inc, err, _ = norm_increment(q.y, q.x, ts, n)
    seq, seq_err = inc / ts, err / np.abs(ts)
    k = _stop_index(seq, seq_err, tol)
    return float(seq[k])


def _numeric(q: SipQuery) -> Enclosure:
    nx, ny = norm_eval(q.x, q.norm), norm_eval(q.y, q.norm)
    if nx == 0.0:
        return Enclosure(0.0, 0.0, "numeric", True, 0)
    # work on unit vectors (exact by homogeneity) so extreme magnitudes cannot overflow
    x, y, scale = q.x / nx, q.y / ny, nx * ny
    ts = _steps(x, y, q.norm)
    lower, lower_err = _quotients(x, y, q.norm, -ts)
    upper, upper_err = _quotients(x, y, q.norm, ts)
    seq, seq_err = (lower, lower_err) if q.which == "inferior" else (upper, upper_err)
    k = _stop_index(seq, seq_err, q.tol, floor=1.0 / scale if scale > 0 else math.inf)
    # unit-norm rounding and the final product cost a few ulps of the bound
    pad = 8.0 * (x.size + 4) * EPS
    lo = float(lower[k] - lower_err[k] - pad) * scale
    hi = float(upper[k] + upper_err[k] + pad) * scale
    lo, hi = np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf)
    smooth = hi - lo <= q.tol * max(1.0, abs(lo), abs(hi))
    return Enclosure(float(lo), float(hi), "numeric", bool(smooth), k)


def sip(
    x,
    y,
    norm: NormSpec,
    which: Which = "inferior",
    *,
    tol: float = DEFAULT_TOL,
    method: Literal["auto", "numeric"] = "auto",
) -> Enclosure:
    """Enclose ``<x, y>_i`` (``which="inferior"``) or ``<x, y>_s``.

    Parameters
    ----------
    x, y : array_like
        Vectors of equal dimension.
    norm : NormSpec
        The norm whose semi-inner product is wanted.
    which : {"inferior", "superior"}
    tol : float
        Stopping tolerance of the numeric bracket, relative to ``max(1, |value|)``.
    method : {"auto", "numeric"}
        ``"numeric"`` forces the bracket even when a closed form exists.

    Returns
    -------
    Enclosure
        Degenerate for closed forms.  For ``y == 0`` both products are 0.
    """
    q = SipQuery(x, y, norm, which, tol)
    if not q.y.any():
        return Enclosure(0.0, 0.0, "closed-form", True, 0)
    if method == "auto" and _uses_closed_form(norm):
        t_minus, t_plus, ny = _tau_closed(q.x, q.y, norm)
        if norm.kind is NormKind.LP and norm.p == 2.0:
            # exact inner product of the weighted coordinates
            value = float(np.dot(_scaled(q.x, norm), _scaled(q.y, norm)))
        else:
            value = (t_minus if which == "inferior" else t_plus) * ny
        if not math.isfinite(value):
            raise FloatingPointError("non-finite semi-inner product")
        smooth = abs(t_plus - t_minus) * ny <= tol * max(1.0, abs(value))
        return Enclosure(value, value, "closed-form", bool(smooth), 0)
    if method not in ("auto", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    return _numeric(q)


def sip_value(x, y, norm: NormSpec, which: Which = "inferior", **kw) -> float:
    """Point value (midpoint of the enclosure) of a semi-inner product."""
    return sip(x, y, norm, which, **kw).value


def sip_certified_lower(x, y, norm: NormSpec, tol: float = DEFAULT_TOL) -> float:
    """A value guaranteed not to exceed ``<x, y>_i``."""
    return sip(x, y, norm, "inferior", tol=tol).lo


def sip_certified_upper(x, y, norm: NormSpec, tol: float = DEFAULT_TOL) -> float:
    """A value guaranteed not to be below ``<x, y>_s``."""
    return sip(x, y, norm, "superior", tol=tol).hi
