"""Finite-dimensional real normed spaces.

Vectors are plain read-only ``float64`` arrays; a :class:`NormSpec` describes
which norm to put on them.  Three families are supported:

* ``lp``      -- ``(sum |v_k|^p)^(1/p)`` for ``1 <= p < inf`` and ``max |v_k|``,
* weighted    -- the same with positive per-coordinate weights,
  ``(sum w_k |v_k|^p)^(1/p)`` and ``max w_k |v_k|``,
* ``custom``  -- any callable, accepted only after :func:`validate_norm` passes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "InvalidNormError",
    "DimensionError",
    "NormKind",
    "NormSpec",
    "NormViolation",
    "as_vector",
    "norm_eval",
    "norm_increment",
    "validate_norm",
]

EPS = np.finfo(float).eps

# ell-p closed forms and pow-based evaluation are trusted up to this exponent.
P_CLOSED_FORM_MAX = 64.0


class InvalidNormError(ValueError):
    """Raised when a norm description is malformed or fails the norm axioms."""


class DimensionError(ValueError):
    """Raised when vector dimensions disagree."""


def as_vector(coords, name: str = "vector") -> np.ndarray:
    """Return `coords` as a finite, read-only 1-D float array."""
    v = np.array(coords, dtype=float, copy=True)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {v.shape}")
    if v.size == 0:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.isfinite(v).all():
        raise ValueError(f"{name} has non-finite coordinates")
    v.flags.writeable = False
    return v


class NormKind(enum.Enum):
    LP = "lp"
    LINF = "linf"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class NormSpec:
    """Description of a norm on R^d.

    Use the constructors :meth:`lp`, :meth:`weighted_lp` and :meth:`custom`
    rather than instantiating directly.  The sup-norm is its own
    :class:`NormKind` so that no code path ever raises to an infinite power.
    """

    kind: NormKind
    p: Optional[float] = None
    weights: Optional[np.ndarray] = field(default=None, repr=False)
    evaluator: Optional[Callable[[np.ndarray], float]] = field(default=None, repr=False)
    dim: Optional[int] = None

    @classmethod
    def lp(cls, p) -> "NormSpec":
        return cls.weighted_lp(p, None)

    @classmethod
    def weighted_lp(cls, p, weights) -> "NormSpec":
        """ell-p norm with optional positive weights; ``p`` may be ``inf`` or ``"inf"``."""
        w = None
        dim = None
        if weights is not None:
            w = as_vector(weights, "weights")
            if np.any(w <= 0):
                raise InvalidNormError("weights must be strictly positive")
            dim = w.size
        if isinstance(p, str):
            if p.strip().lower() not in ("inf", "infinity"):
                try:
                    p = float(p)
                except ValueError:
                    raise InvalidNormError(f"invalid exponent {p!r}") from None
            else:
                return cls(NormKind.LINF, None, w, None, dim)
        p = float(p)
        if math.isinf(p) and p > 0:
            return cls(NormKind.LINF, None, w, None, dim)
        if not (p >= 1.0) or math.isnan(p):
            raise InvalidNormError(f"exponent must satisfy p >= 1, got {p}")
        return cls(NormKind.LP, p, w, None, dim)

    @classmethod
    def custom(
        cls,
        evaluator: Callable[[np.ndarray], float],
        dim: int,
        trials: int = 256,
        seed: int = 0,
    ) -> "NormSpec":
        """Wrap a user-supplied norm after checking the norm axioms on `dim`-vectors.

        Raises
        ------
        InvalidNormError
            If :func:`validate_norm` reports any violated axiom.
        """
        spec = cls(NormKind.CUSTOM, None, None, evaluator, int(dim))
        problems = validate_norm(spec, dim, trials, seed=seed)
        if problems:
            lines = "; ".join(str(pr) for pr in problems[:5])
            raise InvalidNormError(f"custom evaluator is not a norm: {lines}")
        return spec

    @property
    def is_smooth_family(self) -> bool:
        """True for ell-p with 1 < p < inf (differentiable away from zero)."""
        return self.kind is NormKind.LP and self.p > 1.0

    def describe(self) -> str:
        """Short descriptor in the CLI syntax (``lp:2``, ``lp:inf``, ``wlp:1:1,2``)."""
        if self.kind is NormKind.CUSTOM:
            return "custom"
        p = "inf" if self.kind is NormKind.LINF else _num(self.p)
        if self.weights is None:
            return f"lp:{p}"
        return f"wlp:{p}:" + ",".join(_num(float(w)) for w in self.weights)

    def __call__(self, v) -> float:
        return norm_eval(v, self)


def _num(v: float) -> str:
    return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)


def _check_dim(v: np.ndarray, n: NormSpec) -> None:
    if n.dim is not None and v.shape[-1] != n.dim:
        raise DimensionError(f"vector has dimension {v.shape[-1]}, norm expects {n.dim}")


def _scaled(v: np.ndarray, n: NormSpec) -> np.ndarray:
    """Map `v` so that the weighted norm becomes the plain one."""
    if n.weights is None:
        return v
    if n.kind is NormKind.LINF:
        return v * n.weights
    return v * n.weights ** (1.0 / n.p)


def _lp_rows(u: np.ndarray, p: float) -> np.ndarray:
    """Plain ell-p norm along the last axis, rescaled by the max modulus."""
    a = np.abs(u)
    m = a.max(axis=-1)
    if p == 1.0:
        return a.sum(axis=-1)
    safe = np.where(m > 0, m, 1.0)
    r = a / safe[..., None]
    if p == 2.0:
        s = np.sqrt(np.einsum("...k,...k->...", r, r))
    else:
        s = np.sum(r**p, axis=-1) ** (1.0 / p)
    return np.where(m > 0, m * s, 0.0)


def norm_eval(v, n: NormSpec) -> float:
    """Evaluate ``||v||`` for the norm described by `n`.

    >>> norm_eval([3, -4], NormSpec.lp(1)), norm_eval([3, -4], NormSpec.lp(2))
    (7.0, 5.0)
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("norm_eval expects a non-empty 1-D vector")
    _check_dim(v, n)
    if n.kind is NormKind.CUSTOM:
        return float(n.evaluator(v))
    a = np.abs(_scaled(v, n))
    m = float(a.max())
    if n.kind is NormKind.LINF or m == 0.0:
        return m
    if n.p == 1.0:
        return float(a.sum())
    r = a / m
    if n.p == 2.0:
        return m * math.sqrt(float(r @ r))
    return m * float((r**n.p).sum()) ** (1.0 / n.p)


def _rows_norm(V: np.ndarray, n: NormSpec) -> np.ndarray:
    if n.kind is NormKind.CUSTOM:
        return np.array([float(n.evaluator(row)) for row in V])
    U = _scaled(V, n)
    if n.kind is NormKind.LINF:
        return np.max(np.abs(U), axis=-1)
    return _lp_rows(U, n.p)


def norm_increment(y, x, ts, n: NormSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate ``||y + t x|| - ||y||`` for every step in `ts` with cancellation control.

    For the ell-p families the difference is assembled coordinate-wise from
    ``|u_k|^p expm1(p log1p(t v_k / u_k))`` (sup-norm: ``sign(u_k) t v_k``), so
    the increment keeps full relative accuracy even when ``|t|`` is far below
    the rounding level of ``y``.  Custom norms fall back to direct subtraction.

    Returns
    -------
    inc : ndarray
        The increments, one per step.
    err : ndarray
        A conservative bound on the absolute rounding error of each increment.
    base : ndarray
        ``||y||`` broadcast to the shape of `ts`.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    d = y.size
    n0 = norm_eval(y, n)
    base = np.full(ts.shape, n0)
    rows = y[None, :] + ts[:, None] * x[None, :]
    direct = _rows_norm(rows, n) - n0

    if n.kind is NormKind.CUSTOM:
        # Accuracy of a user evaluator is unknown; assume a few ulps per coordinate.
        err = 8.0 * (d + 4) * EPS * (np.abs(direct) + 2.0 * n0)
        return direct, err, base

    u = _scaled(y, n)
    v = _scaled(x, n)
    m = float(np.max(np.abs(u)))
    if m == 0.0:
        err = 8.0 * (d + 4) * EPS * np.abs(direct)
        return direct, err, base
    T = ts[:, None]
    # overflow here only means the step is huge relative to y; the direct
    # evaluation below takes over for those entries
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        u = u / m
        v = v / m
        r = np.where(u != 0, T * v / np.where(u != 0, u, 1.0), np.inf)
        small = np.abs(r) <= 0.5
        if n.kind is NormKind.LINF:
            exact = np.abs(u + T * v) - np.abs(u)
            term = np.where(small, np.sign(u) * T * v, exact)
            inc_u = np.max((np.abs(u) - 1.0) + term, axis=-1)
            inc = m * inc_u
            kappa = 8.0 * (d + 8) * EPS
            mag = np.where(small, np.abs(term), np.abs(term) + 2.0 * np.abs(u))
            err = kappa * (np.abs(inc) + np.max(mag, axis=-1) * m)
        else:
            p = n.p
            au = np.abs(u)
            lead = au**p
            exact = np.abs(u + T * v) ** p - lead
            term = np.where(small, lead * np.expm1(p * np.log1p(np.where(small, r, 0.0))), exact)
            S = float(np.sum(lead))
            D = np.sum(term, axis=-1)
            rel = D / S
            inc = n0 * np.expm1(np.log1p(rel) / p)
            kappa = 8.0 * (p + d + 8) * EPS
            mag = np.where(small, np.abs(term), np.abs(term) + 2.0 * lead)
            err = kappa * (n0 * np.sum(mag, axis=-1) / (S * p) + np.abs(inc))
    # Large relative changes have no cancellation problem: trust direct evaluation there.
    use_direct = ~np.isfinite(inc) | (np.abs(direct) > 0.25 * n0)
    inc = np.where(use_direct, direct, inc)
    err = np.where(use_direct, 8.0 * (d + 8) * EPS * (np.abs(direct) + 2.0 * n0), err)
    return inc, err, base


@dataclass(frozen=True)
class NormViolation:
    """One failed norm axiom together with the offending inputs."""

    axiom: str
    witness: tuple
    detail: str

    def __str__(self) -> str:
        wit = ", ".join(np.array2string(np.asarray(w), precision=6) if np.ndim(w) else repr(w)
                        for w in self.witness)
        return f"{self.axiom} violated at ({wit}): {self.detail}"


def _probe_vectors(dim: int) -> list[np.ndarray]:
    eye = np.eye(dim)
    probes = [eye[k] for k in range(dim)]
    for i in range(dim):
        for j in range(i + 1, min(dim, i + 4)):
            probes.append(eye[i] - eye[j])
            probes.append(eye[i] + eye[j])
    probes.append(np.ones(dim))
    probes.append(np.where(np.arange(dim) % 2 == 0, 1.0, -1.0))
    return probes


def validate_norm(
    n: NormSpec,
    sample_dim: int,
    trials: int = 256,
    seed: int = 0,
    rtol: float = 1e-9,
) -> list[NormViolation]:
    """Check positivity, absolute homogeneity and the triangle inequality by sampling.

    Deterministic probes (basis vectors, pairwise sums and differences) are
    tried before `trials` random pairs.  Returns an empty list when nothing
    was violated; at most one witness per axiom is reported.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    found: dict[str, NormViolation] = {}

    def f(v):
        return float(norm_eval(v, n))

    def note(axiom, witness, detail):
        found.setdefault(axiom, NormViolation(axiom, tuple(witness), detail))

    try:
        z = f(np.zeros(sample_dim))
    except Exception as exc:  # evaluator blew up; nothing else is meaningful
        return [NormViolation("evaluation", (np.zeros(sample_dim),), repr(exc))]
    if not math.isfinite(z) or abs(z) > 0.0:
        note("positivity", [np.zeros(sample_dim)], f"||0|| = {z!r}, expected 0")

    probes = _probe_vectors(sample_dim)
    pairs = [(u, w) for u in probes[: 2 * sample_dim] for w in probes[:2]]
    for _ in range(trials):
        scale = 10.0 ** rng.uniform(-3, 3)
        pairs.append((scale * rng.standard_normal(sample_dim), rng.standard_normal(sample_dim)))

    for u, w in pairs:
        fu, fw = f(u), f(w)
        for vec, val in ((u, fu), (w, fw)):
            if not math.isfinite(val) or val <= 0.0:
                note("positivity", [vec], f"||v|| = {val!r} for nonzero v")
        alpha = float(rng.uniform(-3.0, 3.0))
        fa = f(alpha * u)
        if abs(fa - abs(alpha) * fu) > rtol * max(1.0, abs(alpha) * abs(fu)):
            note("homogeneity", [u, alpha], f"||a v|| = {fa!r} but |a| ||v|| = {abs(alpha) * fu!r}")
        fs = f(u + w)
        if fs > fu + fw + rtol * max(1.0, abs(fu) + abs(fw)):
            note("triangle", [u, w], f"||u+w|| = {fs!r} > {fu + fw!r}")
    order = ["evaluation", "positivity", "homogeneity", "triangle"]
    return [found[k] for k in order if k in found]


def pairwise_dims(vectors: Sequence[np.ndarray]) -> int:
    """Common dimension of `vectors`; raises :class:`DimensionError` otherwise."""
    dims = {np.shape(v)[-1] for v in vectors}
    if len(dims) != 1:
        raise DimensionError(f"vectors have mixed dimensions {sorted(dims)}")
    return dims.pop()
