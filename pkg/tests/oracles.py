"""Independent reference computations for the test suite.

Nothing here imports the package under test: norms and one-sided limits are
recomputed in 60-digit arithmetic with mpmath from their definitions.
"""

import mpmath as mp

mp.mp.dps = 60


def _mp(c):
    return c if isinstance(c, mp.mpf) else mp.mpf(float(c))


def mp_norm(v, p, weights=None):
    v = [_mp(c) for c in v]
    w = [mp.mpf(1)] * len(v) if weights is None else [mp.mpf(float(c)) for c in weights]
    if p == "inf":
        return max(wk * abs(c) for wk, c in zip(w, v))
    p = mp.mpf(p)
    return mp.fsum(wk * abs(c) ** p for wk, c in zip(w, v)) ** (1 / p)


def quotient(x, y, t, p, weights=None):
    """(||y + t x||^2 - ||y||^2) / (2 t) in high precision."""
    t = mp.mpf(t)
    yt = [mp.mpf(float(b)) + t * mp.mpf(float(a)) for a, b in zip(x, y)]
    return (mp_norm(yt, p, weights) ** 2 - mp_norm(y, p, weights) ** 2) / (2 * t)


def _step_and_digits(x, y):
    """A step far below every nonzero |y_k| and the digits needed to survive it."""
    ay = [abs(mp.mpf(float(b))) for b in y if float(b) != 0.0]
    ax = max([abs(mp.mpf(float(a))) for a in x] + [mp.mpf(1)])
    if not ay:
        return mp.mpf("1e-30"), 60
    step = mp.mpf("1e-30") * min(mp.mpf(1), min(ay) / ax)
    digits = 40 + int(-mp.log10(step / max(ay)))
    return step, max(60, digits)


def one_sided(x, y, p, which, weights=None, step=None):
    """Semi-inner product as the difference quotient at a step far below float resolution."""
    auto, digits = _step_and_digits(x, y)
    with mp.workdps(digits):
        t = -(step or auto) if which == "inferior" else (step or auto)
        return float(quotient(x, y, mp.mpf(t), p, weights))


def tau(x, y, p, side, step=None):
    auto, digits = _step_and_digits(x, y)
    with mp.workdps(digits):
        t = mp.mpf(step or auto)
        t = -t if side == "minus" else t
        yt = [mp.mpf(float(b)) + t * mp.mpf(float(a)) for a, b in zip(x, y)]
        return float((mp_norm(yt, p) - mp_norm(y, p)) / t)
