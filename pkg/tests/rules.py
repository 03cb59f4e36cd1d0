"""Semi-inner-product calculus rules as a reusable checker.

``check_rules`` returns the names of the rules that failed on one sample, so
the same code drives hypothesis tests and the 10,000-case acceptance run.
"""

import numpy as np

from sipbounds.sip import diff_quotient, sip
from sipbounds.space import norm_eval

OTHER = {"inferior": "superior", "superior": "inferior"}


def value(x, y, n, which, method):
    enc = sip(x, y, n, which, method=method)
    # a numeric bracket holds both limits; each side converges to its own end
    return enc.lo if which == "inferior" else enc.hi


def check_rules(x, y, z, alpha, beta, lam, s, t, n, method="auto", rtol=1e-9):
    nx, ny, nz = norm_eval(x, n), norm_eval(y, n), norm_eval(z, n)
    failed = []

    def close(a, b, scale):
        return abs(a - b) <= rtol * max(1.0, scale)

    def leq(a, b, scale):
        return a <= b + rtol * max(1.0, scale)

    def v(u, w, which):
        return value(u, w, n, which, method)

    vi, vs = v(x, y, "inferior"), v(x, y, "superior")
    xy = nx * ny
    lam_pos, lam_neg = abs(lam), -abs(lam)

    if not (close(v(x, x, "inferior"), nx * nx, nx * nx)
            and close(v(x, x, "superior"), nx * nx, nx * nx)):
        failed.append("norm_squared")
    if not leq(vi, vs, xy):
        failed.append("inferior_below_superior")
    for which, base in (("inferior", vi), ("superior", vs)):
        other = vs if which == "inferior" else vi
        if not close(v(lam_pos * x, y, which), lam_pos * base, lam_pos * xy):
            failed.append("first_arg_positive_scaling")
        if not close(v(x, lam_pos * y, which), lam_pos * base, lam_pos * xy):
            failed.append("second_arg_positive_scaling")
        if not close(v(lam_neg * x, y, which), lam_neg * other, lam_pos * xy):
            failed.append("negative_scaling_swaps")
        a_, b_ = (alpha, beta) if alpha * beta >= 0 else (alpha, -beta)
        if not close(v(a_ * x, b_ * y, which), a_ * b_ * base, abs(a_ * b_) * xy):
            failed.append("joint_scaling")
        if not (close(v(-x, y, which), -other, xy) and close(v(x, -y, which), -other, xy)):
            failed.append("sign_flip")
        if not abs(base) <= xy * (1 + rtol) + rtol:
            failed.append("schwarz")
        lhs = v(alpha * x + y, x, which)
        if not close(lhs, alpha * nx * nx + v(y, x, which), (abs(alpha) * nx + ny) * nx):
            failed.append("quasi_linearity")
        if not leq(abs(v(y + z, x, which) - v(z, x, which)), ny * nx, (ny + nz) * nx):
            failed.append("continuity")
    sum_scale = (nx + nz) * ny
    if not leq(v(x, y, "inferior") + v(z, y, "inferior"), v(x + z, y, "inferior"), sum_scale):
        failed.append("superadditive_inferior")
    if not leq(v(x + z, y, "superior"), v(x, y, "superior") + v(z, y, "superior"), sum_scale):
        failed.append("subadditive_superior")
    if ny > 0 and nx > 0:
        qs, qt = diff_quotient(x, y, n, -abs(s)), diff_quotient(x, y, n, abs(t))
        scale = (nx + ny) ** 2
        if not (leq(qs, vi, scale) and leq(vs, qt, scale)):
            failed.append("sandwich")
    return failed


def random_case(rng, dim):
    """Random vectors with occasional zero and tied coordinates."""
    def vec():
        kind = rng.integers(4)
        if kind == 0:
            return rng.integers(-3, 4, dim).astype(float)
        v = rng.standard_normal(dim) * 10.0 ** rng.uniform(-2, 2)
        if kind == 1:
            v[rng.random(dim) < 0.3] = 0.0
        return v
    x, y, z = vec(), vec(), vec()
    alpha, beta = rng.uniform(-3, 3, 2)
    lam = rng.uniform(0, 3)
    s, t = 10.0 ** rng.uniform(-4, 1, 2)
    return x, y, z, alpha, beta, lam, s, t
