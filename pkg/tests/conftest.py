import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from sipbounds.space import NormSpec

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

P_VALUES = [1, 1.5, 2, 3, "inf"]
LP_NORMS = {str(p): NormSpec.lp(p) for p in P_VALUES}


def blend_norm(v):
    """||v||_2 + 0.5 ||v||_1: a nonsmooth norm outside the closed-form families."""
    v = np.asarray(v, dtype=float)
    return float(np.linalg.norm(v) + 0.5 * np.abs(v).sum())


@pytest.fixture(params=list(LP_NORMS), ids=lambda p: f"lp{p}")
def lp_norm(request):
    return LP_NORMS[request.param]


def vectors(dim, lo=-5.0, hi=5.0):
    return hnp.arrays(np.float64, dim, elements=st.floats(lo, hi, allow_nan=False,
                                                          width=64))


@st.composite
def vector_pairs(draw, max_dim=16, count=2):
    dim = draw(st.integers(1, max_dim))
    return [draw(vectors(dim)) for _ in range(count)]


norm_choice = st.sampled_from(P_VALUES).map(NormSpec.lp)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def record_acceptance(number, ok, text):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
