import itertools
import os

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from poset_lca.poset import build_poset, transitive_reduce

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@st.composite
def posets(draw, max_elements=9):
    """Random poset with IDs consistent with the order (edges low -> high)."""
    n = draw(st.integers(1, max_elements))
    pairs = [(a, b) for a, b in itertools.combinations(range(n), 2)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return build_poset(transitive_reduce(chosen, n), n)


@st.composite
def labeled_posets(draw, max_elements=9):
    p = draw(posets(max_elements))
    f = draw(st.lists(st.integers(0, 1), min_size=len(p), max_size=len(p)))
    return p, f


@pytest.fixture
def cube3():
    from poset_lca.poset import hypercube

    return hypercube(3)


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
