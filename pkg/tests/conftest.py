import numpy as np
import pytest
from hypothesis import strategies as st

from repforward.game import GameParams


@pytest.fixture
def ref_params():
    """lambda=3, delta_r=3, delta_b=1 (delta_g defaults to delta_r)."""
    return GameParams(lam=3.0, delta_r=3.0, delta_b=1.0)


@st.composite
def viable_params(draw, max_lam=10.0):
    dg = draw(st.floats(0.1, 10.0))
    return GameParams(
        lam=draw(st.floats(1.01, max_lam)),
        delta_r=draw(st.floats(0.1, 10.0)),
        delta_b=draw(st.floats(0.01, dg)),
        delta_g=dg,
    )


def random_viable_params(seed, count):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        dg = rng.uniform(0.2, 5.0)
        out.append(GameParams(rng.uniform(1.1, 6.0), rng.uniform(0.2, 5.0),
                              rng.uniform(0.05, dg), dg))
    return out


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "VERDICTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.VERDICTS.values():
        terminalreporter.write_line(line)
