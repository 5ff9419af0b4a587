import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from relaysec.channel import StateSequence  # noqa: E402

pairs = st.tuples(st.integers(0, 1), st.integers(0, 1))
pair_lists = st.lists(pairs, min_size=1, max_size=40)


@st.composite
def sequences(draw, min_size=1, max_size=40):
    return StateSequence.from_pairs(draw(st.lists(pairs, min_size=min_size, max_size=max_size)))


@st.composite
def rates(draw, max_S=3, max_N=4):
    from relaysec.delay import RateSpec

    N = draw(st.integers(1, max_N))
    S = draw(st.integers(1, max_S))
    L = draw(st.integers((S - 1) * N + 1, S * N))
    return RateSpec(N, L)


# -- acceptance reporting ------------------------------------------------------

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        number, title = marker.args
        _criteria.append((number, title, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed in sorted(_criteria):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}")
