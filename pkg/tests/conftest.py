from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ktournament import Profile, parse_profile
from ktournament.bench import build_lb5

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def p60():
    return parse_profile("candidates: a,b\n0.6: a>b\n0.4: b>a\n")


@pytest.fixture
def cycle3():
    return parse_profile("candidates: a,b,c\n1/3: a>b>c\n1/3: b>c>a\n1/3: c>a>b\n")


@pytest.fixture
def unanimous():
    return parse_profile("candidates: a,b,c\n1: a>b>c\n")


@pytest.fixture(scope="session")
def lb5():
    return build_lb5()


@st.composite
def profiles(draw, min_m=1, max_m=5, max_blocks=6):
    m = draw(st.integers(min_m, max_m))
    n = draw(st.integers(1, max_blocks))
    rows = [(draw(st.integers(1, 12)), draw(st.permutations(range(m)))) for _ in range(n)]
    return Profile.from_rankings(rows, m)


@st.composite
def lotteries(draw, m):
    raw = [draw(st.integers(0, 6)) for _ in range(m)]
    if not any(raw):
        raw[draw(st.integers(0, m - 1))] = 1
    total = sum(raw)
    return tuple(Fraction(x, total) for x in raw)
