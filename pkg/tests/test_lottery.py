import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ktournament import (
    Lottery, Profile, SolverConfig, beat_probability, beat_probability_from_summary, beat_probability_mc,
    defensive_gap, representation_check, solve_reverse_stable, solve_stable, value_against,
)
from ktournament.bench import symmetric_cycle
from ktournament.profile import ProfileError

from conftest import lotteries, profiles

HALF = Fraction(1, 2)


def brute_beat(p: Profile, probs, k: int, c: int) -> Fraction:
    """Enumerate every ordered k-tuple of draws and apply the copy-counting tie-break."""
    total = Fraction(0)
    for blk in p.blocks:
        pos = {x: r for r, x in enumerate(blk.ranking)}
        for draws in itertools.product(range(p.m), repeat=k):
            pr = Fraction(1)
            for a in draws:
                pr *= probs[a]
            if not pr:
                continue
            best = min(pos[a] for a in draws)
            if best < pos[c]:
                win = Fraction(1)
            elif best > pos[c]:
                win = Fraction(0)
            else:
                n = sum(1 for a in draws if a == c)
                win = Fraction(n, n + 1)
            total += blk.weight * pr * win
    return total


def test_beat_probability_examples(p60):
    uni = Lottery((HALF, HALF))
    assert beat_probability(p60, uni, 1, 1) == Fraction(11, 20)
    single = Profile.from_rankings([(1, [0, 1])])
    assert beat_probability(single, uni, 2, 1) == Fraction(11, 12)
    with pytest.raises(ValueError):
        beat_probability(p60, uni, 0, 1)


@given(profiles(min_m=1, max_m=4, max_blocks=4), st.integers(1, 3), st.data())
def test_beat_probability_matches_enumeration(p, k, data):
    D = data.draw(lotteries(p.m))
    for c in range(p.m):
        assert beat_probability(p, Lottery(D), k, c) == brute_beat(p, D, k, c)


@given(profiles(min_m=1, max_m=5), st.integers(1, 4), st.data())
def test_self_play_value(p, k, data):
    D = Lottery(data.draw(lotteries(p.m)))
    assert value_against(p, D, k, D) == pytest.approx(k / (k + 1), abs=1e-12)
    exact = sum(D[c] * beat_probability(p, D, k, c) for c in range(p.m))
    assert exact == Fraction(k, k + 1)


@given(profiles(min_m=2, max_m=4, max_blocks=4), st.integers(1, 2), st.data())
def test_summary_sufficiency(p, k, data):
    if p.m < k + 1:
        return
    D = Lottery(data.draw(lotteries(p.m)))
    ks = p.summarize(k + 1)
    for c in range(p.m):
        assert beat_probability_from_summary(ks, D, k, c) == beat_probability(p, D, k, c)


def test_summary_examples(cycle3):
    D = Lottery.uniform(3)
    assert beat_probability_from_summary(cycle3.summarize(3), D, 2, 0) == beat_probability(cycle3, D, 2, 0)
    point = Lottery.point(1, 3)
    for k in (1, 2):
        assert beat_probability(cycle3, point, k, 1) == Fraction(k, k + 1)
    with pytest.raises(ProfileError):
        beat_probability_from_summary(cycle3.summarize(2), D, 2, 0)


def test_monte_carlo_agrees(cycle3, p60):
    for p, D, k, c in [(cycle3, Lottery.uniform(3), 2, 0), (p60, Lottery((HALF, HALF)), 1, 1)]:
        est, se = beat_probability_mc(p, D, k, c, samples=200_000, seed=5)
        assert abs(est - float(beat_probability(p, D, k, c))) <= 3 * se


def test_stable_examples(p60, cycle3, unanimous):
    D, cert = solve_stable(p60, 1)
    assert D.probs == (1, 0) and cert.certified and cert.worst_value == HALF
    D, cert = solve_stable(cycle3, 1)
    assert D.probs == (Fraction(1, 3),) * 3 and cert.worst_value == HALF
    D, cert = solve_reverse_stable(p60, 1)
    assert D.probs == (0, 1)
    D, _ = solve_reverse_stable(cycle3, 1)
    assert D.probs == (Fraction(1, 3),) * 3
    D, _ = solve_reverse_stable(unanimous, 1)
    assert D.probs == (0, 0, 1)


def test_cyclic_profile_caps_pairs_at_two_thirds():
    p = symmetric_cycle(8)
    D, cert = solve_stable(p, 2)
    assert cert.certified
    assert cert.worst_value <= Fraction(2, 3) + cert.epsilon
    assert cert.worst_value < 0.74


@pytest.mark.parametrize("k", [1, 2, 3])
def test_solver_is_deterministic(k):
    p = Profile.from_rankings([(3, [0, 1, 2, 3]), (2, [2, 3, 1, 0]), (2, [1, 2, 0, 3]), (1, [3, 0, 2, 1])])
    cfg = SolverConfig(seed=3)
    assert solve_stable(p, k, cfg) == solve_stable(p, k, cfg)


def test_defensive_gap_examples(p60, cycle3):
    assert abs(defensive_gap(cycle3, Lottery.uniform(3), 2)) <= 1e-4
    assert abs(defensive_gap(p60, Lottery.point(0, 2), 1)) <= 1e-6
    assert defensive_gap(p60, Lottery.point(1, 2), 1) == pytest.approx(0.1, abs=1e-6)


def test_representation_examples(cycle3):
    D = Lottery.uniform(3)
    rep = representation_check(cycle3, D, 2)
    assert rep["ok"]
    # s(a > b) = 2/3 against bound 3, s(a > {b, c}) = 1/3 against 0.75
    assert rep["worst_margin"] == pytest.approx(0.75 - 1 / 3)
    solo = Profile.from_rankings([(1, [0])])
    assert representation_check(solo, Lottery.point(0, 1), 2)["checked"] == 0


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(epsilon=0)
    assert SolverConfig().eps_for(1) == 1e-6
    assert SolverConfig().eps_for(2) == 1e-4


@given(profiles(min_m=2, max_m=5, max_blocks=5), st.integers(1, 3))
def test_stable_solutions_are_certified_and_defensive(p, k):
    D, cert = solve_stable(p, k)
    assert cert.certified
    assert cert.worst_value >= Fraction(k, k + 1) - cert.epsilon
    assert defensive_gap(p, D, k) <= 2 * cert.epsilon
    assert representation_check(p, D, k)["ok"]
