import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given

import ktournament as kt
from ktournament import Profile, ProfileError, parse_profile
from ktournament.bench import load_lb5_profile

from conftest import profiles

A, B, C = 0, 1, 2


def test_parse_two_candidates(p60):
    assert p60.m == 2
    assert [(b.weight, b.ranking) for b in p60.blocks] == [(Fraction(3, 5), (0, 1)), (Fraction(2, 5), (1, 0))]
    assert p60.labels == ("a", "b")


def test_parse_rational_weights_and_comments():
    p = parse_profile("# comment\ncandidates: x,y,z\n1/2: x>y>z  # trailing\n1/4: z>y>x\n1/4: x>y>z\n")
    assert p.blocks[0].weight == Fraction(3, 4)
    assert len(p.blocks) == 2


def test_table_profile_is_rescaled():
    p = load_lb5_profile(0)
    assert len(p.blocks) == 5
    assert sum(b.weight for b in p.blocks) == 1
    # raw weights sum to 0.99999
    assert p.normalization == 1 / Fraction("0.99999")


def test_weight_sum_out_of_tolerance():
    with pytest.raises(ProfileError, match="weight sum out of tolerance"):
        parse_profile("0.5: a>b\n0.4: b>a\n")


@pytest.mark.parametrize("text", [
    "1: a>b>a\n",
    "candidates: a,b,c\n1: a>b\n",
    "0.5: a>b\n0.5: a=b\n",
    "-0.5: a>b\n1.5: b>a\n",
    "candidates: a,b\n1: a>c\n",
])
def test_parse_rejects_malformed(text):
    with pytest.raises(ProfileError):
        parse_profile(text)


def test_json_form_round_trips(p60):
    again = parse_profile(json.dumps(p60.to_json()))
    assert again == p60
    assert parse_profile(p60.to_text()) == p60


def test_pairwise_examples(cycle3, lb5):
    assert kt.frac_pairwise(cycle3, A, B) == Fraction(2, 3)
    t2 = lb5.profiles[0]
    assert abs(float(kt.frac_pairwise(t2, 3, 4)) - 0.75602) < 1e-4
    assert abs(float(kt.frac_pairwise(t2, 4, 0)) - 0.60695) < 1e-4
    with pytest.raises(ProfileError):
        kt.frac_pairwise(cycle3, A, A)


def test_group_examples(cycle3, lb5):
    assert kt.frac_group(cycle3, {A}, {B, C}) == Fraction(1, 3)
    assert abs(float(kt.frac_group(lb5.profiles[0], {2, 3, 4}, {0})) - 0.60695) < 1e-4
    with pytest.raises(ProfileError):
        kt.frac_group(cycle3, {A}, {A})
    with pytest.raises(ProfileError):
        kt.frac_group(cycle3, set(), {A})


def test_tuple_examples(cycle3, lb5):
    assert abs(float(kt.frac_tuple(lb5.profiles[0], (4, 2, 3))) - 0.24397) < 1e-4
    assert kt.frac_tuple(cycle3, (B,)) == 1
    assert kt.frac_tuple(cycle3, (A, B, C)) == Fraction(1, 3)
    with pytest.raises(ProfileError):
        kt.frac_tuple(cycle3, (A, A))


def test_plurality_and_summary(cycle3, unanimous, lb5):
    assert abs(float(kt.plurality_share(lb5.profiles[0], 4)) - 0.24397) < 1e-4
    assert kt.summarize(cycle3, 2).top_share({A, B}, A) == Fraction(2, 3)
    assert kt.plurality_share(unanimous, A) == 1
    with pytest.raises(ProfileError):
        kt.summarize(cycle3, 4)
    with pytest.raises(ProfileError):
        kt.summarize(cycle3, 1)


def test_reverse_and_matrix(lb5):
    p = parse_profile("1: a>b>c\n")
    assert kt.reverse(p).blocks[0].ranking == (2, 1, 0)
    t1 = lb5.profiles[1]
    assert abs(float(kt.tournament_matrix(t1)[0, 1]) - 0.64122) < 1e-4
    assert kt.reverse(kt.reverse(t1)) == t1


def test_restrict_keeps_pairwise():
    p = Profile.from_rankings([(2, [0, 1, 2, 3]), (1, [3, 2, 0, 1])])
    sub, keep = p.restrict([0, 3])
    assert keep == (0, 3)
    assert sub.frac_pairwise(0, 1) == p.frac_pairwise(0, 3)


@given(profiles())
def test_pairwise_complement(p):
    for a, b in itertools.permutations(range(p.m), 2):
        assert p.frac_pairwise(a, b) + p.frac_pairwise(b, a) == 1


@given(profiles(min_m=3))
def test_triple_bound(p):
    s = p.tournament_matrix()
    assert not s.check()
    for i, j, k in itertools.permutations(range(p.m), 3):
        assert s[i, j] + s[j, k] + s[k, i] <= 2


@given(profiles(min_m=2))
def test_group_and_tuple_reduce_to_pairwise(p):
    for a, b in itertools.permutations(range(p.m), 2):
        assert p.frac_group({a}, {b}) == p.frac_pairwise(a, b) == p.frac_tuple((a, b))


@given(profiles(min_m=2, max_m=5))
def test_summary_top_share_by_brute_force(p):
    k = min(3, p.m)
    ks = p.summarize(k)
    for size in range(1, k + 1):
        for S in itertools.combinations(range(p.m), size):
            for c in S:
                brute = sum((p.frac_tuple(t) for t in itertools.permutations(S) if t[0] == c), Fraction(0))
                assert ks.top_share(S, c) == brute
                bottom = sum((p.frac_tuple(t) for t in itertools.permutations(S) if t[-1] == c), Fraction(0))
                assert ks.bottom_share(S, c) == bottom
            assert sum(ks.top_share(S, c) for c in S) == 1
    for S in itertools.combinations(range(p.m), k):
        assert sum(ks.tuple_freq[t] for t in itertools.permutations(S)) == 1


@given(profiles(min_m=2))
def test_reverse_swaps_pairwise(p):
    r = p.reverse()
    for a, b in itertools.permutations(range(p.m), 2):
        assert r.frac_pairwise(a, b) == p.frac_pairwise(b, a)


@given(profiles())
def test_text_round_trip(p):
    assert parse_profile(p.to_text()) == p
    assert parse_profile(json.dumps(p.to_json())) == p


def test_equal_rankings_merge():
    p = Profile.from_rankings([(1, [0, 1]), (1, [0, 1]), (2, [1, 0])])
    assert len(p.blocks) == 2
    assert p.blocks[0].weight == Fraction(1, 2)
