import itertools
from fractions import Fraction

import pytest

from ktournament import distortion_exact, unblanketed_set
from ktournament.bench import (
    cyclic_suite, lb5_matrix, solve_poly_root, symmetric_cycle, blanket_params, verify_lb5,
    verify_blanket_params,
)
from ktournament.profile import Profile


def test_poly_roots():
    r = solve_poly_root([1, -1, 0, -1], (1, 2))
    assert abs(float(r) - 1.465571) < 1e-6
    lam = solve_poly_root([2, 1, 1, 0, -1, -4], (1, Fraction(11, 10)))
    assert abs(float(lam) - 1.056439) < 1e-6
    assert solve_poly_root([1, -1], (0, 2)) == 1
    with pytest.raises(ValueError, match="no sign change"):
        solve_poly_root([1, 0, 1], (0, 1))


def test_blanket_parameters():
    prm = blanket_params()
    assert abs(float(prm["alpha"]) - 0.68233) < 1e-5
    assert abs(float(prm["beta"]) - 0.53443) < 1e-5
    assert abs(float(prm["bound"]) - 3.93114) < 1e-5
    assert all(c["pass"] for c in verify_blanket_params())


def test_lb5_instance(lb5):
    lam, beta = lb5.lam, lb5.beta
    assert abs(float(lam) - 1.056439) < 1e-6
    assert abs(float(beta) - 0.606960) < 1e-6
    assert abs(beta * (1 + lam**2 + lam**3) - 2) < Fraction(1, 10**6)
    s = lb5.matrix.s
    for a in range(5):
        for b in range(5):
            if a != b:
                assert abs(s[a][b] + s[b][a] - 1) < Fraction(1, 10**6)
    assert abs(float(s[1][2]) - 0.677) < 1e-3
    assert abs(float(s[2][4]) - 0.472) < 1e-3
    sym = lb5_matrix(float(lam), float(beta))
    assert all(abs(float(s[a][b]) - sym[a][b]) < 1e-6 for a in range(5) for b in range(5))
    t2 = lb5.profiles[0]
    assert abs(float(t2.plurality_share(4)) - 0.24397) < 1e-4
    assert abs(float(t2.frac_pairwise(3, 4)) - float(beta * lam**4)) < 2e-4


def test_lb5_profiles_realize_the_matrix(lb5):
    for j, p in lb5.profiles.items():
        s = p.tournament_matrix().s
        worst = max(abs(float(s[a][b] - lb5.matrix.s[a][b])) for a in range(5) for b in range(5))
        assert worst <= 2e-4, j


def test_verify_lb5_passes(lb5):
    checks = verify_lb5(lb5)
    failed = [c for c in checks if not c["pass"]]
    assert not failed, failed
    ratios = {c["check"]: c["value"] for c in checks if c["check"].endswith("ratio")}
    assert abs(ratios["case 1: ratio"] - 1.05644) < 1e-4
    assert abs(ratios["case 0: ratio"] - 1.05642) < 1e-4


def test_unblanketed_on_the_hard_instance(lb5):
    for p in lb5.profiles.values():
        w, _ = unblanketed_set(p)
        assert distortion_exact(p, w).value <= 3.93115


def test_cyclic_instances():
    p = symmetric_cycle(3)
    assert [distortion_exact(p, c).value for c in range(3)] == [3, 3, 3]
    everything = Profile.from_rankings([(1, list(r)) for r in itertools.permutations(range(3))])
    vals = {distortion_exact(everything, c).value for c in range(3)}
    assert len(vals) == 1
    rep = cyclic_suite(4, 3, rng_seed=1)
    assert rep["pass"]
    with pytest.raises(ValueError):
        cyclic_suite(2, 1)
