import math
from fractions import Fraction

import numpy as np
import pytest

from ktournament import (
    CertificateError, Lottery, cert_local, cert_lottery_partition, cert_partition, cert_post_shift,
    cert_two_step, certify_candidate, distortion_exact, pairwise_distortion, regular_lambda, uncovered_set,
)
from ktournament.certificates import METHODS
from ktournament.random_profiles import random_profile

F = Fraction
GOLDEN = (1 + math.sqrt(5)) / 2


def test_partition_examples(p60, cycle3):
    r = cert_partition(p60, 1, 0)
    assert r.lam == F(3, 2) and r.bound == 4
    assert distortion_exact(p60, 1).value == r.bound
    for j in range(3):
        for i in range(3):
            if i != j:
                assert cert_partition(cycle3, j, i).bound <= 3
    with pytest.raises(CertificateError):
        cert_partition(p60, 0, 0)


def test_partition_cap(p60):
    with pytest.raises(CertificateError):
        cert_partition(p60, 1, 0, cap=1)


def test_post_shift_examples(p60, lb5):
    for jstar, istar in [(1, 0)]:
        assert cert_post_shift(p60, jstar, istar, kcand=istar).lam == cert_partition(p60, jstar, istar).lam
    r = cert_post_shift(lb5.matrix, 2, 4, kcand=3, edge_only=True)
    assert math.isfinite(r.lam) and r.witnesses["kcand"] == 3 and r.witnesses["partition"]
    r = cert_post_shift(lb5.profiles[2], 2, 4, kcand=3)
    assert math.isfinite(r.lam)
    with pytest.raises(CertificateError):
        cert_post_shift(p60, 0, 1, kcand=0)


def test_two_step_examples(unanimous, lb5):
    r = cert_two_step(unanimous, 0, 2)
    assert r.bound == 1 and r.witnesses["theta"] == 1
    r = cert_two_step(lb5.matrix, 2, 4)
    assert r.witnesses["path"] == [2, 3, 4]
    assert abs(float(r.witnesses["theta"]) - 0.716) < 1e-3
    assert abs(float(r.bound) - 2.587) < 5e-3
    assert r.bound == 4 / r.witnesses["theta"] - 3 and r.bound >= 1


def test_two_step_without_path():
    p = random_profile(np.random.default_rng(0), 2, 1)
    top, bottom = p.blocks[0].ranking
    assert cert_two_step(p, bottom, top).bound == math.inf


def test_lottery_partition_reduces_to_partition(lb5):
    p = lb5.profiles[0]
    for jstar in range(5):
        for istar in range(5):
            if istar != jstar:
                point = cert_lottery_partition(p, Lottery.point(jstar, 5), istar)
                assert point.lam == cert_partition(p, jstar, istar).lam


def test_regular_lambda_value():
    assert abs(regular_lambda(2, 0.51) - 0.8415) < 1e-4
    assert regular_lambda(2, 0.51) < 1


def test_regular_lambda_tends_to_theta():
    # the closed form tends to theta / (1 - theta), not theta
    assert abs(regular_lambda(1000, 0.6) - 0.6) <= 1e-2


def test_regular_lambda_closed_form_limit():
    for theta in (0.51, 0.6, 0.75):
        assert abs(regular_lambda(10**6, theta) - theta / (1 - theta)) < 1e-4


@pytest.mark.parametrize("seed", range(4))
def test_soundness_against_exact_lp(seed):
    rng = np.random.default_rng(200 + seed)
    for _ in range(25):
        m = int(rng.integers(2, 6))
        p = random_profile(rng, m, int(rng.integers(1, 7)))
        for jstar in range(m):
            for istar in range(m):
                if istar == jstar:
                    continue
                value, _ = pairwise_distortion(p, jstar, istar)
                for method in ("partition", "post-shift", "local", "two-step"):
                    r = METHODS[method](p, jstar, istar)
                    assert r.bound >= 1
                    assert value <= r.bound, (method, jstar, istar)
                edge = cert_post_shift(p, jstar, istar, edge_only=True)
                assert value <= edge.bound
                assert cert_post_shift(p, jstar, istar).lam <= cert_partition(p, jstar, istar).lam


def test_certify_candidate_bounds_distortion(lb5):
    p = lb5.profiles[3]
    for method in METHODS:
        r = certify_candidate(p, 3, method)
        assert distortion_exact(p, 3).value <= r.bound


@pytest.mark.parametrize("seed", range(3))
def test_uncovered_winner_local_bound(seed):
    beta = F(1 / GOLDEN).limit_denominator(10**9)
    rng = np.random.default_rng(300 + seed)
    for _ in range(20):
        m = int(rng.integers(2, 6))
        p = random_profile(rng, m, int(rng.integers(1, 7)))
        for jstar in uncovered_set(p, beta):
            for istar in range(m):
                if istar != jstar:
                    assert float(cert_local(p, jstar, istar).bound) <= 2 + math.sqrt(5) + 1e-6
