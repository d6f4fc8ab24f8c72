"""Metric distortion of tournament and k-tournament voting rules.

The package computes exact worst-case distortion by linear programming over
consistent metrics, solves stable k-lotteries, runs several pairwise-majority
rules, and produces ordinal certificates that bound distortion without an LP.
"""
from .profile import (
    KTournamentSummary,
    Profile,
    ProfileError,
    TournamentMatrix,
    VoterBlock,
    load_profile,
    parse_profile,
)
from .lottery_types import Lottery
from .metric import (
    BiasedVector,
    DistortionReport,
    MetricTable,
    biased_metric,
    biased_ratio,
    consistency_check,
    distortion_exact,
    expected_social_cost,
    integral_pair,
    pairwise_distortion,
    social_cost,
)
from .lottery import (
    SolverConfig,
    StabilityCertificate,
    beat_probability,
    beat_probability_from_summary,
    beat_probability_mc,
    defensive_gap,
    defensive_report,
    representation_check,
    solve_reverse_stable,
    solve_stable,
    target_value,
    value_against,
)
from .rules import (
    RuleError,
    copeland_weighted,
    pruned_double_lotteries,
    pruning_graph,
    quasi_kernel,
    quasi_kernel_prune,
    ranked_pairs,
    simultaneous_lottery_veto,
    unblanketed_set,
    uncovered_set,
)
from .certificates import (
    CertificateError,
    CertificateReport,
    cert_local,
    cert_lottery_partition,
    cert_partition,
    cert_post_shift,
    cert_two_step,
    certify_candidate,
    regular_lambda,
)


# function-style access to the profile statistics
def frac_pairwise(p: Profile, a: int, b: int):
    return p.frac_pairwise(a, b)


def frac_group(p: Profile, I, J):
    return p.frac_group(I, J)


def frac_tuple(p: Profile, t):
    return p.frac_tuple(t)


def plurality_share(p: Profile, c: int):
    return p.plurality_share(c)


def summarize(p: Profile, k: int) -> KTournamentSummary:
    return p.summarize(k)


def tournament_matrix(p: Profile) -> TournamentMatrix:
    return p.tournament_matrix()


def reverse(p: Profile) -> Profile:
    return p.reverse()


def restrict(p: Profile, keep):
    return p.restrict(keep)


__version__ = "0.1.0"

__all__ = [
    "Lottery",
    "KTournamentSummary",
    "Profile",
    "ProfileError",
    "TournamentMatrix",
    "VoterBlock",
    "load_profile",
    "parse_profile",
    "BiasedVector",
    "DistortionReport",
    "MetricTable",
    "biased_metric",
    "biased_ratio",
    "consistency_check",
    "distortion_exact",
    "expected_social_cost",
    "integral_pair",
    "pairwise_distortion",
    "social_cost",
    "SolverConfig",
    "StabilityCertificate",
    "beat_probability",
    "beat_probability_from_summary",
    "beat_probability_mc",
    "defensive_gap",
    "defensive_report",
    "representation_check",
    "solve_reverse_stable",
    "solve_stable",
    "target_value",
    "value_against",
    "RuleError",
    "copeland_weighted",
    "pruned_double_lotteries",
    "pruning_graph",
    "quasi_kernel",
    "quasi_kernel_prune",
    "ranked_pairs",
    "simultaneous_lottery_veto",
    "unblanketed_set",
    "uncovered_set",
    "CertificateError",
    "CertificateReport",
    "cert_local",
    "cert_lottery_partition",
    "cert_partition",
    "cert_post_shift",
    "cert_two_step",
    "certify_candidate",
    "regular_lambda",
    "frac_pairwise",
    "frac_group",
    "frac_tuple",
    "plurality_share",
    "summarize",
    "tournament_matrix",
    "reverse",
    "restrict",
]
