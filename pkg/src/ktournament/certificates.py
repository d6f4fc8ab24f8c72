"""Distortion certificates computed from ordinal statistics alone.

Each certificate finds the smallest ``lam`` for which a sufficient condition
guarantees ``SC(jstar) <= (1 + 2 lam) SC(istar)`` in every consistent metric
(two-step certificates state their bound as ``4/theta - 3`` instead).  A
certificate for one ``istar`` bounds one ratio; maximizing the bound over all
``istar`` bounds the distortion of ``jstar``.

Ratios use the convention 0/0 = 0 (a zero left-hand side constrains
nothing) and x/0 = inf for x > 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .lottery_types import Lottery
from .profile import Profile, TournamentMatrix

PARTITION_CAP = 16
INF = math.inf


class CertificateError(ValueError):
    pass


@dataclass
class CertificateReport:
    method: str
    lam: Fraction | float
    bound: Fraction | float
    jstar: int | None = None
    istar: int | None = None
    witnesses: dict = field(default_factory=dict)


def _ratio(num, den):
    if num <= 0:
        return Fraction(0) if isinstance(num, Fraction) else 0.0
    if den <= 0:
        return INF
    return num / den


def _bound(lam):
    return INF if lam == INF else 1 + 2 * lam


def _matrix(p) -> TournamentMatrix:
    return p if isinstance(p, TournamentMatrix) else p.tournament_matrix()


def _need_profile(p, method: str) -> Profile:
    if not isinstance(p, Profile):
        raise CertificateError(f"{method} certificate needs group statistics, so it takes a full profile")
    return p


def _distinct(jstar: int, istar: int, m: int) -> None:
    for c in (jstar, istar):
        if not 0 <= c < m:
            raise CertificateError(f"candidate {c} out of range")
    if jstar == istar:
        raise CertificateError("jstar and istar must differ")


def _partitions(m: int, fixed_in: Iterable[int], fixed_out: Iterable[int], cap: int):
    """Yield (I, J) with the fixed members placed; free candidates go either way."""
    if m > cap:
        raise CertificateError(f"partition enumeration is capped at m <= {cap}, got m = {m}")
    fixed_in, fixed_out = set(fixed_in), set(fixed_out)
    free = [c for c in range(m) if c not in fixed_in and c not in fixed_out]
    for mask in range(1 << len(free)):
        I = set(fixed_in)
        J = set(fixed_out)
        for t, c in enumerate(free):
            (I if mask >> t & 1 else J).add(c)
        yield frozenset(I), frozenset(J)


class _Groups:
    """Fast group fractions over one profile."""

    def __init__(self, p: Profile):
        self.w = [b.weight for b in p.blocks]
        self.pos = p.positions

    def above(self, I, J) -> Fraction:
        """Weight of blocks ranking all of I above all of J."""
        total = Fraction(0)
        for w, pos in zip(self.w, self.pos):
            if max(pos[i] for i in I) < min(pos[j] for j in J):
                total += w
        return total


def cert_partition(p: Profile, jstar: int, istar: int, cap: int = PARTITION_CAP) -> CertificateReport:
    """Smallest lam with s(I > jstar) <= lam (1 - s(istar > J)) on every partition.

    Also reports the weaker edge-only lam, where s(I > jstar) is replaced by
    its upper bound min_i s(i > jstar) and 1 - s(istar > J) by its lower bound
    max_j s(j > istar).
    """
    p = _need_profile(p, "partition")
    _distinct(jstar, istar, p.m)
    g = _Groups(p)
    s = p.tournament_matrix().s
    best, arg = Fraction(0), None
    edge_best, edge_arg = Fraction(0), None
    for I, J in _partitions(p.m, {istar}, {jstar}, cap):
        lam = _ratio(g.above(I, {jstar}), 1 - g.above({istar}, J))
        if arg is None or lam > best:
            best, arg = lam, (I, J)
        elam = _ratio(min(s[i][jstar] for i in I), max(s[j][istar] for j in J))
        if edge_arg is None or elam > edge_best:
            edge_best, edge_arg = elam, (I, J)
    return CertificateReport(
        "partition", best, _bound(best), jstar, istar,
        {
            "partition": {"I": sorted(arg[0]), "J": sorted(arg[1])},
            "edge_lambda": edge_best,
            "edge_bound": _bound(edge_best),
            "edge_partition": {"I": sorted(edge_arg[0]), "J": sorted(edge_arg[1])},
        },
    )


def _edge_partition_lambda(s, jstar, istar, kcand, cap, m):
    best, arg = Fraction(0), None
    for I, J in _partitions(m, {istar, kcand}, {jstar}, cap):
        lam = _ratio(min(s[i][jstar] for i in I), max(max(s[j][istar], s[j][kcand]) for j in J))
        if arg is None or lam > best:
            best, arg = lam, (I, J)
    return best, arg


def cert_post_shift(p, jstar: int, istar: int, kcand: int | None = None, edge_only: bool = False,
                    cap: int = PARTITION_CAP) -> CertificateReport:
    """Smallest lam for the shifted-block condition with intermediate ``kcand``.

    Needs s(istar > jstar) <= lam s(kcand > istar) (unless kcand = istar) and,
    on every partition with istar and kcand in I and jstar in J,
    s(I > jstar) <= lam (1 - s({istar, kcand} > J)).  With ``edge_only`` the
    partition condition is relaxed to pairwise fractions,
    min_i s(i > jstar) <= lam max_j max(s(j > istar), s(j > kcand)).
    With ``kcand=None`` every intermediate is tried and the best kept.
    """
    s = _matrix(p).s
    m = len(s)
    _distinct(jstar, istar, m)
    if kcand is None:
        reports = [cert_post_shift(p, jstar, istar, k, edge_only, cap) for k in range(m) if k != jstar]
        return min(reports, key=lambda r: (r.lam, r.witnesses["kcand"]))
    if not 0 <= kcand < m:
        raise CertificateError(f"candidate {kcand} out of range")
    if kcand == jstar:
        raise CertificateError("kcand must differ from jstar")
    first = Fraction(0) if kcand == istar else _ratio(s[istar][jstar], s[kcand][istar])
    if edge_only:
        second, arg = _edge_partition_lambda(s, jstar, istar, kcand, cap, m)
        method = "post-shift-edge"
    else:
        g = _Groups(_need_profile(p, "post-shift"))
        second, arg = Fraction(0), None
        for I, J in _partitions(m, {istar, kcand}, {jstar}, cap):
            lam = _ratio(g.above(I, {jstar}), 1 - g.above({istar, kcand}, J))
            if arg is None or lam > second:
                second, arg = lam, (I, J)
        method = "post-shift"
    lam = max(first, second)
    return CertificateReport(
        method, lam, _bound(lam), jstar, istar,
        {"kcand": kcand, "edge_lambda": first, "partition_lambda": second,
         "partition": {"I": sorted(arg[0]), "J": sorted(arg[1])}},
    )


def cert_local(p, jstar: int, istar: int) -> CertificateReport:
    """Smallest lam for the local condition built from a helper k and witness l.

    k must equal istar or have s(k > istar) >= 1/lam, and then either
    (I) s(k > jstar) <= lam / (1 + lam), or (II) some l other than k, jstar
    has s(k > jstar) <= lam s(l > k) and s(l > jstar) <= lam s(jstar > k).
    """
    s = _matrix(p).s
    m = len(s)
    _distinct(jstar, istar, m)
    best, wit = INF, None
    for k in range(m):
        if k == jstar:
            continue
        reach = Fraction(0) if k == istar else (INF if s[k][istar] == 0 else 1 / s[k][istar])
        skj = s[k][jstar]
        lam_one = INF if skj == 1 else skj / (1 - skj)
        lam_two, ell = INF, None
        for l in range(m):
            if l in (k, jstar):
                continue
            lam_l = max(_ratio(skj, s[l][k]), _ratio(s[l][jstar], s[jstar][k]))
            if lam_l < lam_two:
                lam_two, ell = lam_l, l
        if lam_one <= lam_two:
            lam_k, cond = max(reach, lam_one), {"k": k, "condition": "I"}
        else:
            lam_k, cond = max(reach, lam_two), {"k": k, "condition": "II", "l": ell}
        if lam_k < best:
            best, wit = lam_k, cond
    return CertificateReport("local", best, _bound(best), jstar, istar, wit or {})


def cert_two_step(p, jstar: int, istar: int) -> CertificateReport:
    """Bound 4/theta - 3 from the strongest path jstar -> k -> istar (or jstar -> istar)."""
    s = _matrix(p).s
    m = len(s)
    _distinct(jstar, istar, m)
    theta, path = Fraction(0), None
    for k in range(m):
        if k == jstar:
            continue
        first = s[jstar][k]
        strength = first if k == istar else min(first, s[k][istar])
        if path is None or strength > theta:
            theta, path = strength, [jstar, istar] if k == istar else [jstar, k, istar]
    if theta == 0:
        return CertificateReport("two-step", INF, INF, jstar, istar, {"theta": theta, "path": None, "no_path": True})
    # lam = 2/theta - 2 makes 1 + 2 lam equal to 4/theta - 3
    return CertificateReport("two-step", 2 / theta - 2, 4 / theta - 3, jstar, istar, {"theta": theta, "path": path})


def cert_lottery_partition(p: Profile, L, istar: int, cap: int = PARTITION_CAP) -> CertificateReport:
    """Smallest lam with sum_{j in J} L(j) s(I > j) <= lam (1 - s(istar > J)) on every partition."""
    p = _need_profile(p, "lottery-partition")
    if not 0 <= istar < p.m:
        raise CertificateError(f"candidate {istar} out of range")
    probs = (L if isinstance(L, Lottery) else Lottery(tuple(L))).exact()
    g = _Groups(p)
    best, arg = Fraction(0), None
    for I, J in _partitions(p.m, {istar}, (), cap):
        if not J:
            continue
        num = sum((probs[j] * g.above(I, {j}) for j in J if probs[j]), Fraction(0))
        lam = _ratio(num, 1 - g.above({istar}, J))
        if arg is None or lam > best:
            best, arg = lam, (I, J)
    wit = {} if arg is None else {"partition": {"I": sorted(arg[0]), "J": sorted(arg[1])}}
    return CertificateReport("lottery-partition", best, _bound(best), None, istar, wit)


def regular_lambda(k: int, theta) -> float:
    """theta / (1 - theta) * (1 / (theta (k + 1)))^(1/k)."""
    if k < 1:
        raise CertificateError("k must be positive")
    theta = float(theta)
    if not 0.5 <= theta < 1:
        raise CertificateError("theta must lie in [1/2, 1)")
    return theta / (1 - theta) * (1 / (theta * (k + 1))) ** (1 / k)


def certify_candidate(p, jstar: int, method: str = "partition", **kw) -> CertificateReport:
    """Worst certificate over every istar, which bounds the distortion of jstar."""
    fn = METHODS[method]
    m = _matrix(p).m
    reports = [fn(p, jstar, i, **kw) for i in range(m) if i != jstar]
    if not reports:
        return CertificateReport(method, Fraction(0), Fraction(1), jstar, None, {})
    worst = max(reports, key=lambda r: (r.bound, -r.istar))
    worst.witnesses = dict(worst.witnesses, per_istar={r.istar: r.bound for r in reports})
    return worst


METHODS = {
    "partition": cert_partition,
    "post-shift": cert_post_shift,
    "local": cert_local,
    "two-step": cert_two_step,
}
