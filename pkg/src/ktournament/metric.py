"""Biased metrics, social cost, and exact worst-case distortion.

Distances are stored per voter block: every voter in a block shares one
position, which loses nothing for worst-case analysis because averaging a
metric over voters with identical rankings keeps it feasible and keeps every
social cost.

The worst-case distortion of a target against a fixed optimum ``istar`` is a
linear program over the block-to-candidate table.  Variables are the
nonnegative increments ``e[v][t]`` along block ``v``'s ranking, so that
``d(v, ranking[t]) = e[v][0] + ... + e[v][t]``; this builds ordinal
consistency into the parametrization.  The remaining constraints are the
quadrilateral inequalities ``d(v,a) <= d(v,b) + d(u,b) + d(u,a)``, which are
exactly the conditions for the table to extend to a pseudo-metric on voters
and candidates.  We solve the dual (few rows, many columns) with the exact
simplex, seeded by a floating-point basis from HiGHS when one is available.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .lottery_types import Lottery
from .profile import Profile, ProfileError
from .simplex import solve_lp

INF = math.inf


@dataclass(frozen=True)
class BiasedVector:
    x: tuple[Fraction, ...]
    istar: int

    def __post_init__(self):
        x = tuple(Fraction(v) if not isinstance(v, float) else Fraction(str(v)) for v in self.x)
        object.__setattr__(self, "x", x)
        if any(v < 0 for v in x):
            raise ValueError("biased vector entries must be nonnegative")
        if x[self.istar] != 0:
            raise ValueError("biased vector must vanish at istar")


@dataclass(frozen=True)
class MetricTable:
    """``d[v][c]``: distance from voter block ``v`` to candidate ``c``."""

    d: tuple[tuple[Fraction, ...], ...]

    def __getitem__(self, vc):
        v, c = vc
        return self.d[v][c]


@dataclass
class DistortionReport:
    target: object
    value: Fraction | float
    witness_istar: int | None
    witness_metric: MetricTable | None
    per_istar: dict = field(default_factory=dict)


def _as_probs(target, m: int) -> tuple[Fraction, ...]:
    if isinstance(target, Lottery):
        if target.m != m:
            raise ValueError("lottery size does not match the profile")
        return target.exact()
    if isinstance(target, (int, np.integer)):
        if not 0 <= target < m:
            raise ProfileError(f"candidate {target} out of range")
        return tuple(Fraction(int(c == target)) for c in range(m))
    return Lottery(tuple(target)).exact()


def biased_metric(p: Profile, bv: BiasedVector) -> MetricTable:
    """Distances of the biased metric built from ``bv``.

    Per block, the optimum sits at half the largest drop ``x_j - x_i`` along
    the ranking (j weakly above i); any other candidate sits further by the
    smallest x-value among candidates ranked weakly below it.
    """
    if len(bv.x) != p.m:
        raise ValueError("biased vector length does not match the profile")
    x = bv.x
    rows = []
    for blk in p.blocks:
        seq = [x[c] for c in blk.ranking]
        drop, running_max = Fraction(0), seq[0]
        for v in seq:
            running_max = max(running_max, v)
            drop = max(drop, running_max - v)
        base = drop / 2
        suffix_min = [Fraction(0)] * p.m
        cur = None
        for t in range(p.m - 1, -1, -1):
            cur = seq[t] if cur is None else min(cur, seq[t])
            suffix_min[t] = cur
        row = [Fraction(0)] * p.m
        for t, c in enumerate(blk.ranking):
            row[c] = base + suffix_min[t]
        rows.append(tuple(row))
    return MetricTable(tuple(rows))


def social_cost(p: Profile, mt: MetricTable, c: int):
    return sum((blk.weight * mt.d[v][c] for v, blk in enumerate(p.blocks)), Fraction(0))


def expected_social_cost(p: Profile, mt: MetricTable, target) -> Fraction:
    probs = _as_probs(target, p.m)
    return sum((pc * social_cost(p, mt, c) for c, pc in enumerate(probs) if pc), Fraction(0))


def integral_pair(p: Profile, bv: BiasedVector, L) -> tuple[Fraction, Fraction]:
    """Block-wise evaluation of the two sides of the biased-metric ratio.

    ``lhs`` sums, per block, the lottery-weighted smallest x-value ranked
    weakly below each candidate; ``rhs`` sums the largest drop along the
    ranking.  Under ``biased_metric(p, bv)`` these equal the expected excess
    social cost over ``istar`` and twice the cost of ``istar``.
    """
    probs = _as_probs(L, p.m)
    x = bv.x
    lhs = rhs = Fraction(0)
    for blk in p.blocks:
        seq = [x[c] for c in blk.ranking]
        drop, running_max = Fraction(0), seq[0]
        for v in seq:
            running_max = max(running_max, v)
            drop = max(drop, running_max - v)
        acc, cur = Fraction(0), None
        for t in range(p.m - 1, -1, -1):
            cur = seq[t] if cur is None else min(cur, seq[t])
            acc += probs[blk.ranking[t]] * cur
        lhs += blk.weight * acc
        rhs += blk.weight * drop
    return lhs, rhs


def consistency_check(p: Profile, mt: MetricTable) -> tuple[bool, list[str]]:
    """Check nonnegativity, ranking consistency and the quadrilateral inequalities."""
    bad = []
    B, m = len(p.blocks), p.m
    if len(mt.d) != B or any(len(r) != m for r in mt.d):
        return False, ["table shape does not match the profile"]
    for v in range(B):
        row = mt.d[v]
        for c in range(m):
            if row[c] < 0:
                bad.append(f"negative distance d({v},{c})")
        rk = p.blocks[v].ranking
        for t in range(m - 1):
            a, b = rk[t], rk[t + 1]
            if row[a] > row[b]:
                bad.append(f"block {v} ranks {a} above {b} but d({v},{a}) > d({v},{b})")
    for v, u in itertools.permutations(range(B), 2):
        dv, du = mt.d[v], mt.d[u]
        for a in range(m):
            for b in range(m):
                if a != b and dv[a] > dv[b] + du[b] + du[a]:
                    bad.append(f"quadrilateral d({v},{a}) <= d({v},{b}) + d({u},{b}) + d({u},{a}) fails")
    return not bad, bad


# -- the distortion linear program ------------------------------------------------

def _quad_rows(p: Profile):
    """Sparse rows ``G`` of the quadrilateral constraints ``G e <= 0``."""
    m = p.m
    pos = p.positions
    B = len(p.blocks)
    rows = []
    for v, u in itertools.permutations(range(B), 2):
        for b in range(m):
            for a in range(m):
                if pos[v][b] >= pos[v][a]:
                    continue
                row: dict[int, int] = {}
                for t in range(pos[v][b] + 1, pos[v][a] + 1):
                    row[v * m + t] = 1
                for t in range(pos[u][b] + 1):
                    row[u * m + t] = row.get(u * m + t, 0) - 1
                for t in range(pos[u][a] + 1):
                    row[u * m + t] = row.get(u * m + t, 0) - 1
                rows.append(row)
    return rows


def _cost_vector(p: Profile, probs) -> list[Fraction]:
    """Coefficients of expected social cost in increment space."""
    m = p.m
    g = [Fraction(0)] * (len(p.blocks) * m)
    for v, blk in enumerate(p.blocks):
        # increment t counts toward every candidate at position >= t
        tail = Fraction(0)
        for t in range(m - 1, -1, -1):
            tail += probs[blk.ranking[t]]
            g[v * m + t] = blk.weight * tail
    return g


def _float_basis(G, a, g, R):
    """Basis guess for the dual program from a floating-point solve, or None."""
    Q = len(G)
    ncols = Q + 1 + R
    dense = np.zeros((R, Q + 1))
    for q, row in enumerate(G):
        for r, v in row.items():
            dense[r, q] = v
    dense[:, Q] = [float(v) for v in a]
    gf = np.array([float(v) for v in g])
    cost = np.zeros(Q + 1)
    cost[Q] = 1.0
    try:
        res = linprog(cost, A_ub=-dense, b_ub=-gf, bounds=(0, None), method="highs-ds")
    except ValueError:
        return None
    if res.status != 0:
        return None
    full = np.hstack([dense, -np.eye(R)])
    scale = max(1.0, float(np.abs(res.x).max()))
    slack = dense @ res.x - gf
    chosen = [j for j in range(Q + 1) if res.x[j] > 1e-9 * scale]
    chosen += [Q + 1 + r for r in range(R) if slack[r] > 1e-9 * scale]
    if len(chosen) > R:
        return None
    if chosen and np.linalg.matrix_rank(full[:, chosen]) < len(chosen):
        return None
    rank = len(chosen)
    for j in [Q + 1 + r for r in range(R)] + list(range(Q + 1)):
        if rank == R:
            break
        if j in chosen:
            continue
        if np.linalg.matrix_rank(full[:, chosen + [j]]) > rank:
            chosen.append(j)
            rank += 1
    if rank < R:
        return None
    assert len(chosen) == R and ncols == full.shape[1]
    return chosen


def _solve_pair(p: Profile, probs, istar: int, quad=None, warm: bool = True):
    """Worst-case expected cost of ``probs`` when ``istar`` has social cost one.

    Returns ``(value, increments)``; value is ``inf`` when some consistent
    metric puts ``istar`` at zero cost and the target at positive cost, in
    which case the increments describe that metric.
    """
    m = p.m
    R = len(p.blocks) * m
    G = quad if quad is not None else _quad_rows(p)
    a = _cost_vector(p, tuple(Fraction(int(c == istar)) for c in range(m)))
    g = _cost_vector(p, probs)
    # dual: minimize z s.t. G^T y + a z - s = g, y, z, s >= 0
    columns = [dict(row) for row in G]
    columns.append({r: v for r, v in enumerate(a) if v})
    columns += [{r: -1} for r in range(R)]
    cost = [0] * len(G) + [1] + [0] * R
    basis = _float_basis(G, a, g, R) if warm else None
    res = solve_lp(cost, columns, g, basis=basis)
    if res.status == "optimal":
        return res.value, list(res.duals)
    if res.status == "infeasible":
        return INF, list(res.duals)
    raise AssertionError("distortion dual cannot be unbounded: z = large is always feasible direction")


def _table_from_increments(p: Profile, e) -> MetricTable:
    m = p.m
    rows = []
    for v, blk in enumerate(p.blocks):
        row = [Fraction(0)] * m
        acc = Fraction(0)
        for t, c in enumerate(blk.ranking):
            acc += e[v * m + t]
            row[c] = acc
        rows.append(tuple(row))
    return MetricTable(tuple(rows))


def pairwise_distortion(p: Profile, target, istar: int, warm: bool = True):
    """Largest (expected) ``SC(target) / SC(istar)`` over consistent metrics.

    Returns ``(value, witness_metric)``.
    """
    probs = _as_probs(target, p.m)
    value, e = _solve_pair(p, probs, istar, warm=warm)
    return value, _table_from_increments(p, e)


def distortion_exact(p: Profile, target, warm: bool = True) -> DistortionReport:
    """Exact worst-case distortion of a candidate or a lottery.

    For a candidate the optimum ranges over the other candidates; for a
    lottery it ranges over all candidates.  The value is at least 1, and
    ``inf`` when some consistent metric gives the optimum zero cost while the
    target has positive cost.
    """
    m = p.m
    probs = _as_probs(target, m)
    deterministic = not isinstance(target, Lottery) and isinstance(target, (int, np.integer))
    if deterministic:
        rivals = [c for c in range(m) if c != target]
    else:
        rivals = list(range(m))
    best, best_i, best_e = None, None, None
    per = {}
    quad = _quad_rows(p) if rivals else None
    for istar in rivals:
        value, e = _solve_pair(p, probs, istar, quad=quad, warm=warm)
        per[istar] = value
        if best is None or value > best:
            best, best_i, best_e = value, istar, e
    if best_i is None:
        d = MetricTable(tuple(tuple(Fraction(0) for _ in range(m)) for _ in p.blocks))
        return DistortionReport(target, Fraction(1), target if deterministic else None, d, per)
    # the all-equal metric always achieves ratio 1
    return DistortionReport(target, max(best, Fraction(1)), best_i, _table_from_increments(p, best_e), per)


def biased_ratio(p: Profile, bv: BiasedVector, L) -> Fraction | float:
    lhs, rhs = integral_pair(p, bv, L)
    if rhs == 0:
        return INF if lhs > 0 else Fraction(1)
    return 1 + 2 * lhs / rhs
