"""Tournament and k-tournament voting rules.

Deterministic rules break every tie toward the smallest candidate index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .bench import blanket_params
from .lottery import SolverConfig, solve_reverse_stable, solve_stable
from .lottery_types import Lottery
from .profile import Profile, TournamentMatrix

DEFAULT_THETA = Fraction(55, 100)
ZERO_SCORE = 1e-12


class RuleError(ValueError):
    pass


def _matrix(p) -> TournamentMatrix:
    return p if isinstance(p, TournamentMatrix) else p.tournament_matrix()


# -- covering ------------------------------------------------------------------

def _check_beta(beta) -> None:
    if not Fraction(1, 2) <= beta <= 1:
        raise RuleError(f"beta must lie in [1/2, 1], got {beta}")


def copeland_counts(p, beta) -> list[int]:
    s = _matrix(p).s
    m = len(s)
    return [sum(1 for k in range(m) if k != j and s[k][j] > beta) for j in range(m)]


def copeland_weighted(p, beta) -> int:
    """Candidate beaten by more than ``beta`` by the fewest others."""
    _check_beta(beta)
    counts = copeland_counts(p, beta)
    return min(range(len(counts)), key=lambda j: (counts[j], j))


def uncovered_set(p, beta) -> list[int]:
    """Candidates j such that every rival i has some k (k = i or s(k>i) >= beta) with s(k>j) <= beta."""
    _check_beta(beta)
    s = _matrix(p).s
    m = len(s)
    out = []
    for j in range(m):
        if all(
            any((k == i or s[k][i] >= beta) and s[k][j] <= beta for k in range(m))
            for i in range(m) if i != j
        ):
            out.append(j)
    return out


# -- ranked pairs ----------------------------------------------------------------

def _reaches(adj, src, dst) -> bool:
    stack, seen = [src], {src}
    while stack:
        u = stack.pop()
        if u == dst:
            return True
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return False


def ranked_pairs_order(p) -> list[tuple[int, int]]:
    """Edges locked in, in the order they were added."""
    s = _matrix(p).s
    m = len(s)
    pairs = sorted(((i, j) for i in range(m) for j in range(m) if i != j), key=lambda ij: (-s[ij[0]][ij[1]], ij))
    adj: list[set[int]] = [set() for _ in range(m)]
    locked = []
    for i, j in pairs:
        if not _reaches(adj, j, i):
            adj[i].add(j)
            locked.append((i, j))
    return locked


def ranked_pairs(p) -> int:
    m = _matrix(p).m
    has_in = {j for _, j in ranked_pairs_order(p)}
    return min(c for c in range(m) if c not in has_in)


# -- unblanketed set -------------------------------------------------------------

def blankets(s, alpha, beta, i: int, j: int) -> bool:
    """Whether ``i`` (alpha, beta)-blankets ``j``."""
    m = len(s)
    for k in range(m):
        if not (k == i or s[k][i] >= alpha):
            continue
        if s[k][j] <= beta:
            return False
        if s[k][j] <= alpha and any(l != k and l != j and s[k][l] <= beta <= s[j][l] for l in range(m)):
            return False
    return True


def unblanketed_set(p, alpha=None, beta=None) -> tuple[int, list[int]]:
    """Candidates no rival (alpha, beta)-blankets, and the smallest of them.

    Defaults are alpha = 1/lam and beta = 2 - lam for lam the real root of
    x^3 - x^2 - 1, the choice that minimizes the guaranteed bound 1 + 2 lam.
    """
    if alpha is None or beta is None:
        prm = blanket_params()
        alpha = prm["alpha"] if alpha is None else alpha
        beta = prm["beta"] if beta is None else beta
    if not (alpha >= beta > Fraction(1, 2)):
        raise RuleError("unblanketed set requires α ≥ β > 1/2")
    s = _matrix(p).s
    m = len(s)
    unb = [j for j in range(m) if not any(i != j and blankets(s, alpha, beta, i, j) for i in range(m))]
    if not unb:
        raise AssertionError("every candidate is blanketed, which cannot happen for alpha >= beta > 1/2")
    return unb[0], unb


# -- quasi-kernel pruning --------------------------------------------------------

@dataclass(frozen=True)
class PruningGraph:
    vertices: tuple[int, ...]
    edges: frozenset
    theta: Fraction | float

    def out(self, a: int) -> list[int]:
        return [b for b in self.vertices if (a, b) in self.edges]


def _check_theta(theta) -> None:
    if not Fraction(1, 2) < theta <= 1:
        raise RuleError(f"theta must lie in (1/2, 1], got {theta}")


def pruning_graph(p, theta) -> PruningGraph:
    _check_theta(theta)
    s = _matrix(p).s
    m = len(s)
    edges = frozenset((a, b) for a in range(m) for b in range(m) if a != b and s[a][b] >= theta)
    return PruningGraph(tuple(range(m)), edges, theta)


def quasi_kernel_violations(g: PruningGraph, K: Iterable[int]) -> list[str]:
    """Independence and two-hop coverage failures of ``K`` in ``g``."""
    K = set(K)
    bad = []
    for a in K:
        for b in K:
            if (a, b) in g.edges:
                bad.append(f"edge {a}->{b} inside the kernel")
    one = {b for a in K for b in g.out(a)}
    two = one | {c for b in one for c in g.out(b)}
    for v in g.vertices:
        if v not in K and v not in two:
            bad.append(f"vertex {v} is not reached within two hops")
    return bad


def _qk(g: PruningGraph, verts: frozenset) -> set[int]:
    if not verts:
        return set()
    v = min(verts)
    rest = verts - {v} - set(g.out(v))
    K = _qk(g, rest)
    if any((u, v) in g.edges for u in K):
        return K
    return K | {v}


def quasi_kernel(g: PruningGraph) -> list[int]:
    """An inclusion-minimal quasi-kernel of ``g``.

    A quasi-kernel is built by the classic peel-and-recurse construction:
    take the smallest vertex, recurse on what remains after deleting it and
    its out-neighbours, and add it back if that keeps the set independent.
    Members are then dropped (largest first) while coverage survives.
    """
    K = _qk(g, frozenset(g.vertices))
    for v in sorted(K, reverse=True):
        if not quasi_kernel_violations(g, K - {v}) and len(K) > 1:
            K = K - {v}
    bad = quasi_kernel_violations(g, K)
    if bad:
        raise AssertionError("quasi-kernel contract violated: " + "; ".join(bad))
    return sorted(K)


def quasi_kernel_prune(p, theta=DEFAULT_THETA) -> list[int]:
    return quasi_kernel(pruning_graph(p, theta))


# -- simultaneous lottery veto ------------------------------------------------------

@dataclass
class VetoEvent:
    time: float
    eliminated: tuple[int, ...]
    rates: Lottery | None  # reverse stable lottery in force just before the event


@dataclass
class VetoTrace:
    kernel: list[int]
    initial_scores: list[float]
    events: list[VetoEvent] = field(default_factory=list)
    integrals: list[float] = field(default_factory=list)
    winner: int | None = None
    certified: bool = True

    @property
    def total_time(self) -> float:
        return self.events[-1].time if self.events else 0.0


def simultaneous_lottery_veto(p: Profile, k: int, theta=DEFAULT_THETA, cfg: SolverConfig | None = None):
    """Event-driven simulation of lottery veto on the quasi-kernel.

    Scores start at a stable k-lottery on the kernel and fall at the rate of
    the reverse stable k-lottery on the surviving candidates; the rate is
    piecewise constant, so the process jumps from one elimination to the next.
    Returns ``(winner, trace)``.
    """
    cfg = cfg or SolverConfig()
    kernel = quasi_kernel_prune(p, theta)
    D, cert = solve_stable(p, k, cfg, support=kernel)
    scores = [float(x) for x in D.probs]
    trace = VetoTrace(kernel, list(scores), certified=cert.certified)
    integrals = [0.0] * p.m
    alive = [c for c in kernel if scores[c] > ZERO_SCORE]
    dead_now = tuple(c for c in kernel if c not in alive)
    if dead_now:
        trace.events.append(VetoEvent(0.0, dead_now, None))
    t = 0.0
    last = list(alive)
    while alive:
        delta, rcert = solve_reverse_stable(p, k, cfg, support=alive)
        trace.certified &= rcert.certified
        rates = [float(x) for x in delta.probs]
        ratio = {c: scores[c] / rates[c] for c in alive if rates[c] > 0}
        dt = min(ratio.values())
        # every candidate whose score runs out at this instant, up to rounding
        gone = tuple(c for c in alive if c in ratio and ratio[c] <= dt * (1 + 1e-9) + ZERO_SCORE)
        t += dt
        for c in alive:
            step = scores[c] if c in gone else dt * rates[c]
            scores[c] -= step
            integrals[c] += step
        trace.events.append(VetoEvent(t, gone, delta))
        last = list(gone)
        alive = [c for c in alive if c not in gone]
    trace.integrals = integrals
    trace.winner = min(last)
    return trace.winner, trace


# -- pruned double lotteries -----------------------------------------------------------

def pruned_double_lotteries(p: Profile, k: int, mu=Fraction(1, 2), theta=DEFAULT_THETA, cfg: SolverConfig | None = None):
    """Mix of a stable 1-lottery on all candidates (weight ``mu``) and a stable
    k-lottery on the quasi-kernel (weight ``1 - mu``).

    Returns ``(lottery, certified)``.
    """
    if not 0 <= mu <= 1:
        raise RuleError(f"mu must lie in [0, 1], got {mu}")
    _check_theta(theta)
    cfg = cfg or SolverConfig()
    one, c1 = solve_stable(p, 1, cfg)
    kernel = quasi_kernel_prune(p, theta)
    kl, ck = solve_stable(p, k, cfg, support=kernel)
    if mu == 1:
        return one, c1.certified
    if mu == 0:
        return kl, ck.certified
    exact = all(isinstance(x, Fraction) for x in one.probs + kl.probs) and isinstance(mu, Fraction)
    w = mu if exact else float(mu)
    a = one.probs if exact else one.as_floats()
    b = kl.probs if exact else kl.as_floats()
    mixed = tuple(w * x + (1 - w) * y for x, y in zip(a, b))
    return Lottery(mixed), c1.certified and ck.certified
