"""Stable k-lotteries and beat probabilities under copy-counting tie-breaks.

``beat_probability(p, D, k, c)`` is the fraction of voters who prefer ``k``
i.i.d. draws from ``D`` to the single candidate ``c``.  A voter compares the
two multisets by their favourite candidate among them; when that favourite is
``c`` itself and the draws contain ``n`` copies of ``c``, the draws win with
probability ``n / (n + 1)``.

Per voter block, with ``q = D(c)`` and ``r`` the D-mass ranked below ``c``,
the draws lose with probability

    h(q, r) = sum_i C(k, i) / (i + 1) * q**i * r**(k - i)
            = ((q + r)**(k + 1) - r**(k + 1)) / ((k + 1) q),

and the polynomial form has no singularity at ``q = 0``.  The map
``D -> beat_probability(p, D, k, c)`` is concave, so a stable lottery (one
whose worst pure response still loses with probability at least
``k / (k + 1)``) maximizes a concave minimum.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .lottery_types import Lottery
from .profile import KTournamentSummary, Profile, ProfileError
from .simplex import solve_lp

SNAP = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float | None = None  # None picks 1e-6 for k = 1, 1e-4 otherwise
    max_iters: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.epsilon is not None and self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")

    def eps_for(self, k: int) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return 1e-6 if k == 1 else 1e-4


@dataclass(frozen=True)
class StabilityCertificate:
    k: int
    worst_response: int
    worst_value: float | Fraction
    target_value: Fraction
    epsilon: float
    certified: bool
    method: str = ""
    iterations: int = 0


def target_value(k: int) -> Fraction:
    return Fraction(k, k + 1)


def _check_k(k: int) -> None:
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")


def _lose_weight(q, r, k: int):
    """h(q, r): chance that k draws lose to c, given per-block masses."""
    # stays exact when q and r are Fractions
    return sum(math.comb(k, i) * q**i * r ** (k - i) / (i + 1) for i in range(k + 1))


def _probs(D, m: int):
    probs = D.probs if isinstance(D, Lottery) else tuple(D)
    if len(probs) != m:
        raise ValueError("lottery size does not match the profile")
    return probs


def beat_probability(p: Profile, D, k: int, c: int):
    """Fraction of voters preferring ``k`` i.i.d. draws from ``D`` to ``c``.

    Exact (a Fraction) when ``D`` has Fraction entries.
    """
    _check_k(k)
    p._check(c)
    probs = _probs(D, p.m)
    exact = all(isinstance(x, (Fraction, int)) for x in probs)
    if exact:
        probs = tuple(Fraction(x) for x in probs)
    q = probs[c]
    lose = Fraction(0) if exact else 0.0
    for blk, pos in zip(p.blocks, p.positions):
        r = sum((probs[a] for a in range(p.m) if pos[a] > pos[c]), Fraction(0) if exact else 0.0)
        w = blk.weight if exact else float(blk.weight)
        lose += w * _lose_weight(q, r, k)
    return 1 - lose


def value_against(p: Profile, D, k: int, opponent) -> float:
    """Chance that k draws from ``D`` beat one draw from ``opponent``."""
    opp = _probs(opponent, p.m)
    return sum(opp[c] * beat_probability(p, D, k, c) for c in range(p.m) if opp[c])


class _Evaluator:
    """Vectorized beat probabilities and gradients for one profile."""

    def __init__(self, p: Profile, k: int):
        self.m = p.m
        self.k = k
        self.w = np.array([float(b.weight) for b in p.blocks])
        pos = np.array(p.positions)  # blocks x m
        # below[v, c, a] = 1 when block v ranks a strictly below c
        self.below = (pos[:, None, :] > pos[:, :, None]).astype(float)
        i = np.arange(k + 1)
        self.coef = np.array([math.comb(k, j) / (j + 1) for j in i])
        self.i = i

    def _h(self, q, r):
        i, k = self.i, self.k
        qp = q[..., None] ** i
        rp = r[..., None] ** (k - i)
        return (self.coef * qp * rp).sum(-1)

    def values(self, D):
        D = np.asarray(D, dtype=float)
        r = self.below @ D  # blocks x m
        q = np.broadcast_to(D, r.shape)
        return 1 - self.w @ self._h(q, r)

    def values_and_jac(self, D):
        D = np.asarray(D, dtype=float)
        k, i, coef = self.k, self.i, self.coef
        r = np.clip(self.below @ D, 0, None)
        q = np.broadcast_to(np.clip(D, 0, None), r.shape)
        qp = q[..., None] ** i
        rp = r[..., None] ** (k - i)
        vals = 1 - self.w @ (coef * qp * rp).sum(-1)
        # derivatives; the i = 0 and i = k terms carry zero powers
        qd = np.where(i > 0, i * q[..., None] ** np.maximum(i - 1, 0), 0.0)
        rd = np.where(i < k, (k - i) * r[..., None] ** np.maximum(k - i - 1, 0), 0.0)
        hq = (coef * qd * rp).sum(-1)
        hr = (coef * qp * rd).sum(-1)
        jac = -np.einsum("v,vc,vca->ca", self.w, hr, self.below)
        jac[np.arange(self.m), np.arange(self.m)] -= self.w @ hq
        return vals, jac


def _embed(sub_probs, keep, m):
    out = [Fraction(0) if isinstance(sub_probs[0], Fraction) else 0.0] * m
    for i, c in enumerate(keep):
        out[c] = sub_probs[i]
    return out


def _certify(p: Profile, probs, k: int, eps: float, method: str, iters: int):
    exact = all(isinstance(x, Fraction) for x in probs)
    if exact:
        vals = [beat_probability(p, probs, k, c) for c in range(p.m)]
    else:
        vals = [float(v) for v in _Evaluator(p, k).values(probs)]
    worst = min(range(p.m), key=lambda c: (vals[c], c))
    wv = vals[worst]
    ok = wv >= target_value(k) - Fraction(eps) if exact else wv >= float(target_value(k)) - eps
    return StabilityCertificate(k, worst, wv, target_value(k), eps, bool(ok), method, iters)


def _maximal_lottery(p: Profile) -> tuple[Fraction, ...]:
    """Exact stable 1-lottery: D with sum_a D(a)(2 s(a>c) - 1) >= 0 for all c."""
    m = p.m
    s = p.tournament_matrix().s
    cols = []
    for a in range(m):
        col = {c: 2 * s[a][c] - 1 for c in range(m) if c != a}
        col[m] = 1
        cols.append(col)
    cols += [{c: -1} for c in range(m)]
    b = [0] * m + [1]
    res = solve_lp([0] * (2 * m), cols, b)
    if res.status != "optimal":
        raise AssertionError("stable 1-lottery program must be feasible")
    return tuple(res.x[:m])


def _snap(D) -> np.ndarray:
    D = np.clip(np.asarray(D, dtype=float), 0, None)
    D[D < SNAP] = 0.0
    return D / D.sum()


def _slsqp(ev: _Evaluator, start, tol: float, max_iter: int):
    m = ev.m

    def obj(z):
        return -z[m]

    def obj_jac(z):
        g = np.zeros(m + 1)
        g[m] = -1.0
        return g

    def cons(z):
        return ev.values(z[:m]) - z[m]

    def cons_jac(z):
        _, jac = ev.values_and_jac(z[:m])
        return np.hstack([jac, -np.ones((m, 1))])

    z0 = np.append(start, ev.values(start).min())
    res = minimize(
        obj, z0, jac=obj_jac, method="SLSQP",
        bounds=[(0.0, 1.0)] * m + [(0.0, 1.0)],
        constraints=[
            {"type": "ineq", "fun": cons, "jac": cons_jac},
            {"type": "eq", "fun": lambda z: z[:m].sum() - 1, "jac": lambda z: np.append(np.ones(m), 0.0)},
        ],
        options={"ftol": tol, "maxiter": max_iter},
    )
    return _snap(res.x[:m]), res.nit


def _mirror_prox(ev: _Evaluator, start, target: float, eps: float, max_iters: int):
    """Extragradient on the saddle sum_c y_c bp(D, c) with entropic steps."""
    m = ev.m
    D = np.asarray(start, dtype=float).clip(1e-300)
    D /= D.sum()
    y = np.full(m, 1.0 / m)
    eta = 0.5
    avg, wsum = np.zeros(m), 0.0
    best, best_val = _snap(D), ev.values(_snap(D)).min()
    it = 0
    for it in range(1, max_iters + 1):
        vals, jac = ev.values_and_jac(D)
        gD, gy = y @ jac, vals
        Dh = D * np.exp(eta * (gD - gD.max()))
        Dh /= Dh.sum()
        yh = y * np.exp(-eta * (gy - gy.min()))
        yh /= yh.sum()
        vals_h, jac_h = ev.values_and_jac(Dh)
        gD, gy = yh @ jac_h, vals_h
        D = D * np.exp(eta * (gD - gD.max()))
        D = D.clip(1e-300) / D.sum()
        y = y * np.exp(-eta * (gy - gy.min()))
        y = y.clip(1e-300) / y.sum()
        avg += Dh
        wsum += 1.0
        if it % 50 == 0:
            for cand in (_snap(avg / wsum), _snap(Dh)):
                v = ev.values(cand).min()
                if v > best_val:
                    best, best_val = cand, v
            if best_val >= target - eps:
                break
    return best, it


def solve_stable(p: Profile, k: int, cfg: SolverConfig | None = None, support: Sequence[int] | None = None):
    """Stable k-lottery of ``p`` (optionally restricted to ``support``).

    k = 1 is solved exactly by linear programming.  For k >= 2 the concave
    program ``max t s.t. bp(D, c) >= t`` is solved by SLSQP from the uniform
    lottery, with a mirror-prox saddle-point iteration as fallback.  The
    result is certified against ``k / (k + 1) - epsilon``.
    """
    _check_k(k)
    cfg = cfg or SolverConfig()
    eps = cfg.eps_for(k)
    if support is not None:
        sub, keep = p.restrict(support)
        D, cert = solve_stable(sub, k, cfg)
        full = Lottery(tuple(_embed(D.probs, keep, p.m)))
        return full, StabilityCertificate(
            k, keep[cert.worst_response], cert.worst_value, cert.target_value,
            cert.epsilon, cert.certified, cert.method, cert.iterations,
        )
    if p.m == 1:
        D = (Fraction(1),)
        return Lottery(D), _certify(p, D, k, eps, "trivial", 0)
    if k == 1:
        D = _maximal_lottery(p)
        return Lottery(D), _certify(p, D, k, eps, "exact-lp", 0)

    ev = _Evaluator(p, k)
    target = float(target_value(k))
    start = np.full(p.m, 1.0 / p.m)
    D, nit = _slsqp(ev, start, 1e-14, min(cfg.max_iters, 1000))
    cert = _certify(p, tuple(D), k, eps, "slsqp", nit)
    if not cert.certified:
        D2, it2 = _mirror_prox(ev, D, target, eps, cfg.max_iters)
        # polish the saddle-point iterate, keep whichever is better
        D3, nit3 = _slsqp(ev, D2, 1e-14, min(cfg.max_iters, 1000))
        cands = [(ev.values(D).min(), D), (ev.values(D2).min(), D2), (ev.values(D3).min(), D3)]
        D = max(cands, key=lambda t: t[0])[1]
        cert = _certify(p, tuple(D), k, eps, "mirror-prox", nit + it2 + nit3)
    return Lottery(tuple(float(x) for x in D)), cert


def solve_reverse_stable(p: Profile, k: int, cfg: SolverConfig | None = None, support: Sequence[int] | None = None):
    """Stable k-lottery of the profile with every ranking reversed."""
    return solve_stable(p.reverse(), k, cfg, support)


def defensive_report(p: Profile, D, k: int, cfg: SolverConfig | None = None) -> dict:
    """Best attack on ``D``: maximize over A the chance that k draws from A beat D.

    Returns the attack, its value minus ``k / (k + 1)`` (``gap``) and an upper
    bound on that gap from the Frank-Wolfe duality gap of the concave program.
    """
    _check_k(k)
    cfg = cfg or SolverConfig()
    m = p.m
    opp = np.array([float(x) for x in _probs(D, m)])
    ev = _Evaluator(p, k)
    target = float(target_value(k))

    def f_and_grad(A):
        vals, jac = ev.values_and_jac(A)
        return float(opp @ vals), opp @ jac

    starts = [np.full(m, 1.0 / m), opp.copy()]
    best_A, best_f = None, -np.inf
    for A0 in starts:
        res = minimize(
            lambda A: -f_and_grad(A)[0], A0, jac=lambda A: -f_and_grad(A)[1], method="SLSQP",
            bounds=[(0.0, 1.0)] * m,
            constraints=[{"type": "eq", "fun": lambda A: A.sum() - 1, "jac": lambda A: np.ones(m)}],
            options={"ftol": 1e-15, "maxiter": min(cfg.max_iters, 1000)},
        )
        A = _snap(res.x)
        f, _ = f_and_grad(A)
        if f > best_f:
            best_A, best_f = A, f
    # a few Frank-Wolfe steps tighten the bound if SLSQP stopped early
    A = best_A
    for t in range(min(cfg.max_iters, 2000)):
        f, g = f_and_grad(A)
        fw_gap = float(g.max() - g @ A)
        if fw_gap <= 1e-12:
            break
        vertex = np.zeros(m)
        vertex[int(np.argmax(g))] = 1.0
        A = (1 - 2 / (t + 3)) * A + 2 / (t + 3) * vertex
        f_new, _ = f_and_grad(A)
        if f_new > best_f:
            best_A, best_f = A.copy(), f_new
    f, g = f_and_grad(best_A)
    fw_gap = float(g.max() - g @ best_A)
    return {
        "attack": Lottery(tuple(float(x) for x in best_A / best_A.sum())),
        "gap": best_f - target,
        "gap_upper": best_f + fw_gap - target,
    }


def defensive_gap(p: Profile, D, k: int, cfg: SolverConfig | None = None) -> float:
    """max over A of Pr[A^k beats D] - k/(k+1); at most epsilon for a stable D."""
    return defensive_report(p, D, k, cfg)["gap"]


def beat_probability_from_summary(ks: KTournamentSummary, D, k: int, c: int) -> float:
    """Beat probability rebuilt from (k+1)-wise top shares alone."""
    _check_k(k)
    if ks.k < k + 1:
        raise ProfileError(f"summary of order {ks.k} cannot evaluate k={k} (needs order >= {k + 1})")
    probs = _probs(D, ks.m)
    exact = all(isinstance(x, (Fraction, int)) for x in probs)
    support = [a for a in range(ks.m) if probs[a] > 0]
    total = Fraction(0) if exact else 0.0
    for draws in itertools.combinations_with_replacement(support, k):
        counts: dict[int, int] = {}
        for a in draws:
            counts[a] = counts.get(a, 0) + 1
        ways = math.factorial(k)
        pr = 1
        for a, n in counts.items():
            ways //= math.factorial(n)
            pr *= probs[a] ** n
        S = set(counts) | {c}
        lose = ks.top_share(S, c) if exact else float(ks.top_share(S, c))
        n_c = counts.get(c, 0)
        total += ways * pr * (1 - lose / (n_c + 1))
    return total


def beat_probability_mc(p: Profile, D, k: int, c: int, samples: int = 1_000_000, seed: int = 0):
    """Monte Carlo estimate of the beat probability with its standard error.

    Simulates the tie-break literally: each copy of a candidate gets a uniform
    tag and the highest tag among copies of the favourite wins.
    """
    _check_k(k)
    rng = np.random.default_rng(seed)
    probs = np.array([float(x) for x in _probs(D, p.m)])
    w = np.array([float(b.weight) for b in p.blocks])
    pos = np.array(p.positions)
    blocks = rng.choice(len(w), size=samples, p=w / w.sum())
    draws = rng.choice(p.m, size=(samples, k), p=probs / probs.sum())
    dpos = pos[blocks[:, None], draws]  # positions of the draws
    cpos = pos[blocks, c]
    best = dpos.min(axis=1)
    win = best < cpos
    tie = best == cpos
    n_copies = (draws == c).sum(axis=1)
    tags = rng.random((samples, k))
    tags = np.where(draws == c, tags, -1.0).max(axis=1)
    ctag = rng.random(samples)
    win |= tie & (tags > ctag) & (n_copies > 0)
    est = win.mean()
    return float(est), float(np.sqrt(est * (1 - est) / samples))


def representation_check(p: Profile, D, k: int, max_J: int | None = None, eps: float = 1e-4) -> dict:
    """Check s(i > J) <= D(J)^-k / (k + 1) for every J with |J| <= max_J and i outside J.

    Also reports the smallest value of (1 - s(i > J)) - D(J), without
    asserting any sign for it.
    """
    _check_k(k)
    probs = [float(x) for x in _probs(D, p.m)]
    m = p.m
    max_J = m - 1 if max_J is None else max_J
    violations = []
    worst_margin = math.inf
    min_slack = math.inf
    checked = 0
    for size in range(1, max_J + 1):
        for J in itertools.combinations(range(m), size):
            pJ = sum(probs[j] for j in J)
            bound = math.inf if pJ <= 0 else pJ ** (-k) / (k + 1)
            for i in range(m):
                if i in J:
                    continue
                s = float(p.frac_group({i}, J))
                checked += 1
                margin = bound - s
                worst_margin = min(worst_margin, margin)
                min_slack = min(min_slack, (1 - s) - pJ)
                if s > bound + eps:
                    violations.append({"i": i, "J": list(J), "s": s, "bound": bound})
    return {
        "ok": not violations,
        "checked": checked,
        "violations": violations,
        "worst_margin": worst_margin,
        "min_slack": min_slack,
    }
