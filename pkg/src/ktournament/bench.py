"""The five-candidate lower-bound instance, the blanketing parameters, and the
rotation-symmetric suite.

The lower-bound instance is a weighted tournament on candidates 0..4 built
from the root ``lam`` of ``2x^5 + x^4 + x^3 - x - 4`` and
``beta = 2 / (1 + lam^2 + lam^3)``.  Five profiles (one per candidate) all
realize that tournament, and in the profile for candidate ``j`` some
consistent metric makes ``j`` cost more than 3.112 times the optimum, so no
tournament rule can beat that ratio.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Sequence

import numpy as np

from .metric import BiasedVector, distortion_exact, integral_pair
from .profile import Profile, TournamentMatrix, parse_profile
from .random_profiles import rotation_closed_profile

ROOT_TOL = Fraction(1, 10**12)
TABLE_TOL = 2e-4
RATIO_TOL = 1e-3
LB_DISTORTION = 3.112
CYCLIC_BOUND = 3 + 1e-9


def solve_poly_root(coeffs: Sequence, bracket) -> Fraction:
    """Bisection root of the polynomial ``coeffs`` (highest degree first).

    Arithmetic is exact, so the result is a rational within 1e-12 of a root.
    """
    coeffs = [Fraction(c) for c in coeffs]
    lo, hi = (Fraction(str(b)) if isinstance(b, float) else Fraction(b) for b in bracket)

    def f(x):
        acc = Fraction(0)
        for c in coeffs:
            acc = acc * x + c
        return acc

    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > ROOT_TOL:
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    # limit the denominator so downstream exact arithmetic stays cheap
    return ((lo + hi) / 2).limit_denominator(10**13)


def blanket_params() -> dict:
    """Blanketing parameters: lam root of x^3 - x^2 - 1, alpha = 1/lam, beta = 2 - lam."""
    lam = solve_poly_root([1, -1, 0, -1], (1, 2))
    return {
        "lambda": lam,
        "alpha": 1 / lam,
        "beta": 2 - lam,
        "bound": 1 + 2 * lam,
    }


def verify_blanket_params() -> list[dict]:
    prm = blanket_params()
    checks = [
        ("alpha", float(prm["alpha"]), 0.68233, 1e-5),
        ("beta", float(prm["beta"]), 0.53443, 1e-5),
        ("bound", float(prm["bound"]), 3.93114, 1e-5),
        ("beta equals 1 - 1/lambda^2", float(prm["beta"]), float(1 - 1 / prm["lambda"] ** 2), 1e-12),
    ]
    return [
        {"check": name, "value": got, "expected": want, "pass": abs(got - want) <= tol}
        for name, got, want, tol in checks
    ]


@dataclass
class LBInstance:
    lam: Fraction
    beta: Fraction
    matrix: TournamentMatrix
    profiles: dict[int, Profile]
    deviations: dict[int, list] = field(default_factory=dict)


def lb5_matrix(lam, beta) -> list[list]:
    l, b = lam, beta
    z = 0 * l
    return [
        [z, b * l, 1 - b, 1 - b, 1 - b],
        [1 - b * l, z, b * l**2, 1 - b, 1 - b],
        [b, 1 - b * l**2, z, b * l**3, b * l**3 * (1 + l) - 1],
        [b, b, 1 - b * l**3, z, b * l**4],
        [b, b, 2 - b * l**3 * (1 + l), 1 - b * l**4, z],
    ]


def load_lb5_profile(jstar: int) -> Profile:
    try:
        text = resources.files("ktournament").joinpath(f"data/lb5_jstar{jstar}.txt").read_text()
    except FileNotFoundError as exc:
        raise RuntimeError(f"bundled lower-bound table for candidate {jstar} is missing") from exc
    return parse_profile(text)


def build_lb5() -> LBInstance:
    lam = solve_poly_root([2, 1, 1, 0, -1, -4], (1, Fraction(11, 10)))
    beta = 2 / (1 + lam**2 + lam**3)
    mat = TournamentMatrix(tuple(tuple(r) for r in lb5_matrix(lam, beta)), tuple("01234"))
    profiles = {j: load_lb5_profile(j) for j in range(5)}
    deviations = {}
    for j, p in profiles.items():
        s = p.tournament_matrix().s
        deviations[j] = [
            (a, c, float(s[a][c] - mat.s[a][c]))
            for a in range(5) for c in range(5)
            if a != c and abs(float(s[a][c] - mat.s[a][c])) > TABLE_TOL
        ]
    return LBInstance(lam, beta, mat, profiles, deviations)


def lb5_vector(jstar: int) -> BiasedVector:
    """The biased vector used against candidate ``jstar``."""
    if jstar == 0:
        half = Fraction(1, 2)
        return BiasedVector((1, 1, half, half, 0), 4)
    opt = jstar - 1
    return BiasedVector(tuple(0 if c == opt else 1 for c in range(5)), opt)


def _check(name, value, ok, **extra) -> dict:
    out = {"check": name, "value": value, "pass": bool(ok)}
    out.update(extra)
    return out


def verify_lb5(inst: LBInstance | None = None, with_lp: bool = True) -> list[dict]:
    """Named checks for every case of the lower-bound instance."""
    inst = inst or build_lb5()
    lam = float(inst.lam)
    out = []
    out.append(_check("triple (3,1,2) tight", float(inst.beta * (1 + inst.lam**2 + inst.lam**3)),
                      abs(inst.beta * (1 + inst.lam**2 + inst.lam**3) - 2) < 1e-6))
    out.append(_check("matrix is a tournament", len(inst.matrix.check(tol=Fraction(1, 10**6))), not inst.matrix.check(tol=Fraction(1, 10**6))))
    for jstar in range(5):
        p = inst.profiles[jstar]
        bv = lb5_vector(jstar)
        lhs, rhs = integral_pair(p, bv, jstar)
        ratio = float(lhs / rhs)
        out.append(_check(f"case {jstar}: ratio", ratio, ratio >= lam - RATIO_TOL, threshold=lam - RATIO_TOL,
                          lhs=float(lhs), rhs=float(rhs)))
        if jstar >= 1:
            opt, prev = jstar - 1, (jstar - 2) % 5
            a = float(1 - p.plurality_share(opt))
            b = float(p.frac_pairwise(prev, opt))
            out.append(_check(f"case {jstar}: 1 - plu({opt}) = s({prev}>{opt})", a - b, abs(a - b) <= TABLE_TOL))
        else:
            vals = [float(p.frac_pairwise(c, 0)) for c in (2, 3, 4)] + [float(p.frac_group({2, 3, 4}, {0}))]
            out.append(_check("case 0: s(2>0) = s(3>0) = s(4>0) = s(234>0)", max(vals) - min(vals),
                              max(vals) - min(vals) <= TABLE_TOL))
            a, b = float(p.frac_group({4}, {0, 1})), float(p.frac_pairwise(4, 0))
            out.append(_check("case 0: s(4>01) = s(4>0)", a - b, abs(a - b) <= TABLE_TOL))
        out.append(_check(f"case {jstar}: profile realizes matrix", len(inst.deviations[jstar]),
                          True, recorded=inst.deviations[jstar]))
        if with_lp:
            rep = distortion_exact(p, jstar)
            out.append(_check(f"case {jstar}: distortion", float(rep.value), rep.value >= Fraction("3.112"),
                              threshold=LB_DISTORTION, witness_istar=rep.witness_istar))
    return out


def cyclic_suite(m: int, trials: int, rng_seed: int = 0, base_blocks: int = 2) -> dict:
    """Distortion of every candidate on rotation-closed random profiles."""
    if m < 3:
        raise ValueError("cyclic suite needs m >= 3")
    rng = np.random.default_rng(rng_seed)
    rows = []
    for t in range(trials):
        p = rotation_closed_profile(rng, m, base_blocks)
        values = [distortion_exact(p, c).value for c in range(m)]
        rows.append({"trial": t, "values": [float(v) for v in values], "pass": all(v <= CYCLIC_BOUND for v in values)})
    return {"m": m, "trials": trials, "seed": rng_seed, "rows": rows, "pass": all(r["pass"] for r in rows)}


def symmetric_cycle(m: int = 3) -> Profile:
    """Equal-weight profile of the m cyclic shifts of 0 > 1 > ... > m-1."""
    base = list(range(m))
    return Profile.from_rankings(((1, base[i:] + base[:i]) for i in range(m)), m)
