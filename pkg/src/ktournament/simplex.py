"""Exact revised simplex over the rationals.

Solves ``minimize c.x  subject to  A x = b, x >= 0`` with ``b >= 0``.  The
matrix is given column-wise as sparse ``{row: value}`` dicts.  Arithmetic is
exact (gmpy2 ``mpq`` when available, :class:`fractions.Fraction` otherwise)
and the basis inverse is kept dense, which is fine for the few dozen rows the
distortion and lottery programs need.

Pricing is Dantzig's rule; after a run of degenerate pivots it falls back to
Bland's rule until the objective moves again, so the method cannot cycle.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - exercised only without gmpy2
    _Q = Fraction

DEGENERATE_STREAK = 30


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    return Fraction(int(v.numerator), int(v.denominator))


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible", "unbounded"
    # on "infeasible", duals holds a Farkas certificate
    value: Fraction | None
    x: list[Fraction]
    duals: list[Fraction]
    basis: list[int]
    pivots: int
    ray: list[Fraction] | None = None


class SingularBasis(Exception):
    pass


class _Tableau:
    def __init__(self, cols, b, nrows):
        self.cols = cols
        self.b = b
        self.R = nrows

    def column(self, j):
        return self.cols[j]

    def invert(self, basis):
        """Gauss-Jordan inverse of the basis matrix."""
        R = self.R
        M = [[_Q(0)] * R + [_Q(1) if i == k else _Q(0) for k in range(R)] for i in range(R)]
        for pos, j in enumerate(basis):
            for r, v in self.cols[j].items():
                M[r][pos] = v
        for col in range(R):
            piv = next((r for r in range(col, R) if M[r][col] != 0), None)
            if piv is None:
                raise SingularBasis
            M[col], M[piv] = M[piv], M[col]
            pr = M[col]
            inv = 1 / pr[col]
            for t in range(2 * R):
                pr[t] *= inv
            for r in range(R):
                if r != col:
                    f = M[r][col]
                    if f:
                        row = M[r]
                        for t in range(col, 2 * R):
                            if pr[t]:
                                row[t] -= f * pr[t]
        return [row[R:] for row in M]


def _solve(tab, cost, basis, Binv, xB, allowed, max_pivots):
    """Run primal simplex from a feasible basis. Returns status and pivot count."""
    R = tab.R
    cols = tab.cols
    pivots = 0
    streak = 0
    in_basis = set(basis)
    while True:
        cB = [cost[j] for j in basis]
        pi = [sum((cB[i] * Binv[i][r] for i in range(R) if cB[i] and Binv[i][r]), _Q(0)) for r in range(R)]
        bland = streak >= DEGENERATE_STREAK
        enter, best = None, _Q(0)
        for j in allowed:
            if j in in_basis:
                continue
            d = cost[j]
            for r, v in cols[j].items():
                if pi[r]:
                    d -= pi[r] * v
            if d < 0:
                if bland:
                    enter = j
                    break
                if d < best:
                    enter, best = j, d
        if enter is None:
            return "optimal", pivots, pi, None
        col = cols[enter]
        u = [sum((Binv[i][r] * v for r, v in col.items() if Binv[i][r]), _Q(0)) for i in range(R)]
        leave, ratio = None, None
        for i in range(R):
            if u[i] > 0:
                t = xB[i] / u[i]
                if ratio is None or t < ratio or (t == ratio and basis[i] < basis[leave]):
                    leave, ratio = i, t
        if leave is None:
            return "unbounded", pivots, pi, (enter, u)
        if pivots >= max_pivots:
            raise RuntimeError("simplex pivot limit reached")
        streak = streak + 1 if ratio == 0 else 0
        ur = u[leave]
        prow = Binv[leave]
        inv = 1 / ur
        for t in range(R):
            if prow[t]:
                prow[t] *= inv
        xB[leave] *= inv
        for i in range(R):
            f = u[i]
            if i != leave and f:
                row = Binv[i]
                for t in range(R):
                    if prow[t]:
                        row[t] -= f * prow[t]
                xB[i] -= f * xB[leave]
        in_basis.discard(basis[leave])
        basis[leave] = enter
        in_basis.add(enter)
        pivots += 1


def solve_lp(
    c: Sequence,
    columns: Sequence[dict],
    b: Sequence,
    basis: Sequence[int] | None = None,
    max_pivots: int = 100000,
) -> LPResult:
    """Minimize ``c.x`` subject to ``A x = b``, ``x >= 0`` (requires ``b >= 0``).

    ``basis`` optionally names a starting basis (one column per row).  If it is
    singular or primal infeasible, the solver falls back to a two-phase start.
    On "unbounded" the result carries a ray direction in ``ray``.
    """
    R = len(b)
    n = len(columns)
    bq = [_Q(to_fraction(Fraction(v))) for v in b]
    if any(v < 0 for v in bq):
        raise ValueError("right-hand side must be nonnegative")
    cols = [{r: _Q(to_fraction(Fraction(v))) for r, v in col.items() if v != 0} for col in columns]
    cost = [_Q(to_fraction(Fraction(v))) for v in c]

    start = None
    if basis is not None and len(basis) == R:
        tab = _Tableau(cols, bq, R)
        try:
            Binv = tab.invert(list(basis))
            xB = [sum((Binv[i][r] * bq[r] for r in range(R) if bq[r]), _Q(0)) for i in range(R)]
            if all(v >= 0 for v in xB):
                start = (list(basis), Binv, xB)
        except SingularBasis:
            pass

    pivots = 0
    if start is None:
        # phase 1: one artificial per row
        art = [{r: _Q(1)} for r in range(R)]
        allcols = cols + art
        tab = _Tableau(allcols, bq, R)
        cost1 = [_Q(0)] * n + [_Q(1)] * R
        basis1 = list(range(n, n + R))
        Binv = [[_Q(1) if i == k else _Q(0) for k in range(R)] for i in range(R)]
        xB = list(bq)
        status, p1, pi1, _ = _solve(tab, cost1, basis1, Binv, xB, range(n + R), max_pivots)
        pivots += p1
        if sum((xB[i] for i in range(R) if basis1[i] >= n), _Q(0)) > 0:
            # phase-1 multipliers y satisfy A^T y <= 0 and b.y > 0 (Farkas)
            farkas = [to_fraction(v) for v in pi1]
            return LPResult("infeasible", None, [], farkas, basis1, pivots)
        # drive zero-valued artificials out where possible
        for i in range(R):
            if basis1[i] < n:
                continue
            in_basis = set(basis1)
            for j in range(n):
                if j in in_basis:
                    continue
                ui = sum((Binv[i][r] * v for r, v in cols[j].items() if Binv[i][r]), _Q(0))
                if ui != 0:
                    u = [sum((Binv[t][r] * v for r, v in cols[j].items() if Binv[t][r]), _Q(0)) for t in range(R)]
                    prow = Binv[i]
                    inv = 1 / ui
                    for t in range(R):
                        prow[t] *= inv
                    xB[i] *= inv
                    for t in range(R):
                        if t != i and u[t]:
                            row = Binv[t]
                            for s in range(R):
                                if prow[s]:
                                    row[s] -= u[t] * prow[s]
                            xB[t] -= u[t] * xB[i]
                    basis1[i] = j
                    pivots += 1
                    break
        start = (basis1, Binv, xB)
        cost_full = cost + [_Q(0)] * R
    else:
        tab = _Tableau(cols, bq, R)
        cost_full = cost

    basis_, Binv, xB = start
    status, p2, pi, ray_info = _solve(tab, cost_full, basis_, Binv, xB, range(n), max_pivots)
    pivots += p2
    x = [Fraction(0)] * n
    for i, j in enumerate(basis_):
        if j < n:
            x[j] = to_fraction(xB[i])
    duals = [to_fraction(v) for v in pi]
    if status == "unbounded":
        enter, u = ray_info
        ray = [Fraction(0)] * n
        ray[enter] = Fraction(1)
        for i, j in enumerate(basis_):
            if j < n:
                ray[j] = -to_fraction(u[i])
        return LPResult("unbounded", None, x, duals, basis_, pivots, ray)
    value = sum((to_fraction(cost[j]) * x[j] for j in range(n) if x[j]), Fraction(0))
    return LPResult("optimal", value, x, duals, basis_, pivots)
