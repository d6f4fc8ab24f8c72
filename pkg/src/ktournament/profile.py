"""Weighted preference profiles and the ordinal statistics computed from them.

A profile is a list of voter blocks; each block carries an exact rational
weight (its share of the electorate) and a strict ranking of the candidates,
best first.  Every statistic the rules and certificates use (pairwise
fractions, group fractions, tuple frequencies, top/bottom shares) is an exact
:class:`fractions.Fraction`.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

WEIGHT_SUM_TOL = Fraction(1, 10**4)


class ProfileError(ValueError):
    """Raised for malformed profile input or invalid statistic queries."""


@dataclass(frozen=True)
class VoterBlock:
    weight: Fraction
    ranking: tuple[int, ...]


@dataclass(frozen=True)
class Profile:
    """An immutable weighted profile over candidates ``0..m-1``.

    Blocks are canonical: equal rankings are merged, zero-weight blocks are
    dropped, and blocks are sorted by ranking.  ``normalization`` is the
    factor that was applied to the raw weights to make them sum to one.
    """

    m: int
    blocks: tuple[VoterBlock, ...]
    labels: tuple[str, ...] = ()
    normalization: Fraction = field(default=Fraction(1), compare=False)
    _pos: tuple[tuple[int, ...], ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise ProfileError("profile needs at least one candidate")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(c) for c in range(self.m)))
        if len(self.labels) != self.m:
            raise ProfileError("label count does not match candidate count")
        total = Fraction(0)
        for b in self.blocks:
            if b.weight < 0:
                raise ProfileError("negative weight")
            if sorted(b.ranking) != list(range(self.m)):
                raise ProfileError(f"ranking {b.ranking} is not a permutation of 0..{self.m - 1}")
            total += b.weight
        if total != 1:
            raise ProfileError(f"block weights sum to {total}, expected exactly 1")
        pos = []
        for b in self.blocks:
            row = [0] * self.m
            for r, c in enumerate(b.ranking):
                row[c] = r
            pos.append(tuple(row))
        object.__setattr__(self, "_pos", tuple(pos))

    # -- construction -----------------------------------------------------

    @classmethod
    def from_rankings(
        cls,
        weighted: Iterable[tuple[object, Sequence[int]]],
        m: int | None = None,
        labels: Sequence[str] = (),
        tolerance: Fraction | None = None,
    ) -> "Profile":
        """Build a canonical profile from ``(weight, ranking)`` pairs.

        Weights are converted with :class:`Fraction` and rescaled to sum to
        one.  With ``tolerance`` set, the raw sum must lie within that
        distance of one (the file parser uses 10^-4).
        """
        merged: dict[tuple[int, ...], Fraction] = {}
        for w, ranking in weighted:
            w = Fraction(w) if not isinstance(w, float) else Fraction(str(w))
            if w < 0:
                raise ProfileError("negative weight")
            key = tuple(int(c) for c in ranking)
            merged[key] = merged.get(key, Fraction(0)) + w
        if m is None:
            m = len(next(iter(merged))) if merged else len(labels)
        total = sum(merged.values(), Fraction(0))
        if total <= 0:
            raise ProfileError("weights sum to zero")
        if tolerance is not None and abs(total - 1) > tolerance:
            raise ProfileError(f"weight sum out of tolerance: {float(total):.6f}")
        blocks = tuple(
            VoterBlock(w / total, r) for r, w in sorted(merged.items()) if w > 0
        )
        return cls(m, blocks, tuple(labels), 1 / total)

    # -- basic accessors --------------------------------------------------

    @property
    def candidates(self) -> range:
        return range(self.m)

    def position(self, block: int, c: int) -> int:
        return self._pos[block][c]

    @property
    def positions(self) -> tuple[tuple[int, ...], ...]:
        return self._pos

    def label(self, c: int) -> str:
        return self.labels[c]

    def index_of(self, label: str | int) -> int:
        if isinstance(label, int):
            if not 0 <= label < self.m:
                raise ProfileError(f"candidate {label} out of range")
            return label
        try:
            return self.labels.index(label)
        except ValueError:
            raise ProfileError(f"unknown candidate label {label!r}") from None

    # -- statistics -------------------------------------------------------

    def _check(self, *cs: int) -> None:
        for c in cs:
            if not 0 <= c < self.m:
                raise ProfileError(f"candidate {c} out of range")

    def frac_pairwise(self, a: int, b: int) -> Fraction:
        """Fraction of the electorate ranking ``a`` above ``b``."""
        self._check(a, b)
        if a == b:
            raise ProfileError("pairwise fraction needs two distinct candidates")
        return sum(
            (blk.weight for blk, pos in zip(self.blocks, self._pos) if pos[a] < pos[b]),
            Fraction(0),
        )

    def frac_group(self, I: Iterable[int], J: Iterable[int]) -> Fraction:
        """Fraction ranking every member of ``I`` above every member of ``J``."""
        I, J = set(I), set(J)
        self._check(*I, *J)
        if not I or not J:
            raise ProfileError("group fraction needs nonempty sets")
        if I & J:
            raise ProfileError("group fraction needs disjoint sets")
        total = Fraction(0)
        for blk, pos in zip(self.blocks, self._pos):
            if max(pos[i] for i in I) < min(pos[j] for j in J):
                total += blk.weight
        return total

    def frac_tuple(self, t: Sequence[int]) -> Fraction:
        """Fraction whose ranking restricted to ``t`` is exactly the order of ``t``."""
        self._check(*t)
        if len(set(t)) != len(t):
            raise ProfileError("tuple has a repeated candidate")
        total = Fraction(0)
        for blk, pos in zip(self.blocks, self._pos):
            if all(pos[t[i]] < pos[t[i + 1]] for i in range(len(t) - 1)):
                total += blk.weight
        return total

    def plurality_share(self, c: int) -> Fraction:
        self._check(c)
        return sum((b.weight for b in self.blocks if b.ranking[0] == c), Fraction(0))

    def top_share(self, S: Iterable[int], c: int) -> Fraction:
        """Fraction of voters whose favourite within ``S`` is ``c``."""
        S = set(S)
        if c not in S:
            raise ProfileError("candidate must belong to the set")
        rest = S - {c}
        if not rest:
            return Fraction(1)
        return self.frac_group({c}, rest)

    def bottom_share(self, S: Iterable[int], c: int) -> Fraction:
        S = set(S)
        if c not in S:
            raise ProfileError("candidate must belong to the set")
        rest = S - {c}
        if not rest:
            return Fraction(1)
        return self.frac_group(rest, {c})

    def summarize(self, k: int) -> "KTournamentSummary":
        if not 2 <= k <= self.m:
            raise ProfileError(f"summary order k={k} must satisfy 2 <= k <= m={self.m}")
        tuple_freq = {t: self.frac_tuple(t) for t in itertools.permutations(range(self.m), k)}
        top, bottom = {}, {}
        for size in range(1, k + 1):
            for S in itertools.combinations(range(self.m), size):
                fs = frozenset(S)
                for c in S:
                    top[fs, c] = self.top_share(fs, c)
                    bottom[fs, c] = self.bottom_share(fs, c)
        return KTournamentSummary(k, self.m, tuple_freq, top, bottom)

    def tournament_matrix(self) -> "TournamentMatrix":
        m = self.m
        s = [[Fraction(0)] * m for _ in range(m)]
        for blk, pos in zip(self.blocks, self._pos):
            for a in range(m):
                for b in range(m):
                    if pos[a] < pos[b]:
                        s[a][b] += blk.weight
        return TournamentMatrix(tuple(tuple(r) for r in s), self.labels)

    # -- transformations --------------------------------------------------

    def reverse(self) -> "Profile":
        return Profile.from_rankings(
            ((b.weight, b.ranking[::-1]) for b in self.blocks), self.m, self.labels
        )

    def restrict(self, keep: Iterable[int]) -> tuple["Profile", tuple[int, ...]]:
        """Profile on the sub-electorate of candidates ``keep``.

        Returns the restricted profile (candidates relabelled ``0..len-1``)
        and the tuple mapping new indices back to original ones.
        """
        keep = tuple(sorted(set(keep)))
        self._check(*keep)
        if not keep:
            raise ProfileError("cannot restrict to an empty candidate set")
        new = {c: i for i, c in enumerate(keep)}
        pairs = [(b.weight, [new[c] for c in b.ranking if c in new]) for b in self.blocks]
        sub = Profile.from_rankings(pairs, len(keep), [self.labels[c] for c in keep])
        return sub, keep

    # -- serialization ----------------------------------------------------

    def to_text(self) -> str:
        lines = ["candidates: " + ",".join(self.labels)]
        for b in self.blocks:
            lines.append(f"{b.weight}: " + ">".join(self.labels[c] for c in b.ranking))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "candidates": list(self.labels),
            "voters": [
                {"weight": str(b.weight), "ranking": [self.labels[c] for c in b.ranking]}
                for b in self.blocks
            ],
        }


@dataclass(frozen=True)
class TournamentMatrix:
    """Pairwise fractions ``s[a][b]`` (fraction preferring a to b); diagonal is 0."""

    s: tuple[tuple, ...]
    labels: tuple[str, ...] = ()

    @property
    def m(self) -> int:
        return len(self.s)

    def __getitem__(self, ab):
        a, b = ab
        return self.s[a][b]

    def check(self, tol=0) -> list[str]:
        """Return the violated tournament invariants (empty when valid)."""
        bad = []
        m = self.m
        for a in range(m):
            if self.s[a][a] != 0:
                bad.append(f"s[{a}][{a}] != 0")
            for b in range(a + 1, m):
                if abs(self.s[a][b] + self.s[b][a] - 1) > tol:
                    bad.append(f"s[{a}][{b}] + s[{b}][{a}] != 1")
        for i, j, k in itertools.permutations(range(m), 3):
            if self.s[i][j] + self.s[j][k] + self.s[k][i] > 2 + tol:
                bad.append(f"triple ({i},{j},{k}) exceeds 2")
        return bad


@dataclass(frozen=True)
class KTournamentSummary:
    """Per-tuple frequencies and per-set top/bottom shares up to order ``k``."""

    k: int
    m: int
    tuple_freq: Mapping[tuple[int, ...], Fraction]
    top: Mapping[tuple[frozenset, int], Fraction]
    bottom: Mapping[tuple[frozenset, int], Fraction]

    def top_share(self, S: Iterable[int], c: int) -> Fraction:
        S = frozenset(S)
        if len(S) > self.k:
            raise ProfileError(f"set of size {len(S)} exceeds summary order {self.k}")
        return self.top[S, c]

    def bottom_share(self, S: Iterable[int], c: int) -> Fraction:
        S = frozenset(S)
        if len(S) > self.k:
            raise ProfileError(f"set of size {len(S)} exceeds summary order {self.k}")
        return self.bottom[S, c]


# -- parsing ------------------------------------------------------------------

_LINE = re.compile(r"^\s*([^:]+?)\s*:\s*(.+?)\s*$")


def _parse_weight(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ProfileError(f"bad weight {text!r}") from None


def _label_order(labels: Iterable[str]) -> list[str]:
    labels = set(labels)
    if all(l.isdigit() for l in labels):
        return sorted(labels, key=int)
    return sorted(labels)


def _build(candidates: list[str] | None, rows: list[tuple[Fraction, list[str]]]) -> Profile:
    if not rows:
        raise ProfileError("profile has no voter blocks")
    if candidates is None:
        candidates = _label_order(l for _, r in rows for l in r)
    if len(set(candidates)) != len(candidates):
        raise ProfileError("duplicate candidate label in header")
    index = {l: i for i, l in enumerate(candidates)}
    pairs = []
    for w, ranking in rows:
        if w < 0:
            raise ProfileError("negative weight")
        unknown = [l for l in ranking if l not in index]
        if unknown:
            raise ProfileError(f"unknown candidate label {unknown[0]!r}")
        idx = [index[l] for l in ranking]
        if sorted(idx) != list(range(len(candidates))):
            raise ProfileError(f"ranking {'>'.join(ranking)} is not a permutation of the candidates")
        pairs.append((w, idx))
    return Profile.from_rankings(pairs, len(candidates), candidates, tolerance=WEIGHT_SUM_TOL)


def parse_profile(text: str) -> Profile:
    """Parse a profile from the text or JSON profile format.

    Text form: an optional ``candidates: a,b,c`` header, then one
    ``<weight>: a>b>c`` line per block (``#`` starts a comment).  Weights are
    decimals or ``p/q`` rationals, read exactly.
    """
    stripped = text.strip()
    if stripped.startswith("{"):
        return _parse_json(stripped)
    candidates = None
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        mt = _LINE.match(line)
        if not mt:
            raise ProfileError(f"cannot parse line {raw!r}")
        head, body = mt.groups()
        if head.lower() == "candidates":
            if candidates is not None or rows:
                raise ProfileError("candidates header must come first")
            candidates = [c.strip() for c in body.split(",") if c.strip()]
            continue
        if "=" in body or "~" in body:
            raise ProfileError("tied rankings are not supported")
        ranking = [c.strip() for c in body.split(">")]
        if any(not c for c in ranking):
            raise ProfileError(f"malformed ranking {body!r}")
        rows.append((_parse_weight(head), ranking))
    return _build(candidates, rows)


def _parse_json(text: str) -> Profile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"invalid JSON profile: {exc}") from None
    candidates = data.get("candidates")
    if candidates is not None:
        candidates = [str(c) for c in candidates]
    rows = []
    for v in data.get("voters", []):
        rows.append((_parse_weight(str(v["weight"])), [str(c) for c in v["ranking"]]))
    return _build(candidates, rows)


def load_profile(path) -> Profile:
    with open(path, encoding="utf-8") as fh:
        return parse_profile(fh.read())
