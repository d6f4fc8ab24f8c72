"""The lottery value type shared by the metric, lottery and rule modules."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Lottery:
    """A distribution over candidates ``0..m-1``.

    Entries are floats from the iterative solvers, or Fractions when the
    distribution is known exactly (point masses, the k=1 linear program).
    """

    probs: tuple

    def __post_init__(self):
        probs = tuple(self.probs)
        object.__setattr__(self, "probs", probs)
        if any(p < 0 for p in probs):
            raise ValueError("lottery has a negative probability")
        if abs(float(sum(probs)) - 1) > PROB_SUM_TOL * max(1, len(probs)):
            raise ValueError(f"lottery probabilities sum to {float(sum(probs))!r}, not 1")

    @classmethod
    def point(cls, c: int, m: int) -> "Lottery":
        return cls(tuple(Fraction(int(i == c)) for i in range(m)))

    @classmethod
    def uniform(cls, m: int, support: Sequence[int] | None = None) -> "Lottery":
        support = range(m) if support is None else list(support)
        share = Fraction(1, len(support))
        return cls(tuple(share if i in support else Fraction(0) for i in range(m)))

    @property
    def m(self) -> int:
        return len(self.probs)

    def __getitem__(self, c: int):
        return self.probs[c]

    def support(self) -> list[int]:
        return [c for c, p in enumerate(self.probs) if p > 0]

    def mass(self, S) -> float:
        return sum(self.probs[c] for c in S)

    def exact(self) -> tuple[Fraction, ...]:
        """Probabilities as Fractions (floats are converted exactly), renormalized."""
        fr = [Fraction(p) for p in self.probs]
        total = sum(fr)
        return tuple(p / total for p in fr)

    def as_floats(self) -> list[float]:
        return [float(p) for p in self.probs]

    def mix(self, other: "Lottery", weight) -> "Lottery":
        """``weight * self + (1 - weight) * other``."""
        return Lottery(tuple(weight * a + (1 - weight) * b for a, b in zip(self.probs, other.probs)))
