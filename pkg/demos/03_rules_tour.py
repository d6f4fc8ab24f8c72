"""Run every rule on one electorate and compare the winners' exact distortion
with what the ordinal certificates can prove from the tournament alone."""
from pathlib import Path

from ktournament import (
    certify_candidate, copeland_weighted, distortion_exact, load_profile, pruned_double_lotteries,
    quasi_kernel_prune, ranked_pairs, simultaneous_lottery_veto, unblanketed_set,
)
from fractions import Fraction

p = load_profile(Path(__file__).parent / "profiles" / "town_council.json")
name = p.label
print("pairwise fractions:")
for a in range(p.m):
    print(f"  {name(a):>8}: " + " ".join(f"{float(p.frac_pairwise(a, b)) if a != b else 0:.2f}" for b in range(p.m)))

winners = {
    "copeland (beta 1/2)": copeland_weighted(p, Fraction(1, 2)),
    "ranked pairs": ranked_pairs(p),
    "unblanketed set": unblanketed_set(p)[0],
    "lottery veto (k=2)": simultaneous_lottery_veto(p, 2)[0],
}
print("\ndeterministic rules:")
for rule, w in winners.items():
    exact = distortion_exact(p, w).value
    proof = min(certify_candidate(p, w, m).bound for m in ("partition", "post-shift", "local", "two-step"))
    print(f"  {rule:<20} -> {name(w):<8} exact distortion {float(exact):.4f}, certified bound {float(proof):.4f}")

print(f"\nquasi-kernel at theta 0.55: {[name(c) for c in quasi_kernel_prune(p)]}")
L, ok = pruned_double_lotteries(p, 2)
print("pruned double lotteries:", {name(c): round(float(x), 4) for c, x in enumerate(L.probs)},
      f"distortion {float(distortion_exact(p, L).value):.4f}")
