"""Why no pairwise-majority rule can guarantee better than about 3.11.

Five candidates, one weighted tournament, five electorates that all produce
that tournament.  Whichever candidate a tournament rule picks, the electorate
built against that candidate admits a metric where the pick is more than 3.112
times worse than the best choice.
"""
from ktournament import distortion_exact
from ktournament.bench import build_lb5, verify_lb5

inst = build_lb5()
print(f"polynomial root lam = {float(inst.lam):.6f}, beta = {float(inst.beta):.6f}\n")
print("pairwise majority fractions s[a][b]:")
for row in inst.matrix.s:
    print("   " + "  ".join(f"{float(x):5.3f}" for x in row))

print("\nagainst each possible pick:")
for j, p in inst.profiles.items():
    rep = distortion_exact(p, j)
    print(f"  pick {j}: worst-case ratio {float(rep.value):.5f} (the best choice is then {rep.witness_istar})")

failed = [c["check"] for c in verify_lb5(inst) if not c["pass"]]
print("\nall checks pass" if not failed else f"\nfailed: {failed}")
