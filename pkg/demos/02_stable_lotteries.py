"""Stable lotteries: k draws that beat any single rival often enough.

On the 8-candidate Condorcet cycle the best two-draw lottery only wins 2/3 of
the time against its worst rival, even though a correlated pair of candidates
could do better.  Any stable lottery is also safe from attack by another
lottery, which the defensive gap confirms numerically.
"""
from ktournament import defensive_gap, solve_stable
from ktournament.bench import symmetric_cycle

p = symmetric_cycle(8)
for k in (1, 2, 3):
    D, cert = solve_stable(p, k)
    probs = " ".join(f"{float(x):.3f}" for x in D.probs)
    print(f"k={k}: probs [{probs}]")
    print(f"      worst rival {cert.worst_response} is beaten with prob {float(cert.worst_value):.6f} "
          f"(target {cert.target_value}), certified={cert.certified}")
    print(f"      defensive gap {defensive_gap(p, D, k):.2e}")
