"""How the size bounds and k shape the result, and what k costs.

Tightening the lower bound alpha forces a larger group, which dilutes the
planted disadvantage, so DScore falls as alpha grows. Raising k barely changes
the cost of the continuous search but multiplies the number of conjunctions
the brute-force search must score.

Run: python demos/hyperparameters.py
"""

import time

from dpaudit import ObjectiveConfig, SolverConfig, encode, enum_search, find_evidence
from dpaudit.oracle import Predicate, plant_synthetic

planted = [Predicate("b0", "=", "1"), Predicate("b1", "=", "1")]
data, _ = plant_synthetic(2000, 8, 2, planted, 0.1, 0.6, seed=1)
fm = encode(data)

print("alpha  beta   DScore  |S|/n  feasible")
for alpha in (0.1, 0.25, 0.45):
    cfg = ObjectiveConfig(k=4, alpha=alpha, beta=1 - alpha)
    ev = find_evidence(data.fav, fm, cfg, SolverConfig(seed=1))
    print(f"{alpha:5.2f}  {1 - alpha:4.2f}  {ev.dscore:7.3f}  {ev.size_ratio:5.3f}  {ev.constraint_ok}")

big, _ = plant_synthetic(5000, 30, 0, planted, 0.1, 0.6, seed=0)
big_fm = encode(big)
print("\nk   IE seconds   Enum seconds   Enum conjunctions")
for k in (1, 2, 3):
    t0 = time.perf_counter()
    find_evidence(big.fav, big_fm, ObjectiveConfig(k=k, alpha=0.1, beta=0.9), SolverConfig())
    ie = time.perf_counter() - t0
    t0 = time.perf_counter()
    res = enum_search(big, k, 0.1, 0.9)
    print(f"{k}   {ie:10.2f}   {time.perf_counter() - t0:12.2f}   {res.explored:17d}")
