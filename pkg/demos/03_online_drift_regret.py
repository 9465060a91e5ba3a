"""Online tracking of a slowly drifting utility with dynamic-regret accounting.

Item weights of a coverage instance drift by at most 0.01 per round for
T = 2000 rounds.  A single projected-gradient step per round tracks the
moving optimum; the trace records half-regret against the per-round
brute-force optimum, the embedded path length of the optimum, and the
closed-form regret bound at the step size used.
"""

import numpy as np

from subcoord.dynamics import Round, SyntheticStream, run_online
from subcoord.synthetic import drifting_weights, jumping_weights, random_weighted_coverage

fn, matroid, _ = random_weighted_coverage(2, 2, np.random.default_rng(77), n_items=8)

for label, gen in (
    ("slow drift (0.01/round)", drifting_weights(8, 2000, np.random.default_rng(0), drift=0.01)),
    ("adversarial jumps", jumping_weights(8, 2000, np.random.default_rng(0))),
):
    rounds = [Round(fn, matroid, w) for w in gen]
    trace = run_online(SyntheticStream(rounds), eta=0.05, rng=np.random.default_rng(1))
    T = trace.T
    print(f"{label}: T={T}")
    print(f"  measured optimum path length : {trace.measured_path_length:10.2f}")
    print(f"  cumulative half-regret       : {trace.cumulative_regret():10.2f}")
    print(f"  regret bound at this eta     : {trace.bound_rhs():10.2f}")
    for t in (200, 2000):
        upto = trace.rows[t - 1]
        print(f"  regret/T at T={t:4d}           : {upto.cum_regret / t:10.4f}")
    print()

print("slow drift keeps the path length (and the bound) small; with")
print("per-round jumps the path length grows linearly and tracking pays for it.")
