"""Classic waterfilling as a one-constraint special case.

Maximize sum log(a_n + x_n) with x >= 0 and a total power budget P: only the
last prefix constraint is active, so the solver needs a single stage and the
common multiplier is the inverse water level.

Run:  python3 demos/waterfilling.py
"""

from __future__ import annotations

import numpy as np

from sepbox import NegLog, Problem, solve

rng = np.random.default_rng(0)
noise = np.sort(rng.uniform(0.2, 3.0, 8))     # a_n: noise-to-gain ratios
power = 6.0

problem = Problem.from_arrays(
    [NegLog(float(a)) for a in noise],
    lower=np.zeros(noise.size),
    upper=None,
    rho={noise.size: power},
)
sol = solve(problem)
level = 1.0 / sol.sigma[0]

print(f"water level 1/sigma = {level:.4f}")
for a, x in zip(noise, sol.x):
    bar = "#" * int(round(20 * x / power))
    print(f"  a={a:.3f}  x={x:.4f}  {bar}")

# closed form check: x_n = max(level - a_n, 0)
assert np.allclose(sol.x, np.maximum(level - noise, 0.0), atol=1e-12)
print("sum x =", sol.x.sum())

# with per-prefix caps (ascending constraints) the level breaks into steps
caps = {2: 1.0, 5: 3.5, noise.size: power}
stepped = solve(Problem.from_arrays(problem.terms, np.zeros(noise.size), None, caps))
print("stepped levels:", np.round(1.0 / stepped.sigma, 4))
