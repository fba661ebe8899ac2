"""Four exponential terms with four nested budgets, solved in two stages.

Run:  python3 demos/worked_example.py
"""

from __future__ import annotations

import numpy as np

from sepbox import Exponential, Problem, certify, solve

# f_n(x) = w_n exp(-x), unbounded below, capped above
w = [2.0, 5.0, 8.0, 0.5]
problem = Problem.from_arrays(
    [Exponential(v) for v in w],
    upper=[0.4, -1.2, 2.0, -1.8],
    rho=[0.2, -2.0, 1.1, -1.9],
)

sol = solve(problem)

for k, st in enumerate(sol.stages, start=1):
    print(f"stage {k}: after index {st.start}")
    for j, g in st.gamma_map().items():
        c = st.candidate_map()[j]
        print(f"  n={j}  gamma={g:+.4f}  candidate={c:.4f}")
    print(f"  -> mu*={st.mu_star:.4f}, k*={st.k_star}")

np.set_printoptions(precision=4, suppress=True)
print("x*     =", sol.x)
print("sigma* =", sol.sigma)
print("objective", round(sol.objective, 4))

# the multipliers are a certificate on their own
rep = certify(problem, sol)
print("KKT residuals:", {k: f"{v:.1e}" for k, v in rep.residuals.items()})
print("lambda:", {j: round(v, 4) for j, v in rep.lam.items()})
