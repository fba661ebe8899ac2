"""Tabulate the response curves used to read off each stage graphically.

Writes curves.csv (sigma, xi_n, c_n). Each c_n crosses its budget at that
constraint's candidate level; the largest crossing closes the stage. Plot the
file with any tool; nothing here draws.

Run:  python3 demos/curves.py [out.csv]
"""

from __future__ import annotations

import csv
import sys

import numpy as np

from sepbox import Exponential, Problem, solve
from sepbox.cli import curve_rows

problem = Problem.from_arrays(
    [Exponential(w) for w in (2.0, 5.0, 8.0, 0.5)],
    upper=[0.4, -1.2, 2.0, -1.8],
    rho=[0.2, -2.0, 1.1, -1.9],
)
header, rows = curve_rows(problem, 0.0, 6.0, 601)

out = sys.argv[1] if len(sys.argv) > 1 else "curves.csv"
with open(out, "w", newline="") as fh:
    csv.writer(fh).writerows([header, *rows])
print(f"wrote {len(rows)} rows to {out}")

data = np.array(rows, dtype=float)
sig = data[:, 0]
for n, rho in enumerate(problem.rho, start=1):
    c = data[:, header.index(f"c_{n}")]
    hit = sig[np.argmax(c <= rho)]
    print(f"c_{n} reaches {rho:+.1f} near sigma = {hit:.2f}")

sol = solve(problem)
print("levels chosen:", np.round(sol.sigma, 3))
