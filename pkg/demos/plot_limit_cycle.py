"""
A period-8 orbit of plain ADMM
==============================

Plain ADMM on the feasibility problem ``x in C, x in D`` with
``C = {x : x_2 = 0}`` and ``D = {(0,0), (2,eta), (2,-eta)}``. The linear map
``x -> (x, x)`` is injective but not surjective, and the iterates never
settle: they cycle through eight states for every penalty ``beta``.
"""

# %%
import numpy as np

from ncsplit.experiments import cycle_check, cycle_run

trace = cycle_run(eta=1.0, beta=1.0, steps=24)
for t, (y1, y2, x, z1, z2) in enumerate(trace.iterates[:10]):
    print(f"t={t:2d}  x={x}  z1={z1}")

# %%
# ``x`` sits at (2, -1/2) for four steps, then at (2, 1/2) for four more.
# The orbit repeats with period 8 and matches the closed-form table.

verdict = cycle_check(cycle_run(1.0, 1.0, 80))
print(verdict)

# %%
# The same orbit shows up for other penalties; the multipliers scale with beta.

for beta in (0.5, 3.0, 10.0):
    v = cycle_check(cycle_run(0.5, beta, 80))
    z_max = max(np.abs(s[3]).max() for s in cycle_run(0.5, beta, 16).iterates)
    print(f"beta={beta:5.1f}  period={v.period}  max |z1|={z_max:.3f}")
