"""Planning a 1200 m single-cell network.

Build the suburban EU868 cell, look at the SF ring edges, the continuous
and discrete power allocation, and the per-ring capacity under a 1% outage
target.
"""
# %%
import numpy as np

from lorawan_adr import PowerPolicy, Rounding, eu868_suburban, plan_radius_first, power_map

inputs = eu868_suburban()
plan = plan_radius_first(1200.0, 0.01, inputs)

print("disconnection budget T_H0 =", round(plan.disconnection_target, 6))
for i, (lo, hi) in enumerate(zip(plan.geometry.edges, plan.geometry.edges[1:]), start=1):
    print(f"SF{i + 6:<2d} ring {i}: {lo:7.1f} .. {hi:7.1f} m")

# %% Power allocation along the radius: the sawtooth.
d = np.linspace(5, 1200, 12)
cont = power_map(plan, PowerPolicy.allocated(), d)
disc = power_map(plan, PowerPolicy.allocated_discrete(), d)
for x, c, q in zip(d, cont, disc):
    print(f"{x:7.1f} m  continuous {c:6.2f} dBm   discrete {q:5.1f} dBm")

print(f"average transmit power {plan.average_power:.2f} dBm "
      f"({100 * plan.power_reduction:.1f}% below 14 dBm)")

# %% Capacity: the same mean load per ring, divided by each ring's duty cycle.
print("beta per ring:", plan.betas[0])
print("unrounded per-ring nodes:", np.round(plan.unrounded_capacities, 2))
for r in Rounding:
    print(f"{r.value:>8}: {plan.capacities_with(r).sum()} nodes")
