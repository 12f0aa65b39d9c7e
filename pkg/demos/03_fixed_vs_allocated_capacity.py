"""How many nodes fit under a 1% outage target, with and without power control.

Fixed-power capacities have no closed form, so they come from a bisection
on the simulated outage at each ring's outer edge. Takes ~20 s.
"""
# %%
from lorawan_adr import PowerPolicy, eu868_suburban, plan_radius_first
from lorawan_adr import montecarlo as mc

plan = plan_radius_first(1200.0, 0.01, eu868_suburban())
print(f"power allocation (closed form): {plan.unrounded_total:.1f} nodes")

results = {}
for policy in (PowerPolicy.allocated(), PowerPolicy.fixed(14), PowerPolicy.fixed(plan.average_power)):
    res = mc.find_max_capacity(plan, policy, trials=1_000_000, seed=11)
    results[policy.label()] = res.total
    print(f"{policy.label():>16}: {res.capacities} -> {res.total} nodes")

# %%
alloc = plan.unrounded_total
for label, total in results.items():
    if label.startswith("fixed"):
        print(f"gain of power allocation over {label}: {alloc / total - 1:.1%}")
