"""Checking the closed-form outage model against simulation.

Under power allocation the collision probability depends only on the mean
number of active interferers. Three independent routes should agree: the
closed form, a Gamma/Poisson fading-only sampler, and the spatial Monte
Carlo engine.
"""
# %%
from lorawan_adr import PowerPolicy, collision_probability, eu868_suburban, plan_radius_first
from lorawan_adr import montecarlo as mc

inputs = eu868_suburban()
plan = plan_radius_first(1200.0, 0.01, inputs)
n = 200_000

for beta in (0.1, 0.5, 1.0, 2.0):
    closed = collision_probability(beta, inputs.channel)
    oracle = mc.collision_oracle_gamma_poisson(beta, inputs.channel.sir_threshold_db, n, seed=1)
    sim = mc.simulate_outage(mc.Scenario(plan, PowerPolicy.allocated(), 600.0, beta=beta), n, seed=1)
    print(f"beta={beta:<4g} closed {closed:.4f}  gamma/poisson {oracle:.4f}  spatial {sim.q0_hat:.4f}")

# %% Disconnection is flat in distance once power compensates the path loss.
for frac in (0.2, 0.5, 0.9):
    est = mc.simulate_outage(mc.Scenario(plan, PowerPolicy.allocated(), frac * 1200), n, seed=2)
    print(f"{frac:.1f} R: h0 = {est.h0_hat:.5f} +/- {est.ci_halfwidth['h0']:.5f} "
          f"(target {plan.disconnection_target:.5f})")

# %% With every node at 14 dBm the picture changes: outage grows toward each ring's outer edge.
fixed = PowerPolicy.fixed(14)
lo, hi = plan.geometry.ring_bounds(5)
for d in (lo * 1.0001, 0.5 * (lo + hi), hi):
    est = mc.simulate_outage(mc.Scenario(plan, fixed, d), n, seed=3)
    print(f"ring 5 at {d:6.1f} m: h0 {est.h0_hat:.4f}  q0 {est.q0_hat:.4f}  c0 {est.c0_hat:.4f}")
