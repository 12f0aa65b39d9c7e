"""Exit criteria for the planner and its Monte Carlo validation.

Each test records one PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import math
import time

import numpy as np
import pytest
from scipy import stats

from lorawan_adr import analytic
from lorawan_adr import montecarlo as mc
from lorawan_adr.core import dbm_to_watt
from lorawan_adr.planner import PowerPolicy, Rounding, assign_ring, power_map

SEED = 1200
T_C0 = 0.01
SEARCH_TRIALS = 1_000_000


def test_c1_geometry(reference_plan, report):
    l4, l5 = reference_plan.geometry.edges[4], reference_plan.geometry.edges[5]
    ok = abs(l4 / 789.5 - 1) <= 2e-3 and abs(l5 / 973.4 - 1) <= 2e-3
    report("C1 geometry", ok, f"l4 = {l4:.1f} m (789.5), l5 = {l5:.1f} m (973.4), tol 0.2%")
    assert ok


def test_c2_average_power(reference_plan, report):
    p = reference_plan.average_power
    red = reference_plan.power_reduction
    ok = abs(p - 12.63) <= 0.15 and abs(red - 0.27) <= 0.02
    report("C2 average power", ok, f"{p:.3f} dBm (12.63 +/- 0.15), reduction {100 * red:.1f}% (27 +/- 2)")
    assert ok


def test_c3_allocated_capacity(reference_plan, report):
    total = reference_plan.unrounded_total
    ok = abs(total / 247 - 1) <= 0.03
    ceil_total = int(reference_plan.capacities_with(Rounding.CEIL).sum())
    report("C3 allocated capacity", ok,
           f"unrounded {total:.2f} (247 +/- 3%); ceil total {ceil_total} (informational, expect 247)")
    assert ok


@pytest.mark.parametrize("beta", [0.1, 0.5, 1.0, 2.0])
def test_c4_three_way_collision(reference_plan, channel, report, beta):
    n = 200_000
    closed = analytic.collision_probability(beta, channel)
    oracle = mc.collision_oracle_gamma_poisson(beta, channel.sir_threshold_db, n, SEED)
    d = 0.5 * reference_plan.geometry.coverage_radius
    sim = mc.simulate_outage(mc.Scenario(reference_plan, PowerPolicy.allocated(), d, beta=beta), n, SEED).q0_hat
    ok = (mc.agrees(oracle, closed, n) and mc.agrees(sim, closed, n)
          and mc.pairwise_agree(oracle, n, sim, n))
    report(f"C4 three-way collision beta={beta:g}", ok,
           f"closed {closed:.5f}, gamma/poisson {oracle:.5f}, spatial {sim:.5f} (pairwise 3 sigma, n={n})")
    assert ok


def test_c5_channel_inversion(reference_plan, profiles, channel, report):
    n = 200_000
    th0 = reference_plan.disconnection_target
    R = reference_plan.geometry.coverage_radius
    parts, ok = [], True
    for k, f in enumerate((0.2, 0.5, 0.9)):
        d = f * R
        est = mc.simulate_outage(mc.Scenario(reference_plan, PowerPolicy.allocated(), d), n, mc.derive_seed(SEED, k))
        ok &= mc.agrees(est.h0_hat, th0, n)
        sp = profiles[assign_ring(d, reference_plan.geometry) - 1]
        exact = analytic.disconnection_probability(
            d, analytic.min_transmit_power(d, sp, reference_plan.targets, channel), sp, channel)
        ok &= abs(exact / th0 - 1) <= 1e-12
        parts.append(f"{f:g}R: {est.h0_hat:.5f}")
    report("C5 channel inversion", ok, f"T_H0 = {th0:.5f}; " + ", ".join(parts) + " (3 sigma; analytic 1e-12)")
    assert ok


@pytest.fixture(scope="module")
def fixed_searches(reference_plan):
    t0 = time.perf_counter()
    out = {
        p: mc.find_max_capacity(reference_plan, PowerPolicy.fixed(p), SEARCH_TRIALS, SEED)
        for p in (14.0, 12.63)
    }
    return out, time.perf_counter() - t0


def _gain_bracket(reference, total, tol):
    return reference / (total * (1 + tol)) - 1, reference / (total * (1 - tol)) - 1


@pytest.mark.slow
def test_c6_fixed_power_capacity(reference_plan, fixed_searches, report):
    res, elapsed = fixed_searches
    t14, t12 = res[14.0].total, res[12.63].total
    ok14 = abs(t14 / 225 - 1) <= 0.07
    ok12 = abs(t12 / 157 - 1) <= 0.10
    alloc = reference_plan.unrounded_total
    g14 = _gain_bracket(alloc, t14, 0.07)
    g12 = _gain_bracket(alloc, t12, 0.10)
    brackets = g14[0] <= 0.093 <= g14[1] and g12[0] <= 0.567 <= g12[1]
    fast = elapsed <= 300
    ok = ok14 and ok12 and brackets and fast
    report("C6 fixed-power capacity", ok,
           f"fixed 14 dBm {t14} (225 +/- 7%), fixed 12.63 dBm {t12} (157 +/- 10%); "
           f"gains {alloc / t14 - 1:.1%} in [{g14[0]:.1%}, {g14[1]:.1%}] and "
           f"{alloc / t12 - 1:.1%} in [{g12[0]:.1%}, {g12[1]:.1%}]; {elapsed:.0f} s")
    assert ok


@pytest.mark.slow
def test_c7_edge_only_target(reference_plan, fixed_searches, report):
    res = fixed_searches[0][14.0]
    policy = PowerPolicy.fixed(14)
    n = SEARCH_TRIALS
    sigma_t = math.sqrt(T_C0 * (1 - T_C0) / n)
    ok, worst = True, []
    for ring in range(1, 7):
        lo, hi = reference_plan.geometry.ring_bounds(ring)
        beta = res.betas[ring - 1]

        def est(frac, k):
            # l_{i-1} itself belongs to the previous ring
            d = max(lo + frac * (hi - lo), lo * (1 + 1e-9), 1e-3 * hi)
            return mc.simulate_outage(mc.Scenario(reference_plan, policy, d, beta=beta), n,
                                      mc.derive_seed(SEED, 7, ring, k))

        inner = est(0.0, 0)
        ok &= T_C0 - inner.c0_hat > 3 * sigma_t
        # below the outermost 10% the target is not reached, even allowing for the CI
        for k, frac in enumerate((0.2, 0.4, 0.6, 0.8), start=1):
            e = est(frac, k)
            ok &= e.c0_hat + e.ci_halfwidth["c0"] < T_C0
        edge = est(1.0, 9)
        # the load was itself fitted on an independent stream of the same size
        ok &= abs(edge.c0_hat - T_C0) <= 3 * math.sqrt(2) * sigma_t
        worst.append(f"r{ring} {inner.c0_hat:.4f}->{edge.c0_hat:.4f}")
    report("C7 edge-only target (fixed 14 dBm)", ok, "inner->edge c0: " + ", ".join(worst))
    assert ok


def test_c8_power_sawtooth(reference_plan, report):
    alloc = PowerPolicy.allocated()
    geo = reference_plan.geometry
    spans = []
    for ring in range(2, 7):
        lo, hi = geo.ring_bounds(ring)
        spans.append(power_map(reference_plan, alloc, hi) - power_map(reference_plan, alloc, lo * (1 + 1e-12)))
    at_edges = [power_map(reference_plan, alloc, e) for e in geo.edges[1:]]
    ok = (np.allclose(spans, [3, 3, 3, 2.5, 2.5], atol=1e-6)
          and all(abs(p - 14) <= 0.05 for p in at_edges))
    report("C8 power sawtooth", ok,
           "spans " + ", ".join(f"{s:.3f}" for s in spans) + " dB; edge power "
           + f"{min(at_edges):.4f}..{max(at_edges):.4f} dBm")
    assert ok


def test_c9_property_suite(reference_plan, inputs, channel, profiles, report):
    checks = {}
    checks["table1"] = all(sp.sensitivity == -117 + sp.snr_threshold for sp in profiles)
    d = np.linspace(1, 3000, 1000)
    checks["H0 monotone"] = all(
        np.all(np.diff(analytic.disconnection_probability(d, dbm_to_watt(14), sp, channel)) >= 0)
        for sp in profiles)
    b = np.linspace(0, 3, 1000)
    checks["Q0 monotone"] = bool(np.all(np.diff(analytic.collision_probability(b, channel)) >= 0))
    rng = np.random.default_rng(SEED)
    inverse_err = 0.0
    for _ in range(200):
        total = rng.uniform(1e-4, 0.2)
        t = analytic.OutageTargets(total, total * rng.uniform(0.01, 1))
        beta = analytic.max_ring_load(t, channel)
        c = analytic.total_outage(t.disconnection_target, analytic.collision_probability(beta, channel))
        inverse_err = max(inverse_err, abs(c / total - 1))
        edge = analytic.ring_edge(profiles[2], t, inputs.limits, channel)
        h = analytic.disconnection_probability(edge, inputs.limits.max_power_watts, profiles[2], channel)
        inverse_err = max(inverse_err, abs(h / t.disconnection_target - 1))
    checks["inverse pairs 1e-12"] = inverse_err <= 1e-12
    r = mc.sample_annulus(789.5, 973.4, rng, size=50_000)
    ks = stats.kstest(r**2, stats.uniform(loc=789.5**2, scale=973.4**2 - 789.5**2).cdf).pvalue
    checks["annulus KS alpha=0.01"] = ks > 0.01
    sc = mc.Scenario(reference_plan, PowerPolicy.fixed(14), 1000.0, beta=0.2)
    runs = [mc.simulate_outage(sc, 3 * mc.BLOCK_SIZE, SEED, workers=w) for w in (1, 1, 3)]
    checks["determinism"] = runs[0] == runs[1] == runs[2]
    ok = all(checks.values())
    report("C9 property suite", ok, ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in checks.items()))
    assert ok

