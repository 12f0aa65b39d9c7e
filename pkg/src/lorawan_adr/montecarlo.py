"""Stochastic-geometry Monte Carlo engine.

Each trial places a probe node at a fixed distance, draws its Rayleigh
fading, and draws a Poisson number of same-ring interferers uniformly over
the probe's ring annulus. Disconnection and collision flags are counted as
integers, so aggregation does not depend on execution order.

Reproducibility
---------------
Trials are processed in fixed-size blocks of :data:`BLOCK_SIZE`. Block ``b``
of a run with master seed ``s`` draws from
``numpy.random.default_rng(SeedSequence(s, spawn_key=(b,)))``. Estimates are
therefore a function of ``(scenario, trials, seed)`` only, whatever the
number of worker threads.

Random draws never depend on the interferer load: counts come from the
inverse Poisson CDF applied to one uniform per trial, and every trial gets
``max_interferers`` position/fading draws. Runs with the same seed and
different loads thus share random numbers, which makes the capacity
bisection monotone in the load.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import path_loss_gain
from .planner import CellPlan, PowerPolicy, assign_ring, power_map_watts

log = logging.getLogger(__name__)

BLOCK_SIZE = 1 << 16
MIN_TRIALS = 10_000
Z95 = 1.959963984540054
_TAIL = 1e-12
_U64 = 1 << 64


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < _U64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def block_rng(seed: int, block_index: int) -> np.random.Generator:
    """Generator for one trial block; the documented stream-derivation rule."""
    return np.random.default_rng(np.random.SeedSequence(_check_seed(seed), spawn_key=(block_index,)))


def derive_seed(seed: int, *key: int) -> int:
    """Deterministic 64-bit child seed, used to give sub-searches their own streams."""
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


def sample_annulus(inner, outer, rng: np.random.Generator, size=None):
    """Distances of points uniform over the annulus ``inner < r <= outer``."""
    if not 0 <= inner < outer:
        raise ValueError(f"need 0 <= inner < outer, got ({inner}, {outer})")
    u = 1.0 - rng.random(size)  # (0, 1]: never lands on the inner edge
    return np.sqrt(inner**2 + u * (outer**2 - inner**2))


def interferer_cap(beta: float) -> int:
    """Smallest count cap whose Poisson tail mass is below 1e-12."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if beta == 0:
        return 1
    return max(1, int(stats.poisson.isf(_TAIL, beta)) + 1)


def _poisson_from_uniform(u, beta, cap):
    if beta == 0:
        return np.zeros(np.shape(u), dtype=np.int64)
    cdf = stats.poisson.cdf(np.arange(cap), beta)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def sample_active_count(beta, rng: np.random.Generator, size=None, cap: int | None = None):
    """Poisson(beta) counts via inverse CDF, so a single uniform drives each count."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    cap = interferer_cap(beta) if cap is None else cap
    out = _poisson_from_uniform(rng.random(size), beta, cap)
    return int(out) if size is None else out


@dataclass(frozen=True)
class Scenario:
    """One probe position in a planned cell.

    ``beta`` overrides the ring load taken from the plan (mean active
    same-ring interferers seen by the probe).
    """

    plan: CellPlan
    policy: PowerPolicy
    probe_distance: float
    beta: float | None = None
    probe_ring: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "probe_ring", assign_ring(self.probe_distance, self.plan.geometry))
        if self.beta is not None and self.beta < 0:
            raise ValueError("beta must be non-negative")

    @property
    def load(self) -> float:
        if self.beta is not None:
            return float(self.beta)
        return float(self.plan.betas[self.probe_ring - 1])

    def with_beta(self, beta: float) -> "Scenario":
        return Scenario(self.plan, self.policy, self.probe_distance, beta)


@dataclass(frozen=True)
class OutageEstimate:
    h0_count: int
    q0_count: int
    c0_count: int
    trials: int
    seed: int

    @property
    def h0_hat(self) -> float:
        return self.h0_count / self.trials

    @property
    def q0_hat(self) -> float:
        return self.q0_count / self.trials

    @property
    def c0_hat(self) -> float:
        return self.c0_count / self.trials

    @property
    def ci_halfwidth(self) -> dict:
        """95% normal-approximation half-widths keyed by ``h0``, ``q0``, ``c0``."""
        return {k: halfwidth(getattr(self, f"{k}_hat"), self.trials) for k in ("h0", "q0", "c0")}


def halfwidth(p_hat: float, trials: int) -> float:
    return Z95 * math.sqrt(p_hat * (1 - p_hat) / trials)


def agrees(p_hat: float, p_ref: float, trials: int, nsigma: float = 3.0) -> bool:
    """Whether an estimate is within ``nsigma`` binomial standard errors of a reference value."""
    sigma = math.sqrt(p_ref * (1 - p_ref) / trials)
    return abs(p_hat - p_ref) <= nsigma * sigma + 1e-15


def pairwise_agree(p1: float, n1: int, p2: float, n2: int, nsigma: float = 3.0) -> bool:
    """Two-sample test with the pooled binomial variance."""
    pool = (p1 * n1 + p2 * n2) / (n1 + n2)
    sigma = math.sqrt(pool * (1 - pool) * (1 / n1 + 1 / n2))
    return abs(p1 - p2) <= nsigma * sigma + 1e-15


class _Kernel:
    """Precomputed per-scenario constants shared by all blocks."""

    def __init__(self, scenario: Scenario, cap: int):
        plan = scenario.plan
        ch = plan.inputs.channel
        ring = scenario.probe_ring
        self.scenario = scenario
        self.beta = scenario.load
        self.cap = cap
        self.inner, self.outer = plan.geometry.ring_bounds(ring)
        self.delta = ch.sir_threshold
        probe_rx = float(power_map_watts(plan, scenario.policy, scenario.probe_distance)) * path_loss_gain(
            scenario.probe_distance, ch
        )
        self.probe_rx = probe_rx
        psi = plan.inputs.snr_thresholds[ring - 1]
        # SNR < psi  <=>  |h1|^2 < psi N / (P1 g1)
        self.snr_fade_threshold = psi * ch.noise_watts / probe_rx

    def relative_rx(self, r):
        """Mean received power of interferers at ``r`` relative to the probe."""
        sc = self.scenario
        return power_map_watts(sc.plan, sc.policy, r) * path_loss_gain(r, sc.plan.inputs.channel) / self.probe_rx

    def run(self, seed: int, block_index: int, n: int) -> tuple[int, int, int]:
        rng = block_rng(seed, block_index)
        fade1 = rng.standard_exponential(n)
        counts = np.minimum(_poisson_from_uniform(rng.random(n), self.beta, self.cap), self.cap)
        radial = rng.random((n, self.cap))
        fades = rng.standard_exponential((n, self.cap))

        disc = fade1 < self.snr_fade_threshold
        coll = np.zeros(n, dtype=bool)
        rows = np.flatnonzero(counts)
        if rows.size:
            mask = np.arange(self.cap) < counts[rows, None]
            row_of = np.broadcast_to(np.arange(rows.size)[:, None], mask.shape)[mask]
            r = np.sqrt(self.inner**2 + (1.0 - radial[rows][mask]) * (self.outer**2 - self.inner**2))
            contrib = self.relative_rx(r) * fades[rows][mask]
            interference = np.bincount(row_of, weights=contrib, minlength=rows.size)
            coll[rows] = fade1[rows] < self.delta * interference
        return int(disc.sum()), int(coll.sum()), int((disc | coll).sum())


def simulate_outage(scenario: Scenario, trials: int, seed: int, *, workers: int | None = None,
                    max_interferers: int | None = None) -> OutageEstimate:
    """Estimate disconnection, collision and total outage at the scenario's probe.

    ``max_interferers`` caps the per-trial interferer count (default: Poisson
    tail below 1e-12). Pass the same cap to share random numbers across loads.
    """
    trials = int(trials)
    if trials < MIN_TRIALS:
        raise ValueError(f"trial budget too small: {trials} < {MIN_TRIALS}")
    seed = _check_seed(seed)
    cap = interferer_cap(scenario.load) if max_interferers is None else int(max_interferers)
    if cap < 1:
        raise ValueError("max_interferers must be at least 1")
    kernel = _Kernel(scenario, cap)

    sizes = [BLOCK_SIZE] * (trials // BLOCK_SIZE)
    if trials % BLOCK_SIZE:
        sizes.append(trials % BLOCK_SIZE)
    jobs = list(enumerate(sizes))
    if workers and workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: kernel.run(seed, *job), jobs))
    else:
        parts = [kernel.run(seed, b, n) for b, n in jobs]
    h, q, c = (sum(col) for col in zip(*parts))
    return OutageEstimate(h, q, c, trials, seed)


def collision_oracle_gamma_poisson(beta: float, sir_threshold_db: float, trials: int, seed: int) -> float:
    """Collision probability from the fading-only reduction of the channel-inverted model.

    Draws N ~ Poisson(beta) interferers, aggregate interference X ~ Gamma(N, 1)
    and probe fading ~ Exp(1); a collision is ``fade < delta * X``. No
    geometry is involved, so this is independent of :func:`simulate_outage`.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    trials = int(trials)
    if trials < 1:
        raise ValueError("need at least one trial")
    delta = 10 ** (sir_threshold_db / 10)
    rng = np.random.default_rng(np.random.SeedSequence(_check_seed(seed), spawn_key=(0xC011,)))
    n = rng.poisson(beta, trials)
    busy = n > 0
    x = np.zeros(trials)
    x[busy] = rng.gamma(n[busy], 1.0)
    fade = rng.standard_exponential(trials)
    return float(np.count_nonzero(busy & (fade < delta * x)) / trials)


@dataclass(frozen=True)
class CapacityResult:
    policy: PowerPolicy
    betas: tuple[float, ...]
    capacities: tuple[int, ...]
    c0_hats: tuple[float, ...]
    ci_halfwidths: tuple[float, ...]
    duty_cycles: tuple[float, ...]
    trials: int
    seed: int
    diagnostics: tuple[str, ...] = ()

    @property
    def total(self) -> int:
        return int(sum(self.capacities))

    @property
    def unrounded_total(self) -> float:
        return float(np.sum(np.asarray(self.betas) / np.asarray(self.duty_cycles)))


def _search_ring(plan, policy, ring, target, trials, seed, rel_tol, workers, max_doublings=30):
    ch = plan.inputs.channel
    edge = plan.geometry.edges[ring]
    base = Scenario(plan, policy, edge, beta=0.0)

    def c0_at(beta, cap):
        return simulate_outage(base.with_beta(beta), trials, seed, workers=workers, max_interferers=cap)

    est0 = c0_at(0.0, 1)
    if est0.c0_hat >= target:
        msg = (f"ring {ring}: edge outage {est0.c0_hat:.5g} with no interferers already "
               f"meets or exceeds target {target:g}")
        return 0.0, est0, msg

    delta = ch.sir_threshold
    guess = -(delta + 1) / delta * (math.log1p(-target) - math.log1p(-est0.c0_hat))
    hi = 2.0 * guess
    for _ in range(max_doublings):
        cap = interferer_cap(hi)
        if c0_at(hi, cap).c0_hat > target:
            break
        hi *= 2.0
    else:
        raise RuntimeError(f"ring {ring}: could not bracket the capacity load")

    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if c0_at(mid, cap).c0_hat <= target:
            lo = mid
        else:
            hi = mid
    beta = 0.5 * (lo + hi)
    return beta, c0_at(beta, cap), None


def find_max_capacity(plan: CellPlan, policy: PowerPolicy, trials: int = 200_000, seed: int = 0, *,
                      total_target: float | None = None, rel_tol: float = 0.01,
                      workers: int | None = None) -> CapacityResult:
    """Largest per-ring load keeping simulated outage at each ring's outer edge within target.

    Bisection on the mean active-interferer count, one independent stream per
    ring (common random numbers within a ring). Capacities are floored.
    """
    seed = _check_seed(seed)
    policy.validate(plan.inputs.limits)
    target = plan.targets.total_target if total_target is None else total_target
    p = plan.inputs.duty_cycles
    betas, caps, c0s, cis, diags = [], [], [], [], []
    for ring in range(1, plan.geometry.n_rings + 1):
        beta, est, msg = _search_ring(plan, policy, ring, target, trials, derive_seed(seed, ring),
                                      rel_tol, workers)
        if msg:
            log.warning(msg)
            diags.append(msg)
        ci = est.ci_halfwidth["c0"]
        if msg is None and ci >= 0.1 * target:
            note = f"ring {ring}: c0 half-width {ci:.3g} not below 10% of target; raise trials"
            log.warning(note)
            diags.append(note)
        betas.append(beta)
        caps.append(int(math.floor(beta / p[ring - 1] + 1e-9)))
        c0s.append(est.c0_hat)
        cis.append(ci)
    return CapacityResult(policy, tuple(betas), tuple(caps), tuple(c0s), tuple(cis),
                          tuple(float(x) for x in p), int(trials), seed, tuple(diags))
