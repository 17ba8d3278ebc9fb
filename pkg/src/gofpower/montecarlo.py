"""Finite-n Monte-Carlo oracle for the scaled squared-distance statistic.

Each trial draws a multinomial sample of size n from p_a = p0 + a/sqrt(n)
and forms X_n = n * sum_k (Y_k - (p0)_k)^2.  Trials use counter-based
per-trial random streams keyed by (seed, trial index), so results are
bit-for-bit reproducible and independent of how trials are scheduled
across threads.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import (
    Alternative,
    AlternativeError,
    Perturbation,
    ProbabilityModel,
    validate_alternative,
)

__all__ = [
    "SimulationResult", "EmpiricalPowerPoint",
    "simulate_statistics", "empirical_power",
]

_MASK64 = (1 << 64) - 1
_MIN_TAIL_TRIALS = 10  # below alpha*trials of this, quantiles are unreliable


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Per-trial statistics plus the inputs needed to reproduce them."""

    statistics: np.ndarray
    n: int
    trials: int
    seed: int

    def __post_init__(self):
        if self.statistics.shape != (self.trials,):
            raise ValueError("statistics length must equal the trial count")


@dataclass(frozen=True)
class EmpiricalPowerPoint:
    alpha: float
    power: float
    std_error: float
    low_sample: bool = False


def _trial_generator(seed: int, trial: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, trial & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate_statistics(model: ProbabilityModel, pert: Perturbation,
                        n: int, trials: int, seed: int,
                        threads: int | None = None) -> SimulationResult:
    """Simulate X_n over independent trials; same (inputs, seed) — same output.

    The multinomial sampler is numpy's conditional-binomial generator
    (exact binomials via inversion / BTPE), O(m) per trial regardless of n.
    Thread-count changes cannot alter the result: trial t always consumes
    its own stream keyed by (seed, t).
    """
    if trials < 1:
        raise ValueError("trials must be a positive integer")
    alt = Alternative(model, pert, n)
    check = validate_alternative(alt)
    if not check.valid:
        raise AlternativeError(check.message() + f" (n={n})")
    p_a = check.p_a
    p0 = model.probs
    inv_n = 1.0 / n
    stats = np.empty(trials)

    def run(lo: int, hi: int) -> None:
        for t in range(lo, hi):
            counts = _trial_generator(seed, t).multinomial(n, p_a)
            d = counts * inv_n - p0
            stats[t] = n * float(d @ d)

    if threads and threads > 1:
        chunk = max(1, math.ceil(trials / (4 * threads)))
        bounds = list(range(0, trials, chunk)) + [trials]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(run, lo, hi)
                       for lo, hi in zip(bounds[:-1], bounds[1:])]
            for fut in futures:
                fut.result()
    else:
        run(0, trials)
    stats.flags.writeable = False
    return SimulationResult(statistics=stats, n=n, trials=trials, seed=seed)


def empirical_power(sim_null: SimulationResult, sim_alt: SimulationResult,
                    alpha_grid) -> list[EmpiricalPowerPoint]:
    """Empirical power at each alpha from two simulations sharing n.

    The critical value is the right-continuous empirical (1 - alpha)
    quantile of the null statistics (order statistic ceil((1-alpha)*T),
    ties resolved toward the larger value); power is the fraction of
    alternative statistics at or above it.  The attached standard error is
    sqrt(alpha (1 - alpha) / trials).
    """
    if sim_null.n != sim_alt.n:
        raise ValueError(
            f"simulations use different n: {sim_null.n} vs {sim_alt.n}")
    snull = np.sort(sim_null.statistics)
    trials = sim_null.trials
    out = []
    for alpha in np.asarray(alpha_grid, dtype=float):
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
        low = alpha * trials < _MIN_TAIL_TRIALS
        if low:
            warnings.warn(
                f"alpha={alpha:g} leaves under {_MIN_TAIL_TRIALS} tail trials; "
                "the empirical quantile is unreliable", RuntimeWarning,
                stacklevel=2)
        # right-continuous quantile, boundary ties pushed to the larger
        # critical value so the empirical size stays at or below alpha
        rank = min(trials, int(math.floor((1.0 - alpha) * trials + 1e-9)) + 1)
        critical = snull[rank - 1]
        power = float(np.mean(sim_alt.statistics >= critical))
        se = math.sqrt(alpha * (1.0 - alpha) / sim_alt.trials)
        out.append(EmpiricalPowerPoint(float(alpha), power, se, low))
    return out
