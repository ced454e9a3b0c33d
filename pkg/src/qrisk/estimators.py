"""Estimators: exact marginals, the two classical oracles for random
injection, maximum-likelihood amplitude estimation and the RMSE-vs-cost
convergence experiment.

Oracle cost of one shot after ``prep . Q**k`` is ``2k + 1`` applications of
``prep`` or its inverse, so an MLAE run costs ``sum_k (2k+1) * shots``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import asin, pi, sin, sqrt
from typing import Sequence

import numpy as np

from .circuits import BooleanThreadFunction, build_grover_operator
from .errors import ArgumentError, DegenerateLikelihoodWarning
from .sim import (
    Circuit,
    apply_circuit,
    basis_probabilities,
    derive_rng,
    marginal_probability,
    run,
    sample_indices,
)

METHOD_IDS = {"classical": 0, "mlae": 1}


@dataclass(frozen=True)
class MLAEConfig:
    grover_powers: tuple[int, ...] = (0, 1, 2, 4, 8)
    shots_per_power: int = 100
    grid_points: int = 10_000

    def __post_init__(self) -> None:
        powers = tuple(int(k) for k in self.grover_powers)
        object.__setattr__(self, "grover_powers", powers)
        if not powers or any(k < 0 for k in powers):
            raise ArgumentError("grover_powers must be nonempty and nonnegative")
        if any(b < a for a, b in zip(powers, powers[1:])):
            raise ArgumentError("grover_powers must be nondecreasing")
        if self.shots_per_power < 1:
            raise ArgumentError("shots_per_power must be >= 1")
        if self.grid_points < 1000:
            raise ArgumentError("grid_points must be >= 1000")

    @property
    def cost(self) -> int:
        return sum(2 * k + 1 for k in self.grover_powers) * self.shots_per_power


@dataclass(frozen=True)
class ConvergencePoint:
    cost: int
    rmse: float
    stderr: float


def exact_amplitude(prep: Circuit, good_qubit: int) -> float:
    """``P(good_qubit = 1)`` after ``prep`` on ``|0...0>``; the noiseless QAE limit."""
    return marginal_probability(run(prep), good_qubit, 1)


def mc_random_injection(f: BooleanThreadFunction, samples: int, seed: int) -> float:
    """Classical Monte Carlo of ``f(x) XOR (r == 3)`` with x, r drawn uniformly."""
    if samples < 1:
        raise ArgumentError("samples must be >= 1")
    rng = derive_rng(seed)
    table = np.asarray(f.truth_table, dtype=np.int8)
    x = rng.integers(0, len(table), size=samples)
    r = rng.integers(0, 4, size=samples)
    return float(np.mean(table[x] ^ (r == 3)))


def grid_sampling_exact(f: BooleanThreadFunction) -> float:
    """Exhaustive mean of ``f(x) XOR (r == 3)`` over every (x, r)."""
    total = sum(f(x) ^ (r == 3) for x in range(len(f.truth_table)) for r in range(4))
    return total / (4 * len(f.truth_table))


def grover_probabilities(
    prep: Circuit, good_qubit: int, powers: Sequence[int]
) -> dict[int, np.ndarray]:
    """Basis probabilities after ``prep . Q**k`` for each distinct ``k``."""
    grover = build_grover_operator(prep, good_qubit)
    state = run(prep)
    out: dict[int, np.ndarray] = {}
    done = 0
    for k in sorted(set(powers)):
        while done < k:
            state = apply_circuit(state, grover)
            done += 1
        out[k] = basis_probabilities(state)
    return out


def _good_mask(n_states: int, good_qubit: int) -> np.ndarray:
    return ((np.arange(n_states) >> good_qubit) & 1).astype(bool)


def count_good(
    probs: np.ndarray, good_qubit: int, shots: int, rng: np.random.Generator
) -> int:
    """Number of shots, out of ``shots`` full-register draws, with the good bit set."""
    idx = sample_indices(probs, shots, rng)
    return int(np.count_nonzero((idx >> good_qubit) & 1))


def _log_likelihood(
    theta: np.ndarray, powers: np.ndarray, shots: np.ndarray, hits: np.ndarray
) -> np.ndarray:
    p = np.sin((2 * powers[:, None] + 1) * theta[None, :]) ** 2
    p = np.clip(p, 1e-300, None)
    q = np.clip(1.0 - p, 1e-300, None)
    return (hits[:, None] * np.log(p) + (shots - hits)[:, None] * np.log(q)).sum(axis=0)


def mlae_from_counts(
    powers: Sequence[int],
    shots: Sequence[int] | int,
    hits: Sequence[int],
    grid_points: int = 10_000,
) -> float:
    """Maximum-likelihood ``a = sin^2(theta_a)`` from good-state counts.

    Coarse grid of ``grid_points`` over ``[0, pi/2]``, then two refinements at
    ten times the previous resolution around the running maximum.
    """
    powers_a = np.asarray(powers, dtype=float)
    hits_a = np.asarray(hits, dtype=float)
    shots_a = np.broadcast_to(np.asarray(shots, dtype=float), hits_a.shape)
    if np.all(hits_a == 0) or np.all(hits_a == shots_a):
        warnings.warn(
            "all-zero or all-one counts at every power; returning boundary value",
            DegenerateLikelihoodWarning,
            stacklevel=2,
        )
        return 0.0 if np.all(hits_a == 0) else 1.0
    grid = np.linspace(0.0, pi / 2, grid_points)
    ll = _log_likelihood(grid, powers_a, shots_a, hits_a)
    best = grid[int(np.argmax(ll))]
    step = grid[1] - grid[0]
    for _ in range(2):
        grid = np.clip(best + step * np.linspace(-1.0, 1.0, 21), 0.0, pi / 2)
        ll = _log_likelihood(grid, powers_a, shots_a, hits_a)
        best = grid[int(np.argmax(ll))]
        step /= 10
    return sin(best) ** 2


def fisher_standard_error(a: float, powers: Sequence[int], shots: int) -> float:
    """Cramer-Rao standard error of ``a`` for the given schedule."""
    info = shots * sum((2 * k + 1) ** 2 for k in powers)
    return sqrt(max(a * (1 - a), 0.0) / info)


def _mlae_sampled(
    probs_by_power: dict[int, np.ndarray],
    good_qubit: int,
    cfg: MLAEConfig,
    rng: np.random.Generator,
) -> float:
    hits = [count_good(probs_by_power[k], good_qubit, cfg.shots_per_power, rng)
            for k in cfg.grover_powers]
    return mlae_from_counts(cfg.grover_powers, cfg.shots_per_power, hits, cfg.grid_points)


def mlae_estimate(prep: Circuit, good_qubit: int, cfg: MLAEConfig, seed: int) -> float:
    """Sample each Grover power of ``prep`` and return the ML amplitude."""
    probs = grover_probabilities(prep, good_qubit, cfg.grover_powers)
    return _mlae_sampled(probs, good_qubit, cfg, derive_rng(seed))


def schedule_for_cost(cost: int, shots_per_power: int = 100) -> MLAEConfig:
    """Geometric schedule ``0, 1, 2, 4, ...`` that fits an oracle budget.

    The longest prefix whose cost at ``shots_per_power`` stays within
    ``cost`` is kept; the leftover budget then raises the shot count. Budgets
    below one full round fall back to ``k = 0`` only with ``cost`` shots.
    """
    if cost < 1:
        raise ArgumentError("cost must be >= 1")
    powers = [0]
    nxt = 1
    while shots_per_power * sum(2 * k + 1 for k in [*powers, nxt]) <= cost:
        powers.append(nxt)
        nxt *= 2
    unit = sum(2 * k + 1 for k in powers)
    return MLAEConfig(tuple(powers), max(1, cost // unit))


def default_cost_grid(shots_per_power: int = 100, levels: int = 7) -> list[int]:
    """Exact costs of the geometric schedules with 0..levels-1 doublings."""
    grid = []
    for j in range(levels):
        powers = [0] + [1 << i for i in range(j + 1)]
        grid.append(shots_per_power * sum(2 * k + 1 for k in powers))
    return grid


def jackknife_rmse(errors: np.ndarray) -> tuple[float, float]:
    """RMSE of ``errors`` and its leave-one-out jackknife standard error."""
    e2 = np.asarray(errors, dtype=float) ** 2
    n = e2.size
    rmse = float(np.sqrt(e2.mean()))
    if n < 2:
        return rmse, 0.0
    loo = np.sqrt((e2.sum() - e2) / (n - 1))
    stderr = float(np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))
    return rmse, stderr


def convergence_experiment(
    prep: Circuit,
    good_qubit: int,
    cost_grid: Sequence[int],
    trials: int = 50,
    seed: int = 0,
    shots_per_power: int = 100,
) -> dict[str, list[ConvergencePoint]]:
    """RMSE against oracle cost for plain shot sampling and for MLAE.

    Every trial draws from its own stream keyed by
    ``(seed, method, cost, trial)``, so results do not depend on run order.
    """
    if not cost_grid:
        raise ArgumentError("cost grid is empty")
    if trials < 10:
        raise ArgumentError("trials must be >= 10")
    truth = exact_amplitude(prep, good_qubit)
    base_probs = basis_probabilities(run(prep))
    curves: dict[str, list[ConvergencePoint]] = {"classical": [], "mlae": []}
    for m in cost_grid:
        m = int(m)
        errs = []
        for trial in range(trials):
            rng = derive_rng(seed, METHOD_IDS["classical"], m, trial)
            errs.append(count_good(base_probs, good_qubit, m, rng) / m - truth)
        curves["classical"].append(ConvergencePoint(m, *jackknife_rmse(np.array(errs))))

        cfg = schedule_for_cost(m, shots_per_power)
        probs = grover_probabilities(prep, good_qubit, cfg.grover_powers)
        errs = []
        with warnings.catch_warnings():
            # boundary estimates at tiny budgets are part of the measured error
            warnings.simplefilter("ignore", DegenerateLikelihoodWarning)
            for trial in range(trials):
                rng = derive_rng(seed, METHOD_IDS["mlae"], m, trial)
                errs.append(_mlae_sampled(probs, good_qubit, cfg, rng) - truth)
        curves["mlae"].append(ConvergencePoint(cfg.cost, *jackknife_rmse(np.array(errs))))
    return curves


def loglog_slope(points: Sequence[ConvergencePoint]) -> float:
    """Least-squares slope of log(rmse) against log(cost)."""
    x = np.log([p.cost for p in points])
    y = np.log([p.rmse for p in points])
    return float(np.polyfit(x, y, 1)[0])
