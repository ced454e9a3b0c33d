import warnings
from math import asin, pi, sin, sqrt

import numpy as np
import pytest

from qrisk.circuits import (
    BooleanThreadFunction,
    PriceDistribution,
    build_payoff_circuit,
    build_random_injection,
    build_thread_function,
    build_thread_superposition,
    even16,
    injection_layout,
    payoff_layout,
)
from qrisk.errors import ArgumentError, DegenerateLikelihoodWarning
from qrisk.estimators import (
    MLAEConfig,
    convergence_experiment,
    count_good,
    default_cost_grid,
    exact_amplitude,
    fisher_standard_error,
    grid_sampling_exact,
    grover_probabilities,
    jackknife_rmse,
    mc_random_injection,
    mlae_estimate,
    mlae_from_counts,
    schedule_for_cost,
)
from qrisk.sim import Circuit, basis_probabilities, derive_rng, run

ALL_ZERO = BooleanThreadFunction((0,) * 8)
ALL_ONE = BooleanThreadFunction((1,) * 8)


def bernoulli(a: float) -> Circuit:
    return Circuit(1).ry(2 * asin(sqrt(a)), 0)


def injection_prep(f: BooleanThreadFunction) -> Circuit:
    layout = injection_layout(3)
    c = build_thread_superposition(layout, 3)
    c.extend(build_thread_function(layout, f, layout.output_qubit))
    return c.extend(build_random_injection(layout, layout.output_qubit))


def pf_prep():
    layout = payoff_layout()
    return build_payoff_circuit(layout, even16(), 0.01, pi / 4), layout.pf_qubit


class TestExactAmplitude:
    def test_payoff_below_strike(self):
        layout = payoff_layout()
        c = build_payoff_circuit(layout, PriceDistribution.point(10), 0.01, pi / 4)
        assert exact_amplitude(c, layout.pf_qubit) == 0.0

    def test_single_rotation(self):
        got = exact_amplitude(Circuit(1).ry(2 * 0.5236, 0), 0)
        assert got == pytest.approx(sin(0.5236) ** 2, abs=1e-15)
        assert got == pytest.approx(0.25, abs=1e-4)

    def test_injection_target(self):
        assert exact_amplitude(injection_prep(ALL_ZERO), 3) == pytest.approx(0.25, abs=1e-15)


class TestClassicalOracles:
    def test_grid_constants(self):
        assert grid_sampling_exact(ALL_ONE) == 0.75
        assert grid_sampling_exact(ALL_ZERO) == 0.25
        assert grid_sampling_exact(BooleanThreadFunction((0, 1) * 4)) == 0.5

    @pytest.mark.parametrize("f, limit", [(ALL_ONE, 0.75), (ALL_ZERO, 0.25)])
    def test_mc_constants(self, f, limit):
        n = 200_000
        got = mc_random_injection(f, n, 5)
        assert abs(got - limit) < 5 * sqrt(limit * (1 - limit) / n)

    def test_mc_single_thread_indicator(self):
        f = BooleanThreadFunction.from_index(1 << 2)
        expected = (1 / 8) * 0.75 + (7 / 8) * 0.25
        assert expected == 0.3125
        n = 1_000_000
        got = mc_random_injection(f, n, 9)
        assert abs(got - expected) < 5 * sqrt(expected * (1 - expected) / n)

    def test_mc_deterministic(self):
        f = BooleanThreadFunction.from_index(77)
        assert mc_random_injection(f, 1000, 3) == mc_random_injection(f, 1000, 3)

    def test_mc_zero_samples(self):
        with pytest.raises(ArgumentError):
            mc_random_injection(ALL_ZERO, 0, 0)

    def test_equivalence_all_functions_exact(self):
        for index in range(256):
            f = BooleanThreadFunction.from_index(index)
            theorem = 0.75 * f.mean() + 0.25 * (1 - f.mean())
            assert abs(grid_sampling_exact(f) - theorem) < 1e-12
            assert abs(exact_amplitude(injection_prep(f), 3) - theorem) < 1e-12


class TestMLAE:
    def test_single_power_is_sampled_frequency(self):
        prep = bernoulli(0.3)
        cfg = MLAEConfig((0,), 1000)
        seed = 17
        hits = count_good(basis_probabilities(run(prep)), 0, 1000, derive_rng(seed))
        assert mlae_estimate(prep, 0, cfg, seed) == pytest.approx(hits / 1000, abs=1e-5)

    def test_beats_sampling_at_equal_cost(self):
        prep = bernoulli(0.25)
        cfg = MLAEConfig((0, 1, 2, 4, 8), 100)
        probs = basis_probabilities(run(prep))
        mlae_err = [mlae_estimate(prep, 0, cfg, s) - 0.25 for s in range(50)]
        mc_err = [count_good(probs, 0, cfg.cost, derive_rng(1000 + s)) / cfg.cost - 0.25
                  for s in range(50)]
        assert np.sqrt(np.mean(np.square(mlae_err))) < np.sqrt(np.mean(np.square(mc_err)))

    def test_payoff_within_three_sigma(self):
        prep, good = pf_prep()
        a = exact_amplitude(prep, good)
        cfg = MLAEConfig((0, 1, 2, 4, 8), 100)
        est = mlae_estimate(prep, good, cfg, 4)
        assert abs(est - a) < 3 * fisher_standard_error(a, cfg.grover_powers, cfg.shots_per_power)

    def test_consistency_large_shots(self):
        prep, good = pf_prep()
        a = exact_amplitude(prep, good)
        cfg = MLAEConfig((0, 1, 2, 4), 10_000)
        est = mlae_estimate(prep, good, cfg, 8)
        assert abs(est - a) < 3 * fisher_standard_error(est, cfg.grover_powers, cfg.shots_per_power)

    def test_deterministic(self):
        prep, good = pf_prep()
        cfg = MLAEConfig((0, 1, 2), 50)
        assert mlae_estimate(prep, good, cfg, 1) == mlae_estimate(prep, good, cfg, 1)

    def test_degenerate_counts(self):
        with pytest.warns(DegenerateLikelihoodWarning):
            assert mlae_from_counts([0, 1], 10, [0, 0]) == 0.0
        with pytest.warns(DegenerateLikelihoodWarning):
            assert mlae_from_counts([0, 1], 10, [10, 10]) == 1.0

    def test_noiseless_counts_recover_amplitude(self):
        a = 0.37
        ta = asin(sqrt(a))
        powers = [0, 1, 2, 4]
        shots = 10**6
        hits = [round(shots * sin((2 * k + 1) * ta) ** 2) for k in powers]
        assert mlae_from_counts(powers, shots, hits) == pytest.approx(a, abs=1e-6)

    def test_grover_probabilities_closed_form(self):
        prep = bernoulli(0.1)
        ta = asin(sqrt(0.1))
        probs = grover_probabilities(prep, 0, [0, 1, 3, 3, 7])
        assert sorted(probs) == [0, 1, 3, 7]
        for k, p in probs.items():
            assert p[1] == pytest.approx(sin((2 * k + 1) * ta) ** 2, abs=1e-12)

    @pytest.mark.parametrize(
        "kwargs",
        [dict(grover_powers=()), dict(grover_powers=(0, 2, 1)), dict(grover_powers=(-1,)),
         dict(shots_per_power=0), dict(grid_points=999)],
    )
    def test_config_validation(self, kwargs):
        with pytest.raises(ArgumentError):
            MLAEConfig(**kwargs)


class TestCostAccounting:
    def test_config_cost(self):
        assert MLAEConfig((0, 1, 2, 4, 8), 100).cost == 100 * (1 + 3 + 5 + 9 + 17)

    def test_schedule_for_cost(self):
        assert schedule_for_cost(400) == MLAEConfig((0, 1), 100)
        assert schedule_for_cost(1000) == MLAEConfig((0, 1, 2), 111)
        assert schedule_for_cost(32) == MLAEConfig((0,), 32)
        for c in default_cost_grid():
            assert schedule_for_cost(c).cost == c

    def test_default_grid(self):
        assert default_cost_grid() == [400, 900, 1800, 3500, 6800, 13300, 26200]


class TestConvergence:
    def test_argument_errors(self):
        prep, good = pf_prep()
        with pytest.raises(ArgumentError):
            convergence_experiment(prep, good, [], 10)
        with pytest.raises(ArgumentError):
            convergence_experiment(prep, good, [100], 9)

    def test_points_and_costs(self):
        prep, good = pf_prep()
        curves = convergence_experiment(prep, good, [400, 1000], 10, seed=3)
        assert [p.cost for p in curves["classical"]] == [400, 1000]
        assert [p.cost for p in curves["mlae"]] == [400, schedule_for_cost(1000).cost]
        assert all(p.rmse >= 0 and p.stderr >= 0 for ps in curves.values() for p in ps)

    def test_schedule_independent_streams(self):
        prep, good = pf_prep()
        both = convergence_experiment(prep, good, [400, 900], 10, seed=5)
        alone = convergence_experiment(prep, good, [900], 10, seed=5)
        assert both["mlae"][1] == alone["mlae"][0]
        assert both["classical"][1] == alone["classical"][0]


def test_jackknife_against_brute_force():
    e = np.array([0.1, -0.3, 0.2, 0.05, -0.15])
    n = e.size
    loo = np.array([sqrt(np.mean(np.delete(e, j) ** 2)) for j in range(n)])
    se = sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2))
    rmse, stderr = jackknife_rmse(e)
    assert rmse == pytest.approx(sqrt(np.mean(e**2)))
    assert stderr == pytest.approx(se)
