import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dszne.experiment import (
    ArmSummary,
    Budget,
    EffectiveDistance,
    ExperimentConfig,
    VirtualCoreLayout,
    check_budget_parity,
    circuit_seed,
    effective_code_distance,
    effective_distance_report,
    effective_shots,
    format_report,
    qubit_savings,
    run_comparison,
    summarize,
    virtual_cores,
)
from dszne.noise import NoiseModel, logical_error_rate
from dszne.rb_circuits import generate_rb
from dszne.simulator import run_exact

from conftest import RECIPES

odd = st.integers(1, 20).map(lambda k: 2 * k + 1)


def small_config(**kw):
    base = dict(
        noise=NoiseModel(0.006),
        distance_max=(11, 13),
        clifford_depths=(5, 8),
        trials=3,
        backend="exact",
        seed=99,
    )
    base.update(kw)
    return ExperimentConfig(**base)


class TestAccounting:
    @pytest.mark.parametrize("d, dp, n", [(11, 5, 4), (11, 11, 1), (27, 3, 81), (13, 7, 3), (27, 25, 1)])
    def test_virtual_cores(self, d, dp, n):
        assert virtual_cores(d, dp) == n

    def test_reduced_distance_above_original(self):
        with pytest.raises(ValueError):
            virtual_cores(5, 7)

    @given(odd, odd)
    def test_virtual_core_bounds(self, d, dp):
        if dp > d:
            d, dp = dp, d
        n = virtual_cores(d, dp)
        assert n >= 1
        assert n * dp**2 <= d**2 < (n + 1) * dp**2

    @pytest.mark.parametrize(
        "d, dp, enabled, expected",
        [(11, 5, True, 40_000), (11, 5, False, 10_000), (13, 7, True, 30_000)],
    )
    def test_effective_shots(self, d, dp, enabled, expected):
        assert effective_shots(10_000, VirtualCoreLayout(d, dp), enabled) == expected

    def test_effective_shots_needs_a_shot(self):
        with pytest.raises(ValueError):
            effective_shots(0, VirtualCoreLayout(11, 5), True)

    def test_budget(self):
        assert Budget(4, 10_000).n_samples == 40_000
        with pytest.raises(ValueError):
            Budget(0, 10)

    def test_default_budget_parity(self):
        budgets = small_config().budgets()
        assert check_budget_parity(budgets) == 40_000
        assert budgets["unmitigated"] == Budget(1, 40_000)

    def test_mismatched_arms_rejected(self):
        with pytest.raises(ValueError, match="budget mismatch"):
            small_config(fold_factors=(1, 3, 5))
        with pytest.raises(ValueError, match="budget mismatch"):
            check_budget_parity({"a": Budget(4, 10), "b": Budget(3, 10)})

    @pytest.mark.parametrize(
        "d, d_eff, dn",
        [(11, 15, 104), (11, 19, 240), (13, 19, 192), (13, 21, 272), (11, 13, 48), (11, 17, 168), (13, 17, 120), (11, 11, 0)],
    )
    def test_qubit_savings_table(self, d, d_eff, dn):
        assert qubit_savings(d, d_eff) == dn

    @given(odd, st.integers(0, 10))
    def test_qubit_savings_strictly_increasing(self, d, k):
        assert qubit_savings(d, d + 2 * k + 2) > qubit_savings(d, d + 2 * k)

    def test_qubit_savings_rejects_smaller_effective_distance(self):
        with pytest.raises(ValueError):
            qubit_savings(13, 11)


CURVE = {11: 0.1, 13: 0.06, 15: 0.035, 17: 0.02, 19: 0.012}


class TestEffectiveDistance:
    @pytest.mark.parametrize(
        "eps, d, expected",
        [(0.05, 11, 15), (0.06, 11, 13), (0.02, 11, 17), (0.2, 11, 11), (0.2, 13, 13), (0.012, 11, 19)],
    )
    def test_lookup(self, eps, d, expected):
        assert effective_code_distance(eps, CURVE, d) == EffectiveDistance(expected)

    def test_lower_bound(self):
        result = effective_code_distance(1e-6, CURVE, 11)
        assert result == EffectiveDistance(19, lower_bound=True)
        assert str(result) == ">=19"

    def test_interpolates_missing_odd_distances(self):
        sparse = {11: 0.1, 15: 0.025}
        # log-linear midpoint at 13 is 0.05
        assert effective_code_distance(0.0501, sparse, 11).d_eff == 13
        assert effective_code_distance(0.0499, sparse, 11).d_eff == 15

    def test_rejects_empty_and_non_monotone(self):
        with pytest.raises(ValueError, match="empty"):
            effective_code_distance(0.1, {})
        with pytest.raises(ValueError, match="decreasing"):
            effective_code_distance(0.1, {11: 0.1, 13: 0.1})

    @given(st.floats(1e-5, 0.2), st.floats(1e-5, 0.2), st.sampled_from([11, 13, 15]))
    def test_monotone(self, e1, e2, d):
        lo, hi = sorted((e1, e2))
        assert effective_code_distance(lo, CURVE, d).d_eff >= effective_code_distance(hi, CURVE, d).d_eff

    def test_report_rows(self):
        summaries = {}
        for d, eps in CURVE.items():
            summaries[("unmitigated", 30, d)] = ArmSummary("unmitigated", 30, d, 1 - eps, 0.0, 10)
            summaries[("fold_zne", 30, d)] = ArmSummary("fold_zne", 30, d, 1 - eps / 2, 0.0, 10)
            summaries[("ds_zne", 30, d)] = ArmSummary("ds_zne", 30, d, 1 - eps / 4, 0.0, 10)
        rows = effective_distance_report(summaries)
        row = next(r for r in rows if r.d == 11)
        assert (row.d_f.d_eff, row.d_ds.d_eff) == (15, 17)
        assert (row.delta_n_f, row.delta_n_ds) == (104, 168)


class TestConfig:
    @pytest.mark.parametrize(
        "kw, field",
        [
            (dict(distance_max=(12,)), "distance_max"),
            (dict(distance_max=(7,)), "distance_max"),
            (dict(fold_factors=(1, 2, 5, 7)), "fold_factors"),
            (dict(trials=0), "trials"),
            (dict(backend="gpu"), "backend"),
            (dict(method="spline"), "method"),
            (dict(order=4), "order"),
            (dict(n_qubits=9), "n_qubits"),
            (dict(shots_per_scale_factor=0), "shots_per_scale_factor"),
        ],
    )
    def test_field_level_errors(self, kw, field):
        with pytest.raises(ValueError, match=f"^{field}"):
            small_config(**kw)


class TestRunComparison:
    def test_noiseless_all_arms_exact(self):
        result = run_comparison(small_config(), noiseless=True)
        for s in result.summaries.values():
            assert s.mean == 1.0 and s.epsilon == 0.0

    def test_noiseless_stabilizer(self):
        result = run_comparison(small_config(backend="stabilizer", shots_per_scale_factor=500), noiseless=True)
        assert all(s.mean == 1.0 for s in result.summaries.values())

    def test_record_layout(self):
        config = small_config()
        result = run_comparison(config)
        n = len(config.clifford_depths) * config.trials * len(config.distance_max) * 3
        assert len(result.records) == n
        assert [r.method for r in result.records[:3]] == ["ds_zne", "fold_zne", "unmitigated"]
        assert all(r.epsilon >= 0 for r in result.records)

    def test_shared_circuit_and_paired_values(self):
        config = small_config()
        result = run_comparison(config)
        ds, fold, unmit = result.records[:3]
        assert ds.seed == fold.seed == unmit.seed == circuit_seed(config.seed, 0, 0)
        c = generate_rb(2, config.clifford_depths[0], ds.seed)
        expected = run_exact(c, logical_error_rate(config.noise, 11))
        assert unmit.expectations == (expected,)
        assert ds.expectations[0] == fold.expectations[0] == expected
        assert ds.expectations[1] == run_exact(c, logical_error_rate(config.noise, 9))

    def test_deterministic_and_worker_invariant(self):
        config = small_config(backend="stabilizer", shots_per_scale_factor=300)
        a = run_comparison(config)
        b = run_comparison(config, jobs=2)
        assert a.records == b.records

    def test_seed_changes_results(self):
        a = run_comparison(small_config(seed=1))
        b = run_comparison(small_config(seed=2))
        assert a.records != b.records

    def test_budget_parity_is_logged(self, caplog):
        with caplog.at_level(logging.INFO, logger="dszne.experiment"):
            run_comparison(small_config(trials=1))
        assert "n_samples=40000" in caplog.text

    def test_virtual_cores_shrink_stabilizer_error(self):
        base = small_config(backend="stabilizer", trials=1, distance_max=(11,), clifford_depths=(30,))
        off = run_comparison(base).records[0]
        on = run_comparison(base.with_overrides(parallel_cores=True)).records[0]
        # d' = 5 runs on 4 virtual cores: four times the shots, half the error
        assert on.std_errors[3] == pytest.approx(off.std_errors[3] / 2, rel=0.1)
        assert on.std_errors[0] == pytest.approx(off.std_errors[0], rel=0.1)

    def test_cycles_per_layer_uses_composite_channel(self):
        config = small_config(noise=NoiseModel(0.006, cycles_per_layer=5), trials=1)
        rec = run_comparison(config).records[2]
        c = generate_rb(2, config.clifford_depths[0], rec.seed)
        rate = logical_error_rate(config.noise, 11)
        expected = run_exact(c, 0.75 * (1 - (1 - 4 * rate / 3) ** 5))
        assert rec.zne_value == pytest.approx(expected, abs=1e-14)

    def test_exponential_method_runs(self):
        result = run_comparison(small_config(method="exponential", trials=2))
        assert all(np.isfinite(r.zne_value) for r in result.records)


class TestSummaries:
    def test_mean_and_sample_std(self):
        result = run_comparison(small_config())
        s = result.summary("ds_zne", 5, 11)
        z = [r.zne_value for r in result.records if (r.method, r.m, r.d_max) == ("ds_zne", 5, 11)]
        assert s.mean == pytest.approx(np.mean(z), abs=1e-15)
        assert s.std == pytest.approx(np.std(z, ddof=1), abs=1e-15)
        assert s.n_trials == 3

    def test_order_independent(self):
        result = run_comparison(small_config())
        shuffled = list(reversed(result.records))
        assert format_report(summarize(shuffled)) == format_report(summarize(result.records))

    def test_report_contains_table_columns(self):
        text = run_comparison(small_config()).report()
        assert "d_F" in text and "d_DS" in text and "dn_F" in text


@pytest.mark.slow
class TestGateLayerGranularity:
    """Regression of the 14-cycles-per-layer sensitivity recipe."""

    def test_effective_distance_table(self):
        from dszne.cli import load_recipe

        result = run_comparison(load_recipe(RECIPES / "gate_layer_noise.yaml"))
        rows = {(r.m, r.d): (r.d_f.d_eff, r.d_ds.d_eff) for r in result.effective_distance_report() if r.d in (11, 13)}
        assert rows == {(20, 11): (15, 19), (20, 13): (19, 25), (30, 11): (13, 17), (30, 13): (17, 21)}
