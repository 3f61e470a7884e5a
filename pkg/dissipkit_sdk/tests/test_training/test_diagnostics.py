"""
Test training diagnostics and resource scans

Covers the PL ratio, descent checks, gradient-norm statistics at
initialization and the (value, seed) parameter scan with saturation detection.
"""
import math
from types import SimpleNamespace

import numpy as np
import pytest

from dissipkit.diagnostics import (
    EXACT_GAP_LABEL,
    NOISY_GAP_LABEL,
    SaturationScan,
    ancilla_scan,
    descent_check,
    find_descent_step,
    grad_norm_at_init,
    grad_norm_scan,
    make_pl_monitor,
    parameter_scan,
    pl_ratio,
    run_gain,
    saturation_point,
    with_variant,
)
from dissipkit.channels import NoiseKind, NoiseLocation, NoiseSpec
from dissipkit.circuits import dissipative_identity_params
from dissipkit.engine import TaskKind, make_loss
from dissipkit.exc import ContractViolationException, RunExecutionException
from dissipkit.optim import IterationRecord, TrainingTrace, train
from tests.fixtures.sample_configs import get_small_dvqe_config, get_small_recovery_config, get_w_recovery_config
from tests.fixtures.sample_traces import BOWL_LEARNING_RATE, bowl_gradient, bowl_loss, get_bowl_trace


def make_trace(losses, grad_norms, final_loss=None, aux=None):
    aux = losses if aux is None else aux
    records = [
        IterationRecord(t, loss, a, loss, g)
        for t, (loss, a, g) in enumerate(zip(losses, aux, grad_norms))
    ]
    return TrainingTrace(records, 0.1, np.zeros(1), final_loss=final_loss, final_aux=final_loss)


def make_scan(values, medians):
    return SaturationScan("m", tuple(values), (1,), (), tuple(medians), tuple(medians))


STUB_FINAL_BY_M = {1: 0.6, 2: 0.8}


def stub_run(cfg):
    """Stand-in training run: final fidelity grows with m and saturates at m = 3"""
    final = STUB_FINAL_BY_M.get(cfg.m, 0.975)
    trace = make_trace([1.0 - final], [0.0], final_loss=1.0 - final)
    trace.final_aux = final
    loss = SimpleNamespace(task=TaskKind.RECOVERY, initial_metric=0.5)
    return loss, trace


def near_identity_run(cfg):
    """Train from the identity channel with a small seeded jitter"""
    loss = make_loss(TaskKind.RECOVERY, cfg)
    theta0 = np.tile(dissipative_identity_params(cfg.n, cfg.m), cfg.rounds)
    theta0 = theta0 + 0.01 * np.random.default_rng(cfg.seed).standard_normal(loss.param_count)
    return loss, train(loss, theta0, cfg.learning_rate, cfg.iterations)


class TestPlRatio:
    """Test the Polyak-Łojasiewicz ratio along a trace"""

    def test_bowl_ratio_is_two(self, bowl_trace):
        report = pl_ratio(bowl_trace, 0.0)
        np.testing.assert_allclose(report.ratios, 2.0)
        assert report.min == pytest.approx(2.0)
        assert report.median == pytest.approx(2.0)
        assert report.label == EXACT_GAP_LABEL

    def test_noisy_label(self, bowl_trace):
        assert pl_ratio(bowl_trace, 0.0, noisy=True).label == NOISY_GAP_LABEL

    def test_gap_floor(self):
        report = pl_ratio(make_trace([1.0], [2.0]), 5.0, eps_gap=0.5)
        # gap is negative, so the floor eps_gap is used: 0.5 * 4 / 0.5
        assert report.ratios[0] == pytest.approx(4.0)

    def test_empty_trace(self):
        report = pl_ratio(make_trace([], []), 0.0)
        assert math.isnan(report.min)

    def test_monitor_matches_report(self):
        monitor = make_pl_monitor(0.0)
        trace = get_bowl_trace(4, monitors=[monitor])
        np.testing.assert_allclose([r.monitors["pl_ratio"] for r in trace.records], pl_ratio(trace, 0.0).ratios)


class TestDescent:
    """Test the descent-lemma checks"""

    def test_bowl_always_descends(self, bowl_trace):
        assert descent_check(bowl_trace, BOWL_LEARNING_RATE) == 1.0

    def test_ascending_trace(self):
        trace = make_trace([1.0, 2.0, 1.5], [1.0, 1.0, 1.0])
        assert descent_check(trace, 0.1) == 0.5

    def test_single_record_without_final(self):
        assert descent_check(make_trace([1.0], [1.0]), 0.1) == 1.0

    def test_find_step_halves_once(self):
        step = find_descent_step(bowl_loss, np.array([1.0]), np.array([2.0]), 2.0)
        assert (step.learning_rate, step.halvings, step.satisfied) == (1.0, 1, True)

    def test_find_step_accepts_first(self):
        step = find_descent_step(bowl_loss, np.array([1.0]), bowl_gradient(bowl_loss, np.array([1.0])), 0.25)
        assert (step.learning_rate, step.halvings, step.satisfied) == (0.25, 0, True)

    def test_find_step_gives_up(self):
        step = find_descent_step(lambda theta: -float(theta[0]), np.array([0.0]), np.array([1.0]), 1.0)
        assert not step.satisfied
        assert step.halvings == 20
        assert step.learning_rate == 2.0 ** -20


class TestGradNorm:
    """Test gradient-norm statistics at random initialization"""

    def test_deterministic(self):
        first = grad_norm_at_init(bowl_loss, 3, 4, 7, gradient=bowl_gradient)
        second = grad_norm_at_init(bowl_loss, 3, 4, 7, gradient=bowl_gradient)
        assert first == second
        assert first.samples == 4
        assert first.mean > 0.0

    def test_single_rotation_mean(self, single_rotation_loss):
        stats = grad_norm_at_init(single_rotation_loss, 1, 2000, 5)
        # E[sin²θ] = 1/2 for θ uniform on [−π, π)
        assert abs(stats.mean - 0.5) <= 4.0 * math.sqrt(stats.variance / stats.samples)
        assert stats.variance == pytest.approx(0.125, abs=0.02)

    def test_needs_two_samples(self):
        with pytest.raises(ContractViolationException):
            grad_norm_at_init(bowl_loss, 3, 1, 7, gradient=bowl_gradient)

    def test_scan_rows(self):
        rows = grad_norm_scan([2], 2, 1, rounds=1, vqe_layers=1)
        assert [(r.n, r.family, r.m, r.param_count) for r in rows] == [
            (2, "baseline", 0, 4),
            (2, "dissipative", 2, 32),
        ]
        assert all(r.stats.variance >= 0.0 for r in rows)


class TestVariants:
    """Test scan variants and gain definitions"""

    def test_ancilla_variant(self, small_dvqe_config):
        cfg = with_variant(small_dvqe_config, "m", 3, 9)
        assert (cfg.m, cfg.seed) == (3, 9)

    def test_noise_variant_dvqe(self):
        base = get_small_dvqe_config(noise=NoiseSpec(NoiseKind.DEPOLARIZING, 0.01))
        assert with_variant(base, "p", 0.05, 1).noise.p == 0.05

    def test_noise_variant_recovery(self):
        base = get_small_recovery_config(noise_prep=NoiseSpec(NoiseKind.BIT_FLIP, 0.1, NoiseLocation.INPUT_ONLY))
        assert with_variant(base, "p", 0.2, 1).noise_prep.p == 0.2

    def test_unknown_key(self, small_dvqe_config):
        with pytest.raises(ContractViolationException):
            with_variant(small_dvqe_config, "depth", 1, 1)

    def test_recovery_gain(self):
        loss, trace = stub_run(SimpleNamespace(m=1))
        initial, gain = run_gain(loss, trace)
        assert initial == 0.5
        assert gain == pytest.approx(0.1)

    def test_dvqe_gain(self):
        trace = make_trace([1.0, 0.5], [1.0, 1.0], final_loss=0.25)
        initial, gain = run_gain(SimpleNamespace(task=TaskKind.DVQE), trace)
        assert (initial, gain) == (1.0, 0.75)


class TestParameterScan:
    """Test the (value, seed) scan driver"""

    def test_runs_every_pair(self, small_recovery_config):
        scan = parameter_scan(small_recovery_config, "m", [1, 2, 3, 4], [1, 2], run=stub_run)
        assert len(scan.runs) == 8
        assert [(r.value, r.seed) for r in scan.runs[:3]] == [(1, 1), (1, 2), (2, 1)]
        assert scan.median_metric == pytest.approx((0.6, 0.8, 0.975, 0.975))
        assert scan.errors == ()

    def test_threaded_scan_preserves_order(self, small_recovery_config):
        scan = parameter_scan(small_recovery_config, "m", [1, 2, 3], [1, 2, 3], run=stub_run, max_workers=4)
        assert [(r.value, r.seed) for r in scan.runs] == [(v, s) for v in (1, 2, 3) for s in (1, 2, 3)]

    @pytest.mark.parametrize("values", [[], [2, 1], [1, 1]])
    def test_values_strictly_increasing(self, small_recovery_config, values):
        with pytest.raises(ContractViolationException):
            parameter_scan(small_recovery_config, "m", values, [1], run=stub_run)

    def test_seeds_required(self, small_recovery_config):
        with pytest.raises(ContractViolationException):
            parameter_scan(small_recovery_config, "m", [1], [], run=stub_run)

    def test_failure_raises_with_context(self, small_recovery_config):
        def failing(cfg):
            raise RuntimeError("boom")

        with pytest.raises(RunExecutionException) as exc_info:
            parameter_scan(small_recovery_config, "m", [1], [7], run=failing)
        assert exc_info.value.name == "m=1/seed=7"
        assert isinstance(exc_info.value.error, RuntimeError)

    def test_failure_collected(self, small_recovery_config):
        def flaky(cfg):
            if cfg.m == 2:
                raise RuntimeError("boom")
            return stub_run(cfg)

        scan = parameter_scan(small_recovery_config, "m", [1, 2], [1], run=flaky, raise_errors=False)
        assert [e.name for e in scan.errors] == ["m=2/seed=1"]
        assert len(scan.runs) == 1
        assert math.isnan(scan.median_metric[1])

    def test_real_training_run(self, small_recovery_config):
        scan = parameter_scan(small_recovery_config, "m", [1, 2], [1])
        assert all(len(r.trace.records) == small_recovery_config.iterations for r in scan.runs)
        assert all(r.initial_metric == pytest.approx(1.0) for r in scan.runs)

    def test_ancilla_scan(self, small_recovery_config):
        scan = ancilla_scan(small_recovery_config, [1, 2], [1, 2])
        assert scan.key == "m"
        assert [(r.value, r.seed) for r in scan.runs] == [(1, 1), (1, 2), (2, 1), (2, 2)]
        assert len(scan.median_gain) == 2

    def test_zero_noise_ancilla_scan_has_no_gain(self):
        base = get_w_recovery_config(rounds=1, noise_prep=NoiseSpec.none(), learning_rate=0.1, iterations=5)
        scan = ancilla_scan(base, [1, 2], [1], run=near_identity_run)
        assert all(r.initial_metric == pytest.approx(1.0) for r in scan.runs)
        assert all(abs(gain) <= 0.01 for gain in scan.median_gain)


class TestSaturationPoint:
    """Test plateau detection on median metrics"""

    def test_plateau(self):
        assert saturation_point(make_scan([1, 2, 3, 4], [0.8, 0.95, 0.96, 0.965])) == 2

    def test_no_plateau(self):
        assert saturation_point(make_scan([1, 2, 3, 4], [0.1, 0.2, 0.3, 0.4])) is None

    def test_single_value(self):
        assert saturation_point(make_scan([3], [0.9])) == 3

    def test_stub_scan_saturates(self, small_recovery_config):
        scan = parameter_scan(small_recovery_config, "m", [1, 2, 3, 4, 5], [1], run=stub_run)
        assert saturation_point(scan) == 3
