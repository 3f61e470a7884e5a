"""
Test DVQE and recovery configurations, forward passes and loss adapters
"""
import dataclasses

import numpy as np
import pytest

from dissipkit.channels import NoiseKind, NoiseLocation, NoiseSpec
from dissipkit.circuits import build_vqe_block, circuit_unitary, dissipative_identity_params
from dissipkit.engine import (
    DvqeConfig,
    RecoveryConfig,
    TaskKind,
    dvqe_forward,
    make_loss,
    prepare_noisy_input,
    recovery_forward,
)
from dissipkit.exc import ContractViolationException
from dissipkit.hamiltonian import model_by_name
from dissipkit.optim import init_params, train
from dissipkit.states import fidelity_pure, plus_state, w_state
from tests.conftest import assert_density_matrix
from tests.fixtures.sample_configs import (
    get_small_dvqe_config,
    get_small_recovery_config,
    get_w_recovery_config,
)


class TestDvqeConfig:
    """Test DVQE configuration validation and parameter layout"""

    @pytest.mark.parametrize(
        "m,rounds,expected",
        [(1, 1, 48), (1, 3, 120), (3, 3, 156), (0, 0, 12)],
    )
    def test_param_count(self, m, rounds, expected):
        cfg = DvqeConfig(n=3, m=m, hamiltonian=model_by_name("H1", 3), rounds=rounds, vqe_layers=2)
        assert cfg.param_count == expected

    def test_ancilla_free_baseline_ignores_rounds(self):
        cfg = DvqeConfig(n=3, m=0, hamiltonian=model_by_name("H1", 3), rounds=3)
        assert cfg.rounds == 3
        assert cfg.active_rounds == 0
        assert cfg.param_count == 12

    def test_hamiltonian_size_checked(self):
        with pytest.raises(ContractViolationException):
            DvqeConfig(n=3, m=1, hamiltonian=model_by_name("H1", 2))

    @pytest.mark.parametrize(
        "overrides",
        [{"learning_rate": 0.0}, {"iterations": 0}, {"reset_q": 0.0}, {"vqe_layers": 0}, {"m": -1}],
    )
    def test_invalid_fields(self, overrides):
        with pytest.raises(ContractViolationException):
            get_small_dvqe_config(**overrides)


class TestRecoveryConfig:
    """Test recovery configuration validation"""

    def test_defaults(self):
        cfg = RecoveryConfig(target=w_state(3))
        assert (cfg.n, cfg.m, cfg.rounds) == (3, 3, 3)
        assert cfg.noise_prep == NoiseSpec(NoiseKind.DEPOLARIZING, 0.1, NoiseLocation.INPUT_ONLY)
        assert cfg.param_count == 108

    def test_prep_noise_must_be_input_only(self):
        with pytest.raises(ContractViolationException):
            get_small_recovery_config(noise_prep=NoiseSpec(NoiseKind.DEPOLARIZING, 0.1))

    @pytest.mark.parametrize("overrides", [{"m": 0}, {"rounds": 0}, {"reset_q": 1.5}])
    def test_invalid_fields(self, overrides):
        with pytest.raises(ContractViolationException):
            get_small_recovery_config(**overrides)


class TestDvqeForward:
    """Test the dissipative VQE forward pass"""

    def test_baseline_zero_angles(self, h1_three):
        cfg = DvqeConfig(n=3, m=0, hamiltonian=h1_three, rounds=0)
        energy, rho = dvqe_forward(cfg, np.zeros(cfg.param_count))
        assert energy == pytest.approx(0.9)
        assert rho.mat[0, 0] == pytest.approx(1.0)

    def test_baseline_matches_statevector(self, h1_three):
        cfg = DvqeConfig(n=3, m=0, hamiltonian=h1_three, rounds=0)
        theta = init_params(cfg.param_count, 4)
        psi = circuit_unitary(build_vqe_block(3, 2), theta)[:, 0]
        expected = float(np.real(psi.conj() @ h1_three.matrix @ psi))
        assert dvqe_forward(cfg, theta)[0] == pytest.approx(expected, abs=1e-10)

    def test_dissipative_state_is_valid(self, small_dvqe_config):
        energy, rho = dvqe_forward(small_dvqe_config, init_params(small_dvqe_config.param_count, 2))
        assert_density_matrix(rho)
        assert np.isfinite(energy)

    def test_noisy_forward(self, small_dvqe_config):
        cfg = dataclasses.replace(small_dvqe_config, noise=NoiseSpec(NoiseKind.AMPLITUDE_DAMPING, 0.05))
        _, rho = dvqe_forward(cfg, init_params(cfg.param_count, 2))
        assert_density_matrix(rho)

    def test_partial_reset_forward(self, small_dvqe_config):
        cfg = dataclasses.replace(small_dvqe_config, rounds=2, reset_q=0.5)
        _, rho = dvqe_forward(cfg, init_params(cfg.param_count, 3))
        assert_density_matrix(rho)

    def test_single_round_reset_probability_irrelevant(self, small_dvqe_config):
        theta = init_params(small_dvqe_config.param_count, 5)
        full = dvqe_forward(small_dvqe_config, theta)[0]
        partial = dvqe_forward(dataclasses.replace(small_dvqe_config, reset_q=0.5), theta)[0]
        assert partial == pytest.approx(full, abs=1e-10)

    def test_param_count_mismatch(self, small_dvqe_config):
        with pytest.raises(ContractViolationException):
            dvqe_forward(small_dvqe_config, np.zeros(3))

    def test_identity_dissipation_is_inert(self, small_dvqe_config):
        cfg = small_dvqe_config
        theta = init_params(cfg.param_count, 6)
        head = 2 * cfg.n * cfg.vqe_layers
        theta[2 * head:] = dissipative_identity_params(cfg.n, cfg.m)
        vqe = build_vqe_block(cfg.n, cfg.vqe_layers)
        u = circuit_unitary(vqe, theta[head:2 * head]) @ circuit_unitary(vqe, theta[:head])
        psi = u[:, 0]
        expected = float(np.real(psi.conj() @ cfg.hamiltonian.matrix @ psi))
        assert dvqe_forward(cfg, theta)[0] == pytest.approx(expected, abs=1e-10)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_noisy_energy_respects_ground_energy(self, small_dvqe_config, seed):
        cfg = dataclasses.replace(small_dvqe_config, noise=NoiseSpec(NoiseKind.DEPOLARIZING, 0.1))
        loss = make_loss("dvqe", cfg)
        assert loss(init_params(loss.param_count, seed)) >= loss.reference - 1e-10


class TestRecoveryForward:
    """Test the dissipative state-recovery forward pass"""

    def test_zero_angles_flip_plus(self):
        cfg = get_small_recovery_config()
        loss, rho = recovery_forward(cfg, np.zeros(cfg.param_count))
        # the mesh and its mirror multiply to Z⊗Z: |+⟩|0⟩ -> |−⟩|0⟩
        assert loss == pytest.approx(1.0)
        assert rho.mat[0, 1] == pytest.approx(-0.5)

    @pytest.mark.parametrize(
        "noise_prep",
        [NoiseSpec.none(), NoiseSpec(NoiseKind.DEPOLARIZING, 0.1, NoiseLocation.INPUT_ONLY)],
    )
    def test_identity_rounds_keep_input(self, noise_prep):
        cfg = get_w_recovery_config(m=1, rounds=2, noise_prep=noise_prep)
        theta = np.tile(dissipative_identity_params(cfg.n, cfg.m), cfg.rounds)
        loss, _ = recovery_forward(cfg, theta)
        assert 1.0 - loss == pytest.approx(make_loss("recovery", cfg).initial_metric, abs=1e-10)

    def test_noisy_input(self):
        rho = prepare_noisy_input(plus_state(1), NoiseSpec(NoiseKind.DEPOLARIZING, 0.3, NoiseLocation.INPUT_ONLY))
        assert fidelity_pure(rho, plus_state(1)) == pytest.approx(0.8)

    def test_w_recovery_state_is_valid(self):
        cfg = get_w_recovery_config(m=1, rounds=1)
        loss, rho = recovery_forward(cfg, init_params(cfg.param_count, 1))
        assert_density_matrix(rho)
        assert 0.0 <= loss <= 1.0


class TestRecoveryTraining:
    """Test short recovery trainings end to end"""

    def test_zero_noise_w_recovery_keeps_fidelity(self):
        cfg = get_w_recovery_config(m=1, rounds=1, noise_prep=NoiseSpec.none(), learning_rate=0.2, iterations=20)
        loss = make_loss("recovery", cfg)
        jitter = 0.01 * np.random.default_rng(7).standard_normal(loss.param_count)
        trace = train(loss, dissipative_identity_params(cfg.n, cfg.m) + jitter, cfg.learning_rate, cfg.iterations)
        assert loss.initial_metric == pytest.approx(1.0)
        assert trace.final_metric - loss.initial_metric >= -0.01

    def test_depolarized_input_is_pumped_toward_target(self):
        cfg = get_small_recovery_config(
            noise_prep=NoiseSpec(NoiseKind.DEPOLARIZING, 0.75, NoiseLocation.INPUT_ONLY),
            learning_rate=0.2,
            iterations=60,
        )
        loss = make_loss("recovery", cfg)
        trace = train(loss, init_params(loss.param_count, cfg.seed), cfg.learning_rate, cfg.iterations)
        # fully depolarized input: F_0 = 1/2
        assert loss.initial_metric == pytest.approx(0.5)
        assert trace.final_metric >= trace.initial_metric
        assert trace.final_metric > loss.initial_metric


class TestLossFunction:
    """Test the loss adapters handed to the optimizer"""

    def test_dvqe_loss(self, small_dvqe_config):
        loss = make_loss(TaskKind.DVQE, small_dvqe_config)
        assert loss.metric_name == "energy"
        assert loss.param_count == 26
        assert loss.reference == pytest.approx(-np.sqrt(1.36))
        energy = loss(init_params(loss.param_count, 1))
        assert loss.metrics(energy) == (energy, pytest.approx(energy - loss.reference))
        assert loss.initial_metric is None

    def test_loss_is_deterministic(self, small_dvqe_config):
        loss = make_loss("dvqe", small_dvqe_config)
        theta = init_params(loss.param_count, 9)
        assert loss(theta) == loss(theta)

    @pytest.mark.parametrize("task", ["dvqe", "recovery"])
    def test_loss_is_2pi_periodic(self, task, small_dvqe_config, small_recovery_config):
        loss = make_loss(task, small_dvqe_config if task == "dvqe" else small_recovery_config)
        theta = init_params(loss.param_count, 11)
        shifts = 2 * np.pi * np.random.default_rng(3).integers(-2, 3, loss.param_count)
        assert loss(theta + shifts) == pytest.approx(loss(theta), abs=1e-10)

    def test_recovery_loss(self, small_recovery_config):
        loss = make_loss("recovery", small_recovery_config)
        assert loss.metric_name == "fidelity"
        assert loss.reference == 0.0
        assert loss.initial_metric == pytest.approx(1.0)
        assert loss.metrics(0.25) == (0.75, 0.25)

    def test_w_input_fidelity(self):
        loss = make_loss("recovery", get_w_recovery_config())
        # independent depolarizing on each qubit of W(3)
        assert loss.initial_metric == pytest.approx(0.7411, abs=1e-3)

    def test_noisy_flags(self, small_dvqe_config):
        noisy = dataclasses.replace(small_dvqe_config, noise=NoiseSpec(NoiseKind.DEPOLARIZING, 0.01))
        assert not make_loss("dvqe", small_dvqe_config).is_noisy
        assert make_loss("dvqe", noisy).is_noisy

    def test_task_config_mismatch(self, small_recovery_config):
        with pytest.raises(ContractViolationException):
            make_loss(TaskKind.DVQE, small_recovery_config)

    def test_unknown_task(self, small_dvqe_config):
        with pytest.raises(ContractViolationException):
            make_loss("annealing", small_dvqe_config)
