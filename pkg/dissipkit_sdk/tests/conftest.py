"""
pytest configuration and shared fixtures

This file provides common fixtures used across all tests.
"""
import numpy as np
import pytest

# Import fixture modules
from tests.fixtures.sample_states import (
    get_bell_projector,
    get_maximally_mixed,
    get_random_density_matrix,
    get_sample_targets,
)
from tests.fixtures.sample_hamiltonians import (
    SAMPLE_HAMILTONIAN_TEXT,
    get_h1,
    get_h3,
)
from tests.fixtures.sample_configs import (
    get_small_dvqe_config,
    get_small_recovery_config,
    get_tiny_dvqe_toml,
)
from tests.fixtures.sample_traces import get_bowl_trace, rotation_z_loss


# ===== State Fixtures =====

@pytest.fixture
def bell_state():
    """(|00⟩ + |11⟩)/√2 projector"""
    return get_bell_projector()


@pytest.fixture
def mixed_two_qubit():
    """I/4"""
    return get_maximally_mixed(2)


@pytest.fixture
def random_rho():
    """Full-rank random two-qubit density matrix"""
    return get_random_density_matrix(2)


@pytest.fixture
def sample_targets():
    """W, plus and two-qubit plus recovery targets"""
    return get_sample_targets()


@pytest.fixture
def rng():
    """Seeded generator for reproducible random inputs"""
    return np.random.default_rng(1234)


# ===== Hamiltonian Fixtures =====

@pytest.fixture
def h1_three():
    """Transverse-field Ising H1 on 3 qubits"""
    return get_h1(3)


@pytest.fixture
def h3_two():
    """XXZ H3 on 2 qubits (E0 = -2.3)"""
    return get_h3(2)


@pytest.fixture
def hamiltonian_file(tmp_path):
    """Pauli-string Hamiltonian file on disk"""
    path = tmp_path / "ising_2.txt"
    path.write_text(SAMPLE_HAMILTONIAN_TEXT, encoding="utf-8")
    return path


# ===== Task Config Fixtures =====

@pytest.fixture
def small_dvqe_config():
    """n=2, m=1, T=1, L=1 DVQE config (26 parameters)"""
    return get_small_dvqe_config()


@pytest.fixture
def small_recovery_config():
    """Single-qubit |+⟩ recovery with one ancilla and one round"""
    return get_small_recovery_config()


@pytest.fixture
def tiny_dvqe_config_file(tmp_path):
    """TOML config file for a one-iteration DVQE run"""
    path = tmp_path / "tiny_dvqe.toml"
    path.write_text(get_tiny_dvqe_toml(output_dir=str(tmp_path / "out")), encoding="utf-8")
    return path


# ===== Trace Fixtures =====

@pytest.fixture
def bowl_trace():
    """Ten gradient-descent steps on ‖θ‖² with η = 0.25"""
    return get_bowl_trace()


@pytest.fixture
def single_rotation_loss():
    """⟨Z⟩ after RY(θ)|0⟩, i.e. cos θ"""
    return rotation_z_loss


# ===== Environment Fixtures =====

@pytest.fixture(autouse=True)
def clean_output_root(monkeypatch):
    """Keep DISSIPKIT_OUTPUT_ROOT from leaking into tests"""
    monkeypatch.delenv("DISSIPKIT_OUTPUT_ROOT", raising=False)


# ===== Pytest Hooks =====

def pytest_configure(config):
    """Configure pytest"""
    config.addinivalue_line(
        "markers", "unit: 단위 테스트"
    )
    config.addinivalue_line(
        "markers", "integration: 통합 테스트"
    )
    config.addinivalue_line(
        "markers", "slow: 느린 테스트"
    )


def pytest_collection_modifyitems(config, items):
    """Modify test collection"""
    for item in items:
        # Auto-mark integration tests, everything else is a unit test
        if "integration" in str(item.fspath):
            item.add_marker(pytest.mark.integration)
        else:
            item.add_marker(pytest.mark.unit)


# ===== Helper Functions =====

def assert_density_matrix(rho, tol: float = 1e-10):
    """Helper to assert Hermitian, unit-trace, positive semidefinite"""
    mat = rho.mat
    assert np.allclose(mat, mat.conj().T, atol=tol)
    assert abs(np.trace(mat) - 1.0) < tol
    assert np.linalg.eigvalsh((mat + mat.conj().T) / 2)[0] > -1e-9


def assert_matrix_close(actual, expected, atol: float = 1e-10):
    """Helper to compare complex matrices elementwise"""
    np.testing.assert_allclose(np.asarray(actual), np.asarray(expected), atol=atol, rtol=0)
