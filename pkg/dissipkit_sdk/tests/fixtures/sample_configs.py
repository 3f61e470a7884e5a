"""
Sample experiment configs for testing

Provides TOML documents and small task configs that train in well under a second.
"""
from dissipkit.channels import NoiseKind, NoiseLocation, NoiseSpec
from dissipkit.engine import DvqeConfig, RecoveryConfig
from dissipkit.hamiltonian import model_by_name
from dissipkit.states import plus_state, w_state

MINIMAL_DVQE_TOML = """\
task = "dvqe"

[dvqe]
n = 3
model = "H1"
"""

RECOVERY_TARGETS_TOML = """\
task = "recover"
output_dir = "runs/recovery"
seeds = [1, 2, 3]

[recover]
target = "w"
n = 3
m = 3
rounds = 3
learning_rate = 0.8
iterations = 100

[noise]
kind = "depolarizing"
p = 0.1
location = "input_only"
"""


def get_tiny_dvqe_toml(output_dir: str = "out", iterations: int = 1) -> str:
    """Two-qubit H1 run with one ancilla and one round"""
    return f"""\
task = "dvqe"
output_dir = "{output_dir}"
seeds = [1]

[dvqe]
n = 2
m = 1
rounds = 1
vqe_layers = 1
model = "H1"
iterations = {iterations}
"""


def get_tiny_scan_toml(output_dir: str = "out") -> str:
    """Ancilla scan on single-qubit |+⟩ recovery"""
    return f"""\
task = "scan_ancilla"
output_dir = "{output_dir}"
seeds = [1, 2, 3]

[scan]
family = "recover"
values = [1, 2, 3]

[recover]
target = "plus"
n = 1
rounds = 1
iterations = 1
"""


def get_tiny_diag_toml(output_dir: str = "out") -> str:
    return f"""\
task = "diag"
output_dir = "{output_dir}"
seeds = [1]

[diag]
family = "dvqe"
samples = 2
qubit_counts = [2]

[dvqe]
n = 2
m = 1
rounds = 1
vqe_layers = 1
model = "H1"
iterations = 2
"""


def get_eig_toml(model: str = "H2", n: int = 3, output_dir: str = "out") -> str:
    return f"""\
task = "eig"
output_dir = "{output_dir}"

[eig]
n = {n}
model = "{model}"
"""


def get_small_dvqe_config(**overrides) -> DvqeConfig:
    params = dict(n=2, m=1, hamiltonian=model_by_name("H1", 2), rounds=1, vqe_layers=1, iterations=3)
    params.update(overrides)
    return DvqeConfig(**params)


def get_small_recovery_config(**overrides) -> RecoveryConfig:
    params = dict(target=plus_state(1), m=1, rounds=1, noise_prep=NoiseSpec.none(), iterations=3)
    params.update(overrides)
    return RecoveryConfig(**params)


def get_w_recovery_config(**overrides) -> RecoveryConfig:
    params = dict(
        target=w_state(3),
        m=3,
        rounds=3,
        noise_prep=NoiseSpec(NoiseKind.DEPOLARIZING, 0.1, NoiseLocation.INPUT_ONLY),
    )
    params.update(overrides)
    return RecoveryConfig(**params)
