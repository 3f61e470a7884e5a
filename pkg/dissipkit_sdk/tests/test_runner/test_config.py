"""
Test experiment config parsing, normalization and task-config construction
"""
import pytest

from dissipkit.channels import NoiseKind, NoiseLocation
from dissipkit.config import (
    build_task_config,
    load_config,
    parse_config,
    serialize_config,
    task_family,
)
from dissipkit.engine import DvqeConfig, RecoveryConfig
from dissipkit.exc import ConfigParseException, ConfigValidationException
from dissipkit.hamiltonian import model_by_name
from tests.fixtures.sample_configs import (
    MINIMAL_DVQE_TOML,
    RECOVERY_TARGETS_TOML,
    get_eig_toml,
    get_tiny_diag_toml,
    get_tiny_scan_toml,
)


def validation_errors(text: str, **kwargs):
    with pytest.raises(ConfigValidationException) as exc_info:
        parse_config(text, **kwargs)
    return exc_info.value.errors


class TestParseConfig:
    """Test parsing and default filling"""

    def test_minimal_dvqe_defaults(self):
        cfg = parse_config(MINIMAL_DVQE_TOML)
        assert cfg["task"] == "dvqe"
        assert cfg["seeds"] == [1, 2, 3]
        assert cfg["output_dir"] == "runs"
        assert cfg["dvqe"]["m"] == 1
        assert cfg["dvqe"]["rounds"] == 3
        assert cfg["dvqe"]["learning_rate"] == 0.2
        assert cfg["noise"]["kind"] == "none"

    def test_recovery_defaults(self):
        cfg = parse_config('task = "recover"\n')
        assert cfg["recover"]["target"] == "w"
        assert cfg["recover"]["learning_rate"] == 0.8
        assert cfg["noise"] == {"kind": "depolarizing", "p": 0.1, "location": "input_only"}
        assert cfg["run_noise"]["kind"] == "none"

    def test_int_accepted_for_float(self):
        cfg = parse_config('task = "dvqe"\n[dvqe]\nlearning_rate = 1\n')
        assert cfg["dvqe"]["learning_rate"] == 1.0
        assert isinstance(cfg["dvqe"]["learning_rate"], float)

    def test_serialize_round_trip(self):
        for text in (MINIMAL_DVQE_TOML, RECOVERY_TARGETS_TOML, get_tiny_scan_toml(), get_tiny_diag_toml(), get_eig_toml()):
            cfg = parse_config(text)
            assert parse_config(serialize_config(cfg)) == cfg

    def test_toml_syntax_error_has_line(self):
        with pytest.raises(ConfigParseException) as exc_info:
            parse_config('task = "dvqe"\n[dvqe\n')
        assert exc_info.value.line is not None

    def test_type_error_names_field(self):
        with pytest.raises(ConfigParseException) as exc_info:
            parse_config('task = "dvqe"\n[dvqe]\nn = "three"\n')
        assert exc_info.value.field == "dvqe.n"

    def test_bool_is_not_a_number(self):
        with pytest.raises(ConfigParseException):
            parse_config('task = "dvqe"\n[dvqe]\niterations = true\n')

    def test_missing_task(self):
        with pytest.raises(ConfigParseException):
            parse_config("[dvqe]\nn = 3\n")


class TestValidation:
    """Test that every violated invariant is reported with its field"""

    def test_unknown_task(self):
        assert "task" in validation_errors('task = "anneal"\n')[0]

    def test_collects_all_errors(self):
        errors = validation_errors('task = "dvqe"\n[dvqe]\nlearning_rate = -1.0\niterations = 0\n')
        assert any(e.startswith("dvqe.learning_rate") for e in errors)
        assert any(e.startswith("dvqe.iterations") for e in errors)

    def test_unknown_key(self):
        assert any("dvqe.depth" in e for e in validation_errors('task = "dvqe"\n[dvqe]\ndepth = 2\n'))

    def test_unused_section(self):
        errors = validation_errors('task = "dvqe"\n[recover]\nn = 3\n')
        assert any("[recover]" in e for e in errors)

    def test_recovery_noise_must_be_input_only(self):
        errors = validation_errors('task = "recover"\n[noise]\nlocation = "fully_noisy"\n')
        assert any(e.startswith("noise.location") for e in errors)

    def test_noise_strength_range(self):
        errors = validation_errors('task = "dvqe"\n[noise]\nkind = "bit_flip"\np = 1.5\n')
        assert any(e.startswith("noise.p") for e in errors)

    def test_scan_values_increasing(self):
        errors = validation_errors('task = "scan_ancilla"\n[scan]\nvalues = [3, 2]\n')
        assert any("strictly increasing" in e for e in errors)

    def test_scan_values_required(self):
        assert any(e.startswith("scan.values") for e in validation_errors('task = "scan_rounds"\n'))

    def test_recovery_ancilla_scan_starts_at_one(self):
        errors = validation_errors('task = "scan_ancilla"\n[scan]\nfamily = "recover"\nvalues = [0, 1]\n')
        assert any(e.startswith("scan.values") for e in errors)

    def test_noise_scan_needs_noise_kind(self):
        errors = validation_errors('task = "scan_noise"\n[scan]\nvalues = [0.01, 0.05]\n')
        assert any(e.startswith("noise.kind") for e in errors)

    def test_duplicate_seeds(self):
        assert any(e.startswith("seeds") for e in validation_errors('task = "dvqe"\nseeds = [1, 1]\n'))

    def test_model_and_file_exclusive(self, hamiltonian_file):
        text = f'task = "eig"\n[eig]\nn = 2\nmodel = "H1"\nhamiltonian_file = "{hamiltonian_file}"\n'
        assert any("either model or hamiltonian_file" in e for e in validation_errors(text))

    def test_missing_hamiltonian_file(self, tmp_path):
        errors = validation_errors('task = "eig"\n[eig]\nn = 2\nhamiltonian_file = "nope.txt"\n', base_dir=tmp_path)
        assert any("does not exist" in e for e in errors)

    def test_hamiltonian_file_size_must_match(self, hamiltonian_file):
        errors = validation_errors(f'task = "dvqe"\n[dvqe]\nn = 3\nhamiltonian_file = "{hamiltonian_file}"\n')
        assert any(e.startswith("dvqe.n") for e in errors)

    def test_diag_samples(self):
        assert any(e.startswith("diag.samples") for e in validation_errors('task = "diag"\n[diag]\nsamples = 1\n'))


class TestLoadConfig:
    """Test reading configs from disk"""

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigValidationException):
            load_config(tmp_path / "missing.toml")

    def test_relative_hamiltonian_file(self, tmp_path, hamiltonian_file):
        path = tmp_path / "eig.toml"
        path.write_text(f'task = "eig"\n[eig]\nn = 2\nhamiltonian_file = "{hamiltonian_file.name}"\n', encoding="utf-8")
        assert load_config(path)["eig"]["hamiltonian_file"] == hamiltonian_file.name


class TestBuildTaskConfig:
    """Test turning normalized configs into task configs"""

    def test_dvqe(self):
        cfg = parse_config(MINIMAL_DVQE_TOML)
        task_cfg = build_task_config(cfg, 5)
        assert isinstance(task_cfg, DvqeConfig)
        assert task_cfg.seed == 5
        assert task_cfg.hamiltonian == model_by_name("H1", 3)
        assert task_cfg.noise.kind is NoiseKind.NONE

    def test_recovery(self):
        cfg = parse_config(RECOVERY_TARGETS_TOML)
        task_cfg = build_task_config(cfg, 2)
        assert isinstance(task_cfg, RecoveryConfig)
        assert task_cfg.n == 3
        assert task_cfg.noise_prep.location is NoiseLocation.INPUT_ONLY
        assert task_cfg.iterations == 100

    def test_dressed_cluster_target(self):
        cfg = parse_config('task = "recover"\n[recover]\ntarget = "dressed_cluster"\nn = 2\ncluster_depth = 1\n')
        assert build_task_config(cfg, 1).target.qubit_count == 2

    def test_hamiltonian_file(self, hamiltonian_file):
        cfg = parse_config(f'task = "dvqe"\n[dvqe]\nn = 2\nhamiltonian_file = "{hamiltonian_file}"\n')
        assert build_task_config(cfg, 1).hamiltonian.qubit_count == 2

    def test_scan_family(self):
        cfg = parse_config(get_tiny_scan_toml())
        assert task_family(cfg) == "recover"
        assert isinstance(build_task_config(cfg, 1), RecoveryConfig)

    def test_eig_has_no_task_config(self):
        cfg = parse_config(get_eig_toml())
        assert task_family(cfg) is None
        with pytest.raises(ConfigValidationException):
            build_task_config(cfg, 1)
