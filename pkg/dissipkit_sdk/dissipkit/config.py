"""
dissipkit 설정 - TOML 실험 문서 파싱, 검증, 직렬화

실험 설정은 작업별 평면 섹션으로 이루어진 단일 TOML 문서입니다.

Document Layout
---------------

```toml
task = "recover"          # dvqe | recover | scan_ancilla | scan_rounds | scan_noise | eig | diag
output_dir = "runs/recovery_w"
seeds = [1, 2, 3]

[recover]
target = "w"              # w | plus | dressed_cluster
n = 3
m = 3
rounds = 3
learning_rate = 0.8
iterations = 100

[noise]                   # 복원 계열에서는 입력 준비 잡음 (input_only)
kind = "depolarizing"
p = 0.1
```

Task → Sections
---------------

| task                       | 필수/허용 섹션                                   |
|----------------------------|--------------------------------------------------|
| dvqe                       | dvqe, noise                                      |
| recover                    | recover, noise, run_noise                        |
| scan_ancilla/rounds/noise  | scan + scan.family 섹션 + noise (+ run_noise)    |
| diag                       | diag + diag.family 섹션 + noise (+ run_noise)    |
| eig                        | eig                                              |

Error Handling
--------------

- TOML 문법 오류와 값 타입 오류는 ConfigParseException (line / field 포함)
- 그 밖의 모든 불변식 위반(범위, 알 수 없는 키, 섹션 조합, 파일 존재)은
  한 번에 모아 ConfigValidationException으로 보고

Usage Examples
--------------

>>> from dissipkit.config import parse_config, serialize_config
>>> cfg = parse_config('task = "dvqe"\\n[dvqe]\\nn = 3\\nmodel = "H1"')
>>> cfg["dvqe"]["vqe_layers"], cfg["dvqe"]["rounds"], cfg["seeds"]
(2, 3, [1, 2, 3])
>>> parse_config(serialize_config(cfg)) == cfg
True
"""
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, TypedDict, Union, cast

import numpy as np
import toml
from typing_extensions import NotRequired

from .channels import NoiseKind, NoiseLocation, NoiseSpec
from .engine import DvqeConfig, RecoveryConfig, TaskConfig
from .exc import ConfigParseException, ConfigValidationException
from .hamiltonian import PauliHamiltonian, model_by_name, parse_pauli_text
from .logging import get_logger
from .states import PureState, dressed_cluster_state, plus_state, w_state

logger = get_logger(__name__)

TASKS = ("dvqe", "recover", "scan_ancilla", "scan_rounds", "scan_noise", "eig", "diag")
FAMILIES = ("dvqe", "recover")
MODELS = ("H1", "H2", "H3")
TARGETS = ("w", "plus", "dressed_cluster")
SCAN_KEY_BY_TASK = {"scan_ancilla": "m", "scan_rounds": "rounds", "scan_noise": "p"}
DEFAULT_SEEDS = [1, 2, 3]


class NoiseSection(TypedDict):
    kind: str
    p: float
    location: str


class DvqeSection(TypedDict):
    """
    [dvqe] 섹션

    model과 hamiltonian_file 중 정확히 하나가 정규화된 설정에 남습니다.
    """
    n: int
    m: int
    rounds: int
    vqe_layers: int
    model: NotRequired[str]
    hamiltonian_file: NotRequired[str]
    learning_rate: float
    iterations: int
    reset_q: float


class RecoverSection(TypedDict):
    target: str
    n: int
    m: int
    rounds: int
    cluster_depth: int
    cluster_angle: float
    learning_rate: float
    iterations: int
    reset_q: float


class ScanSection(TypedDict):
    family: str
    values: List[Union[int, float]]


class EigSection(TypedDict):
    n: int
    model: NotRequired[str]
    hamiltonian_file: NotRequired[str]


class DiagSection(TypedDict):
    family: str
    samples: int
    qubit_counts: List[int]
    eps_gap: float


class RunConfig(TypedDict):
    """
    정규화된 실험 설정

    Attributes
    ----------
    task : str
    output_dir : str
        DISSIPKIT_OUTPUT_ROOT가 설정되면 상대 경로 앞에 붙음
    seeds : List[int]
        비어 있지 않음
    log_every : int
        train INFO 로그 간격
    gradient_workers : int
        그래디언트 성분 병렬 스레드 수
    scan_workers : int
        스캔 (variant, seed) 병렬 스레드 수
    """
    task: str
    output_dir: str
    seeds: List[int]
    log_every: int
    gradient_workers: int
    scan_workers: int
    dvqe: NotRequired[DvqeSection]
    recover: NotRequired[RecoverSection]
    noise: NotRequired[NoiseSection]
    run_noise: NotRequired[NoiseSection]
    scan: NotRequired[ScanSection]
    eig: NotRequired[EigSection]
    diag: NotRequired[DiagSection]


TOP_LEVEL_DEFAULTS: Dict[str, Any] = {
    "output_dir": "runs",
    "log_every": 10,
    "gradient_workers": 1,
    "scan_workers": 1,
}

SECTION_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "dvqe": {
        "n": 3,
        "m": 1,
        "rounds": 3,
        "vqe_layers": 2,
        "learning_rate": 0.2,
        "iterations": 200,
        "reset_q": 1.0,
    },
    "recover": {
        "target": "w",
        "n": 3,
        "m": 3,
        "rounds": 3,
        "cluster_depth": 3,
        "cluster_angle": math.pi / 4.0,
        "learning_rate": 0.8,
        "iterations": 100,
        "reset_q": 1.0,
    },
    "scan": {"family": "dvqe"},
    "eig": {"n": 3},
    "diag": {"family": "dvqe", "samples": 10, "qubit_counts": [2, 3], "eps_gap": 1e-12},
}

NOISE_DEFAULTS = {
    "dvqe": {"kind": "none", "p": 0.0, "location": "fully_noisy"},
    "recover": {"kind": "depolarizing", "p": 0.1, "location": "input_only"},
}
RUN_NOISE_DEFAULTS = {"kind": "none", "p": 0.0, "location": "fully_noisy"}

FIELD_TYPES: Dict[str, Dict[str, type]] = {
    "": {
        "task": str,
        "output_dir": str,
        "seeds": list,
        "log_every": int,
        "gradient_workers": int,
        "scan_workers": int,
    },
    "dvqe": {
        "n": int,
        "m": int,
        "rounds": int,
        "vqe_layers": int,
        "model": str,
        "hamiltonian_file": str,
        "learning_rate": float,
        "iterations": int,
        "reset_q": float,
    },
    "recover": {
        "target": str,
        "n": int,
        "m": int,
        "rounds": int,
        "cluster_depth": int,
        "cluster_angle": float,
        "learning_rate": float,
        "iterations": int,
        "reset_q": float,
    },
    "noise": {"kind": str, "p": float, "location": str},
    "run_noise": {"kind": str, "p": float, "location": str},
    "scan": {"family": str, "values": list},
    "eig": {"n": int, "model": str, "hamiltonian_file": str},
    "diag": {"family": str, "samples": int, "qubit_counts": list, "eps_gap": float},
}


def _field_name(section: str, key: str) -> str:
    return f"{section}.{key}" if section else key


def _coerce(section: str, key: str, value: Any) -> Any:
    """
    값을 선언된 타입으로 변환 (int → float 허용, bool은 숫자로 인정하지 않음)

    Raises
    ------
    ConfigParseException
        타입 불일치
    """
    expected = FIELD_TYPES[section][key]
    name = _field_name(section, key)
    if expected is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if expected is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if expected in (str, list) and isinstance(value, expected):
        return list(value) if expected is list else value
    raise ConfigParseException(
        f"expected {expected.__name__}, got {type(value).__name__} ({value!r})", field=name
    )


def _section(raw: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = raw.get(name, {})
    return value if isinstance(value, dict) else {}


def _family(task: str, raw: Dict[str, Any]) -> Optional[str]:
    if task in FAMILIES:
        return task
    if task in SCAN_KEY_BY_TASK:
        return _section(raw, "scan").get("family", SECTION_DEFAULTS["scan"]["family"])
    if task == "diag":
        return _section(raw, "diag").get("family", SECTION_DEFAULTS["diag"]["family"])
    return None


def _allowed_sections(task: str, family: Optional[str]) -> Tuple[str, ...]:
    sections: List[str] = []
    if task in SCAN_KEY_BY_TASK:
        sections.append("scan")
    if task == "diag":
        sections.append("diag")
    if task == "eig":
        sections.append("eig")
    if family in FAMILIES:
        sections.extend([family, "noise"])
        if family == "recover":
            sections.append("run_noise")
    return tuple(sections)


def normalize_section(section: str, raw: Dict[str, Any], defaults: Dict[str, Any], errors: List[str]) -> Dict[str, Any]:
    """
    섹션의 알 수 없는 키를 기록하고 타입 변환 후 기본값을 채움

    defaults에 없는 선택 키(model, hamiltonian_file)는 값이 있을 때만 남습니다.
    """
    known = FIELD_TYPES[section]
    normalized: Dict[str, Any] = {}
    for key, value in raw.items():
        if key not in known:
            errors.append(f"{_field_name(section, key)}: unknown key")
            continue
        normalized[key] = _coerce(section, key, value)
    for key, value in defaults.items():
        normalized.setdefault(key, list(value) if isinstance(value, list) else value)
    return normalized


def _check(errors: List[str], condition: bool, field: str, message: str) -> None:
    if not condition:
        errors.append(f"{field}: {message}")


def _resolve(path: str, base_dir: Optional[Path]) -> Path:
    candidate = Path(path)
    if not candidate.is_absolute() and base_dir is not None:
        candidate = base_dir / candidate
    return candidate


def _validate_training(section: str, s: Dict[str, Any], errors: List[str]) -> None:
    _check(errors, s["learning_rate"] > 0.0, f"{section}.learning_rate", f"must be > 0, got {s['learning_rate']}")
    _check(errors, s["iterations"] >= 1, f"{section}.iterations", f"must be >= 1, got {s['iterations']}")
    _check(errors, 0.0 < s["reset_q"] <= 1.0, f"{section}.reset_q", f"must lie in (0, 1], got {s['reset_q']}")


def _validate_hamiltonian_source(section: str, s: Dict[str, Any], base_dir: Optional[Path], errors: List[str]) -> None:
    if "model" in s and "hamiltonian_file" in s:
        errors.append(f"{section}: give either model or hamiltonian_file, not both")
        return
    if "hamiltonian_file" in s:
        path = _resolve(s["hamiltonian_file"], base_dir)
        if not path.is_file():
            errors.append(f"{section}.hamiltonian_file: file '{path}' does not exist")
            return
        try:
            h = parse_pauli_text(path.read_text(encoding="utf-8"))
        except ConfigParseException as error:
            errors.append(f"{section}.hamiltonian_file: {error}")
            return
        _check(errors, h.qubit_count == s["n"], f"{section}.n",
               f"must match the {h.qubit_count}-qubit Hamiltonian file, got {s['n']}")
        return
    s.setdefault("model", "H1")
    _check(errors, s["model"].upper() in MODELS, f"{section}.model", f"must be one of {MODELS}, got '{s['model']}'")
    _check(errors, s["n"] >= 2, f"{section}.n", f"benchmark models need n >= 2, got {s['n']}")


def _validate_dvqe(s: Dict[str, Any], base_dir: Optional[Path], errors: List[str]) -> None:
    _check(errors, s["n"] >= 1, "dvqe.n", f"must be >= 1, got {s['n']}")
    _check(errors, s["m"] >= 0, "dvqe.m", f"must be >= 0, got {s['m']}")
    _check(errors, s["rounds"] >= 0, "dvqe.rounds", f"must be >= 0, got {s['rounds']}")
    _check(errors, s["vqe_layers"] >= 1, "dvqe.vqe_layers", f"must be >= 1, got {s['vqe_layers']}")
    _validate_training("dvqe", s, errors)
    _validate_hamiltonian_source("dvqe", s, base_dir, errors)


def _validate_recover(s: Dict[str, Any], errors: List[str]) -> None:
    _check(errors, s["target"] in TARGETS, "recover.target", f"must be one of {TARGETS}, got '{s['target']}'")
    min_n = 1 if s["target"] == "plus" else 2
    _check(errors, s["n"] >= min_n, "recover.n", f"must be >= {min_n} for target '{s['target']}', got {s['n']}")
    _check(errors, s["m"] >= 1, "recover.m", f"must be >= 1, got {s['m']}")
    _check(errors, s["rounds"] >= 1, "recover.rounds", f"must be >= 1, got {s['rounds']}")
    _check(errors, s["cluster_depth"] >= 0, "recover.cluster_depth", f"must be >= 0, got {s['cluster_depth']}")
    _validate_training("recover", s, errors)


def _validate_noise(section: str, s: Dict[str, Any], errors: List[str], *, input_only: bool) -> None:
    kinds = tuple(k.value for k in NoiseKind)
    locations = tuple(loc.value for loc in NoiseLocation)
    _check(errors, s["kind"] in kinds, f"{section}.kind", f"must be one of {kinds}, got '{s['kind']}'")
    _check(errors, s["location"] in locations, f"{section}.location",
           f"must be one of {locations}, got '{s['location']}'")
    _check(errors, 0.0 <= s["p"] <= 1.0, f"{section}.p", f"must lie in [0, 1], got {s['p']}")
    if input_only:
        _check(errors, s["location"] == "input_only", f"{section}.location",
               "recovery input noise must be 'input_only'")


def _validate_scan(task: str, s: Dict[str, Any], cfg: Dict[str, Any], errors: List[str]) -> None:
    family = s["family"]
    values = s.get("values")
    if values is None:
        errors.append("scan.values: required for scan tasks")
        return
    key = SCAN_KEY_BY_TASK[task]
    numeric = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values)
    _check(errors, bool(values) and numeric, "scan.values", "must be a non-empty list of numbers")
    if not values or not numeric:
        return
    _check(errors, all(b > a for a, b in zip(values, values[1:])), "scan.values", "must be strictly increasing")
    if key in ("m", "rounds"):
        lowest = 1 if family == "recover" else 0
        _check(errors, all(isinstance(v, int) and v >= lowest for v in values), "scan.values",
               f"{key} values must be integers >= {lowest}")
    else:
        s["values"] = [float(v) for v in values]
        _check(errors, all(0.0 <= v <= 1.0 for v in s["values"]), "scan.values", "p values must lie in [0, 1]")
        noise = cfg.get("noise", {})
        _check(errors, noise.get("kind") != "none", "noise.kind", "a noise scan needs a noise kind other than 'none'")


def _validate_diag(s: Dict[str, Any], errors: List[str]) -> None:
    _check(errors, s["samples"] >= 2, "diag.samples", f"must be >= 2, got {s['samples']}")
    counts = s["qubit_counts"]
    _check(errors, all(isinstance(n, int) and not isinstance(n, bool) and n >= 2 for n in counts),
           "diag.qubit_counts", "must be integers >= 2")
    _check(errors, s["eps_gap"] > 0.0, "diag.eps_gap", f"must be > 0, got {s['eps_gap']}")


def normalize_config(raw: Dict[str, Any], *, base_dir: Optional[Path] = None) -> RunConfig:
    """
    파싱된 문서를 검증하고 기본값을 채운 RunConfig로 정규화

    Parameters
    ----------
    raw : Dict[str, Any]
        toml.loads 결과
    base_dir : Path, optional
        상대 hamiltonian_file 경로의 기준 디렉터리

    Raises
    ------
    ConfigParseException
        값 타입 오류 (field 포함)
    ConfigValidationException
        위반된 모든 불변식 목록
    """
    errors: List[str] = []
    task = raw.get("task")
    if not isinstance(task, str):
        raise ConfigParseException("missing or non-string 'task'", field="task")
    if task not in TASKS:
        raise ConfigValidationException([f"task: must be one of {TASKS}, got '{task}'"])

    top_raw = {k: v for k, v in raw.items() if not isinstance(v, dict)}
    cfg: Dict[str, Any] = normalize_section("", top_raw, {**TOP_LEVEL_DEFAULTS, "seeds": DEFAULT_SEEDS}, errors)
    seeds = cfg["seeds"]
    _check(errors, bool(seeds), "seeds", "must be non-empty")
    _check(errors, all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in seeds), "seeds",
           "must be non-negative integers")
    _check(errors, len(set(seeds)) == len(seeds), "seeds", "must be distinct")
    for key in ("log_every", "gradient_workers", "scan_workers"):
        _check(errors, cfg[key] >= 1, key, f"must be >= 1, got {cfg[key]}")

    family = _family(task, raw)
    if family is not None and family not in FAMILIES:
        errors.append(f"{'scan' if task in SCAN_KEY_BY_TASK else 'diag'}.family: must be one of {FAMILIES}, got '{family}'")
        family = None
    allowed = _allowed_sections(task, family)
    for name, value in raw.items():
        if isinstance(value, dict) and name not in allowed:
            errors.append(f"[{name}]: section not used by task '{task}'" if name in FIELD_TYPES
                          else f"[{name}]: unknown section")

    for name in allowed:
        if name == "noise":
            defaults = NOISE_DEFAULTS[family]
        elif name == "run_noise":
            defaults = RUN_NOISE_DEFAULTS
        else:
            defaults = SECTION_DEFAULTS[name]
        cfg[name] = normalize_section(name, _section(raw, name), defaults, errors)

    if "dvqe" in cfg:
        _validate_dvqe(cfg["dvqe"], base_dir, errors)
    if "recover" in cfg:
        _validate_recover(cfg["recover"], errors)
    if "noise" in cfg:
        _validate_noise("noise", cfg["noise"], errors, input_only=family == "recover")
    if "run_noise" in cfg:
        _validate_noise("run_noise", cfg["run_noise"], errors, input_only=False)
    if "scan" in cfg:
        _validate_scan(task, cfg["scan"], cfg, errors)
    if "diag" in cfg:
        _validate_diag(cfg["diag"], errors)
    if "eig" in cfg:
        _validate_hamiltonian_source("eig", cfg["eig"], base_dir, errors)

    if errors:
        raise ConfigValidationException(errors)
    return cast(RunConfig, cfg)


def parse_config(text: str, *, base_dir: Optional[Path] = None) -> RunConfig:
    """
    TOML 텍스트를 검증된 RunConfig로 파싱

    Raises
    ------
    ConfigParseException
        TOML 문법 오류 (line 포함) 또는 값 타입 오류 (field 포함)
    ConfigValidationException
        불변식 위반 (모든 항목)
    """
    try:
        raw = toml.loads(text)
    except toml.TomlDecodeError as error:
        raise ConfigParseException(error.msg, line=error.lineno) from error
    return normalize_config(raw, base_dir=base_dir)


def load_config(path: Union[str, Path]) -> RunConfig:
    """파일에서 설정을 읽음 (상대 경로는 설정 파일 위치 기준)"""
    path = Path(path)
    if not path.is_file():
        raise ConfigValidationException([f"config file '{path}' does not exist"])
    logger.debug("Loading config from %s", path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)


def serialize_config(cfg: RunConfig) -> str:
    """parse_config(serialize_config(cfg)) == cfg 를 만족하는 TOML 텍스트"""
    return toml.dumps(cast(Dict[str, Any], cfg))


def task_family(cfg: RunConfig) -> Optional[str]:
    """설정이 학습하는 작업 계열 ('dvqe' / 'recover' / None)"""
    return _family(cfg["task"], cast(Dict[str, Any], cfg))


def build_noise(section: NoiseSection) -> NoiseSpec:
    return NoiseSpec(NoiseKind(section["kind"]), section["p"], NoiseLocation(section["location"]))


def build_hamiltonian(section: Union[DvqeSection, EigSection], base_dir: Optional[Path] = None) -> PauliHamiltonian:
    if "hamiltonian_file" in section:
        path = _resolve(section["hamiltonian_file"], base_dir)
        return parse_pauli_text(path.read_text(encoding="utf-8"))
    return model_by_name(section.get("model", "H1"), section["n"])


TARGET_BUILDERS: Dict[str, Callable[[RecoverSection], PureState]] = {
    "w": lambda s: w_state(s["n"]),
    "plus": lambda s: plus_state(s["n"]),
    "dressed_cluster": lambda s: dressed_cluster_state(
        s["n"], s["cluster_depth"], np.full((s["cluster_depth"], s["n"]), s["cluster_angle"])
    ),
}


def build_target(section: RecoverSection) -> PureState:
    return TARGET_BUILDERS[section["target"]](section)


def build_task_config(cfg: RunConfig, seed: int, *, base_dir: Optional[Path] = None) -> TaskConfig:
    """
    정규화된 설정에서 시드 하나의 DvqeConfig / RecoveryConfig 생성

    Raises
    ------
    ConfigValidationException
        설정에 학습 작업 계열이 없는 경우 (eig)
    """
    family = task_family(cfg)
    if family == "dvqe":
        s = cfg["dvqe"]
        return DvqeConfig(
            n=s["n"],
            m=s["m"],
            hamiltonian=build_hamiltonian(s, base_dir),
            rounds=s["rounds"],
            vqe_layers=s["vqe_layers"],
            noise=build_noise(cfg["noise"]),
            seed=seed,
            learning_rate=s["learning_rate"],
            iterations=s["iterations"],
            reset_q=s["reset_q"],
        )
    if family == "recover":
        s = cfg["recover"]
        return RecoveryConfig(
            target=build_target(s),
            m=s["m"],
            rounds=s["rounds"],
            noise_prep=build_noise(cfg["noise"]),
            noise_run=build_noise(cfg["run_noise"]),
            seed=seed,
            learning_rate=s["learning_rate"],
            iterations=s["iterations"],
            reset_q=s["reset_q"],
        )
    raise ConfigValidationException([f"task: '{cfg['task']}' does not train a model"])
