"""
dissipkit 진단 - 최적화 이론의 경험적 모니터와 자원 스캔

학습 궤적에서 다음 양을 보고합니다. 어느 것도 합격/불합격 판정이
아니며, 결과는 설정과 시드의 결정적 함수입니다.

- **PL 비율**: r_t = ½‖∇C(θ_t)‖² / max(C(θ_t) − C*, ε_gap). min r_t가 μ의
  경험적 하한 추정치
- **하강 만족도**: loss_t − loss_{t+1} ≥ (η/2)‖∇C_t‖² 를 만족한 스텝 비율
  (η ≤ 1/β 전제는 검증하지 않음)
- **초기 그래디언트 노름**: 무작위 초기화에서 ‖∇C‖²의 평균과 분산
- **파라미터 스캔**: 안실라 수 m, 라운드 수, 잡음 세기 p에 따른 최종 지표와
  이득 (복원: F − F_0, DVQE: E_init − E_final)

```mermaid
flowchart TD
    C[TaskConfig] -->|variant × seed| TR[train]
    TR --> TT[TrainingTrace]
    TT --> PL[pl_ratio]
    TT --> DC[descent_check]
    TT --> SC[SaturationScan]
    SC --> SP[saturation_point]
```

See Also
--------
dissipkit.optim.train : monitors 인자로 make_pl_monitor 사용
dissipkit.cli : 보고서를 CSV/JSON으로 기록
"""
import dataclasses
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from .channels import NoiseSpec
from .engine import DvqeConfig, LossFunction, RecoveryConfig, TaskConfig, TaskKind, make_loss
from .exc import ContractViolationException, RunExecutionException
from .hamiltonian import model_by_name
from .logging import get_logger
from .optim import GradientFn, Monitor, ScalarLoss, TrainingTrace, gradient_param_shift, init_params, train

logger = get_logger(__name__)

DEFAULT_EPS_GAP = 1e-12
DESCENT_SLACK = 1e-12
PLATEAU_TOL = 0.02
NOISY_GAP_LABEL = "gap lower-bounded by E0"
EXACT_GAP_LABEL = "gap to exact optimum"

ScanValue = Union[int, float]


@dataclass(frozen=True, eq=False)
class PlReport:
    """
    PL 비율 보고서

    Attributes
    ----------
    ratios : ndarray
        반복별 r_t (음이 아니고 유한)
    c_star : float
    eps_gap : float
    label : str
        잡음 실행이면 'gap lower-bounded by E0'
    """
    ratios: npt.NDArray[np.float64]
    c_star: float
    eps_gap: float
    label: str

    @property
    def min(self) -> float:
        return float(np.min(self.ratios)) if self.ratios.size else math.nan

    @property
    def median(self) -> float:
        return float(np.median(self.ratios)) if self.ratios.size else math.nan


def _pl_value(loss: float, grad_norm: float, c_star: float, eps_gap: float) -> float:
    return 0.5 * grad_norm ** 2 / max(loss - c_star, eps_gap)


def pl_ratio(
        trace: TrainingTrace,
        c_star: float,
        eps_gap: float = DEFAULT_EPS_GAP,
        *,
        noisy: bool = False,
    ) -> PlReport:
    """
    궤적을 따라 PL 비율 r_t 계산

    Examples
    --------
    f(θ) = ‖θ‖², C* = 0 이면 ‖∇f‖² = 4f 이므로 모든 t에서 r_t = 2 입니다.
    """
    ratios = np.array(
        [_pl_value(r.loss, r.grad_norm, c_star, eps_gap) for r in trace.records], dtype=float
    )
    return PlReport(ratios, c_star, eps_gap, NOISY_GAP_LABEL if noisy else EXACT_GAP_LABEL)


def make_pl_monitor(c_star: float, eps_gap: float = DEFAULT_EPS_GAP) -> Monitor:
    """train()에 넘기는 반복별 PL 비율 모니터"""
    return Monitor("pl_ratio", lambda loss, grad, theta: _pl_value(loss, float(np.linalg.norm(grad)), c_star, eps_gap))


def descent_check(trace: TrainingTrace, learning_rate: float) -> float:
    """
    하강 하한 loss_t − loss_{t+1} ≥ (η/2)‖∇C_t‖² 를 만족한 스텝 비율

    final_loss가 있으면 마지막 스텝도 포함합니다. 스텝이 없으면 1.0.
    """
    losses = [r.loss for r in trace.records]
    if trace.final_loss is not None:
        losses.append(trace.final_loss)
    steps = len(losses) - 1
    if steps <= 0:
        return 1.0
    satisfied = sum(
        losses[t] - losses[t + 1] >= 0.5 * learning_rate * trace.records[t].grad_norm ** 2 - DESCENT_SLACK
        for t in range(steps)
    )
    return satisfied / steps


@dataclass(frozen=True)
class DescentStep:
    learning_rate: float
    halvings: int
    satisfied: bool


def find_descent_step(
        loss: ScalarLoss,
        theta: npt.ArrayLike,
        grad: npt.ArrayLike,
        learning_rate: float,
        *,
        max_halvings: int = 20,
        tol: float = 1e-9,
    ) -> DescentStep:
    """
    C(θ − η∇C) ≤ C(θ) + tol 이 될 때까지 η를 절반으로 줄임 (최대 max_halvings회)
    """
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    base = loss(theta)
    eta = learning_rate
    for halvings in range(max_halvings + 1):
        if loss(theta - eta * grad) <= base + tol:
            return DescentStep(eta, halvings, True)
        eta /= 2.0
    return DescentStep(eta * 2.0, max_halvings, False)


@dataclass(frozen=True)
class GradNormStats:
    """무작위 초기화에서 ‖∇C‖²의 Monte-Carlo 추정"""
    mean: float
    variance: float
    samples: int


def grad_norm_at_init(
        loss: ScalarLoss,
        param_count: int,
        samples: int,
        seed: int,
        *,
        gradient: GradientFn = gradient_param_shift,
        max_workers: Optional[int] = None,
    ) -> GradNormStats:
    """
    ‖∇C‖²의 평균과 분산 (ddof=1)

    표본마다 SeedSequence(seed)에서 파생된 독립 시드로 init_params를 뽑습니다.

    Raises
    ------
    ContractViolationException
        samples < 2
    """
    if samples < 2:
        raise ContractViolationException("grad_norm_at_init", f"samples must be >= 2, got {samples}")
    children = np.random.SeedSequence(seed).spawn(samples)
    squared = np.array(
        [
            float(np.sum(gradient(loss, init_params(param_count, child), max_workers=max_workers) ** 2))
            for child in children
        ],
        dtype=float,
    )
    return GradNormStats(float(np.mean(squared)), float(np.var(squared, ddof=1)), samples)


@dataclass(frozen=True)
class GradNormRow:
    n: int
    family: str
    m: int
    param_count: int
    stats: GradNormStats


def grad_norm_scan(
        qubit_counts: Sequence[int],
        samples: int,
        seed: int,
        *,
        model: str = "H1",
        rounds: int = 1,
        vqe_layers: int = 2,
        noise: Optional[NoiseSpec] = None,
        max_workers: Optional[int] = None,
    ) -> List[GradNormRow]:
    """
    큐비트 수에 따른 초기 그래디언트 노름 - 안실라 없는 기준선과 m = n 소산 구성 비교
    """
    noise = noise or NoiseSpec.none()
    rows: List[GradNormRow] = []
    for n in qubit_counts:
        hamiltonian = model_by_name(model, n)
        for family, m in (("baseline", 0), ("dissipative", n)):
            cfg = DvqeConfig(n=n, m=m, hamiltonian=hamiltonian, rounds=rounds, vqe_layers=vqe_layers, noise=noise)
            loss = make_loss(TaskKind.DVQE, cfg)
            stats = grad_norm_at_init(loss, loss.param_count, samples, seed, max_workers=max_workers)
            logger.info("grad norm scan n=%d %s: mean=%.3e var=%.3e", n, family, stats.mean, stats.variance)
            rows.append(GradNormRow(n, family, m, loss.param_count, stats))
    return rows


@dataclass(frozen=True, eq=False)
class ScanRun:
    """스캔의 단일 (variant, seed) 실행 (wall_seconds는 결정적 출력에서 제외)"""
    value: ScanValue
    seed: int
    trace: TrainingTrace
    initial_metric: float
    gain: float
    wall_seconds: float = 0.0


@dataclass(frozen=True, eq=False)
class SaturationScan:
    """
    파라미터 스캔 결과

    Attributes
    ----------
    key : str
        스캔 변수 ('m', 'rounds', 'p')
    values : Tuple
        엄격 증가하는 스캔 값
    seeds : Tuple[int, ...]
    runs : Tuple[ScanRun, ...]
        values × seeds 순서
    median_metric : Tuple[float, ...]
        값별 최종 지표 중앙값 F_m
    median_gain : Tuple[float, ...]
        값별 이득 중앙값
    errors : Tuple[RunExecutionException, ...]
        raise_errors=False에서 실패한 실행
    """
    key: str
    values: Tuple[ScanValue, ...]
    seeds: Tuple[int, ...]
    runs: Tuple[ScanRun, ...]
    median_metric: Tuple[float, ...]
    median_gain: Tuple[float, ...]
    errors: Tuple[RunExecutionException, ...] = ()


SCAN_KEYS = ("m", "rounds", "p")


def with_variant(cfg: TaskConfig, key: str, value: ScanValue, seed: int) -> TaskConfig:
    """스캔 변수와 시드를 바꾼 설정 (p는 DVQE 실행 잡음 / 복원 입력 잡음의 세기)"""
    if key == "m":
        return dataclasses.replace(cfg, m=int(value), seed=seed)
    if key == "rounds":
        return dataclasses.replace(cfg, rounds=int(value), seed=seed)
    if key == "p":
        if isinstance(cfg, RecoveryConfig):
            return dataclasses.replace(cfg, noise_prep=dataclasses.replace(cfg.noise_prep, p=float(value)), seed=seed)
        return dataclasses.replace(cfg, noise=dataclasses.replace(cfg.noise, p=float(value)), seed=seed)
    raise ContractViolationException("parameter_scan", f"unknown scan key '{key}', expected one of {SCAN_KEYS}")


def run_gain(loss: LossFunction, trace: TrainingTrace) -> Tuple[float, float]:
    """
    (기준 지표, 이득)

    복원: (F_0, F_final − F_0). DVQE: (E_init, E_init − E_final).
    """
    if loss.task is TaskKind.RECOVERY:
        initial = float(loss.initial_metric)
        return initial, trace.final_metric - initial
    initial = trace.initial_metric
    return initial, initial - trace.final_metric


def train_config(
        cfg: TaskConfig,
        monitors: Sequence[Monitor] = (),
        *,
        max_workers: Optional[int] = None,
        log_every: int = 10,
    ) -> Tuple[LossFunction, TrainingTrace]:
    """설정 하나를 시드 cfg.seed로 초기화해 학습"""
    task = TaskKind.RECOVERY if isinstance(cfg, RecoveryConfig) else TaskKind.DVQE
    loss = make_loss(task, cfg)
    theta0 = init_params(loss.param_count, cfg.seed)
    trace = train(
        loss,
        theta0,
        cfg.learning_rate,
        cfg.iterations,
        monitors,
        max_workers=max_workers,
        log_every=log_every,
        seed=cfg.seed,
    )
    return loss, trace


def parameter_scan(
        base: TaskConfig,
        key: str,
        values: Sequence[ScanValue],
        seeds: Sequence[int],
        *,
        max_workers: Optional[int] = None,
        run: Optional[Callable[[TaskConfig], Tuple[LossFunction, TrainingTrace]]] = None,
        raise_errors: bool = True,
    ) -> SaturationScan:
    """
    (value, seed) 쌍마다 한 번씩 학습하고 값별 중앙값 집계

    Parameters
    ----------
    base : DvqeConfig | RecoveryConfig
    key : str
        'm' | 'rounds' | 'p'
    values : Sequence
        엄격 증가
    seeds : Sequence[int]
        비어 있지 않음
    max_workers : int, optional
        (value, seed) 실행을 동시에 수행할 스레드 수
    run : Callable, optional
        설정 → (손실, 궤적). 기본값은 train_config
    raise_errors : bool, default=True
        False이면 실패한 실행을 SaturationScan.errors에 모으고 나머지를 계속 진행

    Raises
    ------
    ContractViolationException
        values가 비었거나 엄격 증가가 아님, seeds가 빈 경우, 잘못된 key
    RunExecutionException
        raise_errors=True에서 하위 실행이 실패한 경우 (원본 예외는 error 속성)

    Notes
    -----
    비유한 값으로 중단된 학습은 예외가 아니므로 runs에 포함됩니다
    (ScanRun.trace.aborted 확인).
    """
    values = tuple(values)
    seeds = tuple(seeds)
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise ContractViolationException("parameter_scan", f"scan values must be non-empty and strictly increasing, got {values}")
    if not seeds:
        raise ContractViolationException("parameter_scan", "seeds must be non-empty")
    run = run or train_config
    variants = [(value, seed, with_variant(base, key, value, seed)) for value in values for seed in seeds]

    def execute(item) -> Union[ScanRun, RunExecutionException]:
        value, seed, cfg = item
        name = f"{key}={value}/seed={seed}"
        started = time.perf_counter()
        try:
            loss, trace = run(cfg)
        except Exception as error:  # pylint: disable=broad-except
            if raise_errors:
                raise RunExecutionException(name, error) from error
            logger.error("Scan run '%s' failed", name, exc_info=error)
            return RunExecutionException(name, error)
        initial, gain = run_gain(loss, trace)
        logger.info("scan %s: final=%.6f gain=%.6f", name, trace.final_metric, gain)
        return ScanRun(value, seed, trace, initial, gain, time.perf_counter() - started)

    if max_workers is None or max_workers <= 1:
        outcomes = [execute(item) for item in variants]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(execute, variants))

    runs = [o for o in outcomes if isinstance(o, ScanRun)]
    per_value = [[r for r in runs if r.value == value] for value in values]
    return SaturationScan(
        key=key,
        values=values,
        seeds=seeds,
        runs=tuple(runs),
        median_metric=tuple(_median([r.trace.final_metric for r in group]) for group in per_value),
        median_gain=tuple(_median([r.gain for r in group]) for group in per_value),
        errors=tuple(o for o in outcomes if isinstance(o, RunExecutionException)),
    )


def _median(values: Sequence[float]) -> float:
    return float(np.median(values)) if values else math.nan


def ancilla_scan(
        base: TaskConfig,
        m_values: Sequence[int],
        seeds: Sequence[int],
        *,
        max_workers: Optional[int] = None,
        run: Optional[Callable[[TaskConfig], Tuple[LossFunction, TrainingTrace]]] = None,
    ) -> SaturationScan:
    """안실라 수 m에 대한 스캔 (run은 parameter_scan과 같음)"""
    return parameter_scan(base, "m", m_values, seeds, max_workers=max_workers, run=run)


def saturation_point(scan: SaturationScan, tol: float = PLATEAU_TOL) -> Optional[ScanValue]:
    """
    중앙값 지표가 평탄해지는 첫 스캔 값

    이후 연속 중앙값의 차이가 모두 tol 미만인 가장 작은 값을 반환합니다.
    마지막 값에 와서야 조건이 성립하면 (평탄 구간 미관측) None.
    """
    medians = scan.median_metric
    if len(medians) == 1:
        return scan.values[0]
    start = len(medians) - 1
    for i in range(len(medians) - 2, -1, -1):
        if abs(medians[i + 1] - medians[i]) < tol:
            start = i
        else:
            break
    return None if start == len(medians) - 1 else scan.values[start]
