"""
dissipkit 최적화 - 매개변수 초기화, 그래디언트, 경사 하강 학습

Training Loop
-------------

```mermaid
sequenceDiagram
    participant T as train()
    participant L as LossFunction
    participant G as gradient_param_shift
    participant M as Monitor

    loop iteration t = 0 .. iterations-1
        T->>L: loss(θ_t)
        T->>G: ∇C(θ_t)
        G->>L: C(θ ± π/2 e_k)
        T->>M: monitor(loss, grad, θ_t)
        T->>T: record / θ_{t+1} = θ_t − η ∇C
    end
    T->>L: loss(θ_T) (final_loss)
```

비유한 손실이나 그래디언트가 나오면 예외 대신 abort 기록과 함께 학습을
멈추고, 그때까지의 모든 유한한 기록을 보존합니다. 호출자는
TrainingTrace.raise_for_status()로 예외 전환을 선택할 수 있습니다.

Gradient
--------

모든 매개변수는 Pauli 회전 게이트로만 들어가므로 매개변수 이동 규칙이
절단 오차 없이 정확합니다::

    ∂_k C = [C(θ + π/2 e_k) − C(θ − π/2 e_k)] / 2

성분별 평가는 독립적이며 max_workers > 1이면 스레드 풀에서 동시에
수행됩니다. 결과는 항상 인덱스 순서로 모이므로 스케줄링과 무관하게
결정적입니다.

Usage Examples
--------------

>>> from dissipkit.optim import init_params, train
>>> theta0 = init_params(loss.param_count, seed=1)
>>> trace = train(loss, theta0, learning_rate=0.8, iterations=100)
>>> trace.raise_for_status().final_metric
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from .exc import ContractViolationException, TrainingAbortedException
from .logging import get_logger

logger = get_logger(__name__)

Params = npt.NDArray[np.float64]
ScalarLoss = Callable[[Params], float]
GradientFn = Callable[..., Params]

SHIFT = math.pi / 2.0


class Monitor(NamedTuple):
    """
    반복마다 평가되는 진단 지표

    fn(loss, grad, theta) -> float
    """
    name: str
    fn: Callable[[float, Params, Params], float]


def init_params(count: int, seed: Union[int, np.random.SeedSequence]) -> Params:
    """
    [−π, π) 균등 분포에서 i.i.d. 초기 매개변수

    같은 시드는 같은 벡터를 만듭니다.

    Raises
    ------
    ContractViolationException
        count < 0
    """
    if count < 0:
        raise ContractViolationException("init_params", f"count must be >= 0, got {count}")
    rng = np.random.default_rng(seed)
    return rng.uniform(-math.pi, math.pi, size=count)


def _map_ordered(fn: Callable[[int], float], count: int, max_workers: Optional[int]) -> List[float]:
    if max_workers is None or max_workers <= 1 or count <= 1:
        return [fn(k) for k in range(count)]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(fn, range(count)))


def gradient_param_shift(loss: ScalarLoss, theta: npt.ArrayLike, *, max_workers: Optional[int] = None) -> Params:
    """
    매개변수 이동 규칙 그래디언트

    Parameters
    ----------
    loss : Callable[[ndarray], float]
    theta : array_like
    max_workers : int, optional
        성분 평가 스레드 수 (None 또는 1이면 순차)
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)

    def component(k: int) -> float:
        plus, minus = theta.copy(), theta.copy()
        plus[k] += SHIFT
        minus[k] -= SHIFT
        return (loss(plus) - loss(minus)) / 2.0

    return np.array(_map_ordered(component, theta.shape[0], max_workers), dtype=float)


def gradient_central_difference(
        loss: ScalarLoss,
        theta: npt.ArrayLike,
        *,
        h: float = 1e-5,
        max_workers: Optional[int] = None,
    ) -> Params:
    """중심 차분 그래디언트 [C(θ + h e_k) − C(θ − h e_k)] / 2h (검증용)"""
    theta = np.asarray(theta, dtype=float).reshape(-1)

    def component(k: int) -> float:
        plus, minus = theta.copy(), theta.copy()
        plus[k] += h
        minus[k] -= h
        return (loss(plus) - loss(minus)) / (2.0 * h)

    return np.array(_map_ordered(component, theta.shape[0], max_workers), dtype=float)


@dataclass(frozen=True, eq=False)
class OptimizerState:
    """
    경사 하강 상태

    Attributes
    ----------
    theta : ndarray
    iteration : int
    learning_rate : float
        η > 0
    rng_seed : int, optional
        초기화에 사용한 시드
    """
    theta: Params
    iteration: int
    learning_rate: float
    rng_seed: Optional[int] = None

    def __post_init__(self):
        if not self.learning_rate > 0.0:
            raise ContractViolationException("OptimizerState", f"learning_rate must be > 0, got {self.learning_rate}")
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if not np.all(np.isfinite(theta)):
            raise ContractViolationException("OptimizerState", "parameters must be finite")
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    def step(self, grad: Params) -> "OptimizerState":
        """θ_{t+1} = θ_t − η ∇C(θ_t)"""
        return OptimizerState(
            self.theta - self.learning_rate * grad, self.iteration + 1, self.learning_rate, self.rng_seed
        )


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    loss: float
    aux_metric: float
    gap: float
    grad_norm: float
    monitors: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class AbortRecord:
    """비유한 값으로 중단된 반복의 진단 기록"""
    iteration: int
    reason: str
    loss: float
    grad_norm: float


@dataclass(eq=False)
class TrainingTrace:
    """
    학습 궤적 - 반복별 기록과 실행 메타데이터

    Attributes
    ----------
    records : List[IterationRecord]
        유한한 값만 담은 반복별 기록 (iteration 엄격 증가)
    learning_rate : float
    final_params : ndarray
        마지막으로 유효했던 매개변수
    final_loss : float, optional
        final_params에서의 손실 (중단 시 None)
    final_aux : float, optional
        final_loss의 보조 지표
    abort : AbortRecord, optional
    config : Dict[str, Any]
        설정 에코
    metric_name : str
    """
    records: List[IterationRecord]
    learning_rate: float
    final_params: Params
    final_loss: Optional[float] = None
    final_aux: Optional[float] = None
    abort: Optional[AbortRecord] = None
    config: Dict[str, Any] = field(default_factory=dict)
    metric_name: str = "loss"

    @property
    def aborted(self) -> bool:
        return self.abort is not None

    @property
    def losses(self) -> npt.NDArray[np.float64]:
        return np.array([r.loss for r in self.records], dtype=float)

    @property
    def grad_norms(self) -> npt.NDArray[np.float64]:
        return np.array([r.grad_norm for r in self.records], dtype=float)

    @property
    def final_metric(self) -> float:
        """최종 매개변수의 보조 지표 (중단 시 마지막 기록의 값)"""
        if self.final_aux is not None:
            return self.final_aux
        if self.records:
            return self.records[-1].aux_metric
        return math.nan

    @property
    def initial_metric(self) -> float:
        return self.records[0].aux_metric if self.records else math.nan

    def raise_for_status(self) -> "TrainingTrace":
        """
        중단된 학습이면 TrainingAbortedException 발생, 아니면 self 반환
        """
        if self.abort is not None:
            raise TrainingAbortedException(self.abort.iteration, self.abort.reason)
        return self


def _default_metrics(loss: ScalarLoss) -> Callable[[float], Tuple[float, float]]:
    metrics = getattr(loss, "metrics", None)
    if metrics is not None:
        return metrics
    return lambda value: (value, value)


def train(
        loss: ScalarLoss,
        theta0: npt.ArrayLike,
        learning_rate: float,
        iterations: int,
        monitors: Sequence[Monitor] = (),
        *,
        gradient: GradientFn = gradient_param_shift,
        metrics: Optional[Callable[[float], Tuple[float, float]]] = None,
        max_workers: Optional[int] = None,
        log_every: int = 10,
        seed: Optional[int] = None,
        config: Optional[Dict[str, Any]] = None,
    ) -> TrainingTrace:
    """
    고정 학습률 경사 하강 (모멘텀/적응 없음)

    Parameters
    ----------
    loss : Callable[[ndarray], float]
        보통 LossFunction. metrics 속성이 있으면 보조 지표 계산에 사용
    theta0 : array_like
    learning_rate : float
        η > 0
    iterations : int
        >= 1, 기록 수
    monitors : Sequence[Monitor]
        반복마다 평가되어 record.monitors에 저장
    gradient : Callable, default=gradient_param_shift
    metrics : Callable[[float], Tuple[float, float]], optional
        손실 → (보조 지표, 간격). 없으면 loss.metrics 또는 (loss, loss)
    max_workers : int, optional
        그래디언트 성분 병렬 평가 스레드 수
    log_every : int, default=10
        INFO 진행 로그 간격
    seed : int, optional
        OptimizerState에 기록되는 초기화 시드
    config : Dict[str, Any], optional
        trace.config로 보존되는 설정 에코

    Returns
    -------
    TrainingTrace
        비유한 값이 나오면 abort가 채워진 채 반환 (예외 없음)

    Raises
    ------
    ContractViolationException
        iterations < 1 또는 learning_rate <= 0
    """
    if iterations < 1:
        raise ContractViolationException("train", f"iterations must be >= 1, got {iterations}")
    to_metrics = metrics or _default_metrics(loss)
    state = OptimizerState(np.asarray(theta0, dtype=float), 0, learning_rate, seed)
    records: List[IterationRecord] = []
    abort: Optional[AbortRecord] = None

    for t in range(iterations):
        value = float(loss(state.theta))
        grad = np.asarray(gradient(loss, state.theta, max_workers=max_workers), dtype=float)
        grad_norm = float(np.linalg.norm(grad))
        if not math.isfinite(value) or not np.all(np.isfinite(grad)):
            reason = "non-finite loss" if not math.isfinite(value) else "non-finite gradient"
            abort = AbortRecord(t, reason, value, grad_norm)
            logger.error("Training aborted at iteration %d: %s (loss=%r, grad_norm=%r)", t, reason, value, grad_norm)
            break
        aux, gap = to_metrics(value)
        monitored = {m.name: float(m.fn(value, grad, state.theta)) for m in monitors}
        records.append(IterationRecord(t, value, aux, gap, grad_norm, monitored))
        if log_every > 0 and t % log_every == 0:
            logger.info("iter %4d  loss=%.8f  aux=%.8f  |grad|=%.3e", t, value, aux, grad_norm)
        else:
            logger.debug("iter %4d  loss=%.8f  aux=%.8f  |grad|=%.3e", t, value, aux, grad_norm)
        state = state.step(grad)

    trace = TrainingTrace(
        records=records,
        learning_rate=learning_rate,
        final_params=np.array(state.theta),
        abort=abort,
        config=dict(config or {}),
        metric_name=getattr(loss, "metric_name", "loss"),
    )
    if abort is None:
        final = float(loss(state.theta))
        if math.isfinite(final):
            trace.final_loss = final
            trace.final_aux = to_metrics(final)[0]
        else:
            trace.abort = AbortRecord(iterations, "non-finite final loss", final, math.nan)
            logger.error("Training aborted after the last step: non-finite final loss")
    return trace
