"""
dissipkit 엔진 - 소산 VQE와 소산 복원 파이프라인

회로(circuits)와 채널(channels)을 조합해 두 가지 작업을 θ의 스칼라
손실 함수로 노출합니다.

Pipelines
---------

```mermaid
flowchart LR
    subgraph DVQE
    Z["|0⟩⟨0|^n"] --> V0[U_vqe 0]
    V0 --> V1[U_vqe t]
    V1 --> D1["V_SA t (+ |0⟩⟨0|^m)"]
    D1 --> R1[Tr_A / reset]
    R1 -->|t < T| V1
    R1 -->|t = T| E["Tr[H ρ]"]
    end

    subgraph Recovery
    P["|ψ⟩⟨ψ| + 입력 잡음"] --> D2["V_SA t (+ |0⟩⟨0|^m)"]
    D2 --> R2[Tr_A / reset]
    R2 -->|t < T| D2
    R2 -->|t = T| F["1 − ⟨ψ|ρ|ψ⟩"]
    end
```

Parameter Layout
----------------

전역 매개변수 벡터 θ는 블록 순서대로 분할됩니다::

    DVQE:     [U_vqe 0 | U_vqe 1 | V_SA 1 | ... | U_vqe T | V_SA T]
              총 2·n·L_u·(T+1) + 6·(n+m)·T
    Recovery: [V_SA 1 | ... | V_SA T]
              총 6·(n+m)·T

Reset
-----

reset_q = 1 (기본값)이면 매 라운드 안실라를 추적 소거한 뒤 새 |0⟩⟨0|^m 을
붙입니다. reset_q < 1 이면 결합 상태를 유지하고 각 라운드 뒤 안실라에
부분 리셋 채널 (1−q)ρ + q(Tr_A ρ ⊗ |0⟩⟨0|)을 적용하며 마지막에 추적
소거합니다.

Usage Examples
--------------

>>> from dissipkit.engine import DvqeConfig, make_loss
>>> from dissipkit.hamiltonian import benchmark_models
>>> h1, _, _ = benchmark_models(3)
>>> loss = make_loss("dvqe", DvqeConfig(n=3, m=1, hamiltonian=h1, rounds=1))
>>> loss.param_count
48
"""
import dataclasses
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from .channels import (
    NoiseKind,
    NoiseLocation,
    NoiseSite,
    NoiseSpec,
    ancilla_zero,
    inject_noise,
    reset_channel,
)
from .circuits import ParamCircuit, apply_circuit, build_dissipative_block, build_vqe_block
from .exc import ContractViolationException
from .hamiltonian import PauliHamiltonian, ground_energy
from .logging import get_logger
from .qmath import RegisterShape, partial_trace
from .states import DensityMatrix, PureState, expectation, fidelity_pure, zero_state

logger = get_logger(__name__)


class TaskKind(Enum):
    """학습 작업 종류"""
    DVQE = "dvqe"
    RECOVERY = "recovery"


def _default_prep_noise() -> NoiseSpec:
    return NoiseSpec(NoiseKind.DEPOLARIZING, 0.1, NoiseLocation.INPUT_ONLY)


def _check_reset_q(reset_q: float, operation: str) -> None:
    if not 0.0 < reset_q <= 1.0:
        raise ContractViolationException(operation, f"reset_q must lie in (0, 1], got {reset_q}")


def _check_training(learning_rate: float, iterations: int, operation: str) -> None:
    if not learning_rate > 0.0:
        raise ContractViolationException(operation, f"learning_rate must be > 0, got {learning_rate}")
    if iterations < 1:
        raise ContractViolationException(operation, f"iterations must be >= 1, got {iterations}")


@dataclass(frozen=True)
class DvqeConfig:
    """
    소산 VQE 실행 설정

    Attributes
    ----------
    n : int
        시스템 큐비트 수 (hamiltonian.qubit_count와 일치)
    m : int
        라운드당 안실라 수. 0이면 안실라 없는 기준선 (active_rounds = 0)
    hamiltonian : PauliHamiltonian
    rounds : int, default=3
        소산 라운드 수 T
    vqe_layers : int, default=2
        U_vqe 블록당 층 수 L_u
    noise : NoiseSpec, default=NoiseSpec.none()
        회로 실행 중 게이트별 잡음
    seed : int, default=1
    learning_rate : float, default=0.2
    iterations : int, default=200
    reset_q : float, default=1.0
        라운드 사이 안실라 리셋 확률
    """
    n: int
    m: int
    hamiltonian: PauliHamiltonian
    rounds: int = 3
    vqe_layers: int = 2
    noise: NoiseSpec = field(default_factory=NoiseSpec.none)
    seed: int = 1
    learning_rate: float = 0.2
    iterations: int = 200
    reset_q: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.m < 0 or self.rounds < 0:
            raise ContractViolationException(
                "DvqeConfig", f"need n >= 1, m >= 0, rounds >= 0; got n={self.n}, m={self.m}, rounds={self.rounds}"
            )
        if self.hamiltonian.qubit_count != self.n:
            raise ContractViolationException(
                "DvqeConfig", f"Hamiltonian acts on {self.hamiltonian.qubit_count} qubit(s), n={self.n}"
            )
        if self.vqe_layers < 1:
            raise ContractViolationException("DvqeConfig", f"vqe_layers must be >= 1, got {self.vqe_layers}")
        _check_training(self.learning_rate, self.iterations, "DvqeConfig")
        _check_reset_q(self.reset_q, "DvqeConfig")
        if self.m == 0 and self.rounds != 0:
            logger.debug("m = 0 runs the ancilla-free baseline; ignoring rounds=%d", self.rounds)

    @property
    def active_rounds(self) -> int:
        """실제로 실행되는 소산 라운드 수 (m = 0이면 0)"""
        return self.rounds if self.m > 0 else 0

    @property
    def param_count(self) -> int:
        n, m, t = self.n, self.m, self.active_rounds
        return 2 * n * self.vqe_layers * (t + 1) + 6 * (n + m) * t


@dataclass(frozen=True)
class RecoveryConfig:
    """
    소산 상태 복원 실행 설정

    Attributes
    ----------
    target : PureState
        복원 목표 |ψ_tar⟩ (시스템 큐비트 수 n은 여기서 결정)
    m : int, default=3
    rounds : int, default=3
    noise_prep : NoiseSpec, default=DP p=0.1 input_only
        입력 준비 잡음. location은 input_only여야 함
    noise_run : NoiseSpec, default=NoiseSpec.none()
        소산 블록 실행 중 잡음
    seed : int, default=1
    learning_rate : float, default=0.8
    iterations : int, default=100
    reset_q : float, default=1.0
    """
    target: PureState
    m: int = 3
    rounds: int = 3
    noise_prep: NoiseSpec = field(default_factory=_default_prep_noise)
    noise_run: NoiseSpec = field(default_factory=NoiseSpec.none)
    seed: int = 1
    learning_rate: float = 0.8
    iterations: int = 100
    reset_q: float = 1.0

    def __post_init__(self):
        if self.m < 1 or self.rounds < 1:
            raise ContractViolationException(
                "RecoveryConfig", f"need m >= 1 and rounds >= 1, got m={self.m}, rounds={self.rounds}"
            )
        if not self.noise_prep.is_trivial and self.noise_prep.location is not NoiseLocation.INPUT_ONLY:
            raise ContractViolationException(
                "RecoveryConfig", f"noise_prep location must be input_only, got {self.noise_prep.location.value}"
            )
        _check_training(self.learning_rate, self.iterations, "RecoveryConfig")
        _check_reset_q(self.reset_q, "RecoveryConfig")

    @property
    def n(self) -> int:
        return self.target.qubit_count

    @property
    def param_count(self) -> int:
        return 6 * (self.n + self.m) * self.rounds


TaskConfig = Union[DvqeConfig, RecoveryConfig]
Round = Tuple[Optional[ParamCircuit], ParamCircuit]


@lru_cache(maxsize=64)
def dvqe_layout(n: int, m: int, rounds: int, vqe_layers: int) -> Tuple[ParamCircuit, Tuple[Round, ...]]:
    """
    DVQE 블록 배치 - (U_vqe 0, ((U_vqe t, V_SA t), ...))

    각 블록은 전역 θ에서 자기 구간의 param_offset을 가집니다.
    """
    offset = 0
    head = build_vqe_block(n, vqe_layers, offset)
    offset += head.param_count
    rounds_: List[Round] = []
    for _ in range(rounds):
        vqe = build_vqe_block(n, vqe_layers, offset)
        offset += vqe.param_count
        dis = build_dissipative_block(n, m, offset)
        offset += dis.param_count
        rounds_.append((vqe, dis))
    return head, tuple(rounds_)


@lru_cache(maxsize=64)
def recovery_layout(n: int, m: int, rounds: int) -> Tuple[Round, ...]:
    block = 6 * (n + m)
    return tuple((None, build_dissipative_block(n, m, t * block)) for t in range(rounds))


def _check_theta(theta: npt.ArrayLike, expected: int, operation: str) -> npt.NDArray[np.float64]:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != expected:
        raise ContractViolationException(operation, f"expected {expected} parameter(s), got {theta.shape[0]}")
    return theta


def _widen(c: ParamCircuit, qubit_count: int) -> ParamCircuit:
    return dataclasses.replace(c, qubit_count=qubit_count)


def run_rounds(
        rho_s: DensityMatrix,
        rounds: Sequence[Round],
        theta: npt.NDArray[np.float64],
        m: int,
        noise: NoiseSpec,
        reset_q: float = 1.0,
    ) -> DensityMatrix:
    """
    소산 라운드 재귀 - 각 라운드 뒤 시스템 상태의 불변식을 검사

    Parameters
    ----------
    rho_s : DensityMatrix
        n 큐비트 시스템 상태
    rounds : Sequence[Tuple[Optional[ParamCircuit], ParamCircuit]]
        (시스템 변분 블록 또는 None, 소산 블록)
    theta : ndarray
        전역 매개변수 벡터
    m : int
        안실라 수
    noise : NoiseSpec
    reset_q : float, default=1.0

    Raises
    ------
    NumericalCorruptionException
        중간 상태가 밀도 행렬 불변식을 위반하는 경우
    """
    if not rounds:
        return rho_s
    system, ancilla = rho_s.shape, RegisterShape(m)
    joint_shape = RegisterShape(system.qubit_count + m)
    if reset_q == 1.0:
        for vqe, dis in rounds:
            if vqe is not None:
                rho_s = apply_circuit(vqe, vqe.block_params(theta), rho_s, noise)
            joint = DensityMatrix(joint_shape, np.kron(rho_s.mat, ancilla_zero(m)))
            joint = apply_circuit(dis, dis.block_params(theta), joint, noise)
            rho_s = DensityMatrix(system, partial_trace(joint.mat, system, ancilla, "back")).validated()
        return rho_s

    ancillas = list(range(system.qubit_count, joint_shape.qubit_count))
    joint = DensityMatrix(joint_shape, np.kron(rho_s.mat, ancilla_zero(m)))
    for vqe, dis in rounds:
        if vqe is not None:
            joint = apply_circuit(_widen(vqe, joint_shape.qubit_count), vqe.block_params(theta), joint, noise)
        joint = apply_circuit(dis, dis.block_params(theta), joint, noise)
        joint = reset_channel(joint, ancillas, reset_q)
        DensityMatrix(system, partial_trace(joint.mat, system, ancilla, "back")).validated()
    return DensityMatrix(system, partial_trace(joint.mat, system, ancilla, "back"))


def dvqe_forward(cfg: DvqeConfig, theta: npt.ArrayLike) -> Tuple[float, DensityMatrix]:
    """
    소산 VQE 순전파 - (Tr[H ρ_S^(T)], ρ_S^(T))

    ρ_S^(0) = U_vqe 0 (|0⟩⟨0|^n) 이후 라운드마다 U_vqe t → V_SA t → Tr_A.
    T = 0이면 표준 VQE와 정확히 같습니다.

    Raises
    ------
    ContractViolationException
        매개변수 수 불일치
    """
    theta = _check_theta(theta, cfg.param_count, "dvqe_forward")
    head, rounds = dvqe_layout(cfg.n, cfg.m, cfg.active_rounds, cfg.vqe_layers)
    rho = apply_circuit(head, head.block_params(theta), zero_state(cfg.n), cfg.noise).validated()
    rho = run_rounds(rho, rounds, theta, cfg.m, cfg.noise, cfg.reset_q)
    return expectation(cfg.hamiltonian, rho), rho


def prepare_noisy_input(target: PureState, spec: NoiseSpec) -> DensityMatrix:
    """목표 상태의 모든 큐비트에 입력 잡음을 한 번 적용한 ρ_0"""
    return inject_noise(target.projector(), spec, range(target.qubit_count), NoiseSite.INPUT)


def recovery_forward(cfg: RecoveryConfig, theta: npt.ArrayLike) -> Tuple[float, DensityMatrix]:
    """
    소산 복원 순전파 - (1 − F_T, ρ_T)

    시스템 전용 변분 블록 없이 소산 블록만 T회 적용합니다.
    """
    theta = _check_theta(theta, cfg.param_count, "recovery_forward")
    rho = prepare_noisy_input(cfg.target, cfg.noise_prep)
    rho = run_rounds(rho, recovery_layout(cfg.n, cfg.m, cfg.rounds), theta, cfg.m, cfg.noise_run, cfg.reset_q)
    return 1.0 - fidelity_pure(rho, cfg.target), rho


class LossFunction(ABC):
    """
    θ ↦ 손실 어댑터 (옵티마이저 입력)

    같은 θ에서 반복 평가하면 비트 단위로 동일한 값을 반환합니다.

    Attributes
    ----------
    task : TaskKind
    cfg : DvqeConfig | RecoveryConfig
    metric_name : str
        보조 지표 이름 ('energy' 또는 'fidelity')
    """
    task: TaskKind
    metric_name: str

    def __init__(self, cfg: TaskConfig):
        self.cfg = cfg

    @property
    def param_count(self) -> int:
        return self.cfg.param_count

    def __call__(self, theta: npt.ArrayLike) -> float:
        return self.evaluate(theta)

    def evaluate(self, theta: npt.ArrayLike) -> float:
        return self.forward(theta)[0]

    @abstractmethod
    def forward(self, theta: npt.ArrayLike) -> Tuple[float, DensityMatrix]:
        """(손실, 최종 상태)"""

    @abstractmethod
    def metrics(self, loss: float) -> Tuple[float, float]:
        """
        손실에서 (보조 지표, 기준값까지의 간격) 계산

        DVQE: (에너지, E − E0). 복원: (피델리티, 1 − F).
        """

    @property
    @abstractmethod
    def reference(self) -> float:
        """손실의 기준 최적값 C* (DVQE: E0, 복원: 0)"""

    @property
    def initial_metric(self) -> Optional[float]:
        """학습 전 기준 지표 (복원: 입력 피델리티 F_0)"""
        return None

    @property
    def is_noisy(self) -> bool:
        return False


class DvqeLoss(LossFunction):
    task = TaskKind.DVQE
    metric_name = "energy"

    def forward(self, theta: npt.ArrayLike) -> Tuple[float, DensityMatrix]:
        return dvqe_forward(self.cfg, theta)

    def metrics(self, loss: float) -> Tuple[float, float]:
        return loss, loss - self.reference

    @cached_property
    def reference(self) -> float:
        return ground_energy(self.cfg.hamiltonian)[0]

    @property
    def is_noisy(self) -> bool:
        return not self.cfg.noise.is_trivial and self.cfg.noise.location is not NoiseLocation.INPUT_ONLY


class RecoveryLoss(LossFunction):
    task = TaskKind.RECOVERY
    metric_name = "fidelity"

    def forward(self, theta: npt.ArrayLike) -> Tuple[float, DensityMatrix]:
        return recovery_forward(self.cfg, theta)

    def metrics(self, loss: float) -> Tuple[float, float]:
        return 1.0 - loss, loss

    @property
    def reference(self) -> float:
        return 0.0

    @cached_property
    def initial_metric(self) -> float:
        return fidelity_pure(prepare_noisy_input(self.cfg.target, self.cfg.noise_prep), self.cfg.target)

    @property
    def is_noisy(self) -> bool:
        return not self.cfg.noise_run.is_trivial


def make_loss(task: Union[TaskKind, str], cfg: TaskConfig) -> LossFunction:
    """
    작업 종류와 설정으로 손실 함수 생성

    Raises
    ------
    ContractViolationException
        작업 종류와 설정 타입이 맞지 않는 경우
    """
    try:
        task = TaskKind(task)
    except ValueError as error:
        raise ContractViolationException(
            "make_loss", f"unknown task '{task}', expected one of {[k.value for k in TaskKind]}"
        ) from error
    if task is TaskKind.DVQE and isinstance(cfg, DvqeConfig):
        return DvqeLoss(cfg)
    if task is TaskKind.RECOVERY and isinstance(cfg, RecoveryConfig):
        return RecoveryLoss(cfg)
    raise ContractViolationException("make_loss", f"task '{task.value}' does not accept {type(cfg).__name__}")
