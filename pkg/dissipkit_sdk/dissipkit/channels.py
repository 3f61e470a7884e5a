"""
dissipkit CPTP 채널 - 잡음 채널, Kraus 적용, Stinespring 확장, 리셋 채널

이 모듈은 밀도 행렬에 작용하는 모든 CPTP 맵을 제공합니다.

Channel Representations
-----------------------

```mermaid
graph LR
    V["V_SA (system ⊗ ancilla unitary)"] -->|"K_i = ⟨i|_A V |0⟩_A"| K[KrausChannel]
    V -->|"Tr_A[V (ρ ⊗ |0⟩⟨0|) V†]"| OUT[ρ']
    K -->|"Σ K_i ρ K_i†"| OUT
    style V fill:#e1ffe1,stroke:#00cc00,stroke-width:2px
    style K fill:#fff4e1,stroke:#ff9900,stroke-width:2px
```

Stinespring 형태와 Kraus 형태는 같은 개방계 변환의 두 표현이며,
stinespring_apply와 apply_kraus(kraus_from_stinespring(...))는 1e-10 이내로
일치해야 합니다.

Noise Model
-----------

단일 큐비트 잡음 채널 (세기 p):

- **depolarizing**: ρ → (1−p)ρ + (p/3)(XρX + YρY + ZρZ)  (p = 3/4 에서 완전 twirl)
- **bit_flip**: {√(1−p) I, √p X}
- **amplitude_damping**: {[[1,0],[0,√(1−p)]], [[0,√p],[0,0]]}

잡음 위치 (NoiseLocation)와 호출 지점 (NoiseSite):

| location      | INPUT | SYSTEM_LAYER | DISSIPATIVE_BLOCK |
|---------------|-------|--------------|-------------------|
| fully_noisy   |       | ✓            | ✓                 |
| system_only   |       | ✓            |                   |
| input_only    | ✓     |              |                   |

fully_noisy 에서는 게이트가 건드린 모든 큐비트에 게이트 직후 잡음을 적용합니다.

Usage Examples
--------------

>>> from dissipkit.channels import NoiseSpec, NoiseKind, make_noise, apply_kraus
>>> spec = NoiseSpec(NoiseKind.DEPOLARIZING, 0.1)
>>> noisy = apply_kraus(make_noise(spec), rho, [0])

Notes
-----
- 안실라 리셋은 이상적입니다 (재귀 단계마다 깨끗한 |0⟩⟨0|^{⊗m}을 다시 붙임)
- 상관/다중 큐비트 잡음, 시간 의존 잡음은 지원하지 않습니다

See Also
--------
dissipkit.circuits : 게이트 후 잡음 주입 (apply_circuit)
dissipkit.engine : 소산 블록 재귀
"""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from typing import Sequence, Tuple

import numpy as np
import numpy.typing as npt

from .exc import ContractViolationException
from .qmath import (
    CMatrix,
    EQ_TOL,
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    RECON_TOL,
    RegisterShape,
    apply_superoperator,
    is_unitary,
    partial_trace,
    superoperator,
)
from .states import DensityMatrix


class NoiseKind(Enum):
    DEPOLARIZING = "depolarizing"
    BIT_FLIP = "bit_flip"
    AMPLITUDE_DAMPING = "amplitude_damping"
    NONE = "none"


class NoiseLocation(Enum):
    FULLY_NOISY = "fully_noisy"
    SYSTEM_ONLY = "system_only"
    INPUT_ONLY = "input_only"


class NoiseSite(Enum):
    """잡음 주입 호출 지점"""
    INPUT = "input"
    SYSTEM_LAYER = "system_layer"
    DISSIPATIVE_BLOCK = "dissipative_block"


_SITES_BY_LOCATION = {
    NoiseLocation.FULLY_NOISY: {NoiseSite.SYSTEM_LAYER, NoiseSite.DISSIPATIVE_BLOCK},
    NoiseLocation.SYSTEM_ONLY: {NoiseSite.SYSTEM_LAYER},
    NoiseLocation.INPUT_ONLY: {NoiseSite.INPUT},
}


@dataclass(frozen=True)
class NoiseSpec:
    """
    잡음 사양 - 종류, 세기, 위치

    Attributes
    ----------
    kind : NoiseKind
    p : float
        세기 (0 ≤ p ≤ 1)
    location : NoiseLocation
        기본값 fully_noisy
    """
    kind: NoiseKind
    p: float = 0.0
    location: NoiseLocation = NoiseLocation.FULLY_NOISY

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ContractViolationException("NoiseSpec", f"strength p must lie in [0, 1], got {self.p}")

    @classmethod
    def none(cls) -> "NoiseSpec":
        return cls(NoiseKind.NONE, 0.0)

    @property
    def is_trivial(self) -> bool:
        return self.kind is NoiseKind.NONE or self.p == 0.0

    def applies_at(self, site: NoiseSite) -> bool:
        return not self.is_trivial and site in _SITES_BY_LOCATION[self.location]


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """
    Kraus 연산자 목록으로 정의된 CPTP 맵

    Attributes
    ----------
    arity : int
        작용하는 큐비트 수
    kraus_ops : Tuple[CMatrix, ...]
        각 2^arity 정방 행렬

    Raises
    ------
    ContractViolationException
        연산자 크기 불일치 또는 완전성 Σ K†K = I 위반 (1e-10)
    """
    arity: int
    kraus_ops: Tuple[CMatrix, ...]

    def __post_init__(self):
        dim = 2 ** self.arity
        ops = tuple(np.array(k, dtype=np.complex128) for k in self.kraus_ops)
        if not ops:
            raise ContractViolationException("KrausChannel", "at least one Kraus operator is required")
        for op in ops:
            if op.shape != (dim, dim):
                raise ContractViolationException(
                    "KrausChannel", f"Kraus operator shape {op.shape} does not act on {self.arity} qubit(s)"
                )
            op.flags.writeable = False
        completeness = sum(op.conj().T @ op for op in ops)
        deviation = float(np.max(np.abs(completeness - np.eye(dim))))
        if deviation > EQ_TOL:
            raise ContractViolationException("KrausChannel", f"completeness violated by {deviation:.3e}")
        object.__setattr__(self, "kraus_ops", ops)

    @classmethod
    def identity(cls, arity: int = 1) -> "KrausChannel":
        return cls(arity, (np.eye(2 ** arity, dtype=np.complex128),))

    @cached_property
    def superoperator(self) -> CMatrix:
        """Σ K ⊗ K* - (ket, bra) 인덱스 순서"""
        return superoperator(self.kraus_ops)


def apply_kraus(ch: KrausChannel, rho: DensityMatrix, targets: Sequence[int]) -> DensityMatrix:
    """
    Kraus 채널을 지정된 큐비트에 적용 - Σ_i K_i ρ K_i†

    Parameters
    ----------
    ch : KrausChannel
    rho : DensityMatrix
    targets : Sequence[int]
        서로 다른 큐비트 인덱스 (len == ch.arity)

    Raises
    ------
    ContractViolationException
        arity 불일치, 중복 또는 범위를 벗어난 인덱스
    """
    if len(targets) != ch.arity:
        raise ContractViolationException(
            "apply_kraus", f"channel acts on {ch.arity} qubit(s) but {len(targets)} target(s) given"
        )
    mat = apply_superoperator(ch.superoperator, rho.mat, targets, rho.qubit_count)
    return DensityMatrix(rho.shape, mat)


@lru_cache(maxsize=64)
def make_noise(spec: NoiseSpec) -> KrausChannel:
    """
    단일 큐비트 잡음 채널 생성

    p == 0 또는 kind == none 이면 항등 채널을 반환합니다.

    Examples
    --------
    >>> len(make_noise(NoiseSpec(NoiseKind.DEPOLARIZING, 0.1)).kraus_ops)
    4
    """
    if spec.is_trivial:
        return KrausChannel.identity(1)
    p = spec.p
    if spec.kind is NoiseKind.DEPOLARIZING:
        ops = (np.sqrt(1 - p) * PAULI_I, np.sqrt(p / 3) * PAULI_X, np.sqrt(p / 3) * PAULI_Y, np.sqrt(p / 3) * PAULI_Z)
    elif spec.kind is NoiseKind.BIT_FLIP:
        ops = (np.sqrt(1 - p) * PAULI_I, np.sqrt(p) * PAULI_X)
    else:
        ops = (
            np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=np.complex128),
            np.array([[0, np.sqrt(p)], [0, 0]], dtype=np.complex128),
        )
    return KrausChannel(1, ops)


def inject_noise_matrix(mat: CMatrix, spec: NoiseSpec, touched: Sequence[int], qubit_count: int) -> CMatrix:
    sop = make_noise(spec).superoperator
    for qubit in touched:
        mat = apply_superoperator(sop, mat, [qubit], qubit_count)
    return mat


def inject_noise(
        rho: DensityMatrix,
        spec: NoiseSpec,
        touched: Sequence[int],
        site: NoiseSite = NoiseSite.SYSTEM_LAYER,
    ) -> DensityMatrix:
    """
    건드린 각 큐비트에 단일 큐비트 잡음을 독립적으로 적용

    kind == none, p == 0, 또는 location이 호출 지점(site)을 제외하면
    입력을 그대로 반환합니다.
    """
    if not spec.applies_at(site):
        return rho
    return DensityMatrix(rho.shape, inject_noise_matrix(rho.mat, spec, touched, rho.qubit_count))


def _require_unitary(v_sa: CMatrix, n: int, m: int, operation: str) -> CMatrix:
    v = np.asarray(v_sa, dtype=np.complex128)
    dim = 2 ** (n + m)
    if v.shape != (dim, dim):
        raise ContractViolationException(operation, f"dilation shape {v.shape} does not match n={n}, m={m}")
    if not is_unitary(v, RECON_TOL):
        raise ContractViolationException(operation, "dilation is not unitary within 1e-9")
    return v


def ancilla_zero(m: int) -> CMatrix:
    dim = 2 ** m
    zero = np.zeros((dim, dim), dtype=np.complex128)
    zero[0, 0] = 1.0
    return zero


def stinespring_apply(v_sa: npt.ArrayLike, rho_s: DensityMatrix, m: int) -> DensityMatrix:
    """
    Stinespring 확장 적용 - Tr_A[V (ρ_S ⊗ |0⟩⟨0|^{⊗m}) V†]

    Raises
    ------
    ContractViolationException
        V가 유니터리가 아니거나 차원이 2^(n+m)이 아닌 경우
    """
    n = rho_s.qubit_count
    v = _require_unitary(v_sa, n, m, "stinespring_apply")
    joint = np.kron(rho_s.mat, ancilla_zero(m))
    evolved = v @ joint @ v.conj().T
    return DensityMatrix(rho_s.shape, partial_trace(evolved, rho_s.shape, RegisterShape(m), "back"))


def kraus_from_stinespring(v_sa: npt.ArrayLike, n: int, m: int) -> KrausChannel:
    """
    Stinespring 유니터리에서 Kraus 연산자 추출 - K_i = ⟨i|_A V_SA |0⟩_A

    Returns
    -------
    KrausChannel
        2^m 개의 2^n × 2^n Kraus 연산자 (일부는 0일 수 있음)

    Examples
    --------
    시스템이 안실라를 제어하는 CNOT은 위상 소실(dephasing) 채널입니다:

    >>> ch = kraus_from_stinespring(cnot, 1, 1)
    >>> ch.kraus_ops[0].real, ch.kraus_ops[1].real
    (array([[1., 0.], [0., 0.]]), array([[0., 0.], [0., 1.]]))
    """
    v = _require_unitary(v_sa, n, m, "kraus_from_stinespring")
    ds, da = 2 ** n, 2 ** m
    blocks = v.reshape(ds, da, ds, da)
    return KrausChannel(n, tuple(blocks[:, i, :, 0] for i in range(da)))


def make_reset(k: int, q: float = 1.0) -> KrausChannel:
    """
    k 큐비트 리셋 채널의 Kraus 형태

    (1−q)ρ + q(Tr_R[ρ] ⊗ |0⟩⟨0|_R) = {√(1−q) I} ∪ {√q |0⟩⟨i|}_i
    """
    if not 0.0 < q <= 1.0:
        raise ContractViolationException("reset_channel", f"q must lie in (0, 1], got {q}")
    dim = 2 ** k
    ops = []
    if q < 1.0:
        ops.append(np.sqrt(1.0 - q) * np.eye(dim, dtype=np.complex128))
    for i in range(dim):
        op = np.zeros((dim, dim), dtype=np.complex128)
        op[0, i] = np.sqrt(q)
        ops.append(op)
    return KrausChannel(k, tuple(ops))


def reset_channel(rho: DensityMatrix, targets: Sequence[int], q: float = 1.0) -> DensityMatrix:
    """
    지정된 큐비트를 확률 q로 |0⟩으로 리셋

    q = 1은 완전 리셋이며 멱등(idempotent)입니다.

    Raises
    ------
    ContractViolationException
        q가 (0, 1] 밖인 경우
    """
    return apply_kraus(make_reset(len(targets), q), rho, targets)
