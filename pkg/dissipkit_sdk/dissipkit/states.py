"""
dissipkit 양자 상태 - 밀도 행렬, 순수 목표 상태, 피델리티 및 기대값

이 모듈은 시뮬레이터의 상태 타입과 상태에 대한 범함수(functional)를 제공합니다.

Domain Types
------------

1. **DensityMatrix**: 에르미트, 단위 대각합, PSD 행렬 (레지스터 형태 포함)
2. **PureState**: 정규화된 상태 벡터 - 복구 과제의 목표 상태

Target States
-------------

```mermaid
graph LR
    P["|+>^n"] --> DC["dressed cluster<br/>(R_y 층 → CZ 체인) × D"]
    W["W state<br/>weight-1 균등 중첩"]
    PLUS["plus state<br/>모든 진폭 1/√2^n"]
    style DC fill:#fff4e1,stroke:#ff9900
```

- dressed_cluster_state: 각 층 d = 1..D 에서 모든 큐비트에 R_y(α_i^(d))를
  먼저 적용한 뒤 열린 경계 CZ 체인 (i, i+1)을 적용합니다.

Fidelity
--------

- fidelity_pure: F = ⟨ψ|ρ|ψ⟩ (목표가 순수 상태일 때)
- fidelity_general: Uhlmann 피델리티 (Tr√(√σ ρ √σ))²

두 값 모두 경계에서 1e-9 이내의 반올림 오차만 clamp 하며, 그보다 큰
이탈은 NumericalCorruptionException으로 드러냅니다.

Usage Examples
--------------

>>> from dissipkit.states import zero_state, w_state, fidelity_pure
>>> rho = zero_state(3)
>>> fidelity_pure(rho, w_state(3))
0.0

See Also
--------
dissipkit.channels : 상태에 작용하는 CPTP 맵
dissipkit.hamiltonian : expectation()이 사용하는 PauliHamiltonian
"""
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np
import numpy.typing as npt

from .exc import ContractViolationException, NumericalCorruptionException
from .qmath import (
    CMatrix,
    EQ_TOL,
    PSD_CUTOFF,
    RECON_TOL,
    RegisterShape,
    apply_left,
    herm_eig,
    psd_sqrt,
)

if TYPE_CHECKING:
    from .hamiltonian import PauliHamiltonian


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """
    밀도 행렬 - 레지스터 형태와 행렬

    생성 시에는 형태(차원)만 검사합니다. 에르미트성, 대각합, PSD 불변식은
    validated()로 명시적으로 검사합니다 (학습 루프 안에서 불필요한
    고유분해를 피하기 위함).

    Attributes
    ----------
    shape : RegisterShape
        레지스터 형태
    mat : CMatrix
        읽기 전용 dim × dim 행렬
    """
    shape: RegisterShape
    mat: CMatrix

    def __post_init__(self):
        mat = np.array(self.mat, dtype=np.complex128)
        if mat.shape != (self.shape.dim, self.shape.dim):
            raise ContractViolationException(
                "DensityMatrix", f"matrix shape {mat.shape} does not match {self.shape.qubit_count} qubit(s)"
            )
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    @classmethod
    def from_matrix(cls, mat: npt.ArrayLike) -> "DensityMatrix":
        mat = np.asarray(mat, dtype=np.complex128)
        return cls(RegisterShape.from_dim(mat.shape[0]), mat)

    @property
    def qubit_count(self) -> int:
        return self.shape.qubit_count

    def validated(self) -> "DensityMatrix":
        """
        세 가지 불변식을 검사하고 자기 자신을 반환

        Raises
        ------
        NumericalCorruptionException
            비유한 원소, 에르미트성 > 1e-10, |Tr − 1| > 1e-10,
            최소 고유값 < −1e-9
        """
        mat = self.mat
        if not np.all(np.isfinite(mat)):
            raise NumericalCorruptionException("density matrix", "non-finite entries")
        hermiticity = float(np.max(np.abs(mat - mat.conj().T)))
        if hermiticity > EQ_TOL:
            raise NumericalCorruptionException("density matrix hermiticity", hermiticity)
        trace_error = abs(complex(np.trace(mat)) - 1.0)
        if trace_error > EQ_TOL:
            raise NumericalCorruptionException("density matrix trace", 1.0 + trace_error)
        min_eig = float(np.linalg.eigvalsh((mat + mat.conj().T) / 2.0)[0])
        if min_eig < -RECON_TOL:
            raise NumericalCorruptionException("density matrix minimum eigenvalue", min_eig)
        return self


@dataclass(frozen=True, eq=False)
class PureState:
    """
    정규화된 순수 상태 |ψ⟩

    Attributes
    ----------
    shape : RegisterShape
    amplitudes : ndarray of complex
        길이 2^n 진폭 벡터 (2-노름이 1e-10 이내로 1)
    """
    shape: RegisterShape
    amplitudes: npt.NDArray[np.complex128]

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != self.shape.dim:
            raise ContractViolationException(
                "PureState", f"{amps.shape[0]} amplitudes for {self.shape.qubit_count} qubit(s)"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > EQ_TOL:
            raise ContractViolationException("PureState", f"state norm {norm} is not 1")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vector: npt.ArrayLike, *, normalize: bool = False) -> "PureState":
        vec = np.asarray(vector, dtype=np.complex128).reshape(-1)
        if normalize:
            vec = vec / np.linalg.norm(vec)
        return cls(RegisterShape.from_dim(vec.shape[0]), vec)

    @property
    def qubit_count(self) -> int:
        return self.shape.qubit_count

    def projector(self) -> DensityMatrix:
        """|ψ⟩⟨ψ|"""
        return DensityMatrix(self.shape, np.outer(self.amplitudes, self.amplitudes.conj()))


def zero_state(n: int) -> DensityMatrix:
    """
    |0⟩⟨0|^{⊗n} - 모든 큐비트가 0인 기저 상태의 사영자

    Raises
    ------
    ContractViolationException
        n < 1
    """
    if n < 1:
        raise ContractViolationException("zero_state", f"n must be >= 1, got {n}")
    shape = RegisterShape(n)
    mat = np.zeros((shape.dim, shape.dim), dtype=np.complex128)
    mat[0, 0] = 1.0
    return DensityMatrix(shape, mat)


def w_state(n: int) -> PureState:
    """
    W 상태 - weight-1 기저 문자열의 균등 중첩 (각 진폭 1/√n)

    Examples
    --------
    >>> np.flatnonzero(w_state(3).amplitudes)
    array([1, 2, 4])
    """
    if n < 2:
        raise ContractViolationException("w_state", f"n must be >= 2, got {n}")
    shape = RegisterShape(n)
    amps = np.zeros(shape.dim, dtype=np.complex128)
    for qubit in range(n):
        amps[1 << (n - 1 - qubit)] = 1.0 / np.sqrt(n)
    return PureState(shape, amps)


def plus_state(n: int) -> PureState:
    """|+⟩^{⊗n} - 모든 2^n 진폭이 1/√(2^n)"""
    if n < 1:
        raise ContractViolationException("plus_state", f"n must be >= 1, got {n}")
    shape = RegisterShape(n)
    return PureState(shape, np.full(shape.dim, 1.0 / np.sqrt(shape.dim), dtype=np.complex128))


def dressed_cluster_state(n: int, depth: int, angles: Optional[npt.ArrayLike] = None) -> PureState:
    """
    Dressed cluster 상태

    |+⟩^{⊗n}에 D번 반복하여 (모든 큐비트에 R_y(α_i^(d)) → CZ_{i,i+1} 체인)을
    적용합니다. 층 순서는 "회전 먼저, CZ 체인 나중"으로 고정합니다.

    Parameters
    ----------
    n : int
        큐비트 수 (n >= 2)
    depth : int
        층 수 D (0이면 plus_state(n))
    angles : array_like, optional
        D × n 각도 행렬. 생략 시 모든 원소 π/4

    Raises
    ------
    ContractViolationException
        n < 2, depth < 0, angles 형태 불일치
    """
    from .circuits import Gate, GateKind, gate_matrix

    if n < 2:
        raise ContractViolationException("dressed_cluster_state", f"n must be >= 2, got {n}")
    if depth < 0:
        raise ContractViolationException("dressed_cluster_state", f"depth must be >= 0, got {depth}")
    alpha = np.full((depth, n), np.pi / 4) if angles is None else np.asarray(angles, dtype=float)
    if alpha.shape != (depth, n):
        raise ContractViolationException(
            "dressed_cluster_state", f"angles must have shape ({depth}, {n}), got {alpha.shape}"
        )
    vec = plus_state(n).amplitudes.reshape(-1, 1).copy()
    cz = gate_matrix(Gate(GateKind.CZ, (0, 1)))
    for d in range(depth):
        for qubit in range(n):
            ry = gate_matrix(Gate(GateKind.RY, (qubit,), 0), float(alpha[d, qubit]))
            vec = apply_left(ry, vec, [qubit], n)
        for qubit in range(n - 1):
            vec = apply_left(cz, vec, [qubit, qubit + 1], n)
    return PureState.from_vector(vec, normalize=True)


def _clamp_unit_interval(value: float, quantity: str) -> float:
    if value < -RECON_TOL or value > 1.0 + RECON_TOL:
        raise NumericalCorruptionException(quantity, value)
    return min(1.0, max(0.0, value))


def _require_same_shape(a: RegisterShape, b: RegisterShape, operation: str) -> None:
    if a != b:
        raise ContractViolationException(
            operation, f"register shapes differ: {a.qubit_count} vs {b.qubit_count} qubit(s)"
        )


def fidelity_pure(rho: DensityMatrix, target: PureState) -> float:
    """
    순수 목표 상태에 대한 피델리티 F = ⟨ψ|ρ|ψ⟩

    Raises
    ------
    ContractViolationException
        형태 불일치
    NumericalCorruptionException
        허수부 > 1e-9 또는 [0, 1] 밖으로 1e-9 이상 이탈
    """
    _require_same_shape(rho.shape, target.shape, "fidelity_pure")
    psi = target.amplitudes
    value = complex(psi.conj() @ rho.mat @ psi)
    if abs(value.imag) > RECON_TOL:
        raise NumericalCorruptionException("fidelity imaginary part", value.imag)
    return _clamp_unit_interval(value.real, "fidelity_pure")


def fidelity_general(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """
    Uhlmann 피델리티 F(ρ, σ) = (Tr√(√σ ρ √σ))²

    고유분해 제곱근을 사용하며, PSD_CUTOFF 이하의 고유값은 0으로 취급합니다.

    Raises
    ------
    ContractViolationException
        형태 불일치
    NumericalCorruptionException
        ρ 또는 σ의 최소 고유값 < −1e-9
    """
    _require_same_shape(rho.shape, sigma.shape, "fidelity_general")
    for name, state in (("rho", rho), ("sigma", sigma)):
        values, _ = herm_eig(state.mat)
        if values[0] < -RECON_TOL:
            raise NumericalCorruptionException(f"fidelity_general {name} minimum eigenvalue", float(values[0]))
    root_sigma = psd_sqrt(sigma.mat)
    inner = root_sigma @ rho.mat @ root_sigma
    values, _ = herm_eig(inner)
    root_trace = float(np.sum(np.sqrt(np.where(values > PSD_CUTOFF, values, 0.0))))
    return _clamp_unit_interval(root_trace ** 2, "fidelity_general")


def purity(rho: DensityMatrix) -> float:
    """Tr(ρ²)"""
    return float(np.real(np.vdot(rho.mat, rho.mat)))


def expectation(h: "PauliHamiltonian", rho: DensityMatrix) -> float:
    """
    에너지 기대값 Tr[H ρ]

    Raises
    ------
    ContractViolationException
        큐비트 수 불일치
    NumericalCorruptionException
        허수 잔차 > 1e-9
    """
    if h.qubit_count != rho.qubit_count:
        raise ContractViolationException(
            "expectation", f"Hamiltonian acts on {h.qubit_count} qubit(s), state has {rho.qubit_count}"
        )
    value = complex(np.einsum("ij,ji->", h.matrix, rho.mat))
    if abs(value.imag) > RECON_TOL:
        raise NumericalCorruptionException("expectation imaginary part", value.imag)
    return value.real


def random_density_matrix(n: int, rng: np.random.Generator, *, rank: Optional[int] = None) -> DensityMatrix:
    """Ginibre 앙상블에서 무작위 밀도 행렬 추출 (테스트 및 진단용)"""
    dim = 2 ** n
    cols = dim if rank is None else rank
    g = rng.normal(size=(dim, cols)) + 1j * rng.normal(size=(dim, cols))
    mat = g @ g.conj().T
    return DensityMatrix(RegisterShape(n), mat / float(np.trace(mat).real))
