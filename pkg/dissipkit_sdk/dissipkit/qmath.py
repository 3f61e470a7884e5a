"""
dissipkit 수치 기반 - 복소 밀집 선형대수

이 모듈은 다른 모든 모듈이 사용하는 수치 기반을 제공합니다.
텐서곱, 부분 대각합(partial trace), 에르미트 고유분해(cyclic Jacobi),
그리고 큐비트 축 위에서의 국소 연산자/초연산자(superoperator) 적용을 담당합니다.

Conventions
-----------

**저장 형식**: 모든 행렬은 row-major numpy complex128 배열 (``CMatrix``)

**큐비트 순서**: 큐비트 0이 기저 상태 정수의 최상위 비트(MSB)입니다.
결합 레지스터에서는 시스템 큐비트가 안실라 큐비트보다 앞에 옵니다.

```mermaid
graph LR
    Q0[qubit 0<br/>MSB] --> Q1[qubit 1] --> QN[qubit n-1<br/>LSB]
    QN --> A0[ancilla 0] --> AM[ancilla m-1]
    style Q0 fill:#e1f5ff,stroke:#0066cc
    style A0 fill:#e1ffe1,stroke:#00cc00
```

**허용 오차**: 모든 기본 허용 오차는 이 모듈의 상수로 한 곳에서 관리합니다.

- EQ_TOL = 1e-10: 동등성 / 에르미트성 / 대각합 검사
- RECON_TOL = 1e-9: 고유분해 재구성 잔차, PSD 및 피델리티 경계
- PSD_CUTOFF = 1e-12: 행렬 제곱근에서 0으로 취급하는 고유값 크기

Core Concepts
-------------

**국소 연산 (index arithmetic)**:
n-큐비트 행렬을 ``[2]*n`` 축의 텐서로 보고 대상 큐비트 축에만
``numpy.tensordot``으로 연산자를 수축합니다. 전체 차원 크로네커 패딩 없이
O(4^n · 4^k) 비용으로 k-큐비트 연산을 적용합니다.

**Cyclic Jacobi 고유분해**:
복소 에르미트 행렬의 (p, q) 비대각 원소를 위상 회전 + 실수 Jacobi 회전으로
순차 소거합니다. 차원 256 이하에서 사용하며, 그보다 큰 행렬은
``numpy.linalg.eigh``로 위임합니다.

Usage Examples
--------------

>>> import numpy as np
>>> from dissipkit.qmath import tensor, partial_trace, RegisterShape
>>> rho = tensor(np.eye(2) / 2, np.array([[1, 0], [0, 0]]))
>>> partial_trace(rho, RegisterShape(1), RegisterShape(1), "back")
array([[0.5+0.j, 0. +0.j],
       [0. +0.j, 0.5+0.j]])

>>> from dissipkit.qmath import herm_eig
>>> values, vectors = herm_eig(np.array([[0, 1], [1, 0]]))
>>> values
array([-1.,  1.])

See Also
--------
dissipkit.states : 밀도 행렬과 피델리티
dissipkit.channels : Kraus 채널 적용
"""
import math
from dataclasses import dataclass
from typing import Literal, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from .exc import ContractViolationException, NumericalCorruptionException

CMatrix = npt.NDArray[np.complex128]

EQ_TOL = 1e-10
RECON_TOL = 1e-9
PSD_CUTOFF = 1e-12
MAX_DIM = 2 ** 16
JACOBI_MAX_DIM = 256
JACOBI_MAX_SWEEPS = 64

PAULI_I = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


@dataclass(frozen=True)
class RegisterShape:
    """
    큐비트 레지스터의 형태 (큐비트 수와 힐베르트 공간 차원)

    Attributes
    ----------
    qubit_count : int
        큐비트 수
    dim : int
        2 ** qubit_count
    """
    qubit_count: int

    def __post_init__(self):
        if self.qubit_count < 0:
            raise ContractViolationException(
                "RegisterShape", f"qubit_count must be >= 0, got {self.qubit_count}"
            )

    @property
    def dim(self) -> int:
        return 2 ** self.qubit_count

    @classmethod
    def from_dim(cls, dim: int) -> "RegisterShape":
        qubit_count = int(dim).bit_length() - 1
        if dim < 1 or 2 ** qubit_count != dim:
            raise ContractViolationException("RegisterShape", f"dim {dim} is not a power of two")
        return cls(qubit_count)


def as_cmatrix(a: npt.ArrayLike, *, operation: str = "as_cmatrix") -> CMatrix:
    """
    입력을 유한한 2차원 complex128 배열로 변환

    Raises
    ------
    ContractViolationException
        2차원이 아닌 입력
    NumericalCorruptionException
        NaN 또는 Inf 원소 포함
    """
    mat = np.asarray(a, dtype=np.complex128)
    if mat.ndim != 2:
        raise ContractViolationException(operation, f"expected a 2-D matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise NumericalCorruptionException(f"{operation} input", "non-finite entries")
    return mat


def _require_square(mat: CMatrix, operation: str) -> None:
    if mat.shape[0] != mat.shape[1]:
        raise ContractViolationException(operation, f"expected a square matrix, got {mat.shape}")


def tensor(a: npt.ArrayLike, b: npt.ArrayLike) -> CMatrix:
    """
    크로네커 곱 a ⊗ b (a의 인덱스가 최상위)

    Parameters
    ----------
    a, b : array_like
        유한한 2차원 행렬

    Returns
    -------
    CMatrix
        (a.rows * b.rows) × (a.cols * b.cols) 행렬

    Raises
    ------
    ContractViolationException
        결과 차원이 2^16을 초과하는 경우

    Examples
    --------
    >>> tensor(np.eye(2), np.eye(2)).shape
    (4, 4)
    """
    left = as_cmatrix(a, operation="tensor")
    right = as_cmatrix(b, operation="tensor")
    rows = left.shape[0] * right.shape[0]
    cols = left.shape[1] * right.shape[1]
    if max(rows, cols) > MAX_DIM:
        raise ContractViolationException("tensor", f"result dimension {rows}x{cols} exceeds {MAX_DIM}")
    return np.kron(left, right)


def partial_trace(
        rho: npt.ArrayLike,
        shape_keep: RegisterShape,
        shape_drop: RegisterShape,
        drop_position: Literal["front", "back"] = "back",
    ) -> CMatrix:
    """
    부분 대각합 - 앞(front) 또는 뒤(back) 서브시스템을 추적 제거

    Parameters
    ----------
    rho : array_like
        (keep.dim * drop.dim) 정방 행렬
    shape_keep : RegisterShape
        남길 서브시스템
    shape_drop : RegisterShape
        추적 제거할 서브시스템
    drop_position : {"front", "back"}
        제거할 서브시스템의 위치. 안실라는 항상 "back"

    Returns
    -------
    CMatrix
        keep.dim × keep.dim 행렬 (대각합 보존)

    Raises
    ------
    ContractViolationException
        차원 불일치 또는 정방 행렬이 아닌 입력

    Examples
    --------
    >>> bell = np.zeros((4, 4)); bell[0, 0] = bell[0, 3] = bell[3, 0] = bell[3, 3] = 0.5
    >>> partial_trace(bell, RegisterShape(1), RegisterShape(1), "front").real
    array([[0.5, 0. ],
           [0. , 0.5]])
    """
    mat = as_cmatrix(rho, operation="partial_trace")
    _require_square(mat, "partial_trace")
    keep, drop = shape_keep.dim, shape_drop.dim
    if mat.shape[0] != keep * drop:
        raise ContractViolationException(
            "partial_trace", f"matrix dim {mat.shape[0]} != {keep} * {drop}"
        )
    if drop_position == "back":
        return np.einsum("ajbj->ab", mat.reshape(keep, drop, keep, drop))
    if drop_position == "front":
        return np.einsum("jajb->ab", mat.reshape(drop, keep, drop, keep))
    raise ContractViolationException("partial_trace", f"unknown drop_position '{drop_position}'")


def matmul(a: npt.ArrayLike, b: npt.ArrayLike) -> CMatrix:
    left = as_cmatrix(a, operation="matmul")
    right = as_cmatrix(b, operation="matmul")
    if left.shape[1] != right.shape[0]:
        raise ContractViolationException("matmul", f"cannot multiply {left.shape} by {right.shape}")
    return left @ right


def adjoint(a: npt.ArrayLike) -> CMatrix:
    return as_cmatrix(a, operation="adjoint").conj().T


def trace(a: npt.ArrayLike) -> complex:
    mat = as_cmatrix(a, operation="trace")
    _require_square(mat, "trace")
    return complex(np.trace(mat))


def frobenius_norm(a: npt.ArrayLike) -> float:
    return float(np.linalg.norm(as_cmatrix(a, operation="frobenius_norm")))


def is_hermitian(a: CMatrix, tol: float = EQ_TOL) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def is_unitary(a: CMatrix, tol: float = RECON_TOL) -> bool:
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])), initial=0.0) <= tol)


def _jacobi_eig(h: CMatrix) -> Tuple[npt.NDArray[np.float64], CMatrix]:
    a = h.copy()
    dim = a.shape[0]
    v = np.eye(dim, dtype=np.complex128)
    for _ in range(JACOBI_MAX_SWEEPS):
        if not np.any(a[~np.eye(dim, dtype=bool)]):
            break
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                g = complex(a[p, q])
                magnitude = abs(g)
                alpha = float(a[p, p].real)
                beta = float(a[q, q].real)
                if 100.0 * magnitude + abs(alpha) == abs(alpha) and 100.0 * magnitude + abs(beta) == abs(beta):
                    # below rounding of both diagonal entries
                    a[p, q] = a[q, p] = 0.0
                    continue
                phase = g / magnitude
                tau = (beta - alpha) / (2.0 * magnitude)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # phase rotation diag(1, e^{-iφ}) followed by the real rotation
                block = np.array(
                    [[c, s], [-s * phase.conjugate(), c * phase.conjugate()]],
                    dtype=np.complex128,
                )
                idx = [p, q]
                a[:, idx] = a[:, idx] @ block
                a[idx, :] = block.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = alpha - t * magnitude
                a[q, q] = beta + t * magnitude
                v[:, idx] = v[:, idx] @ block
    return np.real(np.diag(a)).copy(), v


def herm_eig(h: npt.ArrayLike) -> Tuple[npt.NDArray[np.float64], CMatrix]:
    """
    에르미트 고유분해 - 오름차순 고유값과 고유벡터(열)

    입력은 먼저 (h + h†)/2 로 대칭화됩니다. 차원 256 이하에서는
    cyclic Jacobi 회전법을, 그 이상에서는 numpy.linalg.eigh를 사용합니다.

    Parameters
    ----------
    h : array_like
        정방 에르미트 행렬 (1e-10 이내)

    Returns
    -------
    eigenvalues : ndarray of float
        오름차순 정렬된 실수 고유값
    eigenvectors : CMatrix
        열벡터가 고유벡터인 유니터리 행렬 (h ≈ V diag(λ) V†)

    Raises
    ------
    ContractViolationException
        정방 행렬이 아닌 입력
    NumericalCorruptionException
        재구성 잔차가 1e-9·max(1, ‖h‖_F)를 초과하는 경우

    Examples
    --------
    >>> values, _ = herm_eig(np.diag([1.0, -1.0]))
    >>> values
    array([-1.,  1.])

    Notes
    -----
    - 축퇴 고유공간의 고유벡터 선택은 고유값 솔버가 정함
    - Jacobi는 작은 고유값에서도 높은 상대 정확도를 가짐
    """
    mat = as_cmatrix(h, operation="herm_eig")
    _require_square(mat, "herm_eig")
    sym = (mat + mat.conj().T) / 2.0
    if sym.shape[0] <= JACOBI_MAX_DIM:
        values, vectors = _jacobi_eig(sym)
    else:
        values, vectors = np.linalg.eigh(sym)
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    residual = np.linalg.norm(sym - (vectors * values) @ vectors.conj().T)
    if residual > RECON_TOL * max(1.0, float(np.linalg.norm(sym))):
        raise NumericalCorruptionException("herm_eig reconstruction residual", float(residual))
    return values, vectors


def psd_sqrt(a: CMatrix) -> CMatrix:
    """PSD 행렬의 제곱근 (PSD_CUTOFF 이하 고유값은 0으로 취급)"""
    values, vectors = herm_eig(a)
    roots = np.sqrt(np.where(values > PSD_CUTOFF, values, 0.0))
    return (vectors * roots) @ vectors.conj().T


def _check_targets(targets: Sequence[int], qubit_count: int, operation: str) -> list:
    targets = [int(q) for q in targets]
    if len(set(targets)) != len(targets):
        raise ContractViolationException(operation, f"targets must be distinct, got {targets}")
    for q in targets:
        if not 0 <= q < qubit_count:
            raise ContractViolationException(
                operation, f"qubit index {q} out of range for {qubit_count} qubits"
            )
    return targets


def apply_left(op: CMatrix, mat: CMatrix, targets: Sequence[int], qubit_count: int) -> CMatrix:
    """
    (op on targets) @ mat 을 텐서 수축으로 계산

    mat의 행 인덱스를 qubit_count개의 큐비트 축으로 보고, 대상 축에만
    op를 수축합니다. 열 수는 임의입니다 (상태 벡터는 열 하나).
    """
    targets = _check_targets(targets, qubit_count, "apply_left")
    k = len(targets)
    if op.shape != (2 ** k, 2 ** k):
        raise ContractViolationException("apply_left", f"operator shape {op.shape} does not act on {k} qubit(s)")
    cols = mat.shape[1]
    state = mat.reshape([2] * qubit_count + [cols])
    out = np.tensordot(op.reshape([2] * (2 * k)), state, axes=(list(range(k, 2 * k)), targets))
    out = np.moveaxis(out, list(range(k)), targets)
    return out.reshape(2 ** qubit_count, cols)


def apply_local_operator(op: CMatrix, rho: CMatrix, targets: Sequence[int], qubit_count: int) -> CMatrix:
    """O ρ O† (O는 targets 위의 op)"""
    half = apply_left(op, rho, targets, qubit_count)
    return apply_left(op, half.conj().T, targets, qubit_count).conj().T


def embed_operator(op: CMatrix, targets: Sequence[int], qubit_count: int) -> CMatrix:
    """targets 위의 op를 전체 2^n 차원 행렬로 확장"""
    return apply_left(op, np.eye(2 ** qubit_count, dtype=np.complex128), targets, qubit_count)


def superoperator(kraus_ops: Sequence[CMatrix]) -> CMatrix:
    """
    Kraus 집합의 초연산자 S = Σ K ⊗ K*

    행/열 인덱스 순서는 (ket 대상 큐비트들, bra 대상 큐비트들)입니다.
    """
    return sum(np.kron(k, k.conj()) for k in kraus_ops)


def apply_superoperator(sop: CMatrix, rho: CMatrix, targets: Sequence[int], qubit_count: int) -> CMatrix:
    """
    targets 위의 초연산자를 ρ에 적용

    ρ를 [2]*2n 텐서로 보고 ket 축 targets와 bra 축 n+targets에 동시에
    수축합니다.
    """
    targets = _check_targets(targets, qubit_count, "apply_superoperator")
    k = len(targets)
    if sop.shape != (4 ** k, 4 ** k):
        raise ContractViolationException(
            "apply_superoperator", f"superoperator shape {sop.shape} does not act on {k} qubit(s)"
        )
    axes = targets + [qubit_count + q for q in targets]
    state = rho.reshape([2] * (2 * qubit_count))
    out = np.tensordot(sop.reshape([2] * (4 * k)), state, axes=(list(range(2 * k, 4 * k)), axes))
    out = np.moveaxis(out, list(range(2 * k)), axes)
    dim = 2 ** qubit_count
    return out.reshape(dim, dim)
