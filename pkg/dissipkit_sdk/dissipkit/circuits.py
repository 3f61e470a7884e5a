"""
dissipkit 회로 - 게이트 정의, 매개변수화된 안사츠, 잡음 회로 적용

이 모듈은 시스템 전용 변분 블록 U_vqe 와 소산 블록 V_SA(θ) 를 구성하고,
밀도 행렬에 (잡음과 함께) 적용합니다.

Block Architectures
-------------------

**U_vqe (build_vqe_block)** - 하드웨어 효율형, 층마다:

```
q0 ─ RY ─ RZ ─●──────
q1 ─ RY ─ RZ ─●──●───
q2 ─ RY ─ RZ ────●───     (× L_u 층, 층당 2n 매개변수)
```

**V_SA (build_dissipative_block)** - 완전 연결 시스템-안실라 iSWAP 메시를 거울 순서로 두 번:

```mermaid
graph LR
    L1["RY·RZ<br/>모든 n+m 큐비트"] --> MESH["iSWAP(i, n+j)<br/>(i, j) 사전식 순서<br/>n·m 개"]
    MESH --> L2["RY·RZ<br/>모든 n+m 큐비트"]
    L2 --> BACK["iSWAP 메시<br/>역순"]
    BACK --> L3["RY·RZ<br/>모든 n+m 큐비트"]
    style MESH fill:#e1ffe1,stroke:#00cc00,stroke-width:2px
    style BACK fill:#e1ffe1,stroke:#00cc00,stroke-width:2px
```

매개변수 수는 6(n+m), iSWAP 수는 2nm 입니다. iSWAP² = Z⊗Z 이고 iSWAP 켤레가
국소 Z를 국소 Z로 옮기므로, 가운데 층이 0이면 두 메시의 곱은 Z 곱이 되고
마지막 층의 RZ(π) 로 상쇄됩니다 (dissipative_identity_params). 즉 블록은
시스템에 대한 항등 채널을 포함하며, 가운데 층이 결합 세기를 조절합니다.

Parameter Layout
----------------

매개변수 벡터는 실행 전체에서 하나의 평탄한 벡터이며, 각 블록은
param_offset 으로 자기 구간 θ[offset : offset + param_count] 를 가집니다.
ParamCircuit 내부의 param_index 는 블록 로컬 인덱스 [0, param_count) 입니다.

Gate Matrices
-------------

- RX(θ) = [[cos θ/2, −i sin θ/2], [−i sin θ/2, cos θ/2]]
- RY(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]
- RZ(θ) = diag(e^{−iθ/2}, e^{iθ/2})
- CZ = diag(1, 1, 1, −1)
- ISWAP: |01⟩ → i|10⟩, |10⟩ → i|01⟩
- CNOT: 첫 번째 target이 제어 큐비트

See Also
--------
dissipkit.engine : 블록 배치와 재귀
dissipkit.channels : 게이트 후 잡음 (inject_noise)
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from .channels import NoiseSite, NoiseSpec, inject_noise_matrix
from .exc import ContractViolationException
from .qmath import CMatrix, apply_left, apply_superoperator
from .states import DensityMatrix


class GateKind(Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CZ = "CZ"
    ISWAP = "ISWAP"
    CNOT = "CNOT"

    @property
    def is_rotation(self) -> bool:
        return self in (GateKind.RX, GateKind.RY, GateKind.RZ)


_FIXED_GATES = {
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(np.complex128),
    GateKind.ISWAP: np.array(
        [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
    ),
    GateKind.CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
    ),
}
for _matrix in _FIXED_GATES.values():
    _matrix.flags.writeable = False


@dataclass(frozen=True)
class Gate:
    """
    단일 게이트

    Attributes
    ----------
    kind : GateKind
    targets : Tuple[int, ...]
        회전 게이트는 1개, CZ/ISWAP/CNOT은 서로 다른 2개
    param_index : int, optional
        회전 게이트에만 존재 (블록 로컬 인덱스)
    """
    kind: GateKind
    targets: Tuple[int, ...]
    param_index: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        if self.kind.is_rotation:
            if len(self.targets) != 1 or self.param_index is None:
                raise ContractViolationException(
                    "Gate", f"{self.kind.value} needs exactly one target and a param_index"
                )
        else:
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise ContractViolationException(
                    "Gate", f"{self.kind.value} needs two distinct targets, got {self.targets}"
                )
            if self.param_index is not None:
                raise ContractViolationException("Gate", f"{self.kind.value} takes no parameter")


def gate_matrix(g: Gate, theta: Optional[float] = None) -> CMatrix:
    """
    게이트의 유니터리 행렬

    Parameters
    ----------
    g : Gate
    theta : float, optional
        회전 게이트일 때만 지정

    Raises
    ------
    ContractViolationException
        매개변수 누락 또는 불필요한 매개변수

    Examples
    --------
    >>> gate_matrix(Gate(GateKind.RZ, (0,), 0), np.pi).round(12)
    array([[0.-1.j, 0.+0.j],
           [0.+0.j, 0.+1.j]])
    """
    if not g.kind.is_rotation:
        if theta is not None:
            raise ContractViolationException("gate_matrix", f"{g.kind.value} takes no parameter")
        return _FIXED_GATES[g.kind]
    if theta is None:
        raise ContractViolationException("gate_matrix", f"{g.kind.value} requires a rotation angle")
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    if g.kind is GateKind.RX:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if g.kind is GateKind.RY:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=np.complex128)


@dataclass(frozen=True)
class ParamCircuit:
    """
    매개변수화된 회로 - 순서 있는 게이트 목록과 로컬 매개변수 수

    Attributes
    ----------
    qubit_count : int
    gates : Tuple[Gate, ...]
    param_count : int
    param_offset : int
        전역 매개변수 벡터에서의 시작 위치
    noise_site : NoiseSite
        잡음 주입 시 호출 지점 (U_vqe: SYSTEM_LAYER, V_SA: DISSIPATIVE_BLOCK)

    Raises
    ------
    ContractViolationException
        param_index 범위 위반 / 중복 사용 / 큐비트 범위 위반
    """
    qubit_count: int
    gates: Tuple[Gate, ...]
    param_count: int
    param_offset: int = 0
    noise_site: NoiseSite = NoiseSite.SYSTEM_LAYER

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        used = sorted(g.param_index for g in self.gates if g.param_index is not None)
        if used != list(range(self.param_count)):
            raise ContractViolationException(
                "ParamCircuit", "every parameter index in [0, param_count) must be used by exactly one gate"
            )
        for g in self.gates:
            if max(g.targets) >= self.qubit_count:
                raise ContractViolationException(
                    "ParamCircuit", f"gate {g.kind.value} targets {g.targets} exceed {self.qubit_count} qubit(s)"
                )

    def block_params(self, theta: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """전역 매개변수 벡터에서 이 블록의 구간을 잘라냄"""
        theta = np.asarray(theta, dtype=float)
        return theta[self.param_offset:self.param_offset + self.param_count]


def _rotation_layer(qubits: Sequence[int], kinds: Sequence[GateKind], start: int) -> List[Gate]:
    gates = []
    index = start
    for qubit in qubits:
        for kind in kinds:
            gates.append(Gate(kind, (qubit,), index))
            index += 1
    return gates


def build_vqe_block(n: int, layers: int, param_offset: int = 0) -> ParamCircuit:
    """
    시스템 전용 변분 블록 U_vqe

    층마다 모든 큐비트에 RY → RZ (층당 2n 매개변수) 후 CZ 체인 (i, i+1).

    Examples
    --------
    >>> c = build_vqe_block(3, 2)
    >>> c.param_count, len(c.gates)
    (12, 16)
    """
    if n < 1 or layers < 1:
        raise ContractViolationException("build_vqe_block", f"need n >= 1 and layers >= 1, got n={n}, layers={layers}")
    gates: List[Gate] = []
    for layer in range(layers):
        gates.extend(_rotation_layer(range(n), (GateKind.RY, GateKind.RZ), 2 * n * layer))
        gates.extend(Gate(GateKind.CZ, (q, q + 1)) for q in range(n - 1))
    return ParamCircuit(n, tuple(gates), 2 * n * layers, param_offset, NoiseSite.SYSTEM_LAYER)


def build_dissipative_block(n: int, m: int, param_offset: int = 0) -> ParamCircuit:
    """
    소산 블록 V_SA(θ) - n 시스템 + m 안실라 큐비트

    (i) 모든 큐비트에 RY → RZ, (ii) (system i, ancilla j) 사전식 순서의
    iSWAP 메시, (iii) 모든 큐비트에 RY → RZ, (iv) 같은 메시를 역순으로,
    (v) 모든 큐비트에 RY → RZ. 총 6(n+m) 매개변수, 2nm 개의 iSWAP.

    Examples
    --------
    >>> c = build_dissipative_block(3, 5)
    >>> c.param_count, sum(g.kind is GateKind.ISWAP for g in c.gates)
    (48, 30)
    """
    if n < 1 or m < 1:
        raise ContractViolationException("build_dissipative_block", f"need n >= 1 and m >= 1, got n={n}, m={m}")
    qubits = range(n + m)
    local = (GateKind.RY, GateKind.RZ)
    mesh = [Gate(GateKind.ISWAP, pair) for pair in _mesh_pairs(n, m)]
    gates = _rotation_layer(qubits, local, 0)
    gates.extend(mesh)
    gates.extend(_rotation_layer(qubits, local, 2 * (n + m)))
    gates.extend(reversed(mesh))
    gates.extend(_rotation_layer(qubits, local, 4 * (n + m)))
    return ParamCircuit(n + m, tuple(gates), 6 * (n + m), param_offset, NoiseSite.DISSIPATIVE_BLOCK)


def _mesh_pairs(n: int, m: int) -> List[Tuple[int, int]]:
    return [(i, n + j) for i in range(n) for j in range(m)]


def dissipative_identity_params(n: int, m: int) -> npt.NDArray[np.float64]:
    """
    소산 블록 유니터리가 (전역 위상을 제외하고) 항등이 되는 매개변수

    가운데 층이 0이면 메시 · 역순 메시는 Z 곱입니다. 안쪽 쌍부터 바깥으로
    iSWAP·P·iSWAP = (Z_a Z_b) · swap_ab(P) 를 따라가 Z가 남는 큐비트를 구하고,
    그 큐비트의 마지막 RZ에 π를 넣어 상쇄합니다.

    Examples
    --------
    >>> dissipative_identity_params(1, 1)[8:]
    array([0.        , 3.14159265, 0.        , 3.14159265])
    """
    if n < 1 or m < 1:
        raise ContractViolationException("dissipative_identity_params", f"need n >= 1 and m >= 1, got n={n}, m={m}")
    z_qubits: set = set()
    for a, b in reversed(_mesh_pairs(n, m)):
        swapped = {b if q == a else a if q == b else q for q in z_qubits}
        z_qubits = swapped ^ {a, b}
    theta = np.zeros(6 * (n + m))
    for q in z_qubits:
        theta[4 * (n + m) + 2 * q + 1] = np.pi
    return theta


def _check_params(c: ParamCircuit, theta: npt.ArrayLike, operation: str) -> npt.NDArray[np.float64]:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != c.param_count:
        raise ContractViolationException(
            operation, f"expected {c.param_count} parameter(s), got {theta.shape[0]}"
        )
    return theta


def _angle(g: Gate, theta: npt.NDArray[np.float64]) -> Optional[float]:
    return None if g.param_index is None else float(theta[g.param_index])


def circuit_unitary(c: ParamCircuit, theta: npt.ArrayLike) -> CMatrix:
    """
    회로 전체의 유니터리 - 게이트 행렬의 순서 있는 곱

    Raises
    ------
    ContractViolationException
        매개변수 수 불일치
    """
    theta = _check_params(c, theta, "circuit_unitary")
    u = np.eye(2 ** c.qubit_count, dtype=np.complex128)
    for g in c.gates:
        u = apply_left(gate_matrix(g, _angle(g, theta)), u, g.targets, c.qubit_count)
    return u


def apply_circuit(
        c: ParamCircuit,
        theta: npt.ArrayLike,
        rho: DensityMatrix,
        noise: Optional[NoiseSpec] = None,
    ) -> DensityMatrix:
    """
    회로를 밀도 행렬에 켤레 작용 ρ → GρG† 으로 순서대로 적용

    잡음이 이 회로의 호출 지점(c.noise_site)에 적용되면 각 게이트 직후
    건드린 큐비트마다 단일 큐비트 잡음 채널을 적용합니다. 그렇지 않으면
    circuit_unitary로 한 번에 켤레 작용합니다.

    Parameters
    ----------
    c : ParamCircuit
    theta : array_like
        블록 로컬 매개변수 (길이 c.param_count)
    rho : DensityMatrix
        c.qubit_count 큐비트 상태
    noise : NoiseSpec, optional

    Raises
    ------
    ContractViolationException
        매개변수 수 또는 큐비트 수 불일치
    """
    theta = _check_params(c, theta, "apply_circuit")
    if rho.qubit_count != c.qubit_count:
        raise ContractViolationException(
            "apply_circuit", f"circuit acts on {c.qubit_count} qubit(s), state has {rho.qubit_count}"
        )
    if noise is None or not noise.applies_at(c.noise_site):
        u = circuit_unitary(c, theta)
        return DensityMatrix(rho.shape, u @ rho.mat @ u.conj().T)
    mat = rho.mat
    for g in c.gates:
        gm = gate_matrix(g, _angle(g, theta))
        mat = apply_superoperator(np.kron(gm, gm.conj()), mat, g.targets, c.qubit_count)
        mat = inject_noise_matrix(mat, noise, g.targets, c.qubit_count)
    return DensityMatrix(rho.shape, mat)
