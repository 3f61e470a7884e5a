"""
dissipkit 해밀토니안 - Pauli 문자열 해밀토니안, 스핀 모델, 정확 대각화

열린 경계 최근접 이웃 스핀 해밀토니안 계열:

    H = Σ_{i=1}^{n−1} (Jx X_iX_{i+1} + Jy Y_iY_{i+1} + Jz Z_iZ_{i+1})
        + Σ_{i=1}^{n} (hx X_i + hy Y_i + hz Z_i)

Benchmark Models
----------------

- **H1**: ΣXX + 0.3ΣZ  (XX 형 모델 + 횡방향 Z 장)
- **H2**: ΣZZ + 0.3ΣX  (횡장 Ising 모델)
- **H3**: ΣXX + ΣYY + 0.3ΣZZ  (XXZ 형 모델)

Text Format
-----------

CLI의 사용자 정의 해밀토니안은 한 줄에 한 항 (계수, Pauli 문자열)입니다.
``#`` 이후는 주석입니다::

    # H1, n = 3
    1.0 XXI
    1.0 IXX
    0.3 ZII
    0.3 IZI
    0.3 IIZ

Usage Examples
--------------

>>> from dissipkit.hamiltonian import benchmark_models, ground_energy
>>> h1, h2, h3 = benchmark_models(3)
>>> e0, psi0 = ground_energy(h1)
"""
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Tuple

import numpy as np

from .exc import ConfigParseException, ContractViolationException
from .qmath import CMatrix, PAULIS, RegisterShape, herm_eig
from .states import PureState

MAX_DENSE_QUBITS = 12


class PauliTerm(NamedTuple):
    coefficient: float
    pauli: str


@dataclass(frozen=True)
class PauliHamiltonian:
    """
    Pauli 문자열의 실수 가중합

    Attributes
    ----------
    qubit_count : int
    terms : Tuple[PauliTerm, ...]
        각 문자열 길이는 qubit_count, 문자는 {I, X, Y, Z}

    Notes
    -----
    - 계수가 실수이므로 구성상 에르미트
    - matrix 속성은 to_dense 결과를 캐시
    """
    qubit_count: int
    terms: Tuple[PauliTerm, ...]

    def __post_init__(self):
        terms = tuple(PauliTerm(float(c), str(p).upper()) for c, p in self.terms)
        for term in terms:
            if len(term.pauli) != self.qubit_count:
                raise ContractViolationException(
                    "PauliHamiltonian", f"Pauli string '{term.pauli}' does not have length {self.qubit_count}"
                )
            if set(term.pauli) - set(PAULIS):
                raise ContractViolationException(
                    "PauliHamiltonian", f"Pauli string '{term.pauli}' has labels outside I/X/Y/Z"
                )
            if not math.isfinite(term.coefficient):
                raise ContractViolationException("PauliHamiltonian", f"non-finite coefficient for '{term.pauli}'")
        object.__setattr__(self, "terms", terms)

    @cached_property
    def matrix(self) -> CMatrix:
        return to_dense(self)


@dataclass(frozen=True)
class SpinModelSpec:
    """열린 경계 최근접 이웃 스핀 모델 결합 상수 (무차원 에너지 단위)"""
    n: int
    jx: float = 0.0
    jy: float = 0.0
    jz: float = 0.0
    hx: float = 0.0
    hy: float = 0.0
    hz: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ContractViolationException("SpinModelSpec", f"n must be >= 2, got {self.n}")


def _pauli_string(n: int, labels: dict) -> str:
    return "".join(labels.get(i, "I") for i in range(n))


def build_spin_model(spec: SpinModelSpec) -> PauliHamiltonian:
    """
    스핀 모델 해밀토니안 구성 (계수가 0인 항은 생략)

    Examples
    --------
    >>> h = build_spin_model(SpinModelSpec(3, jx=1.0, hz=0.3))
    >>> [t.pauli for t in h.terms]
    ['XXI', 'IXX', 'ZII', 'IZI', 'IIZ']
    """
    n = spec.n
    terms = []
    for coupling, label in ((spec.jx, "X"), (spec.jy, "Y"), (spec.jz, "Z")):
        if coupling != 0.0:
            terms.extend(PauliTerm(coupling, _pauli_string(n, {i: label, i + 1: label})) for i in range(n - 1))
    for field, label in ((spec.hx, "X"), (spec.hy, "Y"), (spec.hz, "Z")):
        if field != 0.0:
            terms.extend(PauliTerm(field, _pauli_string(n, {i: label})) for i in range(n))
    return PauliHamiltonian(n, tuple(terms))


def benchmark_models(n: int) -> Tuple[PauliHamiltonian, PauliHamiltonian, PauliHamiltonian]:
    """(H1, H2, H3) - 모두 열린 경계"""
    return (
        build_spin_model(SpinModelSpec(n, jx=1.0, hz=0.3)),
        build_spin_model(SpinModelSpec(n, jz=1.0, hx=0.3)),
        build_spin_model(SpinModelSpec(n, jx=1.0, jy=1.0, jz=0.3)),
    )


def model_by_name(name: str, n: int) -> PauliHamiltonian:
    """'H1' / 'H2' / 'H3' 이름으로 벤치마크 모델 선택"""
    names = ("H1", "H2", "H3")
    key = name.upper()
    if key not in names:
        raise ContractViolationException("model_by_name", f"unknown model '{name}', expected one of {names}")
    return benchmark_models(n)[names.index(key)]


def to_dense(h: PauliHamiltonian) -> CMatrix:
    """
    밀집 행렬 Σ_k c_k ⊗_i σ_{k,i}

    Raises
    ------
    ContractViolationException
        qubit_count > 12
    """
    if h.qubit_count > MAX_DENSE_QUBITS:
        raise ContractViolationException(
            "to_dense", f"{h.qubit_count} qubits exceed the dense limit of {MAX_DENSE_QUBITS}"
        )
    dim = 2 ** h.qubit_count
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for coefficient, pauli in h.terms:
        term = np.ones((1, 1), dtype=np.complex128)
        for label in pauli:
            term = np.kron(term, PAULIS[label])
        mat += coefficient * term
    return mat


def ground_energy(h: PauliHamiltonian) -> Tuple[float, PureState]:
    """
    정확 대각화 기준값 - 최소 고유값과 대응 단위 고유벡터

    축퇴된 바닥 상태 공간에서는 고유값 솔버가 내놓은 벡터를 반환합니다.
    """
    values, vectors = herm_eig(h.matrix)
    return float(values[0]), PureState(RegisterShape(h.qubit_count), vectors[:, 0])


def parse_pauli_text(text: str) -> PauliHamiltonian:
    """
    "계수 문자열" 줄 형식의 해밀토니안 텍스트 파싱

    Raises
    ------
    ConfigParseException
        형식이 잘못된 줄 (줄 번호 포함) 또는 빈 문서
    """
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigParseException(f"expected '<coefficient> <pauli>', got '{raw.strip()}'", line=lineno)
        try:
            coefficient = float(parts[0])
        except ValueError as error:
            raise ConfigParseException(f"invalid coefficient '{parts[0]}'", line=lineno) from error
        terms.append(PauliTerm(coefficient, parts[1].upper()))
    if not terms:
        raise ConfigParseException("Hamiltonian text contains no terms")
    lengths = {len(t.pauli) for t in terms}
    if len(lengths) != 1:
        raise ConfigParseException(f"Pauli strings have inconsistent lengths {sorted(lengths)}")
    try:
        return PauliHamiltonian(lengths.pop(), tuple(terms))
    except ContractViolationException as error:
        raise ConfigParseException(error.detail) from error


def format_pauli_text(h: PauliHamiltonian) -> str:
    return "".join(f"{coefficient!r} {pauli}\n" for coefficient, pauli in h.terms)
