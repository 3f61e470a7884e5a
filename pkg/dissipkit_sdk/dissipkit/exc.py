"""
dissipkit 예외 클래스 - 에러 처리 및 예외 계층

이 모듈은 dissipkit SDK의 모든 커스텀 예외 클래스를 정의합니다.
수치 계산, 설정 파싱, 학습 실행 중 발생할 수 있는 에러 상황을 명확하게
구분하여 적절한 에러 처리와 디버깅을 지원합니다.

Exception Hierarchy
-------------------

```mermaid
classDiagram
    Exception <|-- ContractViolationException
    Exception <|-- NumericalCorruptionException
    Exception <|-- ConfigParseException
    Exception <|-- ConfigValidationException
    Exception <|-- TrainingAbortedException
    Exception <|-- RunExecutionException

    class ContractViolationException {
        +str operation
        +str detail
        입력 계약 위반
    }

    class NumericalCorruptionException {
        +str quantity
        +object value
        허용 오차 초과
    }

    class ConfigParseException {
        +int line
        +str field
    }

    class ConfigValidationException {
        +List~str~ errors
    }

    class TrainingAbortedException {
        +int iteration
        +str reason
    }

    class RunExecutionException {
        +str name
        +Exception error
        원본 예외 포함
    }
```

Exception Categories
--------------------

**1. 계약 위반 (Contract)**:
- ContractViolationException: 차원 불일치, 범위를 벗어난 큐비트 인덱스,
  유니터리가 아닌 입력, 허용 범위를 벗어난 인자
- 발생 시점: qmath / states / channels / circuits / engine 연산 호출 시

**2. 수치 손상 (Numerical)**:
- NumericalCorruptionException: 허수부 잔차, 피델리티 범위 이탈,
  PSD 위반, NaN/Inf 등 허용 오차(1e-9)를 넘는 수치 오류
- 조용히 clamp 하지 않고 예외로 드러냄

**3. 설정 (Config)**:
- ConfigParseException: TOML 문법 오류 또는 필드 타입 오류 (line/field 포함)
- ConfigValidationException: 위반된 모든 불변식을 한 번에 나열

**4. 실행 (Execution)**:
- TrainingAbortedException: 비유한(non-finite) 손실/그래디언트로 학습 중단
- RunExecutionException: CLI 하위 실행 실패, 원본 예외를 error 속성으로 보존

Usage Examples
--------------

>>> from dissipkit.exc import ConfigValidationException
>>> try:
...     cfg = parse_config(text)
... except ConfigValidationException as e:
...     for message in e.errors:
...         print(message)

>>> from dissipkit.exc import RunExecutionException
>>> try:
...     run_variant(...)
... except RunExecutionException as e:
...     logger.error("Run failed", exc_info=e.error)

See Also
--------
dissipkit.config : 설정 파싱 및 검증
dissipkit.cli : 하위 실행 실패 시 에러 매니페스트 기록
"""
from typing import List, Optional


class ContractViolationException(Exception):
    """
    연산의 입력 계약(precondition)이 위반되었을 때의 예외

    Attributes
    ----------
    operation : str
        계약이 위반된 연산 이름 (예: 'partial_trace')
    detail : str
        위반 내용 설명

    Examples
    --------
    >>> from dissipkit.exc import ContractViolationException
    >>> try:
    ...     partial_trace(rho, keep, drop)
    ... except ContractViolationException as e:
    ...     print(e.operation, e.detail)
    """

    def __init__(self, operation: str, detail: str):
        self.operation = operation
        self.detail = detail
        super().__init__(f"Contract violation in '{operation}': {detail}")


class NumericalCorruptionException(Exception):
    """
    수치 결과가 허용 오차를 벗어났을 때의 예외

    Attributes
    ----------
    quantity : str
        문제가 된 양 (예: 'fidelity imaginary part')
    value : object
        관측된 값

    Notes
    -----
    - 경계 근처(1e-9 이내)의 반올림 오차는 clamp 되며 예외가 발생하지 않음
    - 그보다 큰 이탈은 시뮬레이션 버그를 의미하므로 즉시 드러냄
    """

    def __init__(self, quantity: str, value: object):
        self.quantity = quantity
        self.value = value
        super().__init__(f"Numerical corruption in {quantity}: {value!r}")


class ConfigParseException(Exception):
    """
    설정 문서를 파싱할 수 없을 때의 예외

    Attributes
    ----------
    line : int, optional
        문제가 발생한 줄 번호 (TOML 디코더가 제공하는 경우)
    field : str, optional
        문제가 발생한 필드 경로 (예: 'dvqe.learning_rate')
    """

    def __init__(
            self,
            message: str,
            *,
            line: Optional[int] = None,
            field: Optional[str] = None,
        ):
        self.line = line
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(f"Config parse error: {prefix}{message}")


class ConfigValidationException(Exception):
    """
    설정 검증 실패 예외 - 위반된 모든 항목을 포함

    Attributes
    ----------
    errors : List[str]
        위반된 불변식 메시지 목록 (필드 이름 포함)

    Examples
    --------
    >>> try:
    ...     parse_config('task = "dvqe"\\n[dvqe]\\nlearning_rate = -1.0')
    ... except ConfigValidationException as e:
    ...     assert any("dvqe.learning_rate" in msg for msg in e.errors)
    """

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        joined = "; ".join(self.errors)
        super().__init__(f"Invalid config ({len(self.errors)} error(s)): {joined}")


class TrainingAbortedException(Exception):
    """
    비유한 손실 또는 그래디언트로 학습이 중단되었을 때의 예외

    train()은 예외 대신 aborted 상태의 TrainingTrace를 반환하며,
    TrainingTrace.raise_for_status()가 이 예외를 발생시킵니다.

    Attributes
    ----------
    iteration : int
        중단된 반복 번호
    reason : str
        중단 원인
    """

    def __init__(self, iteration: int, reason: str):
        self.iteration = iteration
        self.reason = reason
        super().__init__(f"Training aborted at iteration {iteration}: {reason}")


class RunExecutionException(Exception):
    """
    실험 하위 실행(variant, seed) 중 예외가 발생했을 때의 예외

    원본 예외를 래핑하여 어떤 실행에서 에러가 발생했는지 컨텍스트를 추가합니다.

    Attributes
    ----------
    name : str
        실패한 실행 이름 (예: 'm=3/seed=2')
    error : Exception
        원본 예외 객체
    """

    def __init__(self, name: str, error: Exception):
        self.name = name
        self.error = error
        super().__init__(f"Run '{name}' failed to execute: {error}")
