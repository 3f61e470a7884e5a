"""
dissipkit 타입 정의 - 실험 출력 레코드 구조

CLI가 기록하는 CSV 행과 JSON 보고서의 TypedDict 정의입니다.

Output Files
------------

```mermaid
graph TD
    R[dissipkit run config.toml] --> T["trace_&lt;variant&gt;_seed&lt;k&gt;.csv (TraceRow)"]
    R --> S["summary.json (RunSummary)"]
    R --> SC["scan_summary.csv (ScanRow) + summary.json (ScanSummary)"]
    R --> TM["timing.csv (TimingRow)"]
    R --> D["diag.json / pl_seed&lt;k&gt;.csv (DiagReport)"]
    R --> E["errors.json (ErrorEntry)"]
    R --> A["*.aborted.json (AbortSentinel)"]
```

- 모든 CSV는 고정 헤더를 가지며 모든 행이 전체 열을 채웁니다
- timing.csv만 벽시계 시간을 담으며 바이트 동일성 비교에서 제외됩니다
"""
from typing import Dict, List, Optional, TypedDict

from typing_extensions import NotRequired

TRACE_COLUMNS = ("iteration", "loss", "energy_or_fidelity", "gap_to_E0_or_infidelity", "grad_norm")
SCAN_COLUMNS = ("variant", "seed", "final_metric", "gain")
TIMING_COLUMNS = ("variant", "seed", "wall_seconds")
PL_COLUMNS = ("iteration", "pl_ratio")


class TraceRow(TypedDict):
    """
    학습 궤적 CSV의 한 행

    Attributes
    ----------
    iteration : int
    loss : float
    energy_or_fidelity : float
        DVQE는 에너지, 복원은 피델리티
    gap_to_E0_or_infidelity : float
        DVQE는 E − E0, 복원은 1 − F
    grad_norm : float
    """
    iteration: int
    loss: float
    energy_or_fidelity: float
    gap_to_E0_or_infidelity: float
    grad_norm: float


class ScanRow(TypedDict):
    """
    스캔 요약 CSV의 한 행

    variant는 'm=3' / 'rounds=2' / 'p=0.05' 형식입니다.
    """
    variant: str
    seed: int
    final_metric: float
    gain: float


class TimingRow(TypedDict):
    variant: str
    seed: int
    wall_seconds: float


class SeedResult(TypedDict):
    seed: int
    final_metric: Optional[float]
    final_loss: Optional[float]
    aborted: bool
    trace_file: str


class RunSummary(TypedDict):
    """
    summary.json 구조

    Attributes
    ----------
    task : str
    family : str
        'dvqe' 또는 'recover'
    metric : str
        'energy' 또는 'fidelity'
    config : dict
        정규화된 설정 에코
    seeds : List[SeedResult]
    median_final_metric : float
    E0 : float, optional
        DVQE 계열과 eig 작업에서 정확 대각화 기준값
    input_fidelity : float, optional
        복원 계열의 F_0
    """
    task: str
    family: NotRequired[str]
    metric: NotRequired[str]
    config: Dict
    seeds: NotRequired[List[SeedResult]]
    median_final_metric: NotRequired[float]
    E0: NotRequired[float]
    input_fidelity: NotRequired[float]


class ErrorEntry(TypedDict):
    """errors.json 항목 - 실패한 하위 실행"""
    name: str
    error_type: str
    message: str


class AbortSentinel(TypedDict):
    """중단된 학습의 표식 파일 - 궤적 CSV에는 완결된 행만 남음"""
    trace_file: str
    iteration: int
    reason: str
    rows_written: int


class ScanSummary(TypedDict):
    """
    스캔 작업의 summary.json 구조

    median_* 목록은 values와 같은 순서이며, 성공한 실행이 없는 값은 null입니다.
    """
    task: str
    family: str
    metric: str
    config: Dict
    key: str
    values: List[float]
    median_final_metric: List[Optional[float]]
    median_gain: List[Optional[float]]
    saturation_point: Optional[float]
    E0: NotRequired[float]
    input_fidelity: NotRequired[float]


class PlRow(TypedDict):
    iteration: int
    pl_ratio: float


class DescentStepReport(TypedDict):
    learning_rate: float
    halvings: int
    satisfied: bool


class DiagSeedReport(TypedDict):
    seed: int
    pl_min: Optional[float]
    pl_median: Optional[float]
    descent_fraction: float
    descent_step: DescentStepReport
    pl_file: str


class GradNormEntry(TypedDict):
    n: int
    family: str
    m: int
    param_count: int
    mean: float
    variance: float
    samples: int


class DiagReport(TypedDict):
    """
    diag.json 구조

    Attributes
    ----------
    c_star : float
        PL 비율의 기준 손실 (DVQE: E0, 복원: 0)
    label : str
        잡음 실행이면 'gap lower-bounded by E0'
    init_grad_norm : GradNormEntry
        설정된 구성에서의 초기 ‖∇C‖² 통계
    grad_norm_scan : List[GradNormEntry]
        벤치마크 모델 DVQE에서만 채워짐
    """
    task: str
    family: str
    config: Dict
    c_star: float
    eps_gap: float
    label: str
    seeds: List[DiagSeedReport]
    init_grad_norm: GradNormEntry
    grad_norm_scan: List[GradNormEntry]
