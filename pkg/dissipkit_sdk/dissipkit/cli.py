"""
dissipkit CLI - 실험 실행기

설정 파일 하나로 학습, 스캔, 진단, 정확 대각화 작업을 실행하고 결정적인
CSV 궤적과 JSON 보고서를 출력 디렉터리에 기록합니다.

Command Flow
------------

```mermaid
graph TD
    A[dissipkit run config.toml] --> B[load_config]
    B -->|ConfigParse / ConfigValidation| X[exit 2]
    B --> C{task}
    C -->|dvqe / recover| D[_run_training]
    C -->|scan_*| E[_run_scan]
    C -->|diag| F[_run_diag]
    C -->|eig| G[_run_eig]
    D --> H[trace CSV + summary.json + timing.csv]
    E --> H
    F --> H
    G --> H
    H --> I{sub-run errors?}
    I -->|Yes| J[errors.json, exit 1]
    I -->|No| K[exit 0]
```

Commands
--------

- ``dissipkit run <config> [--output-dir DIR]``: 설정된 작업 실행
- ``dissipkit validate <config>``: 검증 후 정규화된 설정을 출력
- ``dissipkit eig <hamiltonian-file>``: Pauli 문자열 파일의 바닥 에너지 출력

Environment Variables
---------------------
DISSIPKIT_OUTPUT_ROOT : str, optional
    상대 output_dir 앞에 붙는 출력 루트
LOG_LEVEL : str, optional
    로그 레벨 (기본 INFO)

Notes
-----
- 같은 설정은 바이트 단위로 같은 CSV를 만듭니다. 벽시계 시간은 timing.csv에만 기록됩니다
- 스캔 행의 wall_seconds는 scan_summary.csv가 아니라 timing.csv에 있으며, 두 파일은
  (variant, seed) 열로 1:1 조인됩니다
- 실패한 하위 실행이 있어도 나머지 출력은 남기고 errors.json과 종료 코드 1로 보고합니다
- 중단된 학습은 완결된 행까지만 궤적에 쓰고 ``*.aborted.json`` 표식을 남깁니다
"""
import argparse
import csv
import functools
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from pprint import pformat
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import (
    SCAN_KEY_BY_TASK,
    RunConfig,
    build_hamiltonian,
    build_noise,
    build_task_config,
    load_config,
    serialize_config,
    task_family,
)
from .diagnostics import (
    EXACT_GAP_LABEL,
    GradNormStats,
    NOISY_GAP_LABEL,
    ScanValue,
    descent_check,
    find_descent_step,
    grad_norm_at_init,
    grad_norm_scan,
    make_pl_monitor,
    parameter_scan,
    pl_ratio,
    saturation_point,
    train_config,
)
from .engine import LossFunction, TaskKind, make_loss
from .exc import (
    ConfigParseException,
    ConfigValidationException,
    RunExecutionException,
    TrainingAbortedException,
)
from .hamiltonian import ground_energy, parse_pauli_text
from .logging import bold, configure_console_logging, get_logger
from .optim import Params, TrainingTrace, gradient_param_shift, init_params
from .types import (
    PL_COLUMNS,
    SCAN_COLUMNS,
    TIMING_COLUMNS,
    TRACE_COLUMNS,
    AbortSentinel,
    DiagReport,
    DiagSeedReport,
    ErrorEntry,
    GradNormEntry,
    RunSummary,
    ScanRow,
    ScanSummary,
    SeedResult,
    TimingRow,
    TraceRow,
)

logger = get_logger(__name__)

OUTPUT_ROOT_ENV = "DISSIPKIT_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_RUN_FAILED = 1
EXIT_CONFIG_ERROR = 2

FAMILY_TASKS = {"dvqe": TaskKind.DVQE, "recover": TaskKind.RECOVERY}


@dataclass
class RunOutcome:
    """작업 하나의 실행 결과 - 실패한 하위 실행과 측정된 시간"""
    errors: List[RunExecutionException] = field(default_factory=list)
    timings: List[TimingRow] = field(default_factory=list)


def resolve_output_dir(output_dir: Union[str, Path], root: Optional[str] = None) -> Path:
    """
    출력 디렉터리 결정

    root(기본값은 DISSIPKIT_OUTPUT_ROOT 환경변수)가 있으면 상대 경로 앞에 붙입니다.
    절대 경로는 그대로 사용합니다.
    """
    path = Path(output_dir)
    root = os.getenv(OUTPUT_ROOT_ENV) if root is None else root
    if root and not path.is_absolute():
        return Path(root) / path
    return path


def format_float(value: float) -> str:
    """CSV 실수 표기 (17자리 유효숫자, 비유한 값은 'nan' / 'inf')"""
    return format(value, ".17g")


def _json_float(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def _csv_cell(value: Any) -> Any:
    return format_float(value) if isinstance(value, float) else value


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> None:
    """고정 헤더 CSV 기록 (모든 행이 전체 열을 가져야 함)"""
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction="raise", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _csv_cell(row[key]) for key in columns})


def write_json(path: Path, payload: Any) -> None:
    with path.open("w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")


def trace_file_name(seed: int, key: Optional[str] = None, value: Optional[ScanValue] = None) -> str:
    """
    궤적 파일 이름

    Examples
    --------
    >>> trace_file_name(2)
    'trace_base_seed2.csv'
    >>> trace_file_name(1, "m", 3)
    'trace_m3_seed1.csv'
    """
    variant = "base" if key is None else f"{key}{value}"
    return f"trace_{variant}_seed{seed}.csv"


def trace_rows(trace: TrainingTrace) -> List[TraceRow]:
    return [
        TraceRow(
            iteration=r.iteration,
            loss=r.loss,
            energy_or_fidelity=r.aux_metric,
            gap_to_E0_or_infidelity=r.gap,
            grad_norm=r.grad_norm,
        )
        for r in trace.records
    ]


def write_trace(out_dir: Path, file_name: str, trace: TrainingTrace) -> None:
    """궤적 CSV 기록. 중단된 학습이면 '<이름>.aborted.json' 표식도 남김"""
    write_csv(out_dir / file_name, TRACE_COLUMNS, trace_rows(trace))
    if trace.abort is not None:
        sentinel = AbortSentinel(
            trace_file=file_name,
            iteration=trace.abort.iteration,
            reason=trace.abort.reason,
            rows_written=len(trace.records),
        )
        write_json(out_dir / (Path(file_name).stem + ".aborted.json"), sentinel)


def _log_run_info(title: str, data: List[Tuple[str, Any]]) -> None:
    logger.info(bold(title))
    logger.info("--------------------------")
    for key, value in data:
        logger.info(bold(key + ":"))
        logger.info(pformat(value))
    logger.info("--------------------------")


def _family_reference(loss: LossFunction) -> Dict[str, float]:
    if loss.task is TaskKind.DVQE:
        return {"E0": loss.reference}
    return {"input_fidelity": float(loss.initial_metric)}


def _reference_loss(cfg: RunConfig, base_dir: Optional[Path]) -> LossFunction:
    family = task_family(cfg)
    return make_loss(FAMILY_TASKS[family], build_task_config(cfg, cfg["seeds"][0], base_dir=base_dir))


def _train_seed(
        cfg: RunConfig,
        seed: int,
        base_dir: Optional[Path],
        monitors=(),
    ) -> Tuple[LossFunction, TrainingTrace]:
    task_cfg = build_task_config(cfg, seed, base_dir=base_dir)
    return train_config(
        task_cfg,
        monitors,
        max_workers=cfg["gradient_workers"],
        log_every=cfg["log_every"],
    )


def _record_abort(outcome: RunOutcome, name: str, trace: TrainingTrace) -> None:
    try:
        trace.raise_for_status()
    except TrainingAbortedException as error:
        outcome.errors.append(RunExecutionException(name, error))


def _run_training(cfg: RunConfig, out_dir: Path, base_dir: Optional[Path]) -> RunOutcome:
    outcome = RunOutcome()
    family = task_family(cfg)
    results: List[SeedResult] = []
    summary = RunSummary(task=cfg["task"], family=family, config=dict(cfg))
    for seed in cfg["seeds"]:
        name = f"seed={seed}"
        started = time.perf_counter()
        try:
            loss, trace = _train_seed(cfg, seed, base_dir)
        except Exception as error:  # pylint: disable=broad-except
            logger.error("Run '%s' failed", name, exc_info=error)
            outcome.errors.append(RunExecutionException(name, error))
            continue
        file_name = trace_file_name(seed)
        write_trace(out_dir, file_name, trace)
        _record_abort(outcome, name, trace)
        outcome.timings.append(TimingRow(variant="base", seed=seed, wall_seconds=time.perf_counter() - started))
        summary["metric"] = loss.metric_name
        summary.update(_family_reference(loss))
        results.append(
            SeedResult(
                seed=seed,
                final_metric=_json_float(trace.final_metric),
                final_loss=_json_float(trace.final_loss),
                aborted=trace.aborted,
                trace_file=file_name,
            )
        )
    finals = [r["final_metric"] for r in results if r["final_metric"] is not None]
    summary["seeds"] = results
    if finals:
        summary["median_final_metric"] = float(np.median(finals))
    write_json(out_dir / "summary.json", summary)
    return outcome


def _variant_label(key: str, value: ScanValue) -> str:
    return f"{key}={value}"


def _run_scan(cfg: RunConfig, out_dir: Path, base_dir: Optional[Path]) -> RunOutcome:
    outcome = RunOutcome()
    key = SCAN_KEY_BY_TASK[cfg["task"]]
    values = cfg["scan"]["values"]
    reference = _reference_loss(cfg, base_dir)
    scan = parameter_scan(
        build_task_config(cfg, cfg["seeds"][0], base_dir=base_dir),
        key,
        values,
        cfg["seeds"],
        max_workers=cfg["scan_workers"],
        run=functools.partial(train_config, max_workers=cfg["gradient_workers"], log_every=cfg["log_every"]),
        raise_errors=False,
    )
    outcome.errors.extend(scan.errors)

    rows: List[ScanRow] = []
    for run in scan.runs:
        label = _variant_label(key, run.value)
        write_trace(out_dir, trace_file_name(run.seed, key, run.value), run.trace)
        _record_abort(outcome, f"{label}/seed={run.seed}", run.trace)
        rows.append(ScanRow(variant=label, seed=run.seed, final_metric=run.trace.final_metric, gain=run.gain))
        outcome.timings.append(TimingRow(variant=label, seed=run.seed, wall_seconds=run.wall_seconds))
    write_csv(out_dir / "scan_summary.csv", SCAN_COLUMNS, rows)

    point = saturation_point(scan)
    summary = ScanSummary(
        task=cfg["task"],
        family=task_family(cfg),
        metric=reference.metric_name,
        config=dict(cfg),
        key=key,
        values=list(values),
        median_final_metric=[_json_float(v) for v in scan.median_metric],
        median_gain=[_json_float(v) for v in scan.median_gain],
        saturation_point=point,
    )
    if key != "p":
        summary.update(_family_reference(reference))
    elif reference.task is TaskKind.DVQE:
        summary["E0"] = reference.reference
    write_json(out_dir / "summary.json", summary)
    return outcome


def _run_eig(cfg: RunConfig, out_dir: Path, base_dir: Optional[Path]) -> RunOutcome:
    hamiltonian = build_hamiltonian(cfg["eig"], base_dir)
    e0, _ = ground_energy(hamiltonian)
    logger.info("%s E0 = %.12f (%d terms)", bold("eig"), e0, len(hamiltonian.terms))
    write_json(out_dir / "summary.json", RunSummary(task="eig", config=dict(cfg), E0=e0))
    return RunOutcome()


def _grad_norm_entry(n: int, family: str, m: int, param_count: int, stats: GradNormStats) -> GradNormEntry:
    return GradNormEntry(
        n=n,
        family=family,
        m=m,
        param_count=param_count,
        mean=stats.mean,
        variance=stats.variance,
        samples=stats.samples,
    )


def _run_diag(cfg: RunConfig, out_dir: Path, base_dir: Optional[Path]) -> RunOutcome:
    outcome = RunOutcome()
    diag = cfg["diag"]
    family = diag["family"]
    reference = _reference_loss(cfg, base_dir)
    c_star = reference.reference
    monitor = make_pl_monitor(c_star, diag["eps_gap"])
    seeds: List[DiagSeedReport] = []
    label = NOISY_GAP_LABEL if reference.is_noisy else EXACT_GAP_LABEL
    for seed in cfg["seeds"]:
        name = f"diag/seed={seed}"
        started = time.perf_counter()
        try:
            loss, trace = _train_seed(cfg, seed, base_dir, monitors=(monitor,))
            report = pl_ratio(trace, c_star, diag["eps_gap"], noisy=loss.is_noisy)
            theta0 = _initial_params(loss)
            grad0 = gradient_param_shift(loss, theta0, max_workers=cfg["gradient_workers"])
            step = find_descent_step(loss, theta0, grad0, trace.learning_rate)
        except Exception as error:  # pylint: disable=broad-except
            logger.error("Run '%s' failed", name, exc_info=error)
            outcome.errors.append(RunExecutionException(name, error))
            continue
        write_trace(out_dir, trace_file_name(seed), trace)
        _record_abort(outcome, name, trace)
        pl_file = f"pl_seed{seed}.csv"
        write_csv(
            out_dir / pl_file,
            PL_COLUMNS,
            [{"iteration": r.iteration, "pl_ratio": r.monitors[monitor.name]} for r in trace.records],
        )
        seeds.append(
            DiagSeedReport(
                seed=seed,
                pl_min=_json_float(report.min),
                pl_median=_json_float(report.median),
                descent_fraction=descent_check(trace, trace.learning_rate),
                descent_step={
                    "learning_rate": step.learning_rate,
                    "halvings": step.halvings,
                    "satisfied": step.satisfied,
                },
                pl_file=pl_file,
            )
        )
        outcome.timings.append(TimingRow(variant="diag", seed=seed, wall_seconds=time.perf_counter() - started))

    init_stats = grad_norm_at_init(
        reference, reference.param_count, diag["samples"], cfg["seeds"][0], max_workers=cfg["gradient_workers"]
    )
    n = reference.cfg.n
    m = reference.cfg.m
    scan_rows: List[GradNormEntry] = []
    if family == "dvqe" and "model" in cfg["dvqe"]:
        section = cfg["dvqe"]
        for row in grad_norm_scan(
                diag["qubit_counts"],
                diag["samples"],
                cfg["seeds"][0],
                model=section["model"],
                rounds=max(section["rounds"], 1),
                vqe_layers=section["vqe_layers"],
                noise=build_noise(cfg["noise"]),
                max_workers=cfg["gradient_workers"],
        ):
            scan_rows.append(_grad_norm_entry(row.n, row.family, row.m, row.param_count, row.stats))

    write_json(
        out_dir / "diag.json",
        DiagReport(
            task="diag",
            family=family,
            config=dict(cfg),
            c_star=c_star,
            eps_gap=diag["eps_gap"],
            label=label,
            seeds=seeds,
            init_grad_norm=_grad_norm_entry(n, family, m, reference.param_count, init_stats),
            grad_norm_scan=scan_rows,
        ),
    )
    return outcome


def _initial_params(loss: LossFunction) -> Params:
    return init_params(loss.param_count, loss.cfg.seed)


TASK_HANDLERS = {
    "dvqe": _run_training,
    "recover": _run_training,
    "scan_ancilla": _run_scan,
    "scan_rounds": _run_scan,
    "scan_noise": _run_scan,
    "eig": _run_eig,
    "diag": _run_diag,
}


def write_error_manifest(out_dir: Path, errors: Sequence[RunExecutionException]) -> None:
    entries = [
        ErrorEntry(name=e.name, error_type=type(e.error).__name__, message=str(e.error))
        for e in errors
    ]
    write_json(out_dir / "errors.json", entries)


def run(cfg: RunConfig, *, base_dir: Optional[Path] = None, output_dir: Optional[Union[str, Path]] = None) -> int:
    """
    검증된 설정의 작업 실행

    Parameters
    ----------
    cfg : RunConfig
        parse_config / load_config 결과
    base_dir : Path, optional
        상대 hamiltonian_file 경로의 기준
    output_dir : str | Path, optional
        cfg["output_dir"] 대신 사용할 출력 디렉터리

    Returns
    -------
    int
        0: 성공, 1: 하나 이상의 하위 실행 실패 (errors.json 기록)
    """
    out_dir = resolve_output_dir(output_dir if output_dir is not None else cfg["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    _log_run_info(
        title=f"Running task '{cfg['task']}':",
        data=[
            ("Output", str(out_dir)),
            ("Seeds", cfg["seeds"]),
            ("Config", dict(cfg)),
        ],
    )
    try:
        outcome = TASK_HANDLERS[cfg["task"]](cfg, out_dir, base_dir)
    except Exception as error:  # pylint: disable=broad-except
        logger.error("Task '%s' failed", cfg["task"], exc_info=error)
        outcome = RunOutcome(errors=[RunExecutionException(cfg["task"], error)])

    if outcome.timings:
        write_csv(out_dir / "timing.csv", TIMING_COLUMNS, outcome.timings)
    if outcome.errors:
        write_error_manifest(out_dir, outcome.errors)
        logger.error("%d sub-run(s) failed; see %s", len(outcome.errors), out_dir / "errors.json")
        return EXIT_RUN_FAILED
    logger.info("Task '%s' finished, outputs in %s", cfg["task"], out_dir)
    return EXIT_OK


def run_config_file(path: Union[str, Path], output_dir: Optional[Union[str, Path]] = None) -> int:
    """설정 파일을 읽어 실행 (설정 오류는 예외로 전달)"""
    path = Path(path)
    cfg = load_config(path)
    return run(cfg, base_dir=path.parent, output_dir=output_dir)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dissipkit",
        description="Dissipative variational experiments on a density-matrix simulator",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Run the task described by a config file")
    run_parser.add_argument("config", help="TOML experiment config")
    run_parser.add_argument("--output-dir", default=None, help="Override the config's output_dir")

    validate_parser = commands.add_parser("validate", help="Validate a config file and print it normalized")
    validate_parser.add_argument("config", help="TOML experiment config")

    eig_parser = commands.add_parser("eig", help="Print the ground energy of a Pauli-string Hamiltonian file")
    eig_parser.add_argument("hamiltonian_file", help="One 'coefficient PAULISTRING' term per line")
    return parser


def _report_config_error(error: Exception) -> int:
    if isinstance(error, ConfigValidationException):
        for message in error.errors:
            print(f"error: {message}", file=sys.stderr)
    else:
        print(f"error: {error}", file=sys.stderr)
    return EXIT_CONFIG_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    콘솔 진입점

    Returns
    -------
    int
        0: 성공, 1: 하위 실행 실패, 2: 설정 오류
    """
    args = build_parser().parse_args(argv)
    configure_console_logging()
    try:
        if args.command == "run":
            return run_config_file(args.config, args.output_dir)
        if args.command == "validate":
            print(serialize_config(load_config(args.config)), end="")
            return EXIT_OK
        path = Path(args.hamiltonian_file)
        if not path.is_file():
            raise ConfigValidationException([f"hamiltonian file '{path}' does not exist"])
        e0, _ = ground_energy(parse_pauli_text(path.read_text(encoding="utf-8")))
        print(format_float(e0))
        return EXIT_OK
    except (ConfigParseException, ConfigValidationException) as error:
        return _report_config_error(error)


if __name__ == "__main__":
    sys.exit(main())
