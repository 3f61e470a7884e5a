"""
프리셋 실험 실행기

experiments/ 디렉터리의 모든 TOML 프리셋을 이름 순서로 실행합니다.

```bash
uv run dissipative-experiments                 # experiments/*.toml 전부
uv run dissipative-experiments experiments/recovery_targets.toml
```
"""
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from dissipkit.cli import EXIT_CONFIG_ERROR, EXIT_OK, run_config_file
from dissipkit.exc import ConfigParseException, ConfigValidationException
from dissipkit.logging import bold, configure_console_logging, get_logger

logger = get_logger(__name__)

PRESET_DIR = Path(__file__).resolve().parents[2] / "experiments"


def find_presets(preset_dir: Path = PRESET_DIR) -> List[Path]:
    return sorted(preset_dir.glob("*.toml"))


def run_presets(paths: Sequence[Path]) -> int:
    """
    프리셋을 차례로 실행하고 가장 나쁜 종료 코드를 반환

    설정 오류가 있는 프리셋은 건너뛰고 나머지를 계속 실행합니다.
    """
    worst = EXIT_OK
    for path in paths:
        logger.info("%s %s", bold("preset"), path.name)
        try:
            status = run_config_file(path)
        except (ConfigParseException, ConfigValidationException) as error:
            logger.error("Preset '%s' is invalid: %s", path.name, error)
            status = EXIT_CONFIG_ERROR
        worst = max(worst, status)
    return worst


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_console_logging()
    args = list(sys.argv[1:] if argv is None else argv)
    paths = [Path(a) for a in args] if args else find_presets()
    if not paths:
        logger.warning("No presets found in %s", PRESET_DIR)
    return run_presets(paths)


if __name__ == "__main__":
    sys.exit(main())
