"""
dissipkit 로깅 유틸리티 - 로거 생성 및 터미널 포맷팅

환경변수 기반 로그 레벨 제어와 TTY 환경 볼드 포맷팅을 제공합니다.

Environment Variables
---------------------
LOG_LEVEL : str, optional
    모든 dissipkit 로거에 적용할 로그 레벨 (대소문자 무관)
    예: DEBUG, INFO, WARNING

Usage Examples
--------------

>>> from dissipkit.logging import get_logger, bold
>>> logger = get_logger(__name__)
>>> logger.info(f"{bold('train')} started")

콘솔 진입점은 configure_console_logging()으로 루트 핸들러를 한 번 설정합니다.

학습 진행 상황을 자세히 보려면:

```bash
export LOG_LEVEL=DEBUG
dissipkit run experiments/recovery_targets.toml
```
"""
import functools
import logging
import os
import sys
from typing import Optional

PACKAGE_LOGGER = "dissipkit"


def env_log_level() -> Optional[int]:
    """LOG_LEVEL을 숫자 레벨로 해석 (없거나 알 수 없는 이름이면 None)"""
    value = os.getenv('LOG_LEVEL', '').strip().upper()
    if not value:
        return None
    return logging.getLevelNamesMapping().get(value)


@functools.lru_cache(maxsize=None)
def _warn_unknown_level(value: str) -> None:
    logging.getLogger(PACKAGE_LOGGER).warning("Ignoring unknown LOG_LEVEL '%s'", value)


def get_logger(name: str) -> logging.Logger:
    """
    LOG_LEVEL을 반영한 로거 반환

    dissipkit 하위 모듈 로거는 레벨을 직접 갖지 않고 패키지 루트 로거
    'dissipkit'에서 상속하며, LOG_LEVEL은 그 루트에 걸립니다. 패키지 밖
    이름(실험 실행기 등)은 자기 로거에 직접 적용합니다.

    Parameters
    ----------
    name : str
        로거 이름 (일반적으로 __name__ 사용)

    Returns
    -------
    logging.Logger

    Notes
    -----
    알 수 없는 LOG_LEVEL 값은 예외 대신 값마다 한 번 경고하고 무시합니다.
    """
    logger = logging.getLogger(name)
    raw = os.getenv('LOG_LEVEL', '').strip()
    if not raw:
        return logger
    level = env_log_level()
    if level is None:
        _warn_unknown_level(raw)
        return logger
    in_package = name == PACKAGE_LOGGER or name.startswith(PACKAGE_LOGGER + ".")
    (logging.getLogger(PACKAGE_LOGGER) if in_package else logger).setLevel(level)
    return logger


def bold(text: str) -> str:
    """
    TTY 환경에서만 ANSI 볼드체를 적용

    Non-TTY 환경(파이프, 파일 리다이렉션)에서는 원본 텍스트를 반환하므로
    로그 파일에 escape code가 섞이지 않습니다.
    """
    if hasattr(sys.stdout, 'isatty') and sys.stdout.isatty():
        return f"\033[1m{text}\033[0m"
    return text


CONSOLE_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_console_logging(default_level: str = "INFO") -> None:
    """
    콘솔 명령용 루트 핸들러 설정 (stderr)

    LOG_LEVEL이 유효하면 그 값을, 아니면 default_level을 사용합니다.
    이미 핸들러가 있으면 레벨만 맞춥니다.
    """
    level = env_log_level() or default_level.upper()
    root = logging.getLogger()
    if root.handlers:
        root.setLevel(level)
        return
    logging.basicConfig(level=level, format=CONSOLE_FORMAT, stream=sys.stderr)
