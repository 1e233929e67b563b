"""Logging configuration."""

import logging
import logging.config
from pathlib import Path
from typing import Any, Dict, Optional

from config.settings import settings

# Attributes every LogRecord carries; anything else came in through ``extra``.
RESERVED_ATTRS = (
    "name", "msg", "args", "created", "filename", "funcName", "levelname",
    "levelno", "lineno", "module", "msecs", "exc_info", "exc_text",
    "stack_info", "pathname", "processName", "process", "threadName",
    "thread", "taskName", "relativeCreated",
)


def setup_logging(level: str = "WARNING", log_file: Optional[Path] = None) -> None:
    """
    Setup logging configuration.

    Console output goes to stderr: stdout is reserved for JSON payloads.

    Args:
        level: Logging level
        log_file: Optional path of a rotating JSON log file
    """
    log_file = log_file or settings.LOG_FILE
    console_formatter = "json" if settings.LOG_FORMAT == "json" else "standard"

    config: Dict[str, Any] = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "json": {
                "()": "pythonjsonlogger.jsonlogger.JsonFormatter",
                "fmt": "%(asctime)s %(levelname)s %(name)s %(funcName)s %(lineno)d %(message)s",
                "reserved_attrs": list(RESERVED_ATTRS),
            },
            "standard": {
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                "datefmt": "%Y-%m-%d %H:%M:%S",
            },
        },
        "handlers": {
            "console": {
                "class": "logging.StreamHandler",
                "level": level,
                "formatter": console_formatter,
                "stream": "ext://sys.stderr",
            },
        },
        "root": {
            "level": level,
            "handlers": ["console"],
        },
    }

    if log_file is not None:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        config["handlers"]["file"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": level,
            "formatter": "json",
            "filename": str(log_file),
            "maxBytes": 10485760,  # 10MB
            "backupCount": 5,
            "encoding": "utf-8",
        }
        config["root"]["handlers"].append("file")

    logging.config.dictConfig(config)

    logger = logging.getLogger(__name__)
    logger.debug("Logging configured with level: %s", level)
    if log_file is not None:
        logger.debug("Log file: %s", Path(log_file).absolute())

