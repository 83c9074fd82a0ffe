import logging
from typing import Optional

from app.core.config import get_log_level

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: Optional[int] = None) -> None:
    """
    Configure root logging for command-line runs.

    Args:
        level: Explicit level; falls back to ``DMN_LOG_LEVEL`` from settings.
    """
    logging.basicConfig(
        level=level if level is not None else get_log_level(),
        format=LOG_FORMAT,
    )
