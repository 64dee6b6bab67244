import logging
import sys
from logging.handlers import RotatingFileHandler

from .config import settings

_HANDLER_NAMES = ("wngf-console", "wngf-file")


def configure_logging(level: str | int | None = None) -> None:
    logger = logging.getLogger()
    logger.setLevel(level or settings.log_level)

    # Repeated CLI runs in one process must not stack handlers
    for h in list(logger.handlers):
        if h.get_name() in _HANDLER_NAMES:
            logger.removeHandler(h)
            h.close()

    fmt = logging.Formatter(
        "%(asctime)s %(levelname)s %(name)s - %(message)s"
    )

    # Console (stderr; stdout carries the CLI summaries)
    ch = logging.StreamHandler(sys.stderr)
    ch.set_name("wngf-console")
    ch.setFormatter(fmt)
    logger.addHandler(ch)

    if settings.log_file:
        fh = RotatingFileHandler(
            settings.log_file,
            maxBytes=settings.log_max_bytes,
            backupCount=settings.log_backup_count,
        )
        fh.set_name("wngf-file")
        fh.setFormatter(fmt)
        logger.addHandler(fh)
