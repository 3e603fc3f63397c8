import logging

from .config import settings


def setup_logging(level: str = None) -> None:
    """Configure root logging once for CLI runs."""
    logging.basicConfig(
        level=getattr(logging, (level or settings.LOG_LEVEL), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
