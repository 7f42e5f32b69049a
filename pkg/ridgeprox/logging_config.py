"""
Logging configuration with UTC timestamps
"""
import logging
import sys
import time


class UTCFormatter(logging.Formatter):
    """Formatter that renders record times in UTC or local time with an explicit suffix"""

    def __init__(self, fmt=None, datefmt=None, use_utc=True):
        super().__init__(fmt, datefmt)
        self.use_utc = use_utc
        self.converter = time.gmtime if use_utc else time.localtime

    def formatTime(self, record, datefmt=None):
        stamp = self.converter(record.created)
        suffix = "UTC" if self.use_utc else "local"
        if datefmt:
            return time.strftime(datefmt, stamp)
        return time.strftime(f'%Y-%m-%d %H:%M:%S {suffix}', stamp)


def setup_logging(level=logging.INFO, use_utc=True, stream=None):
    """
    Setup logging configuration

    Args:
        level: Logging level or level name (default: INFO)
        use_utc: Render timestamps in UTC instead of local time (default: True)
        stream: Output stream (default: stderr, keeping stdout free for reports)
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    formatter = UTCFormatter(
        fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        use_utc=use_utc,
    )

    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.setFormatter(formatter)

    # Configure root logger
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers = []  # Clear existing handlers
    root_logger.addHandler(handler)

    return root_logger
