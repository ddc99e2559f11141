import logging
import sys

_FORMAT = "%(asctime)s [%(name)s] %(message)s"
_HANDLER_NAME = "signal-lab"


def configure_logging(level: str = "INFO") -> None:
    """Route library loggers to stderr; calling it again swaps the handler instead of stacking one."""
    root = logging.getLogger()
    for handler in [h for h in root.handlers if h.get_name() == _HANDLER_NAME]:
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.set_name(_HANDLER_NAME)
    handler.setFormatter(logging.Formatter(_FORMAT, datefmt="%H:%M:%S"))
    root.addHandler(handler)
    root.setLevel(level.upper())
