"""Global logarithm base.

Every information quantity in the package is reported in one base, chosen
once per process through ``STEIN_LAB_LOG_BASE`` (``2`` or ``e``) and
overridable in a scope with :func:`use_log_base`.
"""
from __future__ import annotations

import contextlib
import contextvars
import math
import os

from .errors import DomainError

_ALLOWED = {"2": 2.0, "e": math.e}


def _parse(value) -> float:
    if isinstance(value, str):
        key = value.strip().lower()
        if key not in _ALLOWED:
            raise DomainError(f"log base must be '2' or 'e', got {value!r}")
        return _ALLOWED[key]
    value = float(value)
    if value == 2.0 or value == math.e:
        return value
    raise DomainError(f"log base must be 2 or e, got {value!r}")


_BASE = contextvars.ContextVar("stein_lab_log_base",
                               default=_parse(os.environ.get("STEIN_LAB_LOG_BASE", "2")))


def log_base() -> float:
    return _BASE.get()


def unit_name() -> str:
    return "bits" if log_base() == 2.0 else "nats"


def set_log_base(base) -> None:
    _BASE.set(_parse(base))


@contextlib.contextmanager
def use_log_base(base):
    token = _BASE.set(_parse(base))
    try:
        yield
    finally:
        _BASE.reset(token)


def from_nats(x):
    """Convert a quantity measured in nats to the active unit."""
    return x / math.log(log_base())


def to_nats(x):
    return x * math.log(log_base())


def log(x):
    """Logarithm in the active base (numpy aware)."""
    import numpy as np
    return np.log(x) / math.log(log_base())


def exp(x):
    """Inverse of :func:`log`."""
    import numpy as np
    return np.exp(np.asarray(x, dtype=float) * math.log(log_base()))
