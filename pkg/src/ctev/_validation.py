"""Input validation helpers shared by the public API."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import InvalidArgumentError, NotFittedError

MAX_ORDER = 200
MAX_ABS_ARG = 1.0e4


def check_order(order) -> int:
    """Return ``order`` as a Python int after checking 0 <= order <= MAX_ORDER."""
    if isinstance(order, (bool, np.bool_)) or not isinstance(order, (numbers.Integral, np.integer)):
        raise InvalidArgumentError(f"order must be a non-negative integer, got {order!r}")
    order = int(order)
    if order < 0 or order > MAX_ORDER:
        raise InvalidArgumentError(f"order must lie in [0, {MAX_ORDER}], got {order}")
    return order


def check_complex_arg(z, *, name: str = "z", max_abs: float = MAX_ABS_ARG):
    """Coerce ``z`` to complex (scalar or ndarray) and reject NaN/Inf and huge values."""
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite")
    if np.any(np.abs(arr) >= max_abs):
        raise InvalidArgumentError(f"|{name}| must be below {max_abs:g}")
    return arr[()] if arr.ndim == 0 else arr


def check_nonzero(z, *, name: str = "z", exc=InvalidArgumentError):
    if np.any(np.asarray(z) == 0):
        raise exc(f"{name} must be nonzero")
    return z


def check_positive(x, *, name: str) -> float:
    x = float(x)
    if not np.isfinite(x) or x <= 0:
        raise InvalidArgumentError(f"{name} must be a positive finite number, got {x!r}")
    return x


def check_real_scalar(x, *, name: str) -> float:
    """Accept a real number or a complex number with zero imaginary part."""
    c = complex(x)
    if not (np.isfinite(c.real) and np.isfinite(c.imag)):
        raise InvalidArgumentError(f"{name} must be finite")
    if c.imag != 0.0:
        raise InvalidArgumentError(f"{name} must be real, got {x!r}")
    return c.real


def check_geometry(geometry: str) -> str:
    geometry = str(geometry).lower()
    if geometry not in ("disk", "sphere"):
        raise InvalidArgumentError(f"geometry must be 'disk' or 'sphere', got {geometry!r}")
    return geometry


def check_is_fitted(estimator, attributes) -> None:
    """Raise NotFittedError unless every attribute in ``attributes`` is present."""
    if isinstance(attributes, str):
        attributes = [attributes]
    missing = [a for a in attributes if not hasattr(estimator, a)]
    if missing:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call 'fit' first "
            f"(missing {', '.join(missing)})"
        )
