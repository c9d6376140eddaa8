"""Complex-argument Bessel and Hankel functions of integer order.

Cylindrical functions are evaluated with the AMOS routines exposed by
:mod:`scipy.special`.  Spherical Hankel functions are obtained from the
half-integer cylindrical Hankel function instead of ``j + i*y``, which avoids
catastrophic cancellation in the upper half-plane where ``h_p`` decays.

All functions accept a scalar or array argument ``z`` and a scalar integer
order.  Derivatives use the three-term identities

    f'_p = (f_{p-1} - f_{p+1}) / 2                 (cylindrical)
    f'_p = (p f_{p-1} - (p + 1) f_{p+1}) / (2p+1)  (spherical)

with ``f'_0 = -f_1`` in both families.

Note
----
Products such as ``J_p(z) H'_p(z)`` grow like ``exp(2|Im z|)`` in the lower
half-plane, so identities that cancel them (Wronskians) lose about
``2|Im z| / ln 10`` digits there.  The library itself only evaluates at
``Im z >= -0.05``.
"""

from __future__ import annotations

import numpy as np
from scipy import special

from ._validation import check_complex_arg, check_nonzero, check_order
from .exceptions import PoleError

__all__ = [
    "bessel_j",
    "bessel_j_deriv",
    "hankel1",
    "hankel1_deriv",
    "sph_bessel_j",
    "sph_bessel_j_deriv",
    "sph_hankel1",
    "sph_hankel1_deriv",
]


def _prep(order, z, *, pole: bool = False):
    p = check_order(order)
    z = check_complex_arg(z)
    if pole:
        check_nonzero(z, exc=PoleError)
    return p, z


def bessel_j(order, z):
    """Bessel function of the first kind ``J_order(z)``.

    Parameters
    ----------
    order : int
        Non-negative integer order, at most 200.
    z : complex or array_like
        Finite argument with ``|z| < 1e4``.
    """
    p, z = _prep(order, z)
    return special.jv(p, z)


def bessel_j_deriv(order, z):
    """Derivative ``J'_order(z)``."""
    p, z = _prep(order, z)
    if p == 0:
        return -special.jv(1, z)
    return 0.5 * (special.jv(p - 1, z) - special.jv(p + 1, z))


def hankel1(order, z):
    """Hankel function of the first kind ``H^(1)_order(z) = J + iY``.

    Raises
    ------
    PoleError
        If any ``z`` equals zero.
    """
    p, z = _prep(order, z, pole=True)
    return special.hankel1(p, z)


def hankel1_deriv(order, z):
    """Derivative of :func:`hankel1` with respect to ``z``."""
    p, z = _prep(order, z, pole=True)
    if p == 0:
        return -special.hankel1(1, z)
    return 0.5 * (special.hankel1(p - 1, z) - special.hankel1(p + 1, z))


def sph_bessel_j(order, z):
    """Spherical Bessel function ``j_order(z)``; ``j_0(0) = 1``."""
    p, z = _prep(order, z)
    return special.spherical_jn(p, z)


def sph_bessel_j_deriv(order, z):
    """Derivative ``j'_order(z)``, finite at ``z = 0``."""
    p, z = _prep(order, z)
    if p == 0:
        return -special.spherical_jn(1, z)
    return (p * special.spherical_jn(p - 1, z) - (p + 1) * special.spherical_jn(p + 1, z)) / (2 * p + 1)


def _sph_h(p: int, z):
    return np.sqrt(np.pi / (2.0 * z)) * special.hankel1(p + 0.5, z)


def sph_hankel1(order, z):
    """Spherical Hankel function ``h^(1)_order(z)``; ``h_0(z) = -i exp(iz) / z``."""
    p, z = _prep(order, z, pole=True)
    return _sph_h(p, z)


def sph_hankel1_deriv(order, z):
    """Derivative of :func:`sph_hankel1`."""
    p, z = _prep(order, z, pole=True)
    if p == 0:
        return -_sph_h(1, z)
    return (p * _sph_h(p - 1, z) - (p + 1) * _sph_h(p + 1, z)) / (2 * p + 1)
