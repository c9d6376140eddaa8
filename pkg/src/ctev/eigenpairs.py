"""Radially symmetric eigenfunction pairs and their convergence in eta."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import specfun
from ._validation import check_geometry
from .dispersion import EOCStudy, eoc_sequence
from .exceptions import ConvergenceError, InvalidArgumentError

__all__ = [
    "RadialEigenfunction",
    "radial_eigenfunction",
    "eval_w",
    "eval_v",
    "l2_error",
    "eoc_eigfun",
    "eigenfunction_convergence",
]


def _j0(geometry):
    if geometry == "sphere":
        return lambda z: specfun.sph_bessel_j(0, z)
    return lambda z: specfun.bessel_j(0, z)


@dataclass(frozen=True)
class RadialEigenfunction:
    """Order-0 eigenfunction ``w(r) = c1 f(k sqrt(n) r)`` or ``v(r) = c2 f(k r)``.

    ``f`` is ``j_0`` on the sphere and ``J_0`` on the disk; the constants
    ``c1 = f(k)`` and ``c2 = f(k sqrt(n))`` make ``w(1) = v(1)``.
    """

    geometry: str
    k: complex
    n: complex
    which: str
    c1: complex
    c2: complex

    def __call__(self, r):
        return eval_w(r, self) if self.which == "w" else eval_v(r, self)

    def partner(self) -> "RadialEigenfunction":
        other = "v" if self.which == "w" else "w"
        return RadialEigenfunction(self.geometry, self.k, self.n, other, self.c1, self.c2)


def radial_eigenfunction(geometry: str, k: complex, n: complex, which: str = "w") -> RadialEigenfunction:
    geometry = check_geometry(geometry)
    if which not in ("w", "v"):
        raise InvalidArgumentError(f"which must be 'w' or 'v', got {which!r}")
    k, n = complex(k), complex(n)
    f = _j0(geometry)
    return RadialEigenfunction(geometry, k, n, which, complex(f(k)), complex(f(k * np.sqrt(n))))


def _check_r(r):
    r_arr = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r_arr)) or np.any(r_arr < 0) or np.any(r_arr > 1):
        raise InvalidArgumentError("r must lie in [0, 1]")
    return r_arr


def eval_w(r, ef: RadialEigenfunction):
    """``w(r) = c1 f(k sqrt(n) r)`` for ``0 <= r <= 1``."""
    r_arr = _check_r(r)
    out = ef.c1 * _j0(ef.geometry)(ef.k * np.sqrt(ef.n) * r_arr)
    return complex(out) if np.ndim(r) == 0 else out


def eval_v(r, ef: RadialEigenfunction):
    """``v(r) = c2 f(k r)`` for ``0 <= r <= 1``."""
    r_arr = _check_r(r)
    out = ef.c2 * _j0(ef.geometry)(ef.k * r_arr)
    return complex(out) if np.ndim(r) == 0 else out


def _quad(ef_eta, ef_0, nodes):
    x, wts = np.polynomial.legendre.leggauss(nodes)
    r = 0.5 * (x + 1.0)
    wts = 0.5 * wts
    diff = np.abs(ef_eta(r) - ef_0(r)) ** 2
    if ef_eta.geometry == "sphere":
        return 4.0 * np.pi * float(np.sum(wts * diff * r**2))
    return 2.0 * np.pi * float(np.sum(wts * diff * r))


def l2_error(
    ef_eta: RadialEigenfunction,
    ef_0: RadialEigenfunction,
    quad_order: int = 64,
    *,
    rtol: float = 1e-12,
    max_order: int = 1024,
) -> float:
    """Squared L2 distance over the unit ball (``4 pi r^2 dr``) or disk (``2 pi r dr``).

    Gauss-Legendre with ``quad_order`` nodes, doubled until the value moves by
    less than ``rtol`` relative (or ``rtol`` absolute near zero).
    """
    if ef_eta.geometry != ef_0.geometry or ef_eta.which != ef_0.which:
        raise InvalidArgumentError("eigenfunctions must share geometry and component")
    m = int(quad_order)
    if m < 2:
        raise InvalidArgumentError("quad_order must be >= 2")
    prev = _quad(ef_eta, ef_0, m)
    while m < max_order:
        m *= 2
        cur = _quad(ef_eta, ef_0, m)
        if abs(cur - prev) <= rtol * max(abs(cur), 1e-300) or abs(cur - prev) < 1e-300:
            return cur
        prev = cur
    raise ConvergenceError(f"quadrature did not settle by {max_order} nodes")


def eoc_eigfun(errors: Sequence[float]) -> list[float]:
    """Orders from squared errors: ``log2(sqrt(e_i / e_{i+1}))``."""
    return [0.5 * x for x in eoc_sequence(errors)]


def eigenfunction_convergence(study: EOCStudy, branches: Sequence[int]) -> dict:
    """Squared L2 errors and orders of ``w`` and ``v`` for selected branches.

    Returns a mapping ``(branch, component) -> (errors, eoc)``.
    """
    out = {}
    for j in branches:
        for which in ("w", "v"):
            ref = radial_eigenfunction(study.geometry, study.k0[j], study.n, which)
            errs = [
                l2_error(radial_eigenfunction(study.geometry, k, study.n, which), ref)
                for k in study.k_eta[:, j]
            ]
            out[(int(j), which)] = (np.array(errs), np.array(eoc_eigfun(errs)))
    return out
