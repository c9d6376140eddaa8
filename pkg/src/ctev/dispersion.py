"""Determinants whose zeros are conductive transmission eigenvalues.

For the unit sphere (modal order ``p``) and unit disk (order ``m``)

    d(k) = k sqrt(n) f'(k sqrt(n)) f(k) - f(k sqrt(n)) (k f'(k) + eta f(k))

with ``f = j_p`` (sphere) or ``f = J_m`` (disk).  The order-0 sphere
determinant has the closed form

    k sin(k sqrt n) cos k - k sqrt(n) sin k cos(k sqrt n) + eta sin k sin(k sqrt n),

which equals ``-k**2 * sqrt(n)`` times :func:`d_sphere` at order 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import specfun
from ._validation import check_geometry, check_order
from .exceptions import ConvergenceError, InvalidArgumentError
from .rootfind import SearchRect, count_zeros, find_zeros

__all__ = [
    "Medium",
    "EigenvalueRecord",
    "EOCStudy",
    "DEFAULT_RECT",
    "d_sphere",
    "d_sphere_trig",
    "d_disk",
    "determinant",
    "determinant_scale",
    "compute_ites",
    "eoc_sequence",
    "track_branches",
    "order_branches",
    "eigenvalue_convergence",
]

DEFAULT_RECT = SearchRect(0.5, 10.0, -0.01, 10.0)
# multiple roots are only resolvable to about eps**(1/m); report them as clusters below this size
CLUSTER_SIZE = 1e-3


@dataclass(frozen=True)
class Medium:
    """Refractive index and boundary conductivity of the scatterer.

    ``n`` is a constant complex index.  Giving ``n2`` switches to the
    absorbing model ``n(k) = n + 1j * n2 / k`` with real ``n > 1``.
    With ``physical=True`` the conductivity must satisfy ``Re eta >= 0`` and
    ``Im eta >= 0``.
    """

    n: complex = 1.0
    eta: complex = 0.0
    n2: float | None = None
    physical: bool = False

    def __post_init__(self):
        n = complex(self.n)
        eta = complex(self.eta)
        if not (np.isfinite(n) and np.isfinite(eta)):
            raise InvalidArgumentError("n and eta must be finite")
        if n.real <= 0:
            raise InvalidArgumentError(f"Re(n) must be positive, got {n}")
        if self.n2 is not None:
            n2 = float(self.n2)
            if n.imag != 0 or n.real <= 1:
                raise InvalidArgumentError("absorbing media need a real n1 > 1")
            if not (n2 >= 0 and math.isfinite(n2)):
                raise InvalidArgumentError(f"n2 must be finite and >= 0, got {self.n2}")
            object.__setattr__(self, "n2", n2)
        if self.physical:
            if eta.real < 0 or eta.imag < 0:
                raise InvalidArgumentError(f"physical media need Re, Im of eta >= 0, got {eta}")
            if n.imag < 0:
                raise InvalidArgumentError(f"physical media need Im(n) >= 0, got {n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def absorbing(cls, n1: float, n2: float, eta: complex = 0.0) -> "Medium":
        return cls(n=n1, eta=eta, n2=n2)

    @property
    def is_absorbing(self) -> bool:
        return self.n2 is not None

    @property
    def is_real(self) -> bool:
        """True when ``n`` and ``eta`` are real and there is no absorption."""
        return (not self.is_absorbing or self.n2 == 0) and self.n.imag == 0 and self.eta.imag == 0

    @property
    def delta(self) -> float:
        """Depth ``n2 / (n1 - 1)`` of the absorbing discreteness half-plane."""
        if not self.is_absorbing:
            return 0.0
        return self.n2 / (self.n.real - 1.0)

    def index(self, k):
        """Refractive index at wavenumber ``k``."""
        if self.is_absorbing:
            return self.n + 1j * self.n2 / np.asarray(k)
        return self.n

    def with_eta(self, eta: complex) -> "Medium":
        return Medium(self.n, eta, self.n2, self.physical)


@dataclass(frozen=True)
class EigenvalueRecord:
    k: complex
    order: int
    geometry: str
    eta: complex
    residual: float
    multiplicity: int = 1

    @property
    def is_real(self) -> bool:
        return abs(self.k.imag) < 1e-8


def _check_k(k):
    k = np.asarray(k, dtype=complex)
    if not np.all(np.isfinite(k)):
        raise InvalidArgumentError("k must be finite")
    if np.any(k == 0):
        raise InvalidArgumentError("k = 0 is excluded")
    return k


def _unwrap(val, k_in):
    return complex(val) if np.ndim(k_in) == 0 else val


def _bessel_pair(geometry):
    if geometry == "sphere":
        return specfun.sph_bessel_j, specfun.sph_bessel_j_deriv
    return specfun.bessel_j, specfun.bessel_j_deriv


def determinant(geometry: str, k, med: Medium, order: int = 0):
    """Dispatch to :func:`d_sphere` or :func:`d_disk`."""
    geometry = check_geometry(geometry)
    fn = d_sphere if geometry == "sphere" else d_disk
    return fn(k, med, order)


def _det(geometry, k_in, med, order):
    p = check_order(order)
    k = _check_k(k_in)
    f, df = _bessel_pair(geometry)
    a = k * np.sqrt(med.index(k))
    fa = f(p, a)
    fk = f(p, k)
    out = a * df(p, a) * fk - fa * (k * df(p, k) + med.eta * fk)
    return _unwrap(out, k_in)


def d_sphere(k, med: Medium, order: int = 0):
    """Sphere determinant of order ``order`` (vectorized over ``k``).

    Raises
    ------
    InvalidArgumentError
        For ``k == 0`` or non-finite input.
    """
    return _det("sphere", k, med, order)


def d_disk(k, med: Medium, order: int = 0):
    """Disk determinant; at order 0 it equals
    ``k J0(k√n) J1(k) - k√n J0(k) J1(k√n) - eta J0(k√n) J0(k)``."""
    return _det("disk", k, med, order)


def d_sphere_trig(k, med: Medium):
    """Closed trigonometric form of the order-0 sphere determinant."""
    k_in = k
    k = _check_k(k)
    s = np.sqrt(med.index(k))
    a = k * s
    out = k * np.sin(a) * np.cos(k) - k * s * np.sin(k) * np.cos(a) + med.eta * np.sin(k) * np.sin(a)
    return _unwrap(out, k_in)


def determinant_scale(geometry: str, k, med: Medium, order: int = 0):
    """Magnitude of the terms that cancel inside the determinant.

    Used to turn ``|d(k)|`` into a relative residual: it is
    ``max(1,|k|) * max(1,|f(a)|,|f'(a)|) * max(1,|f(k)|,|f'(k)|) * max(1,|eta|,|a|)``
    with ``a = k sqrt(n)``.
    """
    geometry = check_geometry(geometry)
    f, df = _bessel_pair(geometry)
    k_arr = _check_k(k)
    a = k_arr * np.sqrt(med.index(k_arr))
    inner = np.maximum.reduce([np.ones_like(k_arr.real), np.abs(f(order, a)), np.abs(df(order, a))])
    outer = np.maximum.reduce([np.ones_like(k_arr.real), np.abs(f(order, k_arr)), np.abs(df(order, k_arr))])
    big = np.maximum(np.maximum(1.0, abs(med.eta)), np.abs(a))
    out = np.maximum(1.0, np.abs(k_arr)) * inner * outer * big
    return float(out) if np.ndim(k) == 0 else out


def compute_ites(
    geometry: str,
    med: Medium,
    rect: SearchRect = DEFAULT_RECT,
    max_order: int = 0,
    tol: float = 1e-12,
    *,
    confirm: bool = False,
) -> list[EigenvalueRecord]:
    """All eigenvalues of orders ``0..max_order`` inside ``rect``.

    Residuals are relative (see :func:`determinant_scale`).  With
    ``confirm=True`` each simple root is re-counted on a small box around it.

    Returns
    -------
    list of EigenvalueRecord sorted by ``(order, Re k, Im k)``.
    """
    geometry = check_geometry(geometry)
    max_order = check_order(max_order)
    if rect.contains(0j):
        raise InvalidArgumentError("search rectangle must exclude k = 0")
    records = []
    for p in range(max_order + 1):
        f = lambda z, p=p: _det(geometry, z, med, p)
        scale = lambda z, p=p: determinant_scale(geometry, z, med, p)
        for zero in find_zeros(f, rect, tol, scale=scale, cluster_size=CLUSTER_SIZE):
            if not zero.converged:
                raise ConvergenceError(f"unrefined zero near {zero.z} (order {p})")
            if confirm and zero.winding_count == 1:
                _confirm(f, zero.z)
            records.append(EigenvalueRecord(zero.z, p, geometry, med.eta, zero.residual, zero.winding_count))
    records.sort(key=lambda r: (r.order, r.k.real, r.k.imag))
    return records


def _confirm(f, z, half=1e-3):
    box = SearchRect(z.real - half, z.real + half, z.imag - half, z.imag + half)
    got = count_zeros(f, box)
    if got != 1:
        raise ConvergenceError(f"winding count {got} around simple root {z}")


def eoc_sequence(errors: Sequence[float]) -> list[float]:
    """Orders ``log2(e_i / e_{i+1})``.

    A vanishing successor error gives ``inf``; negative errors are rejected.
    """
    e = [float(x) for x in errors]
    if len(e) < 2:
        raise InvalidArgumentError("need at least two errors")
    if any(x < 0 or not math.isfinite(x) for x in e):
        raise InvalidArgumentError("errors must be finite and non-negative")
    out = []
    for a, b in zip(e[:-1], e[1:]):
        if b == 0:
            out.append(math.inf)
        elif a == 0:
            out.append(-math.inf)
        else:
            out.append(math.log(a / b) / math.log(2.0))
    return out


def order_branches(roots: Sequence[complex], real_tol: float = 1e-8) -> list[complex]:
    """Real roots first, then complex ones, each group by increasing real part."""
    return sorted((complex(z) for z in roots), key=lambda z: (abs(z.imag) >= real_tol, z.real, z.imag))


def track_branches(reference: Sequence[complex], steps: Sequence[Sequence[complex]]) -> np.ndarray:
    """Follow each reference root through successive root sets.

    Each step matches every branch to its nearest root of the next set,
    starting from the branch's previous position.

    Returns
    -------
    ndarray, shape (len(steps), len(reference))

    Raises
    ------
    ConvergenceError
        If two branches claim the same root, or a step has no roots.
    """
    cur = np.asarray(reference, dtype=complex)
    out = np.empty((len(steps), cur.size), dtype=complex)
    for i, roots in enumerate(steps):
        roots = np.asarray(roots, dtype=complex)
        if roots.size == 0:
            raise ConvergenceError(f"no roots at step {i}")
        idx = np.argmin(np.abs(cur[:, None] - roots[None, :]), axis=1)
        if len(set(idx.tolist())) != idx.size:
            raise ConvergenceError(f"branch collision at step {i}")
        cur = roots[idx]
        out[i] = cur
    return out


@dataclass
class EOCStudy:
    """Branches ``k_eta`` for a decreasing sequence of ``etas``."""

    geometry: str
    n: complex
    etas: np.ndarray
    k0: np.ndarray
    k_eta: np.ndarray  # shape (len(etas), branches)

    @property
    def errors(self) -> np.ndarray:
        return np.abs(self.k_eta - self.k0[None, :])

    def eoc(self) -> np.ndarray:
        e = self.errors
        return np.array([eoc_sequence(e[:, j]) for j in range(e.shape[1])]).T


def eigenvalue_convergence(
    geometry: str,
    n: complex,
    etas: Sequence[float],
    rect: SearchRect = DEFAULT_RECT,
    order: int = 0,
    tol: float = 1e-12,
) -> EOCStudy:
    """Eigenvalue branches for each ``eta`` in ``etas`` and at ``eta = 0``.

    The branches are tracked from ``eta = 0`` upward through ``etas`` in
    increasing order, then reported in the order ``etas`` was given.
    """
    etas = np.asarray(etas, dtype=float)
    if etas.size == 0:
        raise InvalidArgumentError("empty eta sequence")
    base = Medium(n, 0.0)
    k0 = np.array(order_branches(r.k for r in compute_ites(geometry, base, rect, order, tol) if r.order == order))
    if k0.size == 0:
        raise ConvergenceError("no eigenvalues at eta = 0 in the search rectangle")
    perm = np.argsort(etas)
    sets = []
    for e in etas[perm]:
        recs = compute_ites(geometry, base.with_eta(e), rect, order, tol)
        sets.append([r.k for r in recs if r.order == order])
    tracked = track_branches(k0, sets)
    k_eta = np.empty_like(tracked)
    k_eta[perm] = tracked
    return EOCStudy(check_geometry(geometry), complex(n), etas, k0, k_eta)
