"""Eigenvalue detection from the phases of far-field operator eigenvalues.

For each modal order the far-field operator eigenvalue is tracked over a
wavenumber grid.  A transmission eigenvalue shows up as a grid point where
the phase of one track peaks close to ``pi`` and then drops back.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_geometry, check_is_fitted, check_positive
from .dispersion import Medium
from .exceptions import InvalidArgumentError
from .forward import RESONANCE_FLOOR, _decayed_order, modal_ratio

__all__ = [
    "PhaseCurve",
    "k_grid",
    "phase_curves",
    "phase_peaks",
    "detect_ites",
    "InsideOutsideDuality",
]


def k_grid(k_min: float, k_max: float, step: float) -> np.ndarray:
    """Equispaced grid including both ends, rounded to the step's decimals."""
    k_min = check_positive(k_min, name="k_min")
    step = check_positive(step, name="step")
    if k_max < k_min:
        raise InvalidArgumentError("k_max must be >= k_min")
    count = int(np.floor((k_max - k_min) / step + 1e-9)) + 1
    decimals = max(0, int(np.ceil(-np.log10(step))) + 2)
    return np.round(k_min + step * np.arange(count), decimals)


@dataclass
class PhaseCurve:
    """Moduli and phases of far-field eigenvalues on a wavenumber grid.

    ``modulus`` and ``phase`` have shape ``(len(k_grid), len(orders))``;
    discarded entries are NaN.  ``flags`` lists grid indices skipped because
    of a modal resonance.
    """

    k_grid: np.ndarray
    orders: np.ndarray
    modulus: np.ndarray
    phase: np.ndarray
    flags: list = field(default_factory=list)

    @property
    def envelope(self) -> np.ndarray:
        """Largest retained phase at each grid point (NaN if none)."""
        out = np.full(self.k_grid.shape, np.nan)
        has = np.any(np.isfinite(self.phase), axis=1)
        out[has] = np.nanmax(self.phase[has], axis=1)
        return out

    def entries(self, i: int) -> list[tuple[int, float, float]]:
        keep = np.isfinite(self.phase[i])
        return [(int(p), float(m), float(ph)) for p, m, ph in zip(self.orders[keep], self.modulus[i, keep], self.phase[i, keep])]

    def is_empty(self) -> bool:
        return not np.any(np.isfinite(self.phase))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "order", "modulus", "phase"])
            for i, k in enumerate(self.k_grid):
                for p, m, ph in self.entries(i):
                    w.writerow([f"{k:.6f}", p, f"{m:.6f}", f"{ph:.6f}"])


def phase_curves(
    geometry: str,
    med: Medium,
    k_min: float = 1.0,
    k_max: float = 5.0,
    step: float = 0.01,
    floor: float = 1e-8,
    max_order: int | None = None,
) -> PhaseCurve:
    """Far-field eigenvalue phases in ``[0, 2 pi)`` for orders ``0..max_order``.

    Entries whose modulus is below ``floor`` times the largest modulus at the
    same wavenumber are discarded.  ``max_order`` defaults to the truncation
    order at ``k_max``.
    """
    geometry = check_geometry(geometry)
    if med.is_absorbing or not med.is_real:
        raise InvalidArgumentError("phase curves need real n and eta")
    ks = k_grid(k_min, k_max, step)
    if max_order is None:
        max_order = _decayed_order(geometry, float(ks[-1]), med)
    orders = np.arange(int(max_order) + 1)
    mu = np.zeros((ks.size, orders.size), dtype=complex)
    bad = np.zeros(ks.size, dtype=bool)
    for p in orders:
        num, den = modal_ratio(geometry, int(p), ks, med)
        bad |= np.abs(den) < RESONANCE_FLOOR
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = num / den
        mu[:, p] = (4j * np.pi / ks) * lam if geometry == "sphere" else 8j * np.pi * lam
    mod = np.abs(mu)
    top = mod.max(axis=1, keepdims=True)
    keep = (mod >= floor * top) & (top > 0) & ~bad[:, None]
    phase = np.where(keep, np.mod(np.angle(mu), 2 * np.pi), np.nan)
    return PhaseCurve(ks, orders, np.where(keep, mod, np.nan), phase, np.nonzero(bad)[0].tolist())


def phase_peaks(pc: PhaseCurve) -> list[tuple[int, float, float]]:
    """Interior local maxima ``(order, k, phase)`` of every track.

    A peak needs ``phase[i] >= phase[i-1]`` and ``phase[i] > phase[i+1]``.
    """
    out = []
    ph = pc.phase
    for c, p in enumerate(pc.orders):
        col = ph[:, c]
        a, b, nxt = col[:-2], col[1:-1], col[2:]
        ok = np.isfinite(a) & np.isfinite(b) & np.isfinite(nxt) & (b >= a) & (b > nxt)
        for i in np.nonzero(ok)[0] + 1:
            out.append((int(p), float(pc.k_grid[i]), float(col[i])))
    return out


def detect_ites(pc: PhaseCurve, proximity: float = 0.1) -> list[float]:
    """Grid wavenumbers where some track peaks within ``proximity`` of ``pi``."""
    proximity = float(proximity)
    if not 0 < proximity < np.pi / 4:
        raise InvalidArgumentError("proximity must lie in (0, pi/4)")
    hits = {k for _, k, ph in phase_peaks(pc) if abs(ph - np.pi) < proximity}
    return sorted(hits)


class InsideOutsideDuality(BaseEstimator):
    """Estimator form of :func:`phase_curves` and :func:`detect_ites`.

    ``fit`` takes an optional 1-D array of wavenumbers (equispaced); without
    one the grid comes from ``k_min``, ``k_max`` and ``step``.

    Attributes
    ----------
    phase_curve_ : PhaseCurve
    eigenvalues_ : list of float
    """

    def __init__(self, geometry="sphere", n=4.0, eta=1.0, k_min=1.0, k_max=5.0, step=0.01,
                 floor=1e-8, proximity=0.1, max_order=None):
        self.geometry = geometry
        self.n = n
        self.eta = eta
        self.k_min = k_min
        self.k_max = k_max
        self.step = step
        self.floor = floor
        self.proximity = proximity
        self.max_order = max_order

    def fit(self, X=None, y=None):
        lo, hi, step = self.k_min, self.k_max, self.step
        if X is not None:
            X = np.asarray(X, dtype=float).ravel()
            if X.size < 3:
                raise InvalidArgumentError("need at least three wavenumbers")
            d = np.diff(X)
            if not np.allclose(d, d[0], rtol=1e-6):
                raise InvalidArgumentError("wavenumbers must be equispaced")
            lo, hi, step = X[0], X[-1], d[0]
        med = Medium(self.n, self.eta)
        self.phase_curve_ = phase_curves(self.geometry, med, lo, hi, step, self.floor, self.max_order)
        self.eigenvalues_ = detect_ites(self.phase_curve_, self.proximity)
        return self

    def transform(self, X=None):
        """Phase envelope on the fitted grid."""
        check_is_fitted(self, "phase_curve_")
        return self.phase_curve_.envelope

    def predict(self, X=None):
        check_is_fitted(self, "eigenvalues_")
        return np.asarray(self.eigenvalues_)
