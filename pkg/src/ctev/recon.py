"""Recovery of a constant or pointwise boundary conductivity on the unit disk.

Every operator is diagonal in the Fourier basis ``exp(i m t)`` of the unit
circle, so the pipeline works mode by mode:

1. the scattered field on ``|x| = R_C`` is written as a single layer
   ``A f`` with symbol ``a_m = (i pi / 2) J_m(k) H_m(k R_C)`` and ``f`` is
   found by Tikhonov regularization;
2. the exterior traces follow from the jump relations,
   ``u+ = V f + u_inc`` and ``d_nu u+ = (K' - 1/2) f + d_nu u_inc``;
3. the interior Dirichlet-to-Neumann map ``T = V^{-1} (1/2 + K)`` at
   wavenumber ``k sqrt(n)`` closes ``d_nu u+ + eta u+ = T u+``.

The layer symbols are computed from the boundary kernels themselves, with the
logarithmic singularity split off and integrated exactly, so comparing ``T``
with ``k sqrt(n) J'_m / J_m`` is an independent check.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator

from . import specfun
from ._validation import check_is_fitted, check_order, check_positive
from .exceptions import DirichletEigenvalueError, InvalidArgumentError
from .forward import NearFieldDataset

__all__ = [
    "FourierSymbol",
    "LayerDensity",
    "ReconstructionResult",
    "assemble_A_modal",
    "layer_symbols",
    "layer_symbols_closed",
    "dtn_map",
    "dtn_closed_form",
    "solve_density",
    "data_residual",
    "morozov_alpha",
    "exterior_traces",
    "exterior_neumann_trace",
    "recover_eta",
    "ConductivityReconstructor",
]

DIRICHLET_FLOOR = 1e-10
NODE_FLOOR = 1e-6


@dataclass(frozen=True)
class FourierSymbol:
    """Diagonal operator: mode ``modes[i]`` is multiplied by ``values[i]``."""

    modes: np.ndarray
    values: np.ndarray

    def __getitem__(self, m: int) -> complex:
        idx = np.nonzero(self.modes == m)[0]
        if idx.size == 0:
            raise KeyError(m)
        return complex(self.values[idx[0]])

    def __mul__(self, other):
        if isinstance(other, FourierSymbol):
            return FourierSymbol(self.modes, self.values * other.values)
        return FourierSymbol(self.modes, self.values * other)

    __rmul__ = __mul__

    def apply(self, coeffs):
        return self.values * np.asarray(coeffs)


def _modes(M: int) -> np.ndarray:
    M = check_order(M)
    return np.arange(-M, M + 1)


def _jh(order_abs, z, deriv=False):
    # J_{-m} = (-1)^m J_m, so products J_m H_m are even in m
    if deriv:
        return specfun.bessel_j_deriv(order_abs, z), specfun.hankel1_deriv(order_abs, z)
    return specfun.bessel_j(order_abs, z), specfun.hankel1(order_abs, z)


def assemble_A_modal(k: float, R_C: float, M: int) -> FourierSymbol:
    """Symbol of the single layer from the unit circle to the circle ``R_C``."""
    k = check_positive(k, name="k")
    if not R_C > 1:
        raise InvalidArgumentError(f"R_C must exceed 1, got {R_C}")
    modes = _modes(M)
    vals = np.array([0.5j * np.pi * specfun.bessel_j(abs(m), k) * specfun.hankel1(abs(m), k * R_C) for m in modes])
    return FourierSymbol(modes, vals)


def layer_symbols_closed(kappa: complex, M: int) -> tuple[FourierSymbol, FourierSymbol]:
    """Closed-form ``V`` and ``K`` symbols on the unit circle."""
    modes = _modes(M)
    v, kk = [], []
    for m in modes:
        j, h = _jh(abs(m), kappa)
        dj, dh = _jh(abs(m), kappa, deriv=True)
        v.append(0.5j * np.pi * j * h)
        kk.append(0.25j * np.pi * kappa * (dj * h + j * dh))
    return FourierSymbol(modes, np.array(v)), FourierSymbol(modes, np.array(kk))


def _log_coeffs(j):
    # Fourier coefficients of ln(4 sin^2(t/2))
    j = np.abs(j)
    out = np.zeros(j.shape)
    nz = j != 0
    out[nz] = -1.0 / j[nz]
    return out


def _split_symbol(m1, m2, modes):
    """Symbols of ``m1(t) ln(4 sin^2(t/2)) + m2(t)`` from samples on ``2 pi j / N``."""
    N = m1.size
    c1 = np.fft.fft(m1) / N
    c2 = np.fft.fft(m2) / N
    freq = np.fft.fftfreq(N, d=1.0 / N).astype(int)
    out = []
    for m in modes:
        j = m - freq
        conv = np.sum(c1 * _log_coeffs(j))
        idx = np.nonzero(freq == m)[0]
        direct = c2[idx[0]] if idx.size else 0.0
        out.append(2.0 * np.pi * (conv + direct))
    return np.array(out)


def layer_symbols(kappa: complex, M: int, n_quad: int | None = None) -> tuple[FourierSymbol, FourierSymbol]:
    """``V`` and ``K`` symbols on the unit circle from their kernels.

    With ``rho = 2 |sin(t/2)|`` the kernels ``(i/4) H_0(kappa rho)`` and
    ``-(i kappa / 8) rho H_1(kappa rho)`` are split as
    ``M1(t) ln(4 sin^2(t/2)) + M2(t)`` with analytic ``M1, M2``; the smooth
    parts are sampled with the FFT and the logarithm's coefficients
    ``-1/|j|`` are used exactly.
    """
    kappa = complex(kappa)
    if kappa == 0 or not np.isfinite(kappa):
        raise InvalidArgumentError("kappa must be finite and nonzero")
    modes = _modes(M)
    if n_quad is None:
        n_quad = int(2 ** np.ceil(np.log2(max(128, 4 * (M + 8), 8 * (abs(kappa) + 8)))))
    t = 2.0 * np.pi * np.arange(n_quad) / n_quad
    rho = 2.0 * np.abs(np.sin(0.5 * t))
    logs = np.zeros(n_quad)
    logs[1:] = np.log(rho[1:] ** 2)
    zr = kappa * rho
    zr[0] = 1.0  # placeholder, overwritten below

    j0 = special.jv(0, kappa * rho)
    v1 = -j0 / (4.0 * np.pi)
    v2 = np.empty(n_quad, dtype=complex)
    v2[1:] = 0.25j * special.hankel1(0, zr[1:]) - v1[1:] * logs[1:]
    v2[0] = 0.25j - (np.log(kappa / 2.0) + np.euler_gamma) / (2.0 * np.pi)

    rj1 = rho * special.jv(1, kappa * rho)
    k1 = kappa / (8.0 * np.pi) * rj1
    k2 = np.empty(n_quad, dtype=complex)
    k2[1:] = -0.125j * kappa * rho[1:] * special.hankel1(1, zr[1:]) - k1[1:] * logs[1:]
    k2[0] = -1.0 / (4.0 * np.pi)

    vs = _split_symbol(v1.astype(complex), v2, modes)
    ks = _split_symbol(k1.astype(complex), k2, modes)
    return FourierSymbol(modes, vs), FourierSymbol(modes, ks)


def _check_dirichlet(kappa, M):
    for m in range(check_order(M) + 1):
        j = abs(complex(specfun.bessel_j(m, kappa)))
        dj = abs(complex(specfun.bessel_j_deriv(m, kappa)))
        if j < DIRICHLET_FLOOR * max(dj, 1e-300):
            raise DirichletEigenvalueError(f"k^2 n is a Dirichlet eigenvalue of the disk (J_{m}(k sqrt n) ~ 0)")


@dataclass(frozen=True)
class DtN:
    t: FourierSymbol
    v: FourierSymbol
    k: FourierSymbol
    kappa: complex


def dtn_map(k: float, n: complex, M: int, *, n_quad: int | None = None) -> DtN:
    """Interior Dirichlet-to-Neumann symbol ``T = V^{-1}(1/2 + K)`` at ``k sqrt(n)``.

    Raises
    ------
    DirichletEigenvalueError
        If ``J_m(k sqrt n)`` vanishes relative to ``J'_m(k sqrt n)`` for some
        ``m <= M`` (distance to a Dirichlet eigenvalue below 1e-10).
    """
    k = check_positive(k, name="k")
    n = complex(n)
    if n.real <= 0:
        raise InvalidArgumentError("Re(n) must be positive")
    kappa = k * np.sqrt(n)
    _check_dirichlet(kappa, M)
    v, kk = layer_symbols(kappa, M, n_quad)
    t = FourierSymbol(v.modes, (0.5 + kk.values) / v.values)
    return DtN(t, v, kk, kappa)


def dtn_closed_form(k: float, n: complex, M: int) -> FourierSymbol:
    """``k sqrt(n) J'_m(k sqrt n) / J_m(k sqrt n)`` for ``|m| <= M``."""
    kappa = k * np.sqrt(complex(n))
    modes = _modes(M)
    vals = [kappa * specfun.bessel_j_deriv(abs(m), kappa) / specfun.bessel_j(abs(m), kappa) for m in modes]
    return FourierSymbol(modes, np.array(vals))


@dataclass
class LayerDensity:
    """Single-layer density for one source, as Fourier coefficients."""

    k: float
    R_C: float
    source_angle: float
    modes: np.ndarray
    coeffs: np.ndarray
    residual: float = 0.0


def _data_coeffs(nf: NearFieldDataset, M: int):
    nrec = nf.receiver_angles.size
    th = nf.receiver_angles
    if not np.allclose(th, 2 * np.pi * np.arange(nrec) / nrec):
        raise InvalidArgumentError("receivers must be equispaced starting at angle 0")
    modes = _modes(M)
    c = np.fft.fft(nf.values, axis=0) / nrec
    return c[modes % nrec, :]


def _default_M(nf):
    return max(1, nf.receiver_angles.size // 2 - 1)


def _synth(modes, coeffs, angles):
    return np.exp(1j * np.outer(angles, modes)) @ coeffs


def solve_density(nf: NearFieldDataset, alpha: float, M: int | None = None) -> list[LayerDensity]:
    """Tikhonov solution ``f_m = conj(a_m) u_m / (alpha + |a_m|^2)`` per source.

    ``residual`` is the relative misfit ``||A f - u|| / ||u||`` at the receivers.
    """
    alpha = check_positive(alpha, name="alpha")
    M = _default_M(nf) if M is None else check_order(M)
    if M > nf.receiver_angles.size // 2 - 1:
        raise InvalidArgumentError("M must be below half the number of receivers")
    a = assemble_A_modal(nf.k, nf.R_C, M)
    uh = _data_coeffs(nf, M)
    f = (np.conj(a.values)[:, None] * uh) / (alpha + np.abs(a.values)[:, None] ** 2)
    fit = _synth(a.modes, a.values[:, None] * f, nf.receiver_angles)
    out = []
    for j, phi in enumerate(nf.source_angles):
        nrm = np.linalg.norm(nf.values[:, j])
        res = np.linalg.norm(fit[:, j] - nf.values[:, j]) / nrm if nrm > 0 else 0.0
        out.append(LayerDensity(nf.k, nf.R_C, float(phi), a.modes, f[:, j], float(res)))
    return out


def data_residual(nf: NearFieldDataset, alpha: float, M: int | None = None) -> float:
    """Relative Frobenius misfit ``||A F - U|| / ||U||`` over all sources."""
    dens = solve_density(nf, alpha, M)
    a = assemble_A_modal(nf.k, nf.R_C, dens[0].modes.max())
    F = np.column_stack([d.coeffs for d in dens])
    fit = _synth(a.modes, a.values[:, None] * F, nf.receiver_angles)
    nrm = np.linalg.norm(nf.values)
    return float(np.linalg.norm(fit - nf.values) / nrm) if nrm > 0 else 0.0


def morozov_alpha(
    nf: NearFieldDataset,
    noise_level: float,
    tau: float = 1.0,
    M: int | None = None,
    bounds: tuple[float, float] = (1e-16, 1e2),
) -> float:
    """Regularization parameter with ``data_residual = tau * noise_level``.

    The misfit increases with ``alpha``; bisection runs on ``log10(alpha)``.
    If even the smallest ``alpha`` misfits by more than the target, it is
    returned.
    """
    target = tau * check_positive(noise_level, name="noise_level")
    lo, hi = np.log10(bounds[0]), np.log10(bounds[1])
    if data_residual(nf, 10**lo, M) >= target:
        return float(10**lo)
    if data_residual(nf, 10**hi, M) <= target:
        return float(10**hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if data_residual(nf, 10**mid, M) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-3:
            break
    return float(10 ** (0.5 * (lo + hi)))


def _incident(density: LayerDensity):
    k, rc = density.k, density.R_C
    u, du = [], []
    for m in density.modes:
        jm, djm = specfun.bessel_j(abs(m), k), specfun.bessel_j_deriv(abs(m), k)
        c = 0.25j * specfun.hankel1(abs(m), k * rc) * np.exp(-1j * m * density.source_angle)
        u.append(c * jm)
        du.append(c * k * djm)
    return np.array(u), np.array(du)


def exterior_traces(density: LayerDensity, symbols=None):
    """Fourier coefficients of ``u+`` and ``d_nu u+`` on the unit circle."""
    M = int(density.modes.max())
    v, kk = symbols if symbols is not None else layer_symbols(density.k, M)
    u_inc, du_inc = _incident(density)
    u = v.values * density.coeffs + u_inc
    du = (kk.values - 0.5) * density.coeffs + du_inc
    return u, du


def exterior_neumann_trace(density: LayerDensity, symbols=None) -> np.ndarray:
    """``(K' - 1/2) f + d_nu u_inc`` in Fourier coefficients."""
    return exterior_traces(density, symbols)[1]


@dataclass
class ReconstructionResult:
    node_angles: np.ndarray
    eta_direct: np.ndarray
    eta_direct_per_source: np.ndarray
    eta_lsq: complex | np.ndarray
    residual_lsq: float
    alpha: float
    model: str
    data_residual: float = 0.0
    excluded_nodes: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def eta_direct_mean(self) -> complex:
        return complex(np.nanmean(self.eta_direct_per_source))

    @property
    def eta_direct_spread(self) -> float:
        vals = self.eta_direct_per_source[np.isfinite(self.eta_direct_per_source)]
        return float(np.sqrt(np.mean(np.abs(vals - vals.mean()) ** 2)))

    def summary(self) -> dict:
        lsq = self.eta_lsq
        return {
            "model": self.model,
            "alpha": self.alpha,
            "eta_direct_mean": [self.eta_direct_mean.real, self.eta_direct_mean.imag],
            "eta_direct_spread": self.eta_direct_spread,
            "eta_lsq": [complex(lsq).real, complex(lsq).imag] if np.ndim(lsq) == 0 else None,
            "residual_lsq": self.residual_lsq,
            "data_residual": self.data_residual,
            "excluded_nodes": self.excluded_nodes,
        }

    def to_json(self, path=None) -> str:
        def pair(z):
            z = np.asarray(z, dtype=complex)
            return {"real": np.where(np.isfinite(z), z.real, np.nan).tolist(), "imag": z.imag.tolist()}

        doc = {
            "summary": self.summary(),
            "node_angles": self.node_angles.tolist(),
            "eta_direct": pair(self.eta_direct),
            "eta_lsq": pair(self.eta_lsq),
            **self.extra,
        }
        text = json.dumps(doc, allow_nan=True)
        if path is not None:
            Path(path).write_text(text)
        return text


def recover_eta(
    nf: NearFieldDataset,
    n: complex,
    alpha: float,
    model: str = "constant",
    *,
    M: int | None = None,
    n_nodes: int | None = None,
    node_floor: float = NODE_FLOOR,
) -> ReconstructionResult:
    """Direct and least-squares conductivity estimates from near-field data.

    Direct: ``eta(x_j) = (T u+ - d_nu u+)(x_j) / u+(x_j)`` for each source,
    skipping nodes where ``|u+| < node_floor * max |u+|``.  Least squares
    minimizes ``sum |d_nu u+ - T u+ + eta u+|^2`` over all sources, with a
    single ``eta`` (``model="constant"``) or one per node (``"pointwise"``).
    """
    if model not in ("constant", "pointwise"):
        raise InvalidArgumentError(f"model must be 'constant' or 'pointwise', got {model!r}")
    M = _default_M(nf) if M is None else check_order(M)
    n_nodes = 2 * M + 2 if n_nodes is None else int(n_nodes)
    dtn = dtn_map(nf.k, n, M)
    syms = layer_symbols(nf.k, M)
    dens = solve_density(nf, alpha, M)
    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes

    U, DU, TU = [], [], []
    for d in dens:
        u, du = exterior_traces(d, syms)
        U.append(_synth(d.modes, u, theta))
        DU.append(_synth(d.modes, du, theta))
        TU.append(_synth(d.modes, dtn.t.values * u, theta))
    U, DU, TU = (np.array(x) for x in (U, DU, TU))  # (sources, nodes)

    keep = np.abs(U) >= node_floor * np.abs(U).max(axis=1, keepdims=True)
    direct = np.full(U.shape, np.nan + 0j)
    direct[keep] = (TU[keep] - DU[keep]) / U[keep]
    with np.errstate(invalid="ignore"):
        per_node = np.nanmean(np.where(keep, direct, np.nan), axis=0)

    r = DU - TU
    if model == "constant":
        eta_lsq = complex(-np.sum(np.conj(U) * r) / np.sum(np.abs(U) ** 2))
        res = float(np.sum(np.abs(r + eta_lsq * U) ** 2))
    else:
        eta_lsq = -np.sum(np.conj(U) * r, axis=0) / np.sum(np.abs(U) ** 2, axis=0)
        res = float(np.sum(np.abs(r + eta_lsq[None, :] * U) ** 2))

    misfit = float(np.sqrt(np.mean([d.residual**2 for d in dens])))
    return ReconstructionResult(
        theta, per_node, direct, eta_lsq, res, float(alpha), model, misfit, int((~keep).sum())
    )


class ConductivityReconstructor(BaseEstimator):
    """Estimator wrapper around :func:`recover_eta`.

    ``fit`` takes a :class:`NearFieldDataset`.  When ``noise_level`` is set,
    ``alpha`` is chosen by the discrepancy principle instead.

    Attributes
    ----------
    result_ : ReconstructionResult
    eta_ : complex or ndarray
        Least-squares estimate.
    eta_direct_ : complex
        Mean direct estimate.
    alpha_ : float
    """

    def __init__(self, n=2.0, alpha=1e-10, model="constant", noise_level=None, M=None, n_nodes=None):
        self.n = n
        self.alpha = alpha
        self.model = model
        self.noise_level = noise_level
        self.M = M
        self.n_nodes = n_nodes

    def fit(self, X: NearFieldDataset, y=None):
        if not isinstance(X, NearFieldDataset):
            raise InvalidArgumentError("fit expects a NearFieldDataset")
        alpha = self.alpha if self.noise_level is None else morozov_alpha(X, self.noise_level, M=self.M)
        self.alpha_ = float(alpha)
        self.result_ = recover_eta(X, self.n, self.alpha_, self.model, M=self.M, n_nodes=self.n_nodes)
        self.eta_ = self.result_.eta_lsq
        self.eta_direct_ = self.result_.eta_direct_mean
        return self

    def predict(self, angles):
        """Conductivity at boundary angles (constant, or periodic interpolation)."""
        check_is_fitted(self, "result_")
        angles = np.asarray(angles, dtype=float)
        if np.ndim(self.eta_) == 0:
            return np.full(angles.shape, self.eta_, dtype=complex)
        th = self.result_.node_angles
        ext = np.concatenate([th, [2 * np.pi]])
        vals = np.concatenate([self.eta_, [self.eta_[0]]])
        a = np.mod(angles, 2 * np.pi)
        return np.interp(a, ext, vals.real) + 1j * np.interp(a, ext, vals.imag)
