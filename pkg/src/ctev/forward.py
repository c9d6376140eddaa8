"""Modal scattering by the unit sphere and unit disk with a conductive boundary.

Mode by mode the transmission problem reduces to a 2x2 system.  Its solution
is the ratio

    lambda_p = d(k; f = j_p) / d(k; f = h_p)

where ``d`` is the dispersion determinant and the denominator replaces the
interior-type function of ``k`` by the outgoing Hankel function.  On the
sphere the far-field operator acts on each spherical-harmonic space as
``(4 pi i / k) lambda_p``.  On the disk the scattered coefficient of mode
``m`` relative to the incident ``J_m`` coefficient is ``-lambda_m``; with the
2D far-field constant ``exp(i pi/4) / sqrt(8 pi k)`` the pattern is

    u_inf(theta, theta_d) = 4 i sum_m lambda_|m| exp(i m (theta - theta_d)),

so the far-field operator eigenvalue of ``exp(i m theta)`` is
``8 pi i lambda_|m|``.  For real ``n`` and ``eta`` one has
``|1 - 2 lambda| = 1``, which puts the eigenvalues on a circle through 0.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import special

from . import specfun
from ._validation import check_geometry, check_order, check_positive
from .dispersion import Medium
from .exceptions import ConvergenceError, InvalidArgumentError, ResonanceError

__all__ = [
    "FarFieldEigenvalue",
    "NearFieldDataset",
    "truncation_order",
    "mie_lambda_sphere",
    "mie_lambda_disk",
    "mie_alpha_disk",
    "modal_ratio",
    "farfield_operator_eigs",
    "farfield_pattern",
    "plane_wave_expansion",
    "synth_nearfield",
    "disk_boundary_traces",
    "lsm_gnorm",
]

RESONANCE_FLOOR = 1e-14
MAX_MODES = 200


class FarFieldEigenvalue(NamedTuple):
    order: int
    value: complex
    multiplicity: int


def truncation_order(k: float, med: Medium) -> int:
    """``ceil(k * max(1, |sqrt n|)) + 15``."""
    s = abs(np.sqrt(med.index(k)))
    return int(math.ceil(abs(k) * max(1.0, s))) + 15


def _funcs(geometry):
    if geometry == "sphere":
        return (specfun.sph_bessel_j, specfun.sph_bessel_j_deriv, specfun.sph_hankel1, specfun.sph_hankel1_deriv)
    return (specfun.bessel_j, specfun.bessel_j_deriv, specfun.hankel1, specfun.hankel1_deriv)


def modal_ratio(geometry: str, order: int, k, med: Medium):
    """Numerator and denominator of ``lambda`` (vectorized over ``k``).

    The numerator is exactly the dispersion determinant of the same order.
    """
    geometry = check_geometry(geometry)
    p = check_order(order)
    k = np.asarray(k, dtype=complex)
    if np.any(k == 0):
        raise InvalidArgumentError("k must be nonzero")
    j, dj, h, dh = _funcs(geometry)
    a = k * np.sqrt(med.index(k))
    ja, dja = j(p, a), dj(p, a)
    jk, hk = j(p, k), h(p, k)
    num = a * dja * jk - ja * (k * dj(p, k) + med.eta * jk)
    den = a * dja * hk - ja * (k * dh(p, k) + med.eta * hk)
    return num, den


def _lambda(geometry, order, k, med):
    num, den = modal_ratio(geometry, order, k, med)
    if np.any(np.abs(den) < RESONANCE_FLOOR):
        raise ResonanceError(f"modal denominator vanishes (order {order}, k={k})")
    out = num / den
    return complex(out) if np.ndim(k) == 0 else out


def mie_lambda_sphere(p: int, k, med: Medium):
    """Sphere modal ratio ``lambda_p``.

    Raises
    ------
    ResonanceError
        If the denominator is below 1e-14 in modulus.
    """
    return _lambda("sphere", p, k, med)


def mie_lambda_disk(m: int, k, med: Medium):
    """Disk analogue of :func:`mie_lambda_sphere` (``J_m`` and ``H_m``)."""
    return _lambda("disk", m, k, med)


def mie_alpha_disk(m: int, k, med: Medium):
    """Scattered coefficient of mode ``m`` per unit incident ``J_m`` coefficient.

    The exterior field of mode ``m`` is ``J_m(kr) + alpha H_m(kr)``; the
    interior field is ``beta J_m(k sqrt(n) r)``.
    """
    return -_lambda("disk", m, k, med)


def _orders(geometry, k, med, P):
    if P is None:
        return _decayed_order(geometry, k, med)
    return check_order(P)


def _decayed_order(geometry, k, med):
    P = truncation_order(k, med)
    head = max(abs(_lambda(geometry, q, k, med)) for q in range(3))
    while P <= MAX_MODES - 10:
        if abs(_lambda(geometry, P, k, med)) <= 1e-16 * head:
            return P
        P += 10
    raise ConvergenceError(f"modal series did not decay by order {MAX_MODES} (k={k})")


def farfield_operator_eigs(
    geometry: str, k: float, med: Medium, tol: float = 1e-14, P: int | None = None
) -> list[FarFieldEigenvalue]:
    """Distinct far-field operator eigenvalues with order labels.

    Orders with ``|lambda| < tol`` are dropped.  On the sphere the value for
    order ``p`` is ``(4 pi i / k) lambda_p`` (multiplicity ``2p + 1``); on the
    disk it is ``8 pi i lambda_m`` (multiplicity 1 for ``m = 0``, else 2).
    """
    geometry = check_geometry(geometry)
    k = check_positive(k, name="k")
    P = _orders(geometry, k, med, P)
    out = []
    for p in range(P + 1):
        lam = _lambda(geometry, p, k, med)
        if abs(lam) < tol:
            continue
        if geometry == "sphere":
            out.append(FarFieldEigenvalue(p, 4j * np.pi / k * lam, 2 * p + 1))
        else:
            out.append(FarFieldEigenvalue(p, 8j * np.pi * lam, 1 if p == 0 else 2))
    return out


def _unit_vector(d):
    d = np.asarray(d, dtype=float)
    if d.shape == (2,):
        th, ph = d
        return np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    if d.shape == (3,):
        nrm = np.linalg.norm(d)
        if nrm == 0:
            raise InvalidArgumentError("direction must be nonzero")
        return d / nrm
    raise InvalidArgumentError("sphere directions are (polar, azimuth) pairs or 3-vectors")


def farfield_pattern(xhat, yhat, k: float, med: Medium, geometry: str = "disk", P: int | None = None):
    """Far-field pattern ``u_inf(xhat, yhat)`` for plane-wave incidence along ``yhat``.

    On the disk ``xhat`` and ``yhat`` are angles (broadcast together).  On the
    sphere each is a ``(polar, azimuth)`` pair or a 3-vector, and

        u_inf = (i / k) sum_p (2p + 1) lambda_p P_p(xhat . yhat).
    """
    geometry = check_geometry(geometry)
    k = check_positive(k, name="k")
    P = _orders(geometry, k, med, P)
    lam = np.array([_lambda(geometry, p, k, med) for p in range(P + 1)])
    if geometry == "sphere":
        c = float(np.clip(_unit_vector(xhat) @ _unit_vector(yhat), -1.0, 1.0))
        leg = np.array([special.eval_legendre(p, c) for p in range(P + 1)])
        return complex(1j / k * np.sum((2 * np.arange(P + 1) + 1) * lam * leg))
    psi = np.asarray(xhat, dtype=float) - np.asarray(yhat, dtype=float)
    m = np.arange(1, P + 1)
    terms = lam[0] + 2.0 * np.sum(lam[1:, None] * np.cos(m[:, None] * psi.ravel()[None, :]), axis=0)
    out = (4j * terms).reshape(psi.shape)
    return complex(out) if out.ndim == 0 else out


def plane_wave_expansion(x, d, k: float, P: int, geometry: str = "disk"):
    """Truncated Jacobi-Anger series of ``exp(i k x . d)``.

    ``x`` has shape ``(N, dim)``; ``d`` is a unit vector of length ``dim``.
    """
    geometry = check_geometry(geometry)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = np.asarray(d, dtype=float)
    r = np.linalg.norm(x, axis=1)
    safe = np.where(r > 0, r, 1.0)
    c = np.where(r > 0, (x @ d) / safe, 1.0)
    if geometry == "sphere":
        total = np.zeros(len(r), dtype=complex)
        for p in range(P + 1):
            total += (2 * p + 1) * 1j**p * special.spherical_jn(p, k * r) * special.eval_legendre(p, c)
        return total
    psi = np.arccos(np.clip(c, -1.0, 1.0))
    total = special.jv(0, k * r).astype(complex)
    for m in range(1, P + 1):
        total += 2.0 * 1j**m * special.jv(m, k * r) * np.cos(m * psi)
    return total


@dataclass
class NearFieldDataset:
    """Scattered field ``values[i, j] = u^s(x_i, y_j)`` on the circle ``|x| = R_C``."""

    k: float
    R_C: float
    source_angles: np.ndarray
    receiver_angles: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.k = check_positive(self.k, name="k")
        self.R_C = float(self.R_C)
        if not self.R_C > 1:
            raise InvalidArgumentError(f"R_C must exceed 1, got {self.R_C}")
        self.source_angles = np.asarray(self.source_angles, dtype=float)
        self.receiver_angles = np.asarray(self.receiver_angles, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        want = (self.receiver_angles.size, self.source_angles.size)
        if self.values.shape != want:
            raise InvalidArgumentError(f"values must have shape {want}, got {self.values.shape}")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "R_C"])
            w.writerow([repr(self.k), repr(self.R_C)])
            w.writerow(["receiver_angle", "source_angle", "re", "im"])
            for i, xa in enumerate(self.receiver_angles):
                for j, ya in enumerate(self.source_angles):
                    v = self.values[i, j]
                    w.writerow([repr(float(xa)), repr(float(ya)), repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def from_csv(cls, path) -> "NearFieldDataset":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 3 or rows[0] != ["k", "R_C"] or rows[2] != ["receiver_angle", "source_angle", "re", "im"]:
            raise InvalidArgumentError(f"{path}: not a near-field CSV")
        k, rc = (float(v) for v in rows[1])
        body = np.array([[float(v) for v in r] for r in rows[3:] if r], dtype=float)
        rec = list(dict.fromkeys(body[:, 0].tolist()))
        src = list(dict.fromkeys(body[:, 1].tolist()))
        vals = (body[:, 2] + 1j * body[:, 3]).reshape(len(rec), len(src))
        return cls(k, rc, np.array(src), np.array(rec), vals)

    def to_json(self, path=None) -> str:
        doc = {
            "kind": "near-field dataset",
            "k": self.k,
            "R_C": self.R_C,
            "source_angles": self.source_angles.tolist(),
            "receiver_angles": self.receiver_angles.tolist(),
            "values": {"real": self.values.real.tolist(), "imag": self.values.imag.tolist()},
            "layout": "values[receiver][source]",
            "meta": self.meta,
        }
        text = json.dumps(doc)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source) -> "NearFieldDataset":
        text = Path(source).read_text() if not str(source).lstrip().startswith("{") else str(source)
        doc = json.loads(text)
        vals = np.asarray(doc["values"]["real"]) + 1j * np.asarray(doc["values"]["imag"])
        return cls(doc["k"], doc["R_C"], doc["source_angles"], doc["receiver_angles"], vals, doc.get("meta", {}))


def _point_source_modes(k, med, R_C, max_modes=MAX_MODES):
    """Scattered coefficients ``alpha_m`` and ``H_m(k R_C)`` until the series decays."""
    alpha, hc = [], []
    for m in range(max_modes + 1):
        alpha.append(mie_alpha_disk(m, k, med))
        hc.append(complex(specfun.hankel1(m, k * R_C)))
        terms = np.abs(np.array(alpha) * np.array(hc) ** 2)
        if m >= max(4, int(np.ceil(k * R_C)) + 2) and np.all(terms[-2:] <= 1e-16 * terms.max()):
            return np.array(alpha), np.array(hc)
        if m >= max(4, int(np.ceil(k * R_C)) + 2) and terms.max() == 0:
            return np.array(alpha), np.array(hc)
    raise ConvergenceError(f"point-source series did not decay by mode {max_modes}")


def synth_nearfield(
    k: float, med: Medium, R_C: float = 2.0, n_src: int = 64, n_rec: int = 64
) -> NearFieldDataset:
    """Scattered field of the unit disk for point sources on ``|y| = R_C``.

    Sources and receivers are equispaced on the same circle.  With
    ``Phi(x, y) = (i/4) sum_m J_m(k|x|) H_m(k R_C) exp(i m (theta - phi))``
    the data are ``(i/4) sum_m alpha_m H_m(k R_C)^2 exp(i m (theta - phi))``.
    """
    k = check_positive(k, name="k")
    if not R_C > 1:
        raise InvalidArgumentError(f"R_C must exceed 1, got {R_C}")
    if int(n_src) < 1 or int(n_rec) < 1:
        raise InvalidArgumentError("n_src and n_rec must be positive")
    alpha, hc = _point_source_modes(k, med, R_C)
    src = 2 * np.pi * np.arange(int(n_src)) / int(n_src)
    rec = 2 * np.pi * np.arange(int(n_rec)) / int(n_rec)
    psi = rec[:, None] - src[None, :]
    coef = alpha * hc**2
    total = coef[0] * np.ones_like(psi, dtype=complex)
    for m in range(1, coef.size):
        total += 2.0 * coef[m] * np.cos(m * psi)
    meta = {"geometry": "disk", "n": [med.n.real, med.n.imag], "eta": [med.eta.real, med.eta.imag]}
    return NearFieldDataset(k, R_C, src, rec, 0.25j * total, meta)


def disk_boundary_traces(k: float, med: Medium, R_C: float, source_angle: float, node_angles):
    """Exact traces on ``r = 1`` for a point source at ``R_C exp(i source_angle)``.

    Returns a dict with the exterior total field ``u_plus``, its normal
    derivative ``dnu_plus``, the interior normal derivative ``dnu_minus`` and
    the incident field ``u_inc`` at the nodes.
    """
    k = check_positive(k, name="k")
    alpha, hc = _point_source_modes(k, med, R_C)
    th = np.asarray(node_angles, dtype=float)
    a = k * np.sqrt(med.index(k))
    out = {key: np.zeros(th.shape, dtype=complex) for key in ("u_plus", "dnu_plus", "dnu_minus", "u_inc")}
    for m in range(alpha.size):
        jk, djk = specfun.bessel_j(m, k), specfun.bessel_j_deriv(m, k)
        hk, dhk = specfun.hankel1(m, k), specfun.hankel1_deriv(m, k)
        beta = (jk + alpha[m] * hk) / specfun.bessel_j(m, a)
        w = 0.25j * hc[m]
        ang = np.exp(1j * m * (th - source_angle))
        if m > 0:
            ang = ang + np.exp(-1j * m * (th - source_angle))
        out["u_plus"] += w * (jk + alpha[m] * hk) * ang
        out["dnu_plus"] += w * k * (djk + alpha[m] * dhk) * ang
        out["dnu_minus"] += w * beta * a * specfun.bessel_j_deriv(m, a) * ang
        out["u_inc"] += w * jk * ang
    return out


def lsm_gnorm(k: float, z_radius: float, med: Medium, P: int | None = None) -> float:
    """Squared norm of the far-field-equation solution for a point at ``|z| = z_radius``.

        ||g_z||^2 = k^2 sum_{p <= P} (2p + 1) / (4 pi) |j_p(k |z|)|^2 / |lambda_p|^2

    The series diverges as ``P`` grows for ``z != 0`` (the far-field equation
    has no exact solution), so ``P`` defaults to ``max(1, ceil(k))``, the
    propagating orders.  A vanishing ``lambda_p`` gives ``inf`` with a warning.
    """
    k = check_positive(k, name="k")
    z_radius = float(z_radius)
    if not 0 <= z_radius < 1:
        raise InvalidArgumentError("z_radius must lie in [0, 1)")
    P = max(1, int(math.ceil(k))) if P is None else check_order(P)
    total = 0.0
    for p in range(P + 1):
        jz = abs(complex(specfun.sph_bessel_j(p, k * z_radius)))
        if jz == 0:
            continue
        lam = abs(mie_lambda_sphere(p, k, med))
        if lam < 1e-300:
            warnings.warn(f"lambda_{p} vanishes at k={k}; norm is unbounded", RuntimeWarning, stacklevel=2)
            return math.inf
        total += (2 * p + 1) / (4 * np.pi) * (jz / lam) ** 2
    return k**2 * total
