"""Numerical property checks run by the ``verify`` subcommand."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .config import ExperimentConfig, parse_complex
from .dispersion import Medium, compute_ites, eigenvalue_convergence
from .forward import farfield_operator_eigs, farfield_pattern, mie_lambda_sphere, truncation_order
from .iod import detect_ites, phase_curves
from .rootfind import SearchRect

__all__ = [
    "Check",
    "annulus_sample",
    "wronskian_errors",
    "energy_defect",
    "circle_fit_residual",
    "reciprocity_defect",
    "monotonicity_defect",
    "run_checks",
]


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: dict = field(default_factory=dict)


def annulus_sample(n: int, seed: int = 0, r_min=0.1, r_max=50.0, im_min=-5.0) -> np.ndarray:
    """Uniform-in-area points of the annulus, rejecting ``Im z < im_min``."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        r = np.sqrt(rng.uniform(r_min**2, r_max**2, 4 * n))
        z = r * np.exp(1j * rng.uniform(0, 2 * np.pi, 4 * n))
        pts.extend(z[z.imag >= im_min].tolist())
    return np.array(pts[:n])


def wronskian_errors(z: np.ndarray, max_order: int = 40) -> tuple[float, float]:
    """Largest relative Wronskian defects (cylindrical, spherical) over orders ``<= max_order``."""
    cyl = sph = 0.0
    for p in range(max_order + 1):
        w = specfun.bessel_j(p, z) * specfun.hankel1_deriv(p, z) - specfun.bessel_j_deriv(p, z) * specfun.hankel1(p, z)
        cyl = max(cyl, float(np.max(np.abs(w - 2j / (np.pi * z)) / np.abs(2 / (np.pi * z)))))
        ws = specfun.sph_bessel_j(p, z) * specfun.sph_hankel1_deriv(p, z) - specfun.sph_bessel_j_deriv(p, z) * specfun.sph_hankel1(p, z)
        sph = max(sph, float(np.max(np.abs(ws - 1j / z**2) * np.abs(z) ** 2)))
    return cyl, sph


def _random_media(count, seed):
    rng = np.random.default_rng(seed)
    return [(float(rng.uniform(0.5, 10)), Medium(float(rng.uniform(1.2, 6)), float(rng.uniform(0, 3)))) for _ in range(count)]


def energy_defect(count: int = 25, seed: int = 1) -> float:
    """``max | |1 - 2 lambda_p| - 1 |`` for random real sphere media."""
    worst = 0.0
    for k, med in _random_media(count, seed):
        for p in range(truncation_order(k, med) + 1):
            worst = max(worst, abs(abs(1 - 2 * mie_lambda_sphere(p, k, med)) - 1))
    return worst


def circle_fit_residual(values) -> float:
    """Fit ``|mu - c| = |c|`` by least squares and return the largest misfit."""
    mu = np.asarray(values, dtype=complex)
    # |mu|^2 = 2 Re(conj(c) mu) is linear in (Re c, Im c)
    A = np.column_stack([2 * mu.real, 2 * mu.imag])
    sol, *_ = np.linalg.lstsq(A, np.abs(mu) ** 2, rcond=None)
    c = complex(sol[0], sol[1])
    return float(np.max(np.abs(np.abs(mu - c) - abs(c))))


def disk_circle_defect(count: int = 25, seed: int = 2) -> float:
    worst = 0.0
    for k, med in _random_media(count, seed):
        vals = [e.value for e in farfield_operator_eigs("disk", k, med)]
        if len(vals) >= 2:
            worst = max(worst, circle_fit_residual(vals))
    return worst


def reciprocity_defect(count: int = 20, seed: int = 3) -> float:
    """Relative ``|u(x, y) - u(-y, -x)|`` over random media and directions."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k, med in _random_media(count, seed):
        a, b = rng.uniform(0, 2 * np.pi, 2)
        u1 = farfield_pattern(a, b, k, med, "disk")
        u2 = farfield_pattern(b + np.pi, a + np.pi, k, med, "disk")
        x = rng.normal(size=3)
        y = rng.normal(size=3)
        s1 = farfield_pattern(x, y, k, med, "sphere")
        s2 = farfield_pattern(-y, -x, k, med, "sphere")
        scale = max(abs(u1), abs(s1), 1e-300)
        worst = max(worst, abs(u1 - u2) / max(abs(u1), 1e-300), abs(s1 - s2) / scale)
    return worst


def monotonicity_defect(study) -> float:
    """Largest violation of ``k_eta`` increasing as eta decreases, ``k_eta <= k_0`` (real branches)."""
    order = np.argsort(study.etas)[::-1]  # eta decreasing
    worst = 0.0
    for j, k0 in enumerate(study.k0):
        if abs(k0.imag) >= 1e-8:
            continue
        ks = study.k_eta[order, j].real
        worst = max(worst, float(np.max(-np.diff(ks), initial=0.0)), float(np.max(ks - k0.real, initial=0.0)))
    return worst


def run_checks(cfg: ExperimentConfig) -> list[Check]:
    from .experiments import absorbing_study

    sec = cfg.section("verify")
    out = []
    z = annulus_sample(int(sec.get("wronskian_samples", 400)), im_min=float(sec.get("wronskian_im_min", -5.0)))
    cyl, sph = wronskian_errors(z)
    out.append(Check("wronskian_cylindrical", cyl, 1e-10, cyl < 1e-10))
    out.append(Check("wronskian_spherical", sph, 1e-10, sph < 1e-10))
    e = energy_defect()
    out.append(Check("energy_sphere", e, 1e-10, e < 1e-10))
    c = disk_circle_defect()
    out.append(Check("circle_fit_disk", c, 1e-8, c < 1e-8))
    r = reciprocity_defect()
    out.append(Check("reciprocity", r, 1e-10, r < 1e-10))

    etas = [0.5**i for i in range(9)]
    study = eigenvalue_convergence("sphere", 3.0, etas)
    m = monotonicity_defect(study)
    out.append(Check("eta_monotonicity_sphere", m, 1e-12, m <= 1e-12))
    eoc = study.eoc()
    lo, hi = float(eoc.min()), float(eoc.max())
    out.append(Check("eoc_envelope_sphere", max(0.94 - lo, hi - 1.11, 0.0), 0.0, 0.94 <= lo and hi <= 1.11,
                     {"min": lo, "max": hi}))

    rect = SearchRect(0.5, 10.0, -0.5, 10.0)
    ab = absorbing_study("sphere", 3.0, [0.1, 0.05, 0.025], [0.0, 1.0], rect)
    out.append(Check("absorbing_region", 0.0 if ab["in_region"] else 1.0, 0.0, ab["in_region"]))
    out.append(Check("absorbing_convergence", 0.0 if ab["converging"] else 1.0, 0.0, ab["converging"]))

    exp = cfg.section("expected")
    for g in ("sphere", "disk"):
        if g in exp:
            want = [parse_complex(v, f"expected.{g}") for v in exp[g]]
            got = [r.k for r in compute_ites(g, Medium(3.0, 0.0))]
            err = max(min(abs(w - k) for k in got) for w in want) if got else np.inf
            ok = len(got) == len(want) and err <= 1e-5
            out.append(Check(f"golden_ites_{g}", float(err), 1e-5, bool(ok)))
    for key, want in exp.items():
        if not key.startswith("iod_"):
            continue
        _, g, eta = key.split("_", 2)
        eta = float(eta.replace("_", "."))
        hits = detect_ites(phase_curves(g, Medium(4.0, eta)))
        want = [float(x) for x in want]
        err = max((abs(a - b) for a, b in zip(want, hits)), default=0.0) if len(want) == len(hits) else np.inf
        out.append(Check(f"golden_{key}", float(err), 0.01, bool(err <= 0.01 + 1e-9)))
    return out
