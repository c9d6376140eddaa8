"""Experiment configuration files (TOML)."""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dispersion import Medium
from .exceptions import ConfigError, InvalidArgumentError
from .rootfind import SearchRect

__all__ = ["EXPERIMENTS", "ExperimentConfig", "load_config", "parse_config", "parse_complex", "eta_sequence"]

EXPERIMENTS = ("ites", "eoc-ev", "eoc-ef", "iod", "recon", "lsm", "absorbing", "verify")


def parse_complex(value, where: str) -> complex:
    """Accept a number, a string such as ``"1+0.5j"``, or a ``[re, im]`` pair."""
    try:
        if isinstance(value, bool):
            raise TypeError
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, str):
            return complex(value.replace(" ", "").replace("i", "j"))
        return complex(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a complex number, got {value!r}") from None


def _float(sec: dict, key: str, where: str, default=None, *, positive=False) -> float:
    if key not in sec:
        if default is None:
            raise ConfigError(f"{where}.{key}: required")
        return float(default)
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key}: must be positive, got {v!r}")
    return float(v)


def _int(sec: dict, key: str, where: str, default=None, *, minimum=0) -> int:
    v = sec.get(key, default)
    if v is None:
        raise ConfigError(f"{where}.{key}: required")
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"{where}.{key}: expected an integer >= {minimum}, got {v!r}")
    return v


def _list(sec: dict, key: str, where: str, default=None) -> list:
    v = sec.get(key, default)
    if v is None:
        raise ConfigError(f"{where}.{key}: required")
    if not isinstance(v, list):
        raise ConfigError(f"{where}.{key}: expected a list, got {v!r}")
    if not v:
        raise ConfigError(f"{where}.{key}: must not be empty")
    return v


def eta_sequence(spec, where: str = "eta_sequence") -> list[float]:
    """``{values = [...]}`` or ``{base = b, start = i0, stop = i1}`` giving ``b**i``."""
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a table")
    if "values" in spec:
        vals = [float(parse_complex(v, f"{where}.values").real) for v in _list(spec, "values", where)]
    else:
        base = _float(spec, "base", where, positive=True)
        start = _int(spec, "start", where, 0)
        stop = _int(spec, "stop", where)
        if stop < start:
            raise ConfigError(f"{where}: empty sequence (stop < start)")
        vals = [base**i for i in range(start, stop + 1)]
    if not vals:
        raise ConfigError(f"{where}: empty sequence")
    if any(v <= 0 for v in vals):
        raise ConfigError(f"{where}: values must be positive")
    return vals


@dataclass
class ExperimentConfig:
    experiment: str
    geometries: tuple
    medium: Medium
    rect: SearchRect
    max_order: int = 0
    tol: float = 1e-12
    etas: list = field(default_factory=list)
    sections: dict = field(default_factory=dict)
    output_dir: str = "out"
    source: str = ""
    sha256: str = ""

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})


def _geometries(raw) -> tuple:
    g = raw.get("geometry", "sphere")
    gs = g if isinstance(g, list) else [g]
    for x in gs:
        if x not in ("disk", "sphere"):
            raise ConfigError(f"geometry: expected 'disk' or 'sphere', got {x!r}")
    if not gs:
        raise ConfigError("geometry: must not be empty")
    return tuple(gs)


def _medium(sec: dict) -> Medium:
    n = parse_complex(sec.get("n", 1.0), "medium.n")
    eta = parse_complex(sec.get("eta", 0.0), "medium.eta")
    n2 = sec.get("n2")
    try:
        return Medium(n, eta, None if n2 is None else float(n2), bool(sec.get("physical", False)))
    except InvalidArgumentError as err:
        raise ConfigError(f"medium: {err}") from None


def _rect(sec: dict) -> SearchRect:
    re = sec.get("re", [0.5, 10.0])
    im = sec.get("im", [-0.01, 10.0])
    for key, v in (("re", re), ("im", im)):
        if not (isinstance(v, list) and len(v) == 2):
            raise ConfigError(f"search.{key}: expected [min, max]")
    try:
        rect = SearchRect(float(re[0]), float(re[1]), float(im[0]), float(im[1]))
    except (InvalidArgumentError, TypeError, ValueError) as err:
        raise ConfigError(f"search: {err}") from None
    if rect.contains(0j):
        raise ConfigError("search: rectangle must exclude k = 0")
    return rect


def parse_config(raw: dict, source: str = "<memory>", digest: str = "") -> ExperimentConfig:
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment: expected one of {', '.join(EXPERIMENTS)}, got {exp!r}")
    search = raw.get("search", {})
    cfg = ExperimentConfig(
        experiment=exp,
        geometries=_geometries(raw),
        medium=_medium(raw.get("medium", {})),
        rect=_rect(search),
        max_order=_int(search, "max_order", "search", 0),
        tol=_float(search, "tol", "search", 1e-12, positive=True),
        sections={k: v for k, v in raw.items() if isinstance(v, dict)},
        output_dir=str(raw.get("output_dir", f"out/{exp}")),
        source=source,
        sha256=digest,
    )
    if exp in ("eoc-ev", "eoc-ef"):
        if "eta_sequence" not in raw:
            raise ConfigError("eta_sequence: required")
        cfg.etas = eta_sequence(raw["eta_sequence"])
    if exp == "iod":
        sec = cfg.section("iod")
        _list(sec, "etas", "iod")
        prox = _float(sec, "proximity", "iod", 0.1, positive=True)
        if prox >= 3.141592653589793 / 4:
            raise ConfigError("iod.proximity: must be below pi/4")
        _float(sec, "floor", "iod", 1e-8, positive=True)
        _float(sec, "step", "iod", 0.01, positive=True)
    if exp == "recon":
        sec = cfg.section("recon")
        _float(sec, "k", "recon", positive=True)
        if _float(sec, "R_C", "recon", 2.0) <= 1:
            raise ConfigError("recon.R_C: must exceed 1")
        _list(sec, "eta_true", "recon")
        _float(sec, "alpha", "recon", 1e-10, positive=True)
    if exp == "lsm":
        sec = cfg.section("lsm")
        z = _float(sec, "z_radius", "lsm", 0.3)
        if not 0 <= z < 1:
            raise ConfigError("lsm.z_radius: must lie in [0, 1)")
    if exp == "absorbing":
        sec = cfg.section("absorbing")
        _float(sec, "n1", "absorbing")
        _list(sec, "n2", "absorbing")
        _list(sec, "eta", "absorbing", [0.0])
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a TOML experiment file.

    Raises
    ------
    ConfigError
        With a ``section.field: message`` description on invalid input.
    """
    p = Path(path)
    try:
        data = p.read_bytes()
    except OSError as err:
        raise ConfigError(f"cannot read {path}: {err}") from None
    try:
        raw = tomllib.loads(data.decode("utf-8"))
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: {err}") from None
    return parse_config(raw, str(p), hashlib.sha256(data).hexdigest())
