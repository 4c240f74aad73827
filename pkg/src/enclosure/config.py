"""Experiment configuration: bundled defaults, scenario lookup and validation."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigInvalid, EnclosureError, MissingInput
from .forward import SourceSpec, clearance
from .geometry import Circle, PolygonDomain, offset_hull
from .ibvp import RefractiveSpec

SCENARIOS = ("square", "triangle", "lshape", "disk", "ibvp_square")
KINDS = ("source", "ibvp", "disk-demo")


def _data_text(*parts: str) -> str:
    return resources.files("enclosure").joinpath("data", *parts).read_text()


def bundled_defaults() -> dict:
    return json.loads(_data_text("defaults.json"))


def bundled_scenario(name: str) -> dict:
    if name not in SCENARIOS:
        raise MissingInput(f"no bundled scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    return json.loads(_data_text("scenarios", f"{name}.json"))


def deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_raw(ref: str | Path) -> dict:
    """Read a config file, or a bundled scenario when ``ref`` names one."""
    path = Path(ref)
    if path.is_file():
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"{path}: not valid JSON ({exc})") from exc
    if str(ref) in SCENARIOS:
        return bundled_scenario(str(ref))
    raise MissingInput(f"config {ref} not found")


@dataclass
class ExperimentConfig:
    raw: dict
    scenario: str
    k: float
    tau_grid: np.ndarray
    source: SourceSpec | None = None
    refractive: RefractiveSpec | None = None
    omega: Circle | PolygonDomain | None = None

    @property
    def probe(self) -> dict:
        return self.raw["probe"]

    @property
    def fit(self) -> dict:
        return self.raw["fit"]

    @property
    def noise(self) -> dict:
        return self.raw["noise"]

    @property
    def truth(self) -> PolygonDomain | None:
        if self.source is not None and isinstance(self.source.domain, PolygonDomain):
            return self.source.domain
        if self.refractive is not None:
            return self.refractive.domain
        return None


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigInvalid(f"missing field {where}.{key}" if where else f"missing field {key}")
    return d[key]


def _tau_grid(spec) -> np.ndarray:
    if isinstance(spec, dict):
        try:
            lo, hi, n = float(spec["lo"]), float(spec["hi"]), int(spec["n"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"probe.tau_grid needs lo, hi, n ({exc})") from exc
        if not (0 < lo < hi) or n < 2:
            raise ConfigInvalid("probe.tau_grid must satisfy 0 < lo < hi and n >= 2")
        return np.geomspace(lo, hi, n)
    try:
        grid = np.asarray(spec, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"probe.tau_grid is not numeric ({exc})") from exc
    if grid.ndim != 1 or len(grid) < 2 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ConfigInvalid("probe.tau_grid must be positive and strictly increasing")
    return grid


def _omega(spec: dict, domain) -> Circle | PolygonDomain:
    if "circle" in spec:
        c = spec["circle"]
        return Circle(np.asarray(_need(c, "center", "omega.circle"), float), float(_need(c, "radius", "omega.circle")))
    if "polygon" in spec:
        return PolygonDomain.from_json(spec["polygon"])
    if "offset_hull" in spec:
        if domain is None:
            raise ConfigInvalid("omega.offset_hull needs a polygonal source domain")
        return offset_hull(domain, float(spec["offset_hull"]))
    raise ConfigInvalid("omega must be one of circle, polygon, offset_hull")


def build_config(raw: dict) -> ExperimentConfig:
    """Merge ``raw`` over the bundled defaults and validate every invariant."""
    if not isinstance(raw, dict):
        raise ConfigInvalid("config must be a JSON object")
    scenario = _need(raw, "scenario", "")
    if scenario not in KINDS:
        raise ConfigInvalid(f"scenario must be one of {', '.join(KINDS)}, got {scenario!r}")
    merged = deep_merge(bundled_defaults(), raw)
    # omega is a choice between shapes, so a supplied one replaces the default
    if isinstance(raw.get("omega"), dict):
        merged["omega"] = copy.deepcopy(raw["omega"])
    try:
        k = float(merged["k"])
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"k is not a number ({exc})") from exc
    if not k >= 0 or not math.isfinite(k):
        raise ConfigInvalid("k must be finite and non-negative")
    cfg = ExperimentConfig(merged, scenario, k, _tau_grid(merged["probe"]["tau_grid"]))
    if int(merged["probe"]["n_dirs"]) < 3:
        raise ConfigInvalid("probe.n_dirs must be at least 3")
    if float(merged["noise"]["level"]) < 0:
        raise ConfigInvalid("noise.level must be non-negative")
    try:
        if scenario == "source":
            cfg.source = SourceSpec.from_json(merged["source"])
            cfg.omega = _omega(merged["omega"], cfg.source.domain if isinstance(cfg.source.domain, PolygonDomain) else None)
            gap = clearance(cfg.source.domain, cfg.omega)
        elif scenario == "ibvp":
            ref = dict(merged["refractive"], k=k)
            cfg.refractive = RefractiveSpec.from_json(ref)
            cfg.omega = _omega(merged["omega"], cfg.refractive.domain)
            gap = clearance(cfg.refractive.domain, cfg.omega)
            if np.any(np.abs(cfg.refractive.rho_at(cfg.refractive.domain.vertices)) < 1e-14):
                raise ConfigInvalid("refractive.rho vanishes at a vertex")
        else:
            d = merged["disk"]
            if not float(_need(d, "eps", "disk")) > 0:
                raise ConfigInvalid("disk.eps must be positive")
            gap = 1.0
    except ConfigInvalid:
        raise
    except (EnclosureError, ValueError, KeyError, TypeError) as exc:
        raise ConfigInvalid(f"invalid geometry or source: {exc}") from exc
    if not gap > 0:
        raise ConfigInvalid(f"clearance invariant violated: source reaches the outer boundary ({gap:.3g})")
    return cfg


def load_config(ref: str | Path) -> ExperimentConfig:
    return build_config(load_raw(ref))
