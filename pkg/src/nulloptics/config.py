"""Scenario configuration: INI parsing, validation, and run manifests.

Configs are line-oriented ``key = value`` files with section headers.  Every
key must be known for its scenario kind; unknown keys are rejected by name.
A finished run writes a JSON manifest next to its data files echoing the
resolved configuration, the library version, the tolerances in force, and
the data file hashes, so any run can be reproduced byte-for-byte from its
manifest alone.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import ConfigError

SCENARIO_KINDS = ("geodesic", "kernel", "limit-check", "kg-check",
                  "pair-create", "curvature-check")

_COMMON_SECTIONS = {
    "scenario": {"kind"},
    "constants": {"c", "hbar", "k_B", "x5_scale"},
}

_KIND_SECTIONS = {
    "geodesic": {
        "metric": {"name", "E", "B", "g_accel", "q", "m"},
        "geodesic": {"steps", "step_size", "u1", "u2", "u3", "branch",
                     "projection_interval"},
    },
    "kernel": {
        "kernel": {"ensemble", "axes", "steps", "spacing", "dx", "dx5",
                   "lambda_min", "lambda_max", "lambda_count", "d_min",
                   "method", "samples"},
    },
    "limit-check": {
        "limit": {"suite", "mass", "time", "x1", "x2", "omega",
                  "resolutions", "Lam", "u", "p_z"},
    },
    "kg-check": {
        "kg": {"sides", "spacing", "length_scale", "mode_index", "dims"},
    },
    "pair-create": {
        "pair": {"energy1", "energy2", "direction1", "direction2", "m_X"},
    },
    "curvature-check": {
        "metric": {"name", "E", "B", "g_accel", "q", "m"},
        "curvature": {"grid_extent", "grid_points", "step"},
    },
}

_TOLERANCES = {
    "null_residual": 1e-8,
    "roundtrip": 1e-12,
    "transfer_vs_direct": 1e-12,
    "loop_gauge": 1e-12,
    "kg_mode_residual": 1e-10,
}


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario: kind, per-section parameters, constants block."""

    kind: str
    sections: dict
    constants: dict = field(default_factory=dict)

    def get(self, section: str, key: str, default=None, cast=str):
        value = self.sections.get(section, {}).get(key)
        if value is None:
            return default
        if cast is bool:
            return str(value).strip().lower() in ("1", "true", "yes", "on")
        return cast(value)

    def floats(self, section: str, key: str, default=()):
        raw = self.sections.get(section, {}).get(key)
        if raw is None:
            return list(default)
        return [float(tok) for tok in str(raw).replace(",", " ").split()]

    def ints(self, section: str, key: str, default=()):
        return [int(round(v)) for v in self.floats(section, key, default)]

    @property
    def c(self) -> float:
        return float(self.constants.get("c", 1.0))

    @property
    def hbar(self) -> float:
        return float(self.constants.get("hbar", 1.0))

    @property
    def k_B(self) -> float:
        return float(self.constants.get("k_B", 1.0))

    def as_dict(self) -> dict:
        out = {"scenario": {"kind": self.kind}}
        for name, data in sorted(self.sections.items()):
            out[name] = {k: str(v) for k, v in sorted(data.items())}
        if self.constants:
            out["constants"] = {k: str(v) for k, v in sorted(self.constants.items())}
        return out


def _validate(kind: str, sections: dict) -> None:
    if kind not in SCENARIO_KINDS:
        raise ConfigError(f"unknown scenario kind '{kind}'")
    allowed = dict(_COMMON_SECTIONS)
    allowed.update(_KIND_SECTIONS[kind])
    for section, keys in sections.items():
        if section == "scenario":
            extra = set(keys) - allowed["scenario"]
            if extra:
                raise ConfigError(f"unknown key '{sorted(extra)[0]}' in [scenario]")
            continue
        if section not in allowed:
            raise ConfigError(f"unknown section '[{section}]' for kind '{kind}'")
        extra = set(keys) - allowed[section]
        if extra:
            raise ConfigError(f"unknown key '{sorted(extra)[0]}' in [{section}]")


def _from_mapping(mapping: dict) -> ScenarioConfig:
    sections = {name: dict(data) for name, data in mapping.items()}
    scenario = sections.get("scenario", {})
    kind = scenario.get("kind")
    if not kind:
        raise ConfigError("missing required key 'kind' in [scenario]")
    _validate(kind, sections)
    constants = {k: float(v) for k, v in sections.pop("constants", {}).items()}
    for key in ("c", "hbar", "k_B", "x5_scale"):
        constants.setdefault(key, 1.0)
    if constants["c"] <= 0 or constants["hbar"] <= 0 or constants["k_B"] <= 0:
        raise ConfigError("constants c, hbar, k_B must be positive")
    sections.pop("scenario", None)
    return ScenarioConfig(kind=kind, sections=sections, constants=constants)


def load_config(path) -> ScenarioConfig:
    """Load an INI scenario file, or a manifest JSON from a previous run."""
    path = Path(path)
    text = path.read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        manifest = json.loads(text)
        return _from_mapping(manifest["config"])
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    mapping = {name: dict(parser.items(name)) for name in parser.sections()}
    return _from_mapping(mapping)


def write_manifest(out_dir, config: ScenarioConfig, seed: int, threads: int,
                   data_files, extra=None) -> Path:
    """Write the reproducibility manifest next to the data files."""
    out_dir = Path(out_dir)
    hashes = {}
    for f in data_files:
        f = Path(f)
        hashes[f.name] = hashlib.sha256(f.read_bytes()).hexdigest()
    manifest = {
        "config": config.as_dict(),
        "version": __version__,
        "seed": seed,
        "threads": threads,
        "tolerances": _TOLERANCES,
        "data_sha256": hashes,
    }
    if extra:
        manifest["results"] = {k: v for k, v in sorted(extra.items()) if v is not None}
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
