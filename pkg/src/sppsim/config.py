"""
Run configuration: JSON documents with a versioned schema.

Example::

    {"schema_version": 1, "experiment": "interferogram",
     "spps": [{"L": 1}, {"L": 2}], "phi0": [0.0],
     "detector": {"noise_model": "gaussian", "sigma_rel": 0.05}, "seed": 0}

Plate step heights are given either as ``L`` (multiples of the material's
lambda-thickness) or as ``step_height`` in metres.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

SCHEMA_VERSION = 1

EXPERIMENTS = ("spp-map", "interferogram", "stack", "flag-series",
               "coherence", "borrmann", "oam-ring", "deflection")
FORMATS = ("pgm", "csv")


class ConfigError(ValueError):
    """Invalid run configuration; ``problems`` lists every violated field."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass
class RunConfig:
    experiment: str
    schema_version: int = SCHEMA_VERSION
    material: str = "Al"
    wavelength: float = 0.271e-9
    grid_n: int = 400
    grid_extent: float = 16e-3
    spps: list = field(default_factory=lambda: [{"L": 1}])
    stacks: list = field(default_factory=list)
    phi0: list = field(default_factory=lambda: [0.0])
    flag: dict = field(default_factory=dict)
    detector: dict = field(default_factory=dict)
    coherence: dict = field(default_factory=dict)
    crystal: dict = field(default_factory=dict)
    oam: dict = field(default_factory=dict)
    deflection: dict = field(default_factory=dict)
    radon: dict = field(default_factory=dict)
    seed: int | None = None
    output_dir: str | None = None
    formats: list = field(default_factory=lambda: ["pgm", "csv"])
    label: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @property
    def noisy(self) -> bool:
        return self.detector.get("noise_model", "none") != "none"


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_spp(spec, where, problems):
    if not isinstance(spec, dict):
        problems.append(f"{where}: expected an object, got {type(spec).__name__}")
        return
    known = {"L", "step_height", "diameter", "base", "center_x", "center_z", "n_slices"}
    for k in spec:
        if k not in known:
            problems.append(f"{where}.{k}: unknown key")
    if ("L" in spec) == ("step_height" in spec):
        problems.append(f"{where}: give exactly one of 'L' or 'step_height'")
    for k in ("L", "step_height", "center_x", "center_z"):
        if k in spec and not _is_num(spec[k]):
            problems.append(f"{where}.{k}: must be a finite number")
    if "diameter" in spec and not (_is_num(spec["diameter"]) and spec["diameter"] > 0):
        problems.append(f"{where}.diameter: must be > 0")
    if "base" in spec and not (_is_num(spec["base"]) and spec["base"] >= 0):
        problems.append(f"{where}.base: must be >= 0")
    if "n_slices" in spec and not (isinstance(spec["n_slices"], int) and spec["n_slices"] >= 16):
        problems.append(f"{where}.n_slices: must be an integer >= 16")


def _check_positive(d: dict, key: str, where: str, problems, integer=False):
    if key not in d:
        return
    v = d[key]
    ok = isinstance(v, int) and not isinstance(v, bool) if integer else _is_num(v)
    if not ok or v <= 0:
        problems.append(f"{where}.{key}: must be a positive {'integer' if integer else 'number'}")


def validate(cfg: RunConfig) -> RunConfig:
    """Raise :class:`ConfigError` listing every problem found, else return ``cfg``."""
    from .materials import MATERIALS

    p: list[str] = []
    if cfg.schema_version != SCHEMA_VERSION:
        p.append(f"schema_version: expected {SCHEMA_VERSION}, got {cfg.schema_version!r}")
    if cfg.experiment not in EXPERIMENTS:
        p.append(f"experiment: must be one of {', '.join(EXPERIMENTS)}; got {cfg.experiment!r}")
    if cfg.material not in MATERIALS:
        p.append(f"material: unknown preset {cfg.material!r}")
    if not (_is_num(cfg.wavelength) and cfg.wavelength > 0):
        p.append("wavelength: must be a positive number (m)")
    if not (isinstance(cfg.grid_n, int) and cfg.grid_n >= 1):
        p.append("grid_n: must be a positive integer")
    if not (_is_num(cfg.grid_extent) and cfg.grid_extent > 0):
        p.append("grid_extent: must be a positive number (m)")
    if not isinstance(cfg.spps, list):
        p.append("spps: must be a list")
    else:
        for i, s in enumerate(cfg.spps):
            _check_spp(s, f"spps[{i}]", p)
    if not isinstance(cfg.stacks, list):
        p.append("stacks: must be a list of plate lists")
    else:
        for i, st in enumerate(cfg.stacks):
            if not isinstance(st, list) or not st:
                p.append(f"stacks[{i}]: must be a non-empty list of plates")
                continue
            for j, s in enumerate(st):
                _check_spp(s, f"stacks[{i}][{j}]", p)
    if not (isinstance(cfg.phi0, list) and cfg.phi0 and all(_is_num(x) for x in cfg.phi0)):
        p.append("phi0: must be a non-empty list of numbers (rad)")

    det = cfg.detector
    if not isinstance(det, dict):
        p.append("detector: must be an object")
    else:
        _check_positive(det, "nu", "detector", p, integer=True)
        _check_positive(det, "nv", "detector", p, integer=True)
        _check_positive(det, "pixel_pitch", "detector", p)
        _check_positive(det, "counts_per_pixel", "detector", p)
        nm = det.get("noise_model", "none")
        if nm not in ("none", "gaussian", "poisson"):
            p.append(f"detector.noise_model: must be none, gaussian or poisson; got {nm!r}")
        if "sigma_rel" in det and not (_is_num(det["sigma_rel"]) and det["sigma_rel"] >= 0):
            p.append("detector.sigma_rel: must be >= 0")
    if cfg.noisy and cfg.seed is None:
        p.append("seed: required when detector noise is enabled (use --seed)")
    if cfg.seed is not None and not (isinstance(cfg.seed, int) and 0 <= cfg.seed < 2**64):
        p.append("seed: must be an integer in [0, 2**64)")

    coh = cfg.coherence
    _check_positive(coh, "sigma_x", "coherence", p)
    _check_positive(coh, "sigma_z", "coherence", p)
    _check_positive(cfg.flag, "thickness", "flag", p)
    if "rotations_deg" in cfg.flag and not (
            isinstance(cfg.flag["rotations_deg"], list) and all(_is_num(x) for x in cfg.flag["rotations_deg"])):
        p.append("flag.rotations_deg: must be a list of numbers")
    _check_positive(cfg.crystal, "A", "crystal", p)
    _check_positive(cfg.crystal, "n_gamma", "crystal", p, integer=True)
    if "l_values" in cfg.oam and not (
            isinstance(cfg.oam["l_values"], list)
            and all(isinstance(x, int) and x >= 1 for x in cfg.oam["l_values"])):
        p.append("oam.l_values: must be a list of positive integers")
    _check_positive(cfg.oam, "ring_radius", "oam", p)
    _check_positive(cfg.oam, "ring_width", "oam", p)
    _check_positive(cfg.deflection, "radius", "deflection", p)
    _check_positive(cfg.deflection, "inner_cutoff", "deflection", p)
    if not (isinstance(cfg.formats, list) and all(f in FORMATS for f in cfg.formats)):
        p.append(f"formats: must be a list drawn from {FORMATS}")
    if cfg.experiment == "stack" and not cfg.stacks:
        p.append("stacks: the stack experiment needs at least one stack")
    if cfg.experiment in ("interferogram", "spp-map", "flag-series", "coherence") and not cfg.spps:
        p.append("spps: this experiment needs at least one plate")
    if p:
        raise ConfigError(p)
    return cfg


def from_dict(d: dict[str, Any]) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError(["config: top level must be a JSON object"])
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError([f"{k}: unknown key" for k in unknown])
    if "experiment" not in d:
        raise ConfigError(["experiment: required"])
    d = copy.deepcopy(d)
    if "phi0" in d and _is_num(d["phi0"]):
        d["phi0"] = [d["phi0"]]
    return validate(RunConfig(**d))


def parse(text: str) -> RunConfig:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config: not valid JSON ({exc})"]) from None
    return from_dict(d)


def load(path) -> RunConfig:
    return parse(Path(path).read_text(encoding="utf-8"))


def set_dotted(d: dict, key: str, value) -> None:
    """Assign ``value`` at a dotted key path such as ``detector.sigma_rel``."""
    parts = key.split(".")
    for part in parts[:-1]:
        d = d.setdefault(part, {})
    d[parts[-1]] = value


# -- figure presets ---------------------------------------------------------

_NOISY_DETECTOR = {"nu": 100, "nv": 100, "pixel_pitch": 0.16e-3,
                   "noise_model": "gaussian", "sigma_rel": 0.05}

#: Flag tilts for the rotation series, degrees.
FLAG_ROTATIONS_DEG = [-0.5, -0.25, 0.0, 0.25, 0.5]

PRESETS: dict[str, dict] = {
    "plate-maps": {"experiment": "spp-map", "spps": [{"L": 1}], "grid_n": 256,
             "radon": {"enabled": True}},
    "l-series": {"experiment": "interferogram",
             "spps": [{"L": 1}, {"L": 2}, {"L": 3}, {"L": 4}],
             "detector": _NOISY_DETECTOR, "seed": 0},
    "l-fractional": {"experiment": "interferogram", "spps": [{"L": 7.5}],
                        "detector": _NOISY_DETECTOR, "seed": 0},
    "addition": {"experiment": "stack",
             "stacks": [[{"L": 1}], [{"L": 2}], [{"L": 1}, {"L": 2}], [{"L": 1}, {"L": 1}],
                        [{"L": 2}, {"L": 2}]],
             "detector": _NOISY_DETECTOR, "seed": 0},
    "flag-rotation": {"experiment": "flag-series", "spps": [{"L": 3}],
             "flag": {"thickness": 1e-3, "rotations_deg": FLAG_ROTATIONS_DEG},
             "detector": _NOISY_DETECTOR, "seed": 0},
    "coherence": {"experiment": "coherence", "spps": [{"L": 1}], "grid_n": 100, "grid_extent": 16e-3},
    "borrmann": {"experiment": "borrmann", "crystal": {"A": 10.0, "n_gamma": 201}},
    "oam-ring": {"experiment": "oam-ring", "oam": {"l_values": [1, 2, 3, 4]}},
    "deflection": {"experiment": "deflection", "spps": [{"L": 1}]},
}

#: Presets whose outputs form the golden-file regression set.
FIGURE_PRESETS = ("plate-maps", "l-series", "l-fractional", "addition", "flag-rotation")


def preset(name: str) -> RunConfig:
    try:
        d = PRESETS[name]
    except KeyError:
        raise ConfigError([f"preset: unknown {name!r}; known: {', '.join(PRESETS)}"]) from None
    d = copy.deepcopy(d)
    d.setdefault("label", name)
    return from_dict(d)
