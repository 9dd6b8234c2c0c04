"""Experiment configuration: schema, defaults, canonical text and hash.

A config is a YAML mapping with the sections below.  Missing keys take
their defaults; unknown keys are rejected.  The canonical text is JSON
with sorted keys in which every number is normalized (integral floats
become integers, other floats use their shortest repr), so ``1e-2`` and
``0.01`` hash alike.  ``output_dir`` is not part of the hash.
"""

import copy
import hashlib
import json
import math
from dataclasses import dataclass

import yaml

from ..errors import ConfigError

SCHEMA_VERSION = 1

DEFAULTS = {
    "model": {"family": "cat"},
    "stages": ["scan", "entropy"],
    "scan": {"max_period": 1, "grid": 16, "newton_tol": 1e-10, "max_iters": 60, "class_tol": 1e-8},
    "entropy": {
        "epsilons": [0.01, 0.005],
        "n_max": 14,
        "grid": 1000,
        "seed_box": [0.0, 0.1],
        "seed_order": 0,
        "window": None,
        "saturation": 0.05,
    },
    "snake": {
        "n": 1,
        "multipliers": [2.0],
        "T": 1,
        "a": 0.1,
        "b": 0.5,
        "c": 0.15,
        "kappa": 0.5,
        "delta": 0.05,
        "N_list": [3],
        "eps": None,
        "depth": 4,
    },
    "mixing": {"unstable": [3.0, 2.0], "eps": 0.01, "m_list": [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000]},
    "compare": {"tol": 0.1},
    "output_dir": "runs",
}

STAGES = ("scan", "entropy", "snake", "mixing")

MODEL_KEYS = {
    "standard_map": {"k"},
    "coupled_standard_maps": {"k1", "k2", "c"},
    "torus_automorphism": {"matrix"},
    "cat": set(),
    "cat_product": set(),
    "identity": {"dim"},
    "snake_composed": {"base", "amplitude", "frequency"},
}


def _normalize(value):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        f = float(value)
        if not math.isfinite(f):
            raise ConfigError(f"non-finite number {value!r} in config")
        return int(f) if f.is_integer() and abs(f) < 2 ** 53 else f
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    raise ConfigError(f"unsupported config value {value!r}")


def canonical_text(data):
    """Canonical JSON of a config mapping, excluding ``output_dir``."""
    payload = {k: v for k, v in _normalize(data).items() if k != "output_dir"}
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(data):
    return hashlib.sha256(canonical_text(data).encode()).hexdigest()[:16]


def _merge(defaults, overrides, path=""):
    out = copy.deepcopy(defaults)
    for key, value in overrides.items():
        where = f"{path}{key}"
        if key not in defaults:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(defaults[key], dict) and key != "model":
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be a mapping")
            out[key] = _merge(defaults[key], value, where + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def validate(data):
    model = data["model"]
    _require(isinstance(model, dict) and "family" in model, "model needs a 'family'")
    family = model["family"]
    _require(family in MODEL_KEYS, f"unknown model family {family!r}")
    extra = set(model) - {"family"} - MODEL_KEYS[family]
    _require(not extra, f"unknown parameters {sorted(extra)} for model {family!r}")
    missing = MODEL_KEYS[family] - set(model)
    _require(not missing or family == "identity", f"missing parameters {sorted(missing)} for model {family!r}")
    stages = data["stages"]
    _require(isinstance(stages, list) and stages, "stages must be a nonempty list")
    bad = [s for s in stages if s not in STAGES]
    _require(not bad, f"unknown stages {bad}; choose from {list(STAGES)}")
    ent = data["entropy"]
    _require(isinstance(ent["n_max"], int) and ent["n_max"] >= 3, "entropy.n_max must be an integer >= 3")
    eps = ent["epsilons"]
    _require(isinstance(eps, list) and eps and all(isinstance(e, (int, float)) and e > 0 for e in eps),
             "entropy.epsilons must be a nonempty list of positive numbers")
    _require(isinstance(ent["grid"], int) and ent["grid"] >= 2, "entropy.grid must be an integer >= 2")
    box = ent["seed_box"]
    _require(isinstance(box, list) and len(box) == 2 and 0 <= box[0] < box[1] <= 1,
             "entropy.seed_box must be [low, high] inside [0, 1]")
    _require(ent["seed_order"] is None or isinstance(ent["seed_order"], int),
             "entropy.seed_order must be an integer or null")
    win = ent["window"]
    _require(win is None or (isinstance(win, list) and len(win) == 2 and 0 <= win[0] < win[1] <= ent["n_max"]),
             "entropy.window must be null or [n_lo, n_hi] within [0, n_max]")
    _require(0 < ent["saturation"] <= 1, "entropy.saturation must lie in (0, 1]")
    scan = data["scan"]
    _require(isinstance(scan["max_period"], int) and scan["max_period"] >= 1, "scan.max_period must be >= 1")
    _require(isinstance(scan["grid"], int) and scan["grid"] >= 2, "scan.grid must be >= 2")
    _require(scan["newton_tol"] > 0, "scan.newton_tol must be positive")
    snake = data["snake"]
    _require(all(isinstance(N, int) and N > 0 and N % 2 == 1 for N in snake["N_list"]) and snake["N_list"],
             "snake.N_list must hold odd positive integers")
    _require(isinstance(snake["n"], int) and snake["n"] >= 1, "snake.n must be >= 1")
    _require(len(snake["multipliers"]) in (1, snake["n"]) and all(s > 1 for s in snake["multipliers"]),
             "snake.multipliers must exceed 1 (one value or one per coordinate)")
    mix = data["mixing"]
    _require(all(s > 1 for s in mix["unstable"]) and len(set(mix["unstable"])) == len(mix["unstable"]),
             "mixing.unstable must be distinct multipliers > 1")
    _require(all(isinstance(m, int) and m >= 1 for m in mix["m_list"]), "mixing.m_list must hold integers >= 1")
    return data


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated config with its content hash."""

    data: dict

    @property
    def hash(self):
        return config_hash(self.data)

    @property
    def canonical(self):
        return canonical_text(self.data)

    def __getitem__(self, key):
        return self.data[key]

    def with_overrides(self, overrides):
        return make_config(_deep_update(copy.deepcopy(self.data), overrides))


def _deep_update(base, overrides):
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict) and key != "model":
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def make_config(data=None):
    data = {} if data is None else data
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    merged = _merge(DEFAULTS, _normalize(data))
    return ExperimentConfig(validate(merged))


def load_config(path):
    """Read a YAML config file."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    return make_config(data or {})
