"""Run configuration: one TOML document with a section per module.

Every tunable default lives in DEFAULTS; a user file only overrides keys it
names. Unknown sections or keys are configuration errors so typos fail loudly
instead of silently running on defaults.
"""

from __future__ import annotations

import copy
import hashlib
import json
import sys
from pathlib import Path

from .errors import ConfigError, IoError

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

DEFAULTS: dict = {
    "calibration": {
        "jacobian_step": 1e-6,
        "step_tol": 1e-7,
        "max_iter": 200,
        "init_damping": 1e-3,
        "frames_per_episode": 3,
    },
    "correction": {
        "iou_threshold": 0.1,
        "aspect_limit": 4.0,
        "speed_threshold": 0.002,
        "video_onset_file": "",
    },
    "derive": {
        "affordance_margin": 0.1,
        "overlap_threshold": 0.5,
    },
    "vqa": {
        "families": [],  # empty means all 29
        "eval_episode_ids": [],
    },
    "metrics": {
        "theta": 1.0,
        "per_dim_all_pass": False,
    },
    "qc": {
        "subset_count": 100,
        "samples_per_subset": 50,
        "pass_ratio": 0.9,
    },
    "pipeline": {
        "seed": 0,
        "jobs": 0,  # 0 means one worker per logical core
    },
    "evaluate": {
        "predictions": "",  # path to a predictions JSONL; empty scores answers against themselves
    },
    "service": {
        "host": "127.0.0.1",
        "port": 8321,
    },
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key {here!r}")
        default = base[key]
        if isinstance(default, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{here!r} must be a table")
            out[key] = _merge(default, value, here)
        else:
            if isinstance(default, bool) != isinstance(value, bool):
                raise ConfigError(f"{here!r} must be a boolean")
            if isinstance(default, float) and isinstance(value, int):
                value = float(value)
            if not isinstance(value, type(default)):
                raise ConfigError(
                    f"{here!r} must be {type(default).__name__}, got {type(value).__name__}"
                )
            out[key] = value
    return out


def load_config(path=None) -> dict:
    """DEFAULTS deep-merged with the TOML file at `path` (None = pure defaults).

    Raises:
        IoError: unreadable file.
        ConfigError: TOML syntax errors, unknown keys, or type mismatches.
    """
    if path is None:
        return copy.deepcopy(DEFAULTS)
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"cannot read config {path}: {e}") from e
    try:
        doc = _toml.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, _toml.TOMLDecodeError) as e:
        raise ConfigError(f"invalid config {path}: {e}") from e
    return _merge(DEFAULTS, doc)


def config_sha256(config: dict) -> str:
    """Stable hash of a config for run reports."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
