"""Run configuration: defaults, file loading, dotted-key overrides, validation.

Config files are TOML (JSON also accepted, including a run manifest, whose
nested "config" object is unwrapped). The schema is two levels deep: every
key lives in one of the sections scene / ofdm / lasso / subspace / localize /
harness / sweep, and the full default tree below doubles as the schema, so a
typo in a section or key name fails loudly instead of being ignored.

Angles are degrees at this surface (keys carry a _deg suffix) and are
converted to radians when the validated TrialConfig is built. TOML has no
null, so "unset" is spelled as an empty list (field_mix, sweep values) or
zero (lasso.omega means automatic).
"""

from __future__ import annotations

import copy
import json
import math

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib  # type: ignore[no-redef]
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .estimation import GroupLassoConfig
from .harness import TrialConfig
from .localize import FarSolveConfig, NearSolveConfig


class ConfigError(Exception):
    """Invalid configuration: unknown key, bad type, or failed validation."""


DEFAULTS: dict = {
    "scene": {
        "user": [0.0, 0.0],
        "irs": [20.0, 20.0],
        "bs": [20.0, 15.0],
        "wavelength": 0.1,
        "near_field_radius": 30.0,
        "sector_radius": 45.0,
        "theta_min_deg": 0.0,
        "theta_max_deg": 90.0,
        "m_i": 64,
        "m_b": 4,
        "bs_model": "near",
        "delta": 1.0,
    },
    "ofdm": {
        "n": 256,
        "bandwidth": 1.0e8,
        "n_taps": 32,
        "cp_len": 32,
        "v": 32,
        "power": 1.0,
        "noise_var": 0.0,
    },
    "lasso": {
        "omega": 0.0,
        "omega_scale": 0.8,
        "max_iters": 2000,
        "rel_tol": 1.0e-8,
    },
    "subspace": {
        "q0": 4,
        "twist": 0.37,
        "d_step": 0.1,
        "theta_step_deg": 0.1,
        "peak_quantile": 0.99,
        "calib_reps": 3,
        # 0.0 = calibrate the peak thresholds from a target-free run at the
        # estimated noise floor; any positive value pins them instead
        "thr_near": 0.0,
        "thr_far": 0.0,
    },
    "localize": {
        "far_weight": 0.5,
        "far_fallback_tol": 1.0e-9,
        "near_w_angle": 1.0 / 3.0,
        "near_w_sum": 1.0 / 3.0,
        "near_max_iters": 50,
        "near_grad_tol": 1.0e-9,
        "near_damping": 1.0e-3,
    },
    "harness": {
        "num_trials": 200,
        "clusters_per_trial": 3,
        "targets_per_cluster": 4,
        "detection_radius": 1.0,
        "seed": 0,
        "with_baseline": True,
        "workers": 1,
        "field_mix": [],
        "min_theta_sep_deg": 0.0,
        "cluster_tap_gap": 1,
        "max_attempts": 50000,
        "log_events": False,
    },
    "sweep": {
        "axis": [],
        "values": [],
    },
}


@dataclass(frozen=True)
class Resolved:
    """Validated configuration plus the harness objects built from it."""

    raw: dict
    trial: TrialConfig
    workers: int
    log_events: bool
    sweep_axis: str | tuple[str, ...] | None
    sweep_values: tuple


def merge_config(base: dict, overlay: dict) -> dict:
    """Deep merge, overlay winning; dict values merge recursively."""
    out = copy.deepcopy(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge_config(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        elif path.suffix == ".json":
            with open(path) as fh:
                data = json.load(fh)
        else:
            raise ConfigError(f"unsupported config format: {path.suffix!r} (use .toml or .json)")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    # a run manifest wraps the config; accept it directly for reproduction
    if isinstance(data, dict) and "config" in data and "artifact_version" in data:
        data = data["config"]
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a table")
    return data


def parse_override(text: str) -> tuple[tuple[str, ...], object]:
    """'section.key=value' with the value parsed as TOML (bare strings ok)."""
    key, sep, raw_value = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"override must look like section.key=value, got {text!r}")
    path = tuple(part.strip() for part in key.strip().split("."))
    if any(not part for part in path):
        raise ConfigError(f"override has an empty key segment: {text!r}")
    try:
        value = tomllib.loads(f"v = {raw_value}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw_value  # unquoted string such as bs_model=far
    return path, value


def apply_overrides(config: dict, overrides: Sequence[str]) -> dict:
    out = copy.deepcopy(config)
    for text in overrides:
        path, value = parse_override(text)
        node = out
        for part in path[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override path {'.'.join(path)!r} crosses a non-table key")
            node = nxt
        node[path[-1]] = value
    return out


# keys whose value type varies (validated where they are consumed)
_POLYMORPHIC = {("sweep", "axis")}


def _check_against_schema(config: dict) -> None:
    for section, table in config.items():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(table, dict):
            raise ConfigError(f"config section {section!r} must be a table")
        for key, value in table.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"unknown config key {section}.{key!r}")
            if (section, key) in _POLYMORPHIC:
                continue
            default = DEFAULTS[section][key]
            if isinstance(default, bool):
                if not isinstance(value, bool):
                    raise ConfigError(f"{section}.{key} must be a boolean")
            elif isinstance(default, (int, float)):
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"{section}.{key} must be a number")
            elif isinstance(default, str):
                if not isinstance(value, str):
                    raise ConfigError(f"{section}.{key} must be a string")
            elif isinstance(default, list):
                if not isinstance(value, list):
                    raise ConfigError(f"{section}.{key} must be an array")


def _pair(section: str, key: str, value) -> tuple[float, float]:
    if not (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ConfigError(f"{section}.{key} must be a pair of numbers")
    return float(value[0]), float(value[1])


def _resolve_sweep(table: dict) -> tuple[str | tuple[str, ...] | None, tuple]:
    axis = table["axis"]
    values = table["values"]
    if axis == [] or axis == "":
        if values:
            raise ConfigError("sweep.values given without sweep.axis")
        return None, ()
    if isinstance(axis, str):
        resolved_axis: str | tuple[str, ...] = axis
    elif isinstance(axis, list) and axis and all(isinstance(a, str) for a in axis):
        resolved_axis = tuple(axis)
    else:
        raise ConfigError("sweep.axis must be a name or a list of names")
    if not isinstance(values, list) or not values:
        raise ConfigError("sweep.values must be a non-empty array")
    out_values = tuple(tuple(v) if isinstance(v, list) else v for v in values)
    return resolved_axis, out_values


def resolve(config: dict) -> Resolved:
    """Merge onto defaults, validate, and build the harness configuration."""
    _check_against_schema(config)
    cfg = merge_config(DEFAULTS, config)

    scene = cfg["scene"]
    ofdm = cfg["ofdm"]
    lasso = cfg["lasso"]
    sub = cfg["subspace"]
    loc = cfg["localize"]
    har = cfg["harness"]

    field_mix = har["field_mix"]
    if field_mix:
        if len(field_mix) != 2 or not all(isinstance(v, int) for v in field_mix):
            raise ConfigError("harness.field_mix must be [near_count, far_count]")
        mix: tuple[int, int] | None = (field_mix[0], field_mix[1])
    else:
        mix = None

    lasso_cfg = GroupLassoConfig(
        omega=None if lasso["omega"] == 0.0 else float(lasso["omega"]),
        omega_scale=float(lasso["omega_scale"]),
        max_iters=int(lasso["max_iters"]),
        rel_tol=float(lasso["rel_tol"]),
    )
    far_cfg = FarSolveConfig(
        weight=float(loc["far_weight"]),
        fallback_tol=float(loc["far_fallback_tol"]),
    )
    near_cfg = NearSolveConfig(
        w_angle=float(loc["near_w_angle"]),
        w_sum=float(loc["near_w_sum"]),
        max_iters=int(loc["near_max_iters"]),
        grad_tol=float(loc["near_grad_tol"]),
        damping=float(loc["near_damping"]),
    )

    try:
        trial = TrialConfig(
            num_trials=int(har["num_trials"]),
            clusters_per_trial=int(har["clusters_per_trial"]),
            targets_per_cluster=int(har["targets_per_cluster"]),
            detection_radius=float(har["detection_radius"]),
            seed=int(har["seed"]),
            m_i=int(scene["m_i"]),
            m_b=int(scene["m_b"]),
            n=int(ofdm["n"]),
            v=int(ofdm["v"]),
            q0=int(sub["q0"]),
            bandwidth=float(ofdm["bandwidth"]),
            wavelength=float(scene["wavelength"]),
            user_pos=_pair("scene", "user", scene["user"]),
            irs_pos=_pair("scene", "irs", scene["irs"]),
            bs_pos=_pair("scene", "bs", scene["bs"]),
            near_field_radius=float(scene["near_field_radius"]),
            sector_radius=float(scene["sector_radius"]),
            theta_min=math.radians(float(scene["theta_min_deg"])),
            theta_max=math.radians(float(scene["theta_max_deg"])),
            n_taps=int(ofdm["n_taps"]),
            cp_len=int(ofdm["cp_len"]),
            power=float(ofdm["power"]),
            noise_var=float(ofdm["noise_var"]),
            bs_model=str(scene["bs_model"]),
            delta=float(scene["delta"]),
            twist=float(sub["twist"]),
            d_step=float(sub["d_step"]),
            theta_step=math.radians(float(sub["theta_step_deg"])),
            peak_quantile=float(sub["peak_quantile"]),
            calib_reps=int(sub["calib_reps"]),
            thr_near=float(sub["thr_near"]) or None,
            thr_far=float(sub["thr_far"]) or None,
            field_mix=mix,
            min_theta_sep=math.radians(float(har["min_theta_sep_deg"])),
            cluster_tap_gap=int(har["cluster_tap_gap"]),
            max_attempts=int(har["max_attempts"]),
            with_baseline=bool(har["with_baseline"]),
            lasso=lasso_cfg,
            far_solve=far_cfg,
            near_solve=near_cfg,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    workers = int(har["workers"])
    if workers < 1:
        raise ConfigError("harness.workers must be positive")

    sweep_axis, sweep_values = _resolve_sweep(cfg["sweep"])
    return Resolved(
        raw=cfg,
        trial=trial,
        workers=workers,
        log_events=bool(har["log_events"]),
        sweep_axis=sweep_axis,
        sweep_values=sweep_values,
    )
