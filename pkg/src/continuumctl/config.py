"""Run configuration: flat-sectioned key-value files, defaults, overrides.

The file format is INI-style with five sections (plant, controller,
tension, trajectory, run).  Every key is validated against a schema;
unknown sections or keys are rejected, and every complaint names the full
field path.  Only the trajectory kind and size are required, everything
else has a default.

Default plant gains deserve a note: the tension limits together with the
stiffness map confine cumulative tendon travel to a few millimetres, so
reaching the desk-scale reference paths needs large mm-per-mm gains
(differential gearing).  The defaults below put every path well inside the
tension-feasible workspace.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass

import numpy as np

from .controller import ControllerConfig
from .kinematics import PLANT_KINDS, PlantParams, TipPosition
from .simulator import SimulationConfig
from .trajectory import APPROACHES, KINDS, TrajectorySpec

OUTPUT_DIR_ENV = "CONTINUUMCTL_OUTPUT_DIR"

_TRAVEL_INSERTION = 100.0   # mm of insertion travel
_TRAVEL_TENDON = 50.0       # mm of tendon travel either side of rest


class ConfigError(ValueError):
    """Validation failure; ``errors`` lists one message per field path."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


# key -> (parser kind, default); None default means required
_SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "plant": {
        "kind": ("choice:" + ",".join(PLANT_KINDS), "affine"),
        "L": ("float", 280.0),
        "k_x": ("float", 50.0),
        "k_y": ("float", 500.0),
        "gamma": ("float", ""),            # blank: derived as 2*k_x/L^2
        "noise_sigma": ("float", 0.0),
    },
    "controller": {
        "lambda_x": ("float", 1.0),
        "lambda_t": ("float", 1e-3),
        "lambda_y": ("float", 1e-2),
        "s_max": ("float", 1.0),
        "tau_min": ("float", 0.3),
        "tau_max": ("float", 3.0),
        "dy_min": ("float", -2.0),
        "dy_max": ("float", 2.0),
        "y_min": ("vec3", ""),             # blank: derived from plant.L
        "y_max": ("vec3", ""),
        "alpha_J": ("float", 0.15),
        "dJ_max": ("float", 0.035),
    },
    "tension": {
        "K": ("vec3", (0.09, 0.4, 0.4)),
        "tau_init": ("vec3", (1.0, 1.0, 1.0)),
    },
    "trajectory": {
        "kind": ("choice:" + ",".join(KINDS), None),
        "size": ("float", None),
        "center": ("vec2", (0.0, 150.0)),
        "spacing": ("float", 0.25),
        "approach": ("choice:" + ",".join(APPROACHES), "direct"),
    },
    "run": {
        "hold_steps": ("int", 100),
        "seed": ("int", 0),
        "output_dir": ("str", ""),
        "fd_perturbation": ("float", 0.5),
    },
}


def default_values() -> dict[str, dict[str, object]]:
    return {section: {key: spec[1] for key, spec in keys.items()}
            for section, keys in _SCHEMA.items()}


def _parse_scalar(kind: str, raw: object, path: str, errors: list[str]):
    if isinstance(raw, str):
        raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(str(raw))
        if kind == "str":
            return str(raw)
        if kind.startswith("choice:"):
            choices = kind.split(":", 1)[1].split(",")
            value = str(raw)
            if value not in choices:
                errors.append(f"{path}: must be one of {choices}, got {value!r}")
                return None
            return value
        if kind in ("vec2", "vec3"):
            n = 2 if kind == "vec2" else 3
            if isinstance(raw, str):
                parts = [p for p in raw.replace(",", " ").split() if p]
            else:
                parts = list(raw)
            if len(parts) != n:
                errors.append(f"{path}: expected {n} numbers")
                return None
            return tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        errors.append(f"{path}: cannot parse {raw!r} as {kind}")
        return None
    raise AssertionError(f"unknown schema kind {kind}")


def read_config_file(path: str) -> dict[str, dict[str, str]]:
    """Raw section/key strings from an INI file; unknown names rejected."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive (alpha_J, K)
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh, source=path)
    errors = []
    out: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            errors.append(f"{section}: unknown section")
            continue
        out[section] = {}
        for key, value in parser.items(section):
            if key not in _SCHEMA[section]:
                errors.append(f"{section}.{key}: unknown key")
                continue
            out[section][key] = value
    if errors:
        raise ConfigError(errors)
    return out


def apply_overrides(values: dict, overrides) -> dict:
    """Apply repeatable ``section.key=value`` strings on top of ``values``."""
    errors = []
    for item in overrides or ():
        if "=" not in item:
            errors.append(f"override {item!r}: expected section.key=value")
            continue
        path, raw = item.split("=", 1)
        if "." not in path:
            errors.append(f"override {item!r}: expected section.key=value")
            continue
        section, key = path.split(".", 1)
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            errors.append(f"{section}.{key}: unknown key")
            continue
        values.setdefault(section, {})[key] = raw
    if errors:
        raise ConfigError(errors)
    return values


def build_simulation_config(values: dict) -> tuple[SimulationConfig, str]:
    """Validate merged values and build the run configuration.

    Returns the configuration and the resolved output directory.  Raises
    ConfigError listing every failed field.
    """
    errors: list[str] = []
    merged = default_values()
    for section, keys in values.items():
        for key, raw in keys.items():
            merged[section][key] = raw

    parsed: dict[str, dict[str, object]] = {}
    for section, keys in _SCHEMA.items():
        parsed[section] = {}
        for key, (kind, _) in keys.items():
            raw = merged[section][key]
            path = f"{section}.{key}"
            if raw is None:
                errors.append(f"{path}: required")
                continue
            if raw == "" and key in ("gamma", "y_min", "y_max", "output_dir"):
                parsed[section][key] = None  # derived later
                continue
            value = _parse_scalar(kind, raw, path, errors)
            if value is not None:
                parsed[section][key] = value
    if errors:
        raise ConfigError(errors)

    p = parsed["plant"]
    c = parsed["controller"]
    t = parsed["tension"]
    traj = parsed["trajectory"]
    run = parsed["run"]

    try:
        plant = PlantParams(L=p["L"], k_x=p["k_x"], k_y=p["k_y"],
                            gamma=p.get("gamma"), plant_kind=p["kind"],
                            noise_sigma=p["noise_sigma"])
    except ValueError as exc:
        raise ConfigError([f"plant: {exc}"]) from exc

    y_min = c.get("y_min")
    y_max = c.get("y_max")
    if y_min is None:
        y_min = (0.0, plant.L - _TRAVEL_TENDON, plant.L - _TRAVEL_TENDON)
    if y_max is None:
        y_max = (_TRAVEL_INSERTION, plant.L + _TRAVEL_TENDON, plant.L + _TRAVEL_TENDON)
    try:
        controller = ControllerConfig(
            lambda_x=c["lambda_x"], lambda_t=c["lambda_t"], lambda_y=c["lambda_y"],
            s_max=c["s_max"], tau_min=c["tau_min"], tau_max=c["tau_max"],
            dy_min=c["dy_min"], dy_max=c["dy_max"],
            y_min=np.asarray(y_min), y_max=np.asarray(y_max),
            alpha_j=c["alpha_J"], dj_max=c["dJ_max"])
    except ValueError as exc:
        raise ConfigError([f"controller: {exc}"]) from exc

    try:
        spec = TrajectorySpec(kind=traj["kind"], size=traj["size"],
                              center=TipPosition(*traj["center"]),
                              waypoint_spacing=traj["spacing"],
                              approach=traj["approach"])
    except ValueError as exc:
        raise ConfigError([f"trajectory: {exc}"]) from exc

    try:
        sim = SimulationConfig(plant=plant, controller=controller, trajectory=spec,
                               tau_init=t["tau_init"], stiffness=t["K"],
                               hold_steps=run["hold_steps"], seed=run["seed"],
                               fd_perturbation=run["fd_perturbation"])
    except ValueError as exc:
        raise ConfigError([f"run: {exc}"]) from exc

    out_dir = run.get("output_dir") or os.environ.get(OUTPUT_DIR_ENV) or "out"
    return sim, out_dir


def load_config(path: str | None, overrides=None) -> tuple[SimulationConfig, str]:
    """File plus overrides to a validated configuration."""
    values = read_config_file(path) if path else {}
    values = apply_overrides(values, overrides)
    return build_simulation_config(values)
