"""Run configuration: versioned JSON blocks, named presets, strict validation."""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

from . import presets, sr
from .crlb import CrlbConfig
from .presets import ConfigError

SCHEMA = "pathloss_aoa.config/1"
SEED_ENV = "PATHLOSS_AOA_SEED"
MODES = ("sr", "direct", "poly")

FS_GENERATOR_DEFAULTS = {
    "angle_range_deg": list(presets.STAGE1_ANGLE_RANGE_DEG),
    "step_deg": presets.STAGE1_STEP_DEG,
    "freqs_hz": list(presets.STAGE1_FREQS_HZ),
    "boresight_deg": presets.STAGE1_BORESIGHT_DEG,
    "noise_sigma_db": 0.1,
    "seed": 0,
    "planes": ["H"],
}
RIS_GENERATOR_DEFAULTS = {
    "n_samples": 100,
    "noise_sigma_db": 0.0,
    "seed": 0,
    "freqs_hz": list(presets.STAGE2_FREQS_HZ),
    "theta_r_deg": presets.STAGE2_AOA_DEG,
    "theta_t_deg": 0.0,
    "freq_step_hz": 1e6,
}
CRLB_DEFAULTS = {"noise_var": 1e-3, "snapshots": 1000, "alpha_mag": 1.0, "grid_deg": [1.0, 89.0, 0.5]}
MC_DEFAULTS = {"sigma_point_deg": 3.0, "n": 3000}
_SR_FIELDS = {f.name: f.default for f in dataclasses.fields(sr.SrConfig)}
_TOP_KEYS = ("schema", "scenario", "geometry", "generator", "sr", "mode", "crlb", "mc")


def _sr_defaults():
    d = dict(_SR_FIELDS)
    d["operators"] = list(d["operators"])
    return d


def _preset(scenario, link, generator, mode):
    return {
        "schema": SCHEMA,
        "scenario": scenario,
        "geometry": presets.link_to_dict(link),
        "generator": generator,
        "sr": _sr_defaults(),
        "mode": mode,
        "crlb": dict(CRLB_DEFAULTS),
        "mc": dict(MC_DEFAULTS),
    }


def preset(name: str) -> dict:
    """Full configuration dict for a named campaign preset."""
    if name == "stage1_chamber":
        return _preset("free_space", presets.stage1_link(), dict(FS_GENERATOR_DEFAULTS), "direct")
    if name in ("stage2_ris_2m", "stage2_ris_3m"):
        dist = 2.0 if name.endswith("2m") else 3.0
        return _preset("ris", presets.stage2_link(dist), dict(RIS_GENERATOR_DEFAULTS), "direct")
    raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}", "preset")


PRESETS = ("stage1_chamber", "stage2_ris_2m", "stage2_ris_3m")
SCENARIO_DEFAULT_PRESET = {"free_space": "stage1_chamber", "ris": "stage2_ris_2m"}


@dataclass
class RunConfig:
    scenario: str
    link: object
    generator: dict
    sr: sr.SrConfig
    mode: str
    crlb: CrlbConfig
    crlb_grid_deg: tuple
    mc: dict
    raw: dict = field(repr=False)

    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def _fill(block, defaults, where):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be an object", where)
    unknown = sorted(set(block) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown field {where}.{unknown[0]}", f"{where}.{unknown[0]}")
    out = copy.deepcopy(defaults)
    out.update(block)
    return out


def _number(d, key, where, positive=False, nonneg=False, integer=False):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key} must be a finite number", f"{where}.{key}")
    if integer and int(v) != v:
        raise ConfigError(f"{where}.{key} must be an integer", f"{where}.{key}")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key} must be positive", f"{where}.{key}")
    if nonneg and v < 0:
        raise ConfigError(f"{where}.{key} must be non-negative", f"{where}.{key}")
    return int(v) if integer else float(v)


def validate(raw: dict) -> RunConfig:
    """Check every block before any work starts; errors name the offending key."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(raw) - set(_TOP_KEYS))
    if unknown:
        raise ConfigError(f"unknown field {unknown[0]}", unknown[0])
    for key in ("schema", "scenario", "geometry"):
        if key not in raw:
            raise ConfigError(f"missing field {key}", key)
    if raw["schema"] != SCHEMA:
        raise ConfigError(f"unsupported schema {raw['schema']!r}; expected {SCHEMA!r}", "schema")
    scenario = raw["scenario"]
    link = presets.link_from_dict(scenario, raw["geometry"])

    gen_defaults = FS_GENERATOR_DEFAULTS if scenario == "free_space" else RIS_GENERATOR_DEFAULTS
    gen = _fill(raw.get("generator", {}), gen_defaults, "generator")
    _number(gen, "noise_sigma_db", "generator", nonneg=True)
    _number(gen, "seed", "generator", integer=True, nonneg=True)
    if not gen["freqs_hz"] or any(not (isinstance(f, (int, float)) and f > 0) for f in gen["freqs_hz"]):
        raise ConfigError("generator.freqs_hz must be a nonempty list of positive numbers", "generator.freqs_hz")
    if scenario == "free_space":
        _number(gen, "step_deg", "generator", positive=True)
        lo, hi = gen["angle_range_deg"]
        if not lo < hi:
            raise ConfigError("generator.angle_range_deg must be increasing", "generator.angle_range_deg")
        if not lo <= gen["boresight_deg"] <= hi:
            raise ConfigError("generator.boresight_deg lies outside the scan range", "generator.boresight_deg")
        if not set(gen["planes"]) <= {"H", "V"} or not gen["planes"]:
            raise ConfigError("generator.planes must be a subset of H, V", "generator.planes")
    else:
        _number(gen, "n_samples", "generator", positive=True, integer=True)
        if not 0 <= gen["theta_r_deg"] < 90:
            raise ConfigError("generator.theta_r_deg must lie in [0, 90)", "generator.theta_r_deg")

    sr_block = _fill(raw.get("sr", {}), _sr_defaults(), "sr")
    try:
        sr_cfg = sr.SrConfig(**sr_block)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"sr: {err}", "sr") from err

    mode = raw.get("mode", "direct")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}", "mode")

    cb = _fill(raw.get("crlb", {}), CRLB_DEFAULTS, "crlb")
    try:
        crlb_cfg = CrlbConfig(cb["noise_var"], cb["snapshots"], cb["alpha_mag"])
    except ValueError as err:
        raise ConfigError(f"crlb: {err}", "crlb") from err
    start, stop, step = cb["grid_deg"]
    if not (0 < start <= stop < 90 and step > 0):
        raise ConfigError("crlb.grid_deg must be [start, stop, step] inside (0, 90)", "crlb.grid_deg")

    mc = _fill(raw.get("mc", {}), MC_DEFAULTS, "mc")
    _number(mc, "sigma_point_deg", "mc", nonneg=True)
    _number(mc, "n", "mc", positive=True, integer=True)

    full = {"schema": SCHEMA, "scenario": scenario, "geometry": raw["geometry"], "generator": gen,
            "sr": sr_block, "mode": mode, "crlb": cb, "mc": mc}
    return RunConfig(scenario, link, gen, sr_cfg, mode, crlb_cfg, (start, stop, step), mc, full)


def load(preset_name: str | None = None, path=None, scenario: str | None = None) -> RunConfig:
    """Preset (or the scenario's default preset) with a JSON file's blocks laid on top.

    Blocks given in the file replace the preset's blocks; within the
    ``geometry`` block every field is then required.
    """
    if preset_name is None:
        if scenario is not None and scenario not in SCENARIO_DEFAULT_PRESET:
            raise ConfigError(f"unknown scenario {scenario!r}", "scenario")
        preset_name = SCENARIO_DEFAULT_PRESET[scenario or "free_space"]
    raw = preset(preset_name)
    if path is not None:
        with open(path) as fh:
            try:
                user = json.load(fh)
            except json.JSONDecodeError as err:
                raise ConfigError(f"{path}: invalid JSON ({err})") from err
        if not isinstance(user, dict):
            raise ConfigError("configuration must be a JSON object")
        if "scenario" in user and user["scenario"] != raw["scenario"] and "geometry" not in user:
            raise ConfigError("changing scenario requires a geometry block", "geometry")
        raw.update(user)
    if scenario is not None and raw["scenario"] != scenario:
        raise ConfigError(f"config scenario {raw['scenario']!r} does not match --scenario {scenario!r}", "scenario")
    return validate(raw)


def resolve_seed(flag: int | None, fallback: int = 0) -> int:
    """``--seed`` wins, then the environment override, then the config value."""
    if flag is not None:
        return int(flag)
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError as err:
            raise ConfigError(f"{SEED_ENV} must be an integer", SEED_ENV) from err
    return int(fallback)
