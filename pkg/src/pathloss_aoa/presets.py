"""Measurement-campaign constants and link (de)serialization."""

from __future__ import annotations

import dataclasses
import math

from .beam import CosineBeamPattern, FreeSpaceLink, RisLink, power_divider_loss_db

GHZ = 1e9

# Stage I: anechoic chamber, 2 m, 26-31 GHz, probe Tx / horn Rx
STAGE1_DISTANCE_M = 2.0
STAGE1_FREQS_HZ = tuple(f * GHZ for f in (26, 27, 28, 29, 30, 31))
STAGE1_ANGLE_RANGE_DEG = (0.0, 120.0)
STAGE1_STEP_DEG = 2.4
STAGE1_BORESIGHT_DEG = 60.0
STAGE1_TX_PATTERN = CosineBeamPattern(n=1, m=1, g_max_dbi=4.5)
STAGE1_RX_PATTERN = CosineBeamPattern(n=28, m=28, g_max_dbi=23.5)

# Stage II: RIS testbed
RIS_SIDE_M = 0.20576
RIS_ELEMENTS_PER_SIDE = 32
RIS_THETA_AXIS_DEG = 35.0
STAGE2_AOA_DEG = 55.0
STAGE2_FREQS_HZ = (28 * GHZ, 29 * GHZ, 30 * GHZ)
STAGE2_TX_ELEMENTS = 48
STAGE2_TX_PATTERN = CosineBeamPattern(n=4, m=4, g_max_dbi=0.0)
STAGE2_RX_PATTERN = CosineBeamPattern(n=1, m=1, g_max_dbi=23.5)

# measured mean S21 per (distance, GHz); documentation only, not reproduced by the model
STAGE2_MEASURED_MEAN_S21_DB = {
    ("3m", 28): -16.08,
    ("2m", 29): -24.76,
    ("3m", 29): -20.26,
    ("3m", 30): -14.81,
    ("2m", 30): -16.61,
}


def stage1_link(freq_hz: float = 28 * GHZ) -> FreeSpaceLink:
    return FreeSpaceLink(
        distance_m=STAGE1_DISTANCE_M,
        freq_hz=freq_hz,
        tx_pattern=STAGE1_TX_PATTERN,
        rx_pattern=STAGE1_RX_PATTERN,
        loss_connector_db=1.0,
        loss_cable_db=1.0,
    )


def stage2_link(distance_m: float = 2.0) -> RisLink:
    return RisLink(
        a_m=RIS_SIDE_M,
        b_m=RIS_SIDE_M,
        r_tx_ris_m=distance_m,
        r_ris_rx_m=distance_m,
        tx_pattern=STAGE2_TX_PATTERN,
        rx_pattern=STAGE2_RX_PATTERN,
        theta_axis_rad=math.radians(RIS_THETA_AXIS_DEG),
        eps_ap=1.0,
        l_pd_db=power_divider_loss_db(4, 7.5),
        l_connector_db=1.0,
        l_cable_db=1.0,
        g_bf_db=10.0 * math.log10(STAGE2_TX_ELEMENTS),
        element_spacing_m=RIS_SIDE_M / RIS_ELEMENTS_PER_SIDE,
    )


# --------------------------------------------------------------------------- #
# dict round trip (angles in degrees at the boundary)

_FS_FIELDS = ("distance_m", "freq_hz", "loss_connector_db", "loss_cable_db", "tx_pattern", "rx_pattern")
_RIS_FIELDS = (
    "a_m", "b_m", "r_tx_ris_m", "r_ris_rx_m", "eps_ap", "theta_axis_deg", "l_pd_db",
    "l_connector_db", "l_cable_db", "g_bf_db", "element_spacing_m", "tx_pattern", "rx_pattern",
)
_PATTERN_FIELDS = ("n", "m", "g_max_dbi")


class ConfigError(ValueError):
    """Invalid or incomplete configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


def link_to_dict(link) -> dict:
    d = dataclasses.asdict(link)
    if isinstance(link, RisLink):
        d["theta_axis_deg"] = math.degrees(d.pop("theta_axis_rad"))
    return d


def _pattern_from_dict(d, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object", where)
    _check_keys(d, _PATTERN_FIELDS, where)
    return CosineBeamPattern(**{k: float(d[k]) for k in _PATTERN_FIELDS})


def _check_keys(d, required, where):
    missing = [k for k in required if k not in d]
    if missing:
        raise ConfigError(f"missing field {where}.{missing[0]}", f"{where}.{missing[0]}")
    unknown = sorted(set(d) - set(required))
    if unknown:
        raise ConfigError(f"unknown field {where}.{unknown[0]}", f"{where}.{unknown[0]}")


def link_from_dict(scenario: str, d: dict, where: str = "geometry"):
    if scenario == "free_space":
        _check_keys(d, _FS_FIELDS, where)
        kw = {k: float(d[k]) for k in _FS_FIELDS if not k.endswith("pattern")}
        cls = FreeSpaceLink
    elif scenario == "ris":
        _check_keys(d, _RIS_FIELDS, where)
        kw = {k: float(d[k]) for k in _RIS_FIELDS if not k.endswith("pattern")}
        kw["theta_axis_rad"] = math.radians(kw.pop("theta_axis_deg"))
        cls = RisLink
    else:
        raise ConfigError(f"unknown scenario {scenario!r}", "scenario")
    kw["tx_pattern"] = _pattern_from_dict(d["tx_pattern"], f"{where}.tx_pattern")
    kw["rx_pattern"] = _pattern_from_dict(d["rx_pattern"], f"{where}.rx_pattern")
    try:
        return cls(**kw)
    except ValueError as err:
        raise ConfigError(f"{where}: {err}", where) from err
