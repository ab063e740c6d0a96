"""Closed-form link models: cosine beam patterns, free-space and RIS path loss.

Angles are radians throughout. Loss quantities enter total path loss with a
plus sign and antenna/beamforming gains with a minus sign, so a larger
total means a weaker link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
_FOUR_PI_DB = 20.0 * math.log10(4.0 * math.pi)
_COS_ZERO_TOL = 1e-15


class PatternNullError(ValueError):
    """Raised when a pointing falls on a pattern null (gain of -inf dB)."""


@dataclass(frozen=True)
class CosineBeamPattern:
    """cos^n(theta) cos^m(phi) pattern scaled by a peak gain in dBi."""

    n: float
    m: float
    g_max_dbi: float = 0.0

    def __post_init__(self):
        if not (self.n >= 0 and self.m >= 0):
            raise ValueError(f"directivity exponents must be >= 0, got n={self.n}, m={self.m}")
        if not math.isfinite(self.g_max_dbi):
            raise ValueError("g_max_dbi must be finite")


@dataclass(frozen=True)
class Pointing:
    """Azimuth/elevation offset from an antenna's boresight."""

    theta_rad: float | np.ndarray = 0.0
    phi_rad: float | np.ndarray = 0.0

    @classmethod
    def from_degrees(cls, theta_deg=0.0, phi_deg=0.0) -> "Pointing":
        return cls(np.deg2rad(theta_deg), np.deg2rad(phi_deg))


BORESIGHT = Pointing(0.0, 0.0)


@dataclass(frozen=True)
class FreeSpaceLink:
    distance_m: float
    freq_hz: float
    tx_pattern: CosineBeamPattern
    rx_pattern: CosineBeamPattern
    loss_connector_db: float = 1.0
    loss_cable_db: float = 1.0

    def __post_init__(self):
        if not (self.distance_m > 0 and self.freq_hz > 0):
            raise ValueError("distance_m and freq_hz must be positive")
        if self.loss_connector_db < 0 or self.loss_cable_db < 0:
            raise ValueError("connector/cable losses must be >= 0 dB")


@dataclass(frozen=True)
class RisLink:
    a_m: float
    b_m: float
    r_tx_ris_m: float
    r_ris_rx_m: float
    tx_pattern: CosineBeamPattern
    rx_pattern: CosineBeamPattern
    theta_axis_rad: float = 0.0
    eps_ap: float = 1.0
    l_pd_db: float = 0.0
    l_connector_db: float = 1.0
    l_cable_db: float = 1.0
    g_bf_db: float = 0.0
    element_spacing_m: float = field(default=0.0064)

    def __post_init__(self):
        for name in ("a_m", "b_m", "r_tx_ris_m", "r_ris_rx_m", "element_spacing_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.eps_ap <= 1:
            raise ValueError("eps_ap must lie in (0, 1]")
        if not 0 <= self.theta_axis_rad <= math.pi / 2:
            raise ValueError("theta_axis_rad must lie in [0, pi/2]")


def _check_domain(at: Pointing):
    theta = np.asarray(at.theta_rad, dtype=float)
    phi = np.asarray(at.phi_rad, dtype=float)
    if np.any((theta < 0) | (theta > math.pi / 2)) or np.any(~np.isfinite(theta)):
        raise ValueError("theta must lie in [0, pi/2]")
    if np.any((phi < -math.pi) | (phi > math.pi)) or np.any(~np.isfinite(phi)):
        raise ValueError("phi must lie in [-pi, pi]")
    return theta, phi


def _cos(angle):
    c = np.cos(angle)
    # cos(pi/2) evaluates to 6e-17; treat it as an exact null
    return np.where(np.abs(c) < _COS_ZERO_TOL, 0.0, c)


def _pow_term(c, exponent):
    if exponent == 0:
        return np.ones_like(c)
    return np.where(c > 0, np.abs(c) ** exponent, 0.0)


def _log_term(c, exponent):
    """exponent * log10(c), with zero exponents contributing nothing."""
    if exponent == 0:
        return np.zeros_like(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        return exponent * np.log10(np.where(c > 0, c, np.nan))


def normalized_pattern(p: CosineBeamPattern, at: Pointing):
    """Normalized pattern value cos^n(theta) cos^m(phi) in [0, 1].

    Returns exactly 0 where the cosine of an angle with a positive exponent
    is <= 0. Raises ``ValueError`` outside theta in [0, pi/2], phi in [-pi, pi].
    """
    theta, phi = _check_domain(at)
    u = _pow_term(_cos(theta), p.n) * _pow_term(_cos(phi), p.m)
    return u if u.ndim else float(u)


def _raise_on_null(u, what="pattern"):
    if np.any(np.asarray(u) <= 0):
        raise PatternNullError(f"{what} null: gain is -inf dB")


def gain_dbi(p: CosineBeamPattern, at: Pointing):
    """Antenna gain in dBi, ``g_max + 10 log10 U``."""
    u = normalized_pattern(p, at)
    _raise_on_null(u)
    return p.g_max_dbi + 10.0 * np.log10(u)


def pattern_log_gain_db(p: CosineBeamPattern, at: Pointing):
    """``10 (n log10 cos theta + m log10 cos phi)``, the log-expanded pattern term."""
    theta, phi = _check_domain(at)
    term = 10.0 * (_log_term(_cos(theta), p.n) + _log_term(_cos(phi), p.m))
    if np.any(np.isnan(term)):
        raise PatternNullError("pattern null: gain is -inf dB")
    return term if np.ndim(term) else float(term)


def half_power_beamwidth_rad(n: float) -> float:
    """Full half-power beamwidth of cos^n in its principal plane."""
    if n <= 0:
        raise ValueError("beamwidth is only defined for n > 0")
    return 2.0 * math.acos(0.5 ** (1.0 / n))


def fspl_db(distance_m, freq_hz):
    """Free-space path loss: 20log R + 20log f + 20log 4pi - 20log c."""
    r = np.asarray(distance_m, dtype=float)
    f = np.asarray(freq_hz, dtype=float)
    if np.any(r <= 0) or np.any(f <= 0):
        raise ValueError("distance and frequency must be positive")
    out = 20.0 * np.log10(r) + 20.0 * np.log10(f) + _FOUR_PI_DB - 20.0 * math.log10(SPEED_OF_LIGHT)
    return out if out.ndim else float(out)


def fs_baseline_db(link: FreeSpaceLink) -> float:
    """Total free-space path loss with both antennas at boresight."""
    return (
        fspl_db(link.distance_m, link.freq_hz)
        + link.loss_connector_db
        + link.loss_cable_db
        - link.tx_pattern.g_max_dbi
        - link.rx_pattern.g_max_dbi
    )


def fs_total_pl_db(link: FreeSpaceLink, tx_at: Pointing = BORESIGHT, rx_at: Pointing = BORESIGHT):
    """Total free-space path loss using the log-expanded pattern terms."""
    return (
        fs_baseline_db(link)
        - pattern_log_gain_db(link.tx_pattern, tx_at)
        - pattern_log_gain_db(link.rx_pattern, rx_at)
    )


def fs_total_pl_db_from_gains(link: FreeSpaceLink, tx_at: Pointing = BORESIGHT, rx_at: Pointing = BORESIGHT):
    """Same quantity as :func:`fs_total_pl_db`, assembled from antenna gains in dBi."""
    return (
        fspl_db(link.distance_m, link.freq_hz)
        + link.loss_connector_db
        + link.loss_cable_db
        - gain_dbi(link.tx_pattern, tx_at)
        - gain_dbi(link.rx_pattern, rx_at)
    )


def ris_pl_linear(link: RisLink, g_t_lin, g_r_lin):
    """Linear power ratio of the RIS relay link (the received fraction, <= 1 for passive gains)."""
    geom = (link.a_m * link.b_m / (link.r_tx_ris_m * link.r_ris_rx_m)) ** 2
    cos_axis = float(_cos(link.theta_axis_rad))
    return (
        np.asarray(g_t_lin) * np.asarray(g_r_lin) / (4.0 * math.pi) ** 2
        * geom * link.eps_ap**2 * cos_axis**2
    )


def ris_geometry_db(link: RisLink) -> float:
    """``20 (log a + log b - log R1 - log R2 + log eps + log cos theta_axis)``."""
    cos_axis = float(_cos(link.theta_axis_rad))
    if cos_axis <= 0:
        raise PatternNullError("RIS axis null: theta_axis = 90 deg")
    return 20.0 * (
        math.log10(link.a_m) + math.log10(link.b_m)
        - math.log10(link.r_tx_ris_m) - math.log10(link.r_ris_rx_m)
        + math.log10(link.eps_ap) + math.log10(cos_axis)
    )


def ris_baseline_db(link: RisLink, paper_exact_eq8: bool = False) -> float:
    """RIS total path loss with both antennas at boresight."""
    return ris_total_pl_db(link, BORESIGHT, BORESIGHT, paper_exact_eq8=paper_exact_eq8)


def ris_total_pl_db(
    link: RisLink,
    tx_at: Pointing = BORESIGHT,
    rx_at: Pointing = BORESIGHT,
    paper_exact_eq8: bool = False,
):
    """Total RIS-aided path loss in dB.

    The default form is ``-10 log10`` of :func:`ris_pl_linear` plus the
    divider/connector/cable losses minus the beamforming gain, so it agrees
    with the linear model and grows with distance. ``paper_exact_eq8=True``
    instead adds the gain and geometry terms with a plus sign and drops the
    (4 pi)^2 factor, exactly as the dB expression is printed.
    """
    g_t = link.tx_pattern.g_max_dbi + pattern_log_gain_db(link.tx_pattern, tx_at)
    g_r = link.rx_pattern.g_max_dbi + pattern_log_gain_db(link.rx_pattern, rx_at)
    losses = link.l_pd_db + link.l_connector_db + link.l_cable_db - link.g_bf_db
    geom = ris_geometry_db(link)
    if paper_exact_eq8:
        return g_t + g_r + geom + losses
    # (4 pi)^2 in the denominator of the linear model -> +20 log10(4 pi) of loss
    return -g_t - g_r - geom + _FOUR_PI_DB + losses


def power_divider_loss_db(layers: int = 4, per_layer_db: float = 7.5) -> float:
    return layers * per_layer_db


def steering_angle_rad(wavelength_m: float, spacing_m: float) -> float:
    """RIS beam-steering angle ``arcsin(lambda / 2d)``."""
    if wavelength_m <= 0 or spacing_m <= 0:
        raise ValueError("wavelength and spacing must be positive")
    ratio = wavelength_m / (2.0 * spacing_m)
    if ratio > 1.0:
        raise ValueError(f"lambda/(2d) = {ratio:.4g} exceeds 1; no real steering angle")
    return math.asin(ratio)


def wavelength_m(freq_hz: float) -> float:
    return SPEED_OF_LIGHT / freq_hz


def delta_pl(pl_tot_db, pl_baseline_db):
    """Differential path loss: total minus the geometry-only baseline."""
    return np.subtract(pl_tot_db, pl_baseline_db)


def pattern_amplitude(p: CosineBeamPattern, theta_rad, scale: float = 1.0):
    """Azimuth-only gain shape ``scale * cos^n(theta)`` used by the CRLB model."""
    return scale * np.cos(theta_rad) ** p.n


def pattern_amplitude_derivative(p: CosineBeamPattern, theta_rad, scale: float = 1.0):
    """d/dtheta of :func:`pattern_amplitude`: ``-n cos^(n-1) sin * scale``."""
    c = np.cos(theta_rad)
    return -scale * p.n * c ** (p.n - 1.0) * np.sin(theta_rad)


def boresight_amplitude(link) -> float:
    """Linear end-to-end amplitude gain with both ends on boresight."""
    if isinstance(link, FreeSpaceLink):
        pl = fs_baseline_db(link)
    elif isinstance(link, RisLink):
        pl = ris_baseline_db(link)
    else:
        raise TypeError(f"unsupported link {type(link).__name__}")
    return 10.0 ** (-pl / 20.0)


def link_amplitude(link, theta_r_rad):
    """Receive-angle amplitude response ``h(theta_R)`` of a link."""
    return pattern_amplitude(link.rx_pattern, theta_r_rad, boresight_amplitude(link))


def link_amplitude_derivative(link, theta_r_rad):
    return pattern_amplitude_derivative(link.rx_pattern, theta_r_rad, boresight_amplitude(link))
