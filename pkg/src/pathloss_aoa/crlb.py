"""Cramér-Rao bound for single-link AoA from a calibrated cosine beam."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import beam
from .beam import CosineBeamPattern
from .fileio import atomic_write_text

SCENARIOS = ("free_space", "ris")


class SingularInformationError(ArithmeticError):
    """Fisher information is singular (zero pattern slope)."""


def calibrate_alpha(s21_peak_lin: float, h_peak_lin: float) -> float:
    """Channel gain magnitude from a calibration tone on the pattern peak."""
    if not (s21_peak_lin > 0 and h_peak_lin > 0):
        raise ValueError("calibration values must be positive")
    return s21_peak_lin / h_peak_lin


@dataclass(frozen=True)
class CrlbConfig:
    """Noise and gain settings.

    Attributes:
        noise_var: per-snapshot noise power.
        snapshots: number of snapshots ``M``.
        alpha_mag: channel gain ``|alpha|``; leave ``None`` to derive it from
            ``calibration = (s21_peak_lin, h_peak_lin)``.
    """

    noise_var: float = 1e-3
    snapshots: int = 1000
    alpha_mag: float | None = 1.0
    calibration: tuple | None = None

    def __post_init__(self):
        if not self.noise_var > 0:
            raise ValueError("noise_var must be positive")
        if int(self.snapshots) != self.snapshots or self.snapshots < 1:
            raise ValueError("snapshots must be an integer >= 1")
        if self.alpha_mag is None and self.calibration is None:
            raise ValueError("give alpha_mag or a calibration pair")
        if self.alpha_mag is not None and not self.alpha_mag > 0:
            raise ValueError("alpha_mag must be positive")
        if self.calibration is not None:
            calibrate_alpha(*self.calibration)

    @property
    def alpha(self) -> float:
        if self.alpha_mag is not None:
            return float(self.alpha_mag)
        return calibrate_alpha(*self.calibration)

    @property
    def snr_factor(self) -> float:
        """``2 M |alpha|^2 / sigma^2``."""
        return 2.0 * self.snapshots * self.alpha**2 / self.noise_var


def fisher_info(theta_rad, h, h_prime, cfg: CrlbConfig) -> np.ndarray:
    """2x2 Fisher information in (theta, phase of alpha)."""
    h, hp = complex(h), complex(h_prime)
    cross = -(np.conj(hp) * h).imag
    return cfg.snr_factor * np.array([[abs(hp) ** 2, cross], [cross, abs(h) ** 2]])


def crlb_var(theta_rad, h, h_prime, cfg: CrlbConfig, simplified: bool = False) -> float:
    """Bound on var(theta_hat) in rad^2.

    The general form inverts the full 2x2 information; ``simplified`` drops
    the phase coupling, which is exact for real-valued ``h``.
    """
    h, hp = complex(h), complex(h_prime)
    if not (np.isfinite(h) and np.isfinite(hp)):
        raise ValueError("h and h' must be finite")
    if simplified:
        info = cfg.snr_factor * abs(hp) ** 2
        if info == 0:
            raise SingularInformationError(f"zero pattern slope at {math.degrees(theta_rad):g} deg")
        return 1.0 / info
    im = (np.conj(hp) * h).imag
    det = abs(h) ** 2 * abs(hp) ** 2 - im**2
    if not det > 0:
        raise SingularInformationError(f"singular information at {math.degrees(theta_rad):g} deg")
    return abs(h) ** 2 / (cfg.snr_factor * det)


def default_grid() -> np.ndarray:
    """1 to 89 deg in 0.5 deg steps, in radians."""
    return np.radians(np.arange(2, 179) / 2.0)


@dataclass(frozen=True)
class CrlbCurve:
    grid: np.ndarray
    bound_rmse: np.ndarray
    config: CrlbConfig
    scenario: str

    def __post_init__(self):
        if self.grid.shape != self.bound_rmse.shape:
            raise ValueError("grid and bound shapes differ")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(~(self.bound_rmse > 0)):
            raise ValueError("bound must be positive")

    @property
    def grid_deg(self):
        return np.degrees(self.grid)

    @property
    def bound_rmse_deg(self):
        return np.degrees(self.bound_rmse)

    def to_csv(self, path=None) -> str:
        lines = ["theta_deg,crlb_rmse_deg,scenario"]
        lines += [f"{round(t, 9)!r},{b!r},{self.scenario}" for t, b in zip(self.grid_deg.tolist(), self.bound_rmse_deg.tolist())]
        text = "\n".join(lines) + "\n"
        if path is not None:
            atomic_write_text(path, text)
        return text


def _check_grid(grid):
    g = np.atleast_1d(np.asarray(grid, dtype=float))
    if g.size == 0:
        raise ValueError("empty grid")
    if np.any(g <= 0) or np.any(g >= math.pi / 2):
        raise ValueError("grid must lie strictly inside (0, 90) deg")
    return g


def crlb_rmse_curve(scenario: str, pattern: CosineBeamPattern, grid=None, cfg: CrlbConfig | None = None,
                    scale: float = 1.0, simplified: bool = False) -> CrlbCurve:
    """sqrt(CRLB) over ``grid`` for ``h = scale * cos^n(theta)``."""
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    cfg = cfg or CrlbConfig()
    g = _check_grid(default_grid() if grid is None else grid)
    h = beam.pattern_amplitude(pattern, g, scale)
    hp = beam.pattern_amplitude_derivative(pattern, g, scale)
    var = np.array([crlb_var(t, a, b, cfg, simplified) for t, a, b in zip(g, h, hp)])
    return CrlbCurve(g, np.sqrt(var), cfg, scenario)


def link_crlb_curve(link, grid=None, cfg: CrlbConfig | None = None) -> CrlbCurve:
    """Bound for a concrete link.

    ``h`` carries the link's boresight amplitude, and ``cfg.alpha`` is read as
    the calibrated peak ``|S21|`` amplitude, so ``|alpha| = cfg.alpha / h_peak``.
    """
    scenario = "free_space" if isinstance(link, beam.FreeSpaceLink) else "ris"
    scale = beam.boresight_amplitude(link)
    base = cfg or CrlbConfig()
    cal = CrlbConfig(base.noise_var, base.snapshots, None, (base.alpha, scale))
    return crlb_rmse_curve(scenario, link.rx_pattern, grid, cal, scale)


def derivative_check(pattern: CosineBeamPattern, grid=None, scale: float = 1.0, step: float = 1e-6) -> float:
    """Largest relative gap between analytic and central-difference h'."""
    g = _check_grid(default_grid() if grid is None else grid)
    analytic = beam.pattern_amplitude_derivative(pattern, g, scale)
    fd = (beam.pattern_amplitude(pattern, g + step, scale) - beam.pattern_amplitude(pattern, g - step, scale)) / (2 * step)
    denom = np.maximum(np.abs(analytic), np.finfo(float).eps)
    return float(np.max(np.abs(analytic - fd) / denom))
