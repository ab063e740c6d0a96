"""Error metrics, empirical CDFs and the pointing-jitter Monte Carlo."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import beam
from .beam import FreeSpaceLink, Pointing, RisLink
from .fileio import atomic_write_text


def _pair(est, truth):
    e = np.asarray(est, dtype=float).ravel()
    t = np.asarray(truth, dtype=float).ravel()
    if e.size != t.size:
        raise ValueError(f"length mismatch: {e.size} vs {t.size}")
    if e.size == 0:
        raise ValueError("empty input")
    return e, t


def mae(est, truth) -> float:
    """Mean absolute error, in the units of the inputs."""
    e, t = _pair(est, truth)
    return float(np.mean(np.abs(e - t)))


def rmse(est, truth) -> float:
    e, t = _pair(est, truth)
    d = np.abs(e - t)
    top = d.max()
    if top == 0 or not np.isfinite(top):
        return float(top)
    # scale first so tiny or huge errors neither underflow nor overflow when squared
    return float(top * np.sqrt(np.mean((d / top) ** 2)))


@dataclass(frozen=True)
class CdfSeries:
    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.probs.shape or self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("values and probs must be equal-length nonempty vectors")
        if np.any(np.diff(self.values) < 0):
            raise ValueError("values must be sorted")
        if np.any(np.diff(self.probs) < 0) or self.probs[0] <= 0 or self.probs[-1] != 1.0:
            raise ValueError("probs must rise to 1")

    def __len__(self):
        return self.values.size

    @property
    def median(self) -> float:
        return float(np.median(self.values))

    def to_csv(self, path=None) -> str:
        lines = ["value_db,cum_prob"]
        lines += [f"{v!r},{p!r}" for v, p in zip(self.values.tolist(), self.probs.tolist())]
        text = "\n".join(lines) + "\n"
        if path is not None:
            atomic_write_text(path, text)
        return text


def empirical_cdf(samples) -> CdfSeries:
    v = np.sort(np.asarray(samples, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("empty sample")
    return CdfSeries(v, np.arange(1, v.size + 1) / v.size)


def truncated_normal(rng: np.random.Generator, sigma: float, size: int, low: float = 0.0,
                     high: float = math.pi / 2) -> np.ndarray:
    """Zero-mean normal draws restricted to ``[low, high)`` by rejection."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        if not low <= 0.0 < high:
            raise ValueError("zero lies outside the truncation interval")
        return np.zeros(size)
    out = np.empty(0)
    while out.size < size:
        draw = rng.normal(0.0, sigma, size=2 * (size - out.size) + 16)
        out = np.concatenate([out, draw[(draw >= low) & (draw < high)]])
    return out[:size]


def pointing_pl_samples(link, sigma_point_deg: float = 3.0, n: int = 3000, seed: int = 0) -> np.ndarray:
    """Total path loss under random TX/RX azimuth pointing offsets."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    sigma = math.radians(sigma_point_deg)
    theta_t = truncated_normal(rng, sigma, n)
    theta_r = truncated_normal(rng, sigma, n)
    tx, rx = Pointing(theta_t, np.zeros(n)), Pointing(theta_r, np.zeros(n))
    if isinstance(link, RisLink):
        return np.asarray(beam.ris_total_pl_db(link, tx, rx), dtype=float)
    if isinstance(link, FreeSpaceLink):
        return np.asarray(beam.fs_total_pl_db(link, tx, rx), dtype=float)
    raise TypeError(f"unsupported link {type(link).__name__}")


def monte_carlo_pl_cdf(link, sigma_point_deg: float = 3.0, n: int = 3000, seed: int = 0) -> CdfSeries:
    return empirical_cdf(pointing_pl_samples(link, sigma_point_deg, n, seed))


def ks_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    return float(stats.ks_2samp(np.ravel(a), np.ravel(b)).statistic)
