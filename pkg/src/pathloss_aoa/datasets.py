"""Synthetic S21 sweeps and their CSV + JSON-sidecar file format.

A :class:`SweepDataset` holds rows of ``(freq_hz, angle_deg, plane, s21_db)``
and a metadata dict that records how each row's antenna pointings follow from
``angle_deg``:

* ``{"mode": "rotation", "rotated": "rx"|"tx", "boresight_deg": b}`` -- one
  antenna is turned on a platform. In the H plane the turned antenna sees an
  azimuth offset ``|angle - b|``; in the V plane an elevation offset
  ``angle - b``. The other antenna stays at boresight.
* ``{"mode": "fixed", "theta_t_deg": .., "phi_t_deg": .., "theta_r_deg": ..,
  "phi_r_deg": ..}`` -- fixed geometry; ``angle_deg`` carries the AoA label.

Noise is additive Gaussian on S21 in dB, drawn per ``(freq, plane)`` shard
from a stream keyed by ``(seed, freq, plane)``.
"""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import beam, presets
from .fileio import atomic_write_text
from .beam import BORESIGHT, FreeSpaceLink, Pointing, RisLink

CSV_HEADER = "freq_hz,angle_deg,plane,s21_db"
PLANES = ("H", "V")


@dataclasses.dataclass
class SweepDataset:
    freq_hz: np.ndarray
    angle_deg: np.ndarray
    plane: np.ndarray
    s21_db: np.ndarray
    meta: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        self.freq_hz = np.asarray(self.freq_hz, dtype=float)
        self.angle_deg = np.asarray(self.angle_deg, dtype=float)
        self.plane = np.asarray(self.plane, dtype="<U1")
        self.s21_db = np.asarray(self.s21_db, dtype=float)
        n = self.freq_hz.size
        if not (self.angle_deg.size == self.plane.size == self.s21_db.size == n):
            raise ValueError("all columns must have the same length")
        if not np.all(np.isfinite(self.s21_db)):
            raise ValueError("s21_db must be finite")
        if not set(self.plane.tolist()) <= set(PLANES):
            raise ValueError("plane must be 'H' or 'V'")
        keys = set(zip(self.freq_hz.tolist(), self.angle_deg.tolist(), self.plane.tolist()))
        if len(keys) != n:
            raise ValueError("rows must be unique on (freq_hz, angle_deg, plane)")

    def __len__(self):
        return self.freq_hz.size

    @property
    def scenario(self) -> str:
        return self.meta["scenario"]

    def link(self):
        return presets.link_from_dict(self.scenario, self.meta["geometry"])

    def select(self, mask) -> "SweepDataset":
        mask = np.asarray(mask)
        return SweepDataset(
            self.freq_hz[mask], self.angle_deg[mask], self.plane[mask], self.s21_db[mask],
            copy.deepcopy(self.meta),
        )

    def to_csv_text(self) -> str:
        lines = [CSV_HEADER]
        for f, a, p, s in zip(self.freq_hz, self.angle_deg, self.plane, self.s21_db):
            lines.append(f"{float(f)!r},{float(a)!r},{p},{float(s)!r}")
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_csv_text().encode()).hexdigest()

    def save(self, csv_path) -> tuple[Path, Path]:
        """Write the CSV and its ``.meta.json`` sidecar."""
        csv_path = Path(csv_path)
        meta_path = sidecar_path(csv_path)
        atomic_write_text(csv_path, self.to_csv_text())
        atomic_write_text(meta_path, json.dumps(self.meta, indent=2, sort_keys=True) + "\n")
        return csv_path, meta_path

    @classmethod
    def load(cls, csv_path) -> "SweepDataset":
        csv_path = Path(csv_path)
        text = csv_path.read_text().splitlines()
        if not text or text[0].strip() != CSV_HEADER:
            raise ValueError(f"{csv_path}: expected header {CSV_HEADER!r}")
        cols = [line.split(",") for line in text[1:] if line.strip()]
        meta_path = sidecar_path(csv_path)
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        return cls(
            [float(c[0]) for c in cols],
            [float(c[1]) for c in cols],
            [c[2] for c in cols],
            [float(c[3]) for c in cols],
            meta,
        )


def sidecar_path(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".meta.json")


# --------------------------------------------------------------------------- #
# geometry per row

def row_pointings(ds: SweepDataset) -> tuple[Pointing, Pointing]:
    """Per-row (tx, rx) pointings in radians."""
    return pointings_for(ds.meta["pointing"], ds.angle_deg, ds.plane)


def pointings_for(pointing: dict, angle_deg, plane) -> tuple[Pointing, Pointing]:
    angle_deg = np.asarray(angle_deg, dtype=float)
    zeros = np.zeros_like(angle_deg)
    if pointing["mode"] == "fixed":
        tx = Pointing(
            np.deg2rad(zeros + pointing.get("theta_t_deg", 0.0)),
            np.deg2rad(zeros + pointing.get("phi_t_deg", 0.0)),
        )
        rx = Pointing(
            np.deg2rad(zeros + pointing.get("theta_r_deg", 0.0)),
            np.deg2rad(zeros + pointing.get("phi_r_deg", 0.0)),
        )
        return tx, rx
    offset = np.deg2rad(angle_deg - pointing["boresight_deg"])
    is_h = np.asarray(plane) == "H"
    turned = Pointing(np.where(is_h, np.abs(offset), 0.0), np.where(is_h, 0.0, offset))
    still = Pointing(zeros, zeros)
    return (still, turned) if pointing["rotated"] == "rx" else (turned, still)


def truth_theta_r(ds: SweepDataset) -> np.ndarray:
    return np.asarray(row_pointings(ds)[1].theta_rad, dtype=float)


def _link_at(link, freq_hz):
    if isinstance(link, FreeSpaceLink):
        return dataclasses.replace(link, freq_hz=float(freq_hz))
    return link


def model_pl_db(scenario, link, freq_hz, tx: Pointing, rx: Pointing, paper_exact_eq8=False):
    if scenario == "free_space":
        return beam.fs_total_pl_db(_link_at(link, freq_hz), tx, rx)
    return beam.ris_total_pl_db(link, tx, rx, paper_exact_eq8=paper_exact_eq8)


def baseline_pl_db(scenario, link, freq_hz) -> float:
    """Total path loss with both antennas at boresight (the geometry-only model)."""
    return float(model_pl_db(scenario, link, freq_hz, BORESIGHT, BORESIGHT))


def baseline_per_row(ds: SweepDataset, link=None) -> np.ndarray:
    link = link or ds.link()
    cache = {}
    out = np.empty(len(ds))
    for i, f in enumerate(ds.freq_hz):
        if f not in cache:
            cache[f] = baseline_pl_db(ds.scenario, link, f)
        out[i] = cache[f]
    return out


def delta_pl_features(ds: SweepDataset, link=None) -> np.ndarray:
    """Differential path loss in the S21 sense: ``S21 - S21_boresight_model`` (<= 0 off boresight)."""
    s21_model_boresight = -baseline_per_row(ds, link)
    return beam.delta_pl(ds.s21_db, s21_model_boresight)


# --------------------------------------------------------------------------- #
# generators

def _noise_stream(seed, freq_hz, plane):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(round(freq_hz)), PLANES.index(plane)))
    return np.random.default_rng(ss)


def _scan_angles(angle_range, step_deg):
    lo, hi = angle_range
    if step_deg <= 0:
        raise ValueError("step_deg must be positive")
    count = int(math.floor((hi - lo) / step_deg + 1e-9)) + 1
    return np.round(lo + step_deg * np.arange(count), 9)


def _rotation_sweep(scenario, link, angles, freqs, boresight_deg, noise_sigma_db, seed, planes, rotated):
    if rotated not in ("rx", "tx"):
        raise ValueError("rotated must be 'rx' or 'tx'")
    if not angles.min() <= boresight_deg <= angles.max():
        raise ValueError("boresight must lie inside the scan range")
    if noise_sigma_db < 0:
        raise ValueError("noise_sigma_db must be >= 0")
    pointing = {"mode": "rotation", "rotated": rotated, "boresight_deg": float(boresight_deg)}
    cols = ([], [], [], [])
    dropped = 0
    for f in freqs:
        for plane in planes:
            planes_col = np.full(angles.size, plane)
            offset = np.abs(angles - boresight_deg)
            ok = offset < 90.0 if plane == "H" else offset <= 180.0
            tx, rx = pointings_for(pointing, angles[ok], planes_col[ok])
            pattern = link.rx_pattern if rotated == "rx" else link.tx_pattern
            turned = rx if rotated == "rx" else tx
            u = np.asarray(beam.normalized_pattern(pattern, turned))
            keep = u > 0
            dropped += int(angles.size - keep.sum())
            sub = lambda p: Pointing(np.asarray(p.theta_rad)[keep], np.asarray(p.phi_rad)[keep])
            pl = np.asarray(model_pl_db(scenario, link, f, sub(tx), sub(rx)), dtype=float)
            s21 = -pl
            if noise_sigma_db > 0:
                s21 = s21 + _noise_stream(seed, f, plane).normal(0.0, noise_sigma_db, s21.size)
            a = angles[ok][keep]
            cols[0].append(np.full(a.size, float(f)))
            cols[1].append(a)
            cols[2].append(np.full(a.size, plane))
            cols[3].append(s21)
    meta = {
        "scenario": scenario,
        "geometry": presets.link_to_dict(link),
        "pointing": pointing,
        "noise_sigma_db": float(noise_sigma_db),
        "seed": int(seed),
        "dropped_null_rows": dropped,
    }
    return SweepDataset(*(np.concatenate(c) for c in cols), meta=meta)


def generate_fs_sweep(
    link: FreeSpaceLink | None = None,
    angle_range=presets.STAGE1_ANGLE_RANGE_DEG,
    step_deg: float = presets.STAGE1_STEP_DEG,
    freqs=presets.STAGE1_FREQS_HZ,
    boresight_deg: float = presets.STAGE1_BORESIGHT_DEG,
    noise_sigma_db: float = 0.1,
    seed: int = 0,
    planes=("H",),
    rotated: str = "rx",
) -> SweepDataset:
    """Free-space chamber sweep: S21 = -PL_tot at the platform-derived pointings, plus dB noise.

    Rows whose pointing lands on a pattern null are dropped and counted in
    ``meta["dropped_null_rows"]``.
    """
    link = link or presets.stage1_link()
    angles = _scan_angles(angle_range, step_deg)
    return _rotation_sweep("free_space", link, angles, freqs, boresight_deg, noise_sigma_db, seed, planes, rotated)


def generate_ris_sweep(
    link: RisLink | None = None,
    angle_range=(0.0, 80.0),
    step_deg: float = 2.0,
    freqs=(presets.STAGE2_FREQS_HZ[0],),
    boresight_deg: float = 0.0,
    noise_sigma_db: float = 0.0,
    seed: int = 0,
    planes=("H",),
    rotated: str = "rx",
) -> SweepDataset:
    """Angular characterization sweep of the RIS link (used to fit directivity exponents)."""
    link = link or presets.stage2_link()
    angles = _scan_angles(angle_range, step_deg)
    return _rotation_sweep("ris", link, angles, freqs, boresight_deg, noise_sigma_db, seed, planes, rotated)


def characterization_sweeps(scenario="free_space", link=None, noise_sigma_db=0.0, seed=0, planes=("H", "V")):
    """Rx-turned and Tx-turned sweeps in both planes, enough to identify all four exponents."""
    gen = generate_fs_sweep if scenario == "free_space" else generate_ris_sweep
    kw = dict(noise_sigma_db=noise_sigma_db, seed=seed, planes=planes)
    if link is not None:
        kw["link"] = link
    return [gen(rotated="rx", **kw), gen(rotated="tx", **kw)]


def generate_ris_samples(
    link: RisLink | None = None,
    n_samples: int = 100,
    noise_sigma_db: float = 0.1,
    seed: int = 0,
    freqs=presets.STAGE2_FREQS_HZ,
    theta_r_deg: float = presets.STAGE2_AOA_DEG,
    theta_t_deg: float = 0.0,
    freq_step_hz: float = 1e6,
) -> SweepDataset:
    """Fixed-geometry RIS samples at the known AoA.

    Each band contributes ``n_samples`` VNA points spaced ``freq_step_hz``
    around the band centre. The model has no frequency dependence, so the
    samples differ only through noise.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    link = link or presets.stage2_link()
    pointing = {"mode": "fixed", "theta_t_deg": float(theta_t_deg), "phi_t_deg": 0.0,
                "theta_r_deg": float(theta_r_deg), "phi_r_deg": 0.0}
    tx = Pointing.from_degrees(theta_t_deg)
    rx = Pointing.from_degrees(theta_r_deg)
    s21_clean = -float(beam.ris_total_pl_db(link, tx, rx))
    offsets = (np.arange(n_samples) - (n_samples - 1) / 2.0) * freq_step_hz
    cols = ([], [], [], [])
    for f0 in freqs:
        f = np.round(f0 + offsets, 3)
        s21 = np.full(n_samples, s21_clean)
        if noise_sigma_db > 0:
            s21 = s21 + _noise_stream(seed, f0, "H").normal(0.0, noise_sigma_db, n_samples)
        cols[0].append(f)
        cols[1].append(np.full(n_samples, float(theta_r_deg)))
        cols[2].append(np.full(n_samples, "H"))
        cols[3].append(s21)
    meta = {
        "scenario": "ris",
        "geometry": presets.link_to_dict(link),
        "pointing": pointing,
        "noise_sigma_db": float(noise_sigma_db),
        "seed": int(seed),
        "dropped_null_rows": 0,
    }
    return SweepDataset(*(np.concatenate(c) for c in cols), meta=meta)
