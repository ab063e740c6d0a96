"""End-to-end benchmark: fit estimators on a sweep, score them, compare to the CRLB."""

from __future__ import annotations

import math

import numpy as np

from . import beam, crlb, datasets, estimators, metrics, sr
from .beam import CosineBeamPattern
from .crlb import CrlbConfig
from .datasets import SweepDataset
from .estimators import AoaModel, DirectInversionModel

REPORT_SCHEMA = "pathloss_aoa.report/1"


def direct_inversion_mc_rmse(pattern: CosineBeamPattern, grid_rad, cfg: CrlbConfig | None = None,
                             trials: int = 10_000, seed: int = 0, scale: float = 1.0):
    """Monte-Carlo RMSE of direct inversion under the complex-Gaussian model.

    Each trial observes ``z = |alpha| h(theta) e^{j phi} + w`` with
    ``w ~ CN(0, sigma^2 / M)`` (the M-snapshot average), converts ``|z|`` to
    ΔPL against the calibrated peak and inverts with the true exponent.

    Returns:
        (rmse_rad, stderr_rad) arrays over ``grid_rad``; the standard error is
        the delta-method error of the RMSE estimate.
    """
    cfg = cfg or CrlbConfig()
    grid = np.atleast_1d(np.asarray(grid_rad, dtype=float))
    model = DirectInversionModel(float(pattern.n), 0.0)
    alpha = cfg.alpha
    h_pk = scale
    sd = math.sqrt(cfg.noise_var / cfg.snapshots / 2.0)
    out, err = np.empty(grid.size), np.empty(grid.size)
    for i, theta in enumerate(grid):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(i,))))
        phase = rng.uniform(0.0, 2 * math.pi, trials)
        w = rng.normal(0.0, sd, trials) + 1j * rng.normal(0.0, sd, trials)
        z = alpha * beam.pattern_amplitude(pattern, theta, scale) * np.exp(1j * phase) + w
        dpl = 10.0 * np.log10(np.abs(z) / (alpha * h_pk))
        sq = (estimators.predict_direct(model, dpl) - theta) ** 2
        r = math.sqrt(float(np.mean(sq)))
        out[i] = r
        err[i] = float(np.std(sq, ddof=1)) / math.sqrt(trials) / (2.0 * r) if r > 0 else 0.0
    return out, err


def efficiency_table(pattern: CosineBeamPattern, grid_rad, cfg: CrlbConfig | None = None, trials: int = 10_000,
                     seed: int = 0, scale: float = 1.0, n_sigma: float = 3.0) -> dict:
    """Empirical direct-inversion RMSE against the bound on a shared grid."""
    cfg = cfg or CrlbConfig()
    curve = crlb.crlb_rmse_curve("free_space", pattern, grid_rad, cfg, scale)
    emp, se = direct_inversion_mc_rmse(pattern, curve.grid, cfg, trials, seed, scale)
    ok = emp + n_sigma * se >= curve.bound_rmse
    return {
        "theta_deg": curve.grid_deg.tolist(),
        "crlb_rmse_deg": curve.bound_rmse_deg.tolist(),
        "mc_rmse_deg": np.degrees(emp).tolist(),
        "mc_stderr_deg": np.degrees(se).tolist(),
        "above_bound": ok.tolist(),
        "trials": trials,
        "seed": seed,
    }


def _per_angle(theta_true, theta_hat):
    keys = np.round(np.degrees(theta_true), 9)
    rows = []
    for k in np.unique(keys):
        sel = keys == k
        rows.append((float(k), metrics.rmse(np.degrees(theta_hat[sel]), np.degrees(theta_true[sel])), int(sel.sum())))
    return rows


def benchmark(dataset: SweepDataset, scenario: str | None = None, estimator_set=("sr", "direct", "poly"),
              cfg: sr.SrConfig | None = None, crlb_cfg: CrlbConfig | None = None, per_angle: bool = False,
              characterization=None) -> dict:
    """Fit every requested estimator on ``dataset`` and report its errors.

    Losses are recomputed from each model's serialized form, so the numbers in
    the report always match what a reader would get from the saved text.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    scenario = scenario or dataset.scenario
    rows = estimators.azimuth_rows(dataset)
    theta = datasets.truth_theta_r(rows)
    directivity = None
    if any(m != "sr" for m in estimator_set):
        directivity = estimators.fit_directivity(characterization or [dataset], scenario)
    report = {
        "schema": REPORT_SCHEMA,
        "scenario": scenario,
        "data_hash": dataset.content_hash(),
        "n_rows": len(rows),
        "estimators": {},
    }
    if directivity is not None:
        report["directivity"] = {"n_t": directivity.n_t, "m_t": directivity.m_t,
                                 "n_r": directivity.n_r, "m_r": directivity.m_r}
    per_angle_rows = {}
    for mode in estimator_set:
        model = estimators.saber_fit(mode, dataset, scenario, cfg, directivity=directivity)
        again = AoaModel.from_dict(model.to_dict())
        X = estimators.sweep_features(rows, again.features)
        pred = np.asarray(again.predict(X), dtype=float) * np.ones(len(rows))
        report["estimators"][mode] = {
            "mae_deg": metrics.mae(np.degrees(pred), np.degrees(theta)),
            "rmse_deg": metrics.rmse(np.degrees(pred), np.degrees(theta)),
            "expression": again.expression_text(),
            "complexity": again.complexity,
            "clamp_count": again.clamp_count(X),
            "model": model.to_dict(),
        }
        if per_angle:
            per_angle_rows[mode] = _per_angle(theta, pred)
    if per_angle:
        angles = sorted({a for v in per_angle_rows.values() for a, _, _ in v if 0 < a < 90})
        section = {"theta_deg": angles, "empirical_rmse_deg": {}}
        for mode, vals in per_angle_rows.items():
            lookup = {a: r for a, r, _ in vals}
            section["empirical_rmse_deg"][mode] = [lookup[a] for a in angles]
        if angles:
            curve = crlb.link_crlb_curve(dataset.link(), np.radians(angles), crlb_cfg)
            section["crlb_rmse_deg"] = curve.bound_rmse_deg.tolist()
        report["per_angle"] = section
    return report


def format_table(report: dict) -> str:
    """Human-readable summary of a :func:`benchmark` report."""
    head = f"{'estimator':<10} {'MAE [deg]':>12} {'RMSE [deg]':>12} {'cplx':>5} {'clamps':>6}  expression"
    lines = [f"scenario: {report['scenario']}  rows: {report['n_rows']}", head, "-" * len(head)]
    for mode, r in report["estimators"].items():
        lines.append(f"{mode:<10} {r['mae_deg']:>12.6g} {r['rmse_deg']:>12.6g} {r['complexity']:>5d} "
                     f"{r['clamp_count']:>6d}  {r['expression']}")
    return "\n".join(lines) + "\n"
