"""Acceptance checks, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed as the test runs
and again in the terminal summary (see ``conftest.py``). Run this file
directly for the same report without pytest.
"""

import math
import time

import numpy as np
import pytest

from pathloss_aoa import beam, benchmark as bench, crlb, datasets, estimators as E, metrics, presets, sr
from pathloss_aoa.beam import BORESIGHT, CosineBeamPattern, FreeSpaceLink, Pointing
from pathloss_aoa.crlb import CrlbConfig

DEG = math.pi / 180
RESULTS = {}


def record(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {detail}"
    RESULTS[n] = line
    print(line, flush=True)
    return ok


def test_criterion_01_forward_identity():
    t0 = time.perf_counter()
    theta = np.arange(0, 86) * DEG
    worst = 0.0
    for n_r in (1, 4, 28):
        link = FreeSpaceLink(2.0, 28e9, presets.STAGE1_TX_PATTERN, CosineBeamPattern(n_r, n_r, 23.5))
        rx = Pointing(theta, np.zeros_like(theta))
        a = beam.fs_total_pl_db(link, BORESIGHT, rx)
        b = beam.fs_total_pl_db_from_gains(link, BORESIGHT, rx)
        worst = max(worst, float(np.max(np.abs(a - b))))
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and dt < 1.0
    assert record(1, ok, f"log-expanded vs gain form max |diff| = {worst:.2e} dB ({dt:.2f} s)")


def test_criterion_02_directivity_recovery():
    t0 = time.perf_counter()
    fs = E.fit_directivity(datasets.characterization_sweeps("free_space", presets.stage1_link()))
    ris = E.fit_directivity(datasets.characterization_sweeps("ris", presets.stage2_link(2.0)))
    dt = time.perf_counter() - t0
    ok = fs.as_tuple() == (1, 1, 28, 28) and ris.n_t == 4 and ris.n_r == 1 and dt < 5.0
    assert record(2, ok, f"stage I {fs.as_tuple()}, RIS n_T={ris.n_t} n_R={ris.n_r} ({dt:.2f} s)")


def test_criterion_03_direct_round_trip():
    t0 = time.perf_counter()
    ds = datasets.generate_fs_sweep(noise_sigma_db=0.0)
    model = E.saber_fit("direct", ds)
    rows = E.azimuth_rows(ds)
    theta = datasets.truth_theta_r(rows)
    err = np.degrees(np.abs(model.predict(datasets.delta_pl_features(rows)) - theta))
    off = np.degrees(theta)
    sel = (off > 2.4 - 1e-9) & (off < 57.6 + 1e-9)
    worst = float(err[sel].max())
    offset = abs(model.estimator.offset_rad)
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and offset < 1e-9 and dt < 1.0
    assert record(3, ok, f"max error {worst:.2e} deg on {sel.sum()} rows, |offset| = {offset:.1e} rad ({dt:.2f} s)")


def test_criterion_04_noisy_ordering():
    t0 = time.perf_counter()
    ds = datasets.generate_fs_sweep(noise_sigma_db=0.5, seed=0)
    rows = E.azimuth_rows(ds)
    x, theta = datasets.delta_pl_features(rows), datasets.truth_theta_r(rows)
    mae = {m: metrics.mae(np.degrees(E.saber_fit(m, ds).predict(x)), np.degrees(theta)) for m in ("direct", "poly")}
    dt = time.perf_counter() - t0
    ok = mae["direct"] < 1.0 and mae["direct"] < mae["poly"] <= 10.0 and dt < 10.0
    assert record(4, ok, f"MAE direct {mae['direct']:.4f} deg < poly {mae['poly']:.4f} deg, seed 0 ({dt:.2f} s)")


def test_criterion_05_stage2_constant():
    t0 = time.perf_counter()
    link = presets.stage2_link(2.0)
    ds = datasets.generate_ris_samples(link, noise_sigma_db=0.0)
    char = datasets.characterization_sweeps("ris", link)
    x, theta = datasets.delta_pl_features(ds), datasets.truth_theta_r(ds)
    out = {}
    for mode in ("sr", "direct", "poly"):
        cfg = sr.SrConfig(seed=0, iterations=5000, max_size=10) if mode == "sr" else None
        model = E.saber_fit(mode, ds, cfg=cfg, characterization=char)
        pred = np.asarray(model.predict(x if mode != "sr" else x[:, None]), dtype=float) * np.ones(len(ds))
        out[mode] = (metrics.mae(np.degrees(pred), np.degrees(theta)), float(np.mean(pred)))
    dt = time.perf_counter() - t0
    ok = (
        out["sr"][0] < 1e-3 and out["direct"][0] < 1e-3 and out["poly"][0] < 2.0
        and abs(out["sr"][1] - 0.9599) <= 1e-3 and abs(out["direct"][1] - 0.9599) <= 1e-3 and dt < 60.0
    )
    assert record(5, ok, "MAE sr {:.1e}, direct {:.1e}, poly {:.1e} deg; closed forms {:.5f}/{:.5f} rad ({:.1f} s)".format(
        out["sr"][0], out["direct"][0], out["poly"][0], out["sr"][1], out["direct"][1], dt))


def test_criterion_06_sr_sanity():
    t0 = time.perf_counter()
    x = np.linspace(0, math.pi / 2, 51)
    cfg = sr.SrConfig(seed=0)
    a = sr.fit(x[:, None], np.cos(x), cfg)
    b = sr.fit(x[:, None], np.cos(x), cfg)
    dt = time.perf_counter() - t0
    hit = [s for s in a.entries if s.complexity <= 2 and s.loss < 1e-12]
    try:
        sr.validate_front(a.entries)
        valid = True
    except ValueError:
        valid = False
    same = a.to_csv() == b.to_csv()
    ok = bool(hit) and valid and same and dt < 60.0
    found = hit[0].text if hit else "none"
    assert record(6, ok, f"entry {found} (loss {hit[0].loss if hit else math.nan:.1e}), "
                         f"front valid={valid}, identical reruns={same} ({dt:.1f} s)")


def test_criterion_07_crlb():
    t0 = time.perf_counter()
    fd = max(crlb.derivative_check(CosineBeamPattern(n, n)) for n in (1, 4, 28))
    grid = crlb.default_grid()
    p = CosineBeamPattern(1, 1)
    base = crlb.crlb_rmse_curve("free_space", p, grid, CrlbConfig(1e-3, 1000, 1.0))
    half = crlb.crlb_rmse_curve("free_space", p, grid, CrlbConfig(5e-4, 1000, 1.0))
    tenx = crlb.crlb_rmse_curve("free_space", p, grid, CrlbConfig(1e-3, 10_000, 1.0))
    scale_err = max(float(np.max(np.abs(half.bound_rmse * math.sqrt(2) / base.bound_rmse - 1))),
                    float(np.max(np.abs(tenx.bound_rmse * math.sqrt(10) / base.bound_rmse - 1))))
    v60 = crlb.crlb_rmse_curve("free_space", p, [60 * DEG], CrlbConfig(1e-3, 1000, 1.0)).bound_rmse[0]
    oracle = math.sqrt(1e-3 / (2 * 1000 * 0.75))
    rel = abs(v60 / oracle - 1)
    dt = time.perf_counter() - t0
    ok = fd < 1e-6 and scale_err < 1e-12 and rel < 1e-9 and abs(v60 - 8.165e-4) < 5e-8 and dt < 1.0
    assert record(7, ok, f"FD rel gap {fd:.1e}, scaling err {scale_err:.1e}, sqrt(CRLB(60)) = {v60:.6e} rad ({dt:.2f} s)")


def _criterion_08():
    t0 = time.perf_counter()
    cfg = CrlbConfig(1e-3, 1000, 1.0)
    tab = bench.efficiency_table(CosineBeamPattern(1, 1), crlb.default_grid(), cfg, trials=10_000, seed=0)
    below = [t for t, ok in zip(tab["theta_deg"], tab["above_bound"]) if not ok]
    lattice = bench.efficiency_table(CosineBeamPattern(1, 1), np.radians(np.arange(1, 38) * 2.4), cfg, 10_000, 0)
    near90 = crlb.crlb_rmse_curve("free_space", presets.STAGE1_RX_PATTERN, np.radians(np.arange(75, 89.5, 0.5)))
    rising = bool(np.all(np.diff(near90.bound_rmse) > 0))
    dt = time.perf_counter() - t0
    ok = not below and rising and dt < 120.0
    detail = (f"MC RMSE >= bound at {len(tab['theta_deg']) - len(below)}/{len(tab['theta_deg'])} grid angles"
              f"{'; below at ' + ', '.join(f'{t:g}' for t in below) + ' deg' if below else ''}"
              f" (2.4 deg lattice: {'all' if all(lattice['above_bound']) else 'not all'} above);"
              f" bound rising on [75, 89] deg for n=28: {rising} ({dt:.1f} s)")
    return ok, detail


@pytest.mark.xfail(strict=True, reason="clamped inversion is biased at 1.0 and 1.5 deg, where its RMSE "
                   "falls below the unbiased-estimator bound; analysis in the decisions ledger")
def test_criterion_08_efficiency():
    ok, detail = _criterion_08()
    assert record(8, ok, detail)


def test_criterion_09_mc_cdf():
    t0 = time.perf_counter()
    link = presets.stage2_link(2.0)
    cdf = metrics.monte_carlo_pl_cdf(link, 3.0, 3000, seed=0)
    ref = metrics.pointing_pl_samples(link, 3.0, 100_000, seed=12345)
    ks = metrics.ks_distance(cdf.values, ref)
    inv = (np.all(np.diff(cdf.values) >= 0) and np.all(np.diff(cdf.probs) >= 0)
           and cdf.probs[0] == pytest.approx(1 / 3000) and cdf.probs[-1] == 1.0)
    dt = time.perf_counter() - t0
    ok = ks < 0.05 and bool(inv) and len(cdf) == 3000 and dt < 5.0
    assert record(9, ok, f"KS distance {ks:.4f} vs 1e5-draw reference, invariants {bool(inv)} ({dt:.2f} s)")


def test_criterion_10_metrics():
    t0 = time.perf_counter()
    checks = [
        metrics.mae([1, 2, 3], [1, 1, 3]) == pytest.approx(1 / 3),
        metrics.rmse([1, 2, 3], [1, 1, 3]) == pytest.approx(math.sqrt(1 / 3)),
        metrics.mae([2, 5], [2, 5]) == 0 and metrics.rmse([2, 5], [2, 5]) == 0,
        metrics.mae(np.arange(5) + 0.7, np.arange(5)) == pytest.approx(0.7),
        metrics.rmse(np.arange(5) + 0.7, np.arange(5)) == pytest.approx(0.7),
    ]
    rng = np.random.default_rng(0)
    jensen = all(
        metrics.mae(a, b) <= metrics.rmse(a, b) + 1e-12
        for a, b in ((rng.normal(size=k), rng.normal(size=k)) for k in rng.integers(1, 100, 1000))
    )
    for bad in (([1, 2], [1]), ([], [])):
        try:
            metrics.mae(*bad)
            checks.append(False)
        except ValueError:
            checks.append(True)
    dt = time.perf_counter() - t0
    ok = all(checks) and jensen and dt < 1.0
    assert record(10, ok, f"{sum(checks)}/{len(checks)} unit checks, MAE <= RMSE on 1000 random pairs: {jensen} ({dt:.2f} s)")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    print()
    for n in sorted(RESULTS):
        print(RESULTS[n])
