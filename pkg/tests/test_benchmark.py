import json
import math

import numpy as np
import pytest

from pathloss_aoa import benchmark as bench, beam, crlb, datasets, presets, sr
from pathloss_aoa.estimators import AoaModel


@pytest.fixture(scope="module")
def stage2_report():
    link = presets.stage2_link(2.0)
    ds = datasets.generate_ris_samples(link, noise_sigma_db=0.0)
    return bench.benchmark(ds, "ris", ("sr", "direct"), sr.SrConfig(seed=0, iterations=500),
                           characterization=datasets.characterization_sweeps("ris", link))


def test_stage2_constant_models(stage2_report):
    for mode in ("sr", "direct"):
        r = stage2_report["estimators"][mode]
        assert r["mae_deg"] < 1e-3
    sr_text = stage2_report["estimators"]["sr"]["expression"]
    assert float(sr_text) == pytest.approx(0.9599, abs=1e-3)


def test_report_losses_regenerate(stage2_report):
    ds = datasets.generate_ris_samples(presets.stage2_link(2.0), noise_sigma_db=0.0)
    theta = datasets.truth_theta_r(ds)
    for mode, r in stage2_report["estimators"].items():
        model = AoaModel.from_dict(json.loads(json.dumps(r["model"])))
        pred = model.predict(datasets.delta_pl_features(ds)) * np.ones(len(ds))
        assert np.mean(np.abs(np.degrees(pred) - np.degrees(theta))) == pytest.approx(r["mae_deg"], abs=1e-12)


def test_stage1_noiseless_direct():
    ds = datasets.generate_fs_sweep(noise_sigma_db=0.0)
    rep = bench.benchmark(ds, estimator_set=("direct",), per_angle=True)
    assert rep["estimators"]["direct"]["mae_deg"] < 1e-6
    pa = rep["per_angle"]
    assert len(pa["theta_deg"]) == len(pa["crlb_rmse_deg"]) == len(pa["empirical_rmse_deg"]["direct"])


def test_stage1_noisy_ordering():
    ds = datasets.generate_fs_sweep(noise_sigma_db=0.5, seed=0)
    rep = bench.benchmark(ds, estimator_set=("direct", "poly"))
    assert rep["estimators"]["direct"]["mae_deg"] < rep["estimators"]["poly"]["mae_deg"]
    assert "direct" in bench.format_table(rep)


def test_mc_rmse_high_snr_matches_bound():
    # at high SNR the estimator is efficient, so its RMSE sits on the bound
    p = beam.CosineBeamPattern(1, 1)
    grid = np.radians([30.0, 60.0])
    emp, se = bench.direct_inversion_mc_rmse(p, grid, crlb.CrlbConfig(1e-3, 1000, 1.0), 20_000, seed=3)
    bound = crlb.crlb_rmse_curve("free_space", p, grid, crlb.CrlbConfig(1e-3, 1000, 1.0)).bound_rmse
    assert np.all(np.abs(emp - bound) < 4 * se + 0.02 * bound)


def test_mc_deterministic():
    p = beam.CosineBeamPattern(2, 2)
    a = bench.direct_inversion_mc_rmse(p, [0.5], trials=500, seed=1)
    b = bench.direct_inversion_mc_rmse(p, [0.5], trials=500, seed=1)
    assert np.array_equal(a[0], b[0])


def test_efficiency_table_lattice():
    grid = np.radians(np.arange(1, 38) * 2.4)
    tab = bench.efficiency_table(beam.CosineBeamPattern(1, 1), grid, trials=10_000)
    assert all(tab["above_bound"])
    assert math.isclose(tab["theta_deg"][0], 2.4)
