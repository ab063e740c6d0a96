import math

import numpy as np
import pytest

from pathloss_aoa import beam, datasets, presets
from pathloss_aoa.datasets import SweepDataset


def test_stage1_defaults():
    ds = datasets.generate_fs_sweep()
    assert len(ds) == 306
    assert sorted(set(ds.freq_hz.tolist())) == [f * 1e9 for f in range(26, 32)]
    assert len(np.unique(ds.angle_deg)) == 51
    assert ds.meta["dropped_null_rows"] == 0


def test_stage1_noiseless_peak_and_values():
    ds = datasets.generate_fs_sweep(noise_sigma_db=0.0)
    for f in np.unique(ds.freq_hz):
        sel = ds.freq_hz == f
        assert ds.angle_deg[sel][np.argmax(ds.s21_db[sel])] == 60.0
    link = presets.stage1_link(28e9)
    row = np.flatnonzero((ds.freq_hz == 28e9) & (ds.angle_deg == 0.0))[0]
    expected = -beam.fs_total_pl_db(link, beam.BORESIGHT, beam.Pointing(math.radians(60), 0))
    assert ds.s21_db[row] == pytest.approx(expected, abs=1e-12)


def test_noise_free_ignores_seed():
    a = datasets.generate_fs_sweep(noise_sigma_db=0.0, seed=1)
    b = datasets.generate_fs_sweep(noise_sigma_db=0.0, seed=2)
    assert a.to_csv_text() == b.to_csv_text()


def test_determinism_per_seed():
    a = datasets.generate_fs_sweep(seed=4)
    b = datasets.generate_fs_sweep(seed=4)
    c = datasets.generate_fs_sweep(seed=5)
    assert a.content_hash() == b.content_hash() != c.content_hash()


def test_null_rows_dropped():
    ds = datasets.generate_fs_sweep(angle_range=(0, 180), step_deg=5, boresight_deg=60, noise_sigma_db=0.0)
    assert ds.meta["dropped_null_rows"] > 0
    assert np.all(np.abs(ds.angle_deg - 60) < 90)


def test_bad_boresight():
    with pytest.raises(ValueError):
        datasets.generate_fs_sweep(boresight_deg=150.0)


def test_ris_samples():
    l2, l3 = presets.stage2_link(2.0), presets.stage2_link(3.0)
    d2 = datasets.generate_ris_samples(l2, noise_sigma_db=0.0)
    d3 = datasets.generate_ris_samples(l3, noise_sigma_db=0.0)
    assert len(d2) == 300
    assert np.allclose(datasets.truth_theta_r(d2), 0.9599, atol=1e-4)
    assert np.ptp(d2.s21_db) == 0.0
    assert d2.s21_db[0] - d3.s21_db[0] == pytest.approx(40 * math.log10(1.5), abs=1e-9)
    noisy = datasets.generate_ris_samples(l2, noise_sigma_db=0.1, seed=3)
    assert np.std(noisy.s21_db) == pytest.approx(0.1, rel=0.2)
    with pytest.raises(ValueError):
        datasets.generate_ris_samples(l2, n_samples=0)


def test_validation():
    with pytest.raises(ValueError):
        SweepDataset([1.0, 1.0], [0.0, 0.0], ["H", "H"], [1.0, 2.0])
    with pytest.raises(ValueError):
        SweepDataset([1.0], [0.0], ["X"], [1.0])
    with pytest.raises(ValueError):
        SweepDataset([1.0], [0.0], ["H"], [math.inf])
    with pytest.raises(ValueError):
        SweepDataset([1.0, 2.0], [0.0], ["H"], [1.0])


def test_save_load_round_trip(tmp_path):
    ds = datasets.generate_fs_sweep(seed=9)
    csv_path, meta_path = ds.save(tmp_path / "s1.csv")
    assert meta_path == tmp_path / "s1.meta.json"
    assert csv_path.read_text().splitlines()[0] == "freq_hz,angle_deg,plane,s21_db"
    back = SweepDataset.load(csv_path)
    assert back.content_hash() == ds.content_hash()
    assert back.meta == ds.meta
    assert np.array_equal(back.s21_db, ds.s21_db)


def test_delta_pl_matches_log_cos():
    ds = datasets.generate_fs_sweep(noise_sigma_db=0.0)
    x = datasets.delta_pl_features(ds)
    theta = datasets.truth_theta_r(ds)
    assert np.allclose(x, 280 * np.log10(np.cos(theta)), atol=1e-9)


def test_characterization_covers_both_ends():
    rx, tx = datasets.characterization_sweeps("free_space")
    assert rx.meta["pointing"]["rotated"] == "rx" and tx.meta["pointing"]["rotated"] == "tx"
    assert set(rx.plane.tolist()) == {"H", "V"}
