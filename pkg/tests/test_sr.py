import math

import numpy as np
import pytest

from pathloss_aoa import expr as ex, sr
from pathloss_aoa.expr import Const
from pathloss_aoa.sr import ParetoFront, ScoredExpr, SrConfig


@pytest.fixture(scope="module")
def cos_front():
    x = np.linspace(0, math.pi / 2, 51)
    return x, np.cos(x), sr.fit(x[:, None], np.cos(x), SrConfig(seed=0))


def _split(x, y, cfg):
    s = sr._Search(ex.as_features(x), np.asarray(y, dtype=float), cfg)
    return s.Xva, s.yva, s.Xtr, s.ytr


def test_cos_target_recovered(cos_front):
    x, y, front = cos_front
    hits = [s for s in front.entries if s.complexity <= 2 and s.loss < 1e-12]
    assert hits
    sr.validate_front(front.entries)


def test_constant_target():
    x = np.linspace(0, 1, 40)
    y = np.full(40, 0.9599)
    front = sr.fit(x[:, None], y, SrConfig(seed=0, iterations=500))
    first = front.entries[0]
    assert first.complexity == 1
    assert isinstance(first.expr, Const)
    assert first.expr.value == pytest.approx(0.9599, abs=1e-12)
    assert first.loss < 1e-18


def test_linear_target():
    x = np.linspace(-1, 1, 20)
    front = sr.fit(x[:, None], 2 * x + 1, SrConfig(seed=0, iterations=2000))
    assert any(s.loss < 1e-10 and s.complexity <= 5 for s in front.entries)


def test_losses_reproducible_from_text(cos_front):
    x, y, front = cos_front
    Xva, yva, _, _ = _split(x[:, None], y, SrConfig(seed=0))
    for s in front.entries:
        e = ex.parse_text(s.text)
        pred = ex.evaluate(e, Xva) * np.ones(len(yva))
        assert np.mean((pred - yva) ** 2) == pytest.approx(s.loss, rel=1e-9, abs=1e-300)


def test_front_beats_mean_model(cos_front):
    x, y, front = cos_front
    Xva, yva, _, ytr = _split(x[:, None], y, SrConfig(seed=0))
    assert front.best().loss <= np.mean((np.mean(ytr) - yva) ** 2)


def test_determinism_and_worker_independence():
    x = np.linspace(-2, 2, 30)
    y = np.sin(x) + 0.3 * x
    cfg = dict(seed=5, iterations=300, batch_size=4)
    a = sr.fit(x[:, None], y, SrConfig(**cfg)).to_csv()
    b = sr.fit(x[:, None], y, SrConfig(**cfg)).to_csv()
    c = sr.fit(x[:, None], y, SrConfig(workers=4, **cfg)).to_csv()
    assert a == b == c
    d = sr.fit(x[:, None], y, SrConfig(**{**cfg, "seed": 6})).to_csv()
    assert d != a


def test_best_loss_non_increasing():
    x = np.linspace(-2, 2, 30)
    front = sr.fit(x[:, None], np.exp(-x**2), SrConfig(seed=1, iterations=1000))
    h = front.history
    assert np.all(np.diff(h) <= 0)
    checkpoints = [h[99], h[499], h[999]]
    assert checkpoints[0] >= checkpoints[1] >= checkpoints[2]


def test_front_csv_round_trip(tmp_path, cos_front):
    _, _, front = cos_front
    path = tmp_path / "front.csv"
    front.to_csv(path)
    rows = sr.read_front_csv(path)
    assert path.read_text().splitlines()[0] == "complexity,loss,expression_text"
    assert [(c, l, e) for c, l, e in rows] == [(s.complexity, s.loss, s.expr) for s in front.entries]


def _entry(c, loss):
    return ScoredExpr(Const(float(c)), loss, c)


def test_select_model():
    single = [_entry(1, 0.3)]
    assert sr.select_model(single, "best_loss") is single[0]
    assert sr.select_model(single, "score") is single[0]
    two = [_entry(1, 1.0), _entry(3, 1e-6)]
    assert sr.select_model(two, "best_loss").complexity == 3
    three = [_entry(1, 1.0), _entry(3, 0.5), _entry(9, 0.49)]
    assert sr.select_model(three, "score").complexity == 3
    with pytest.raises(ValueError):
        sr.select_model([], "score")
    with pytest.raises(ValueError):
        sr.select_model(three, "median")


def test_front_validation_rejects_dominated():
    with pytest.raises(ValueError):
        ParetoFront([_entry(1, 0.1), _entry(2, 0.2)])
    with pytest.raises(ValueError):
        ParetoFront([_entry(2, 0.3), _entry(2, 0.1)])


def test_config_validation():
    with pytest.raises(ValueError):
        SrConfig(population_size=1)
    with pytest.raises(ValueError):
        SrConfig(mutation_prob=1.5)
    with pytest.raises(ValueError):
        SrConfig(iterations=0)
    with pytest.raises(ValueError):
        SrConfig(operators=("cos", "tanh"))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        sr.fit([[1.0]], [1.0], SrConfig(iterations=10))
    with pytest.raises(ValueError):
        sr.fit([[1.0], [2.0]], [1.0, math.nan], SrConfig(iterations=10))


def test_refine_constants_fits_scale():
    x = np.linspace(0, 1, 20)[:, None]
    e = ex.parse_text("(1.0 * cos(x0))")
    out = sr.refine_constants(e, x, 3.25 * np.cos(x[:, 0]), 8)
    assert ex.constants(out)[0] == pytest.approx(3.25, rel=1e-10)


def test_prose_operators_never_use_exp():
    x = np.linspace(0, 1, 20)
    front = sr.fit(x[:, None], np.exp(x), SrConfig(seed=0, iterations=300, operators=ex.PROSE_OPERATORS))
    for s in front.entries:
        assert "exp(" not in s.text
