import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pathloss_aoa import beam, presets
from pathloss_aoa.beam import (
    BORESIGHT,
    CosineBeamPattern,
    FreeSpaceLink,
    PatternNullError,
    Pointing,
    RisLink,
)

DEG = math.pi / 180


def test_normalized_pattern_values():
    assert beam.normalized_pattern(CosineBeamPattern(1, 1), BORESIGHT) == 1.0
    assert beam.normalized_pattern(CosineBeamPattern(1, 1), Pointing(60 * DEG, 0)) == pytest.approx(0.5, rel=1e-15)
    # 0.5 multiplied 28 times
    expected = 1.0
    for _ in range(28):
        expected *= 0.5
    got = beam.normalized_pattern(CosineBeamPattern(28, 28), Pointing(60 * DEG, 0))
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(3.7253e-9, rel=1e-4)


def test_normalized_pattern_null_and_domain():
    p = CosineBeamPattern(2, 3)
    assert beam.normalized_pattern(p, Pointing(math.pi / 2, 0)) == 0.0
    assert beam.normalized_pattern(p, Pointing(0, 2.0)) == 0.0
    with pytest.raises(ValueError):
        beam.normalized_pattern(p, Pointing(-0.1, 0))
    with pytest.raises(ValueError):
        beam.normalized_pattern(p, Pointing(1.6, 0))


def test_gain_dbi():
    assert beam.gain_dbi(CosineBeamPattern(28, 28, 23.5), BORESIGHT) == 23.5
    assert beam.gain_dbi(CosineBeamPattern(1, 1, 0), Pointing(60 * DEG)) == pytest.approx(-3.0103, abs=1e-4)
    with pytest.raises(PatternNullError):
        beam.gain_dbi(CosineBeamPattern(1, 1, 0), Pointing(math.pi / 2))


def test_fspl():
    assert beam.fspl_db(2.0, 28e9) == pytest.approx(67.4115437620074, abs=1e-9)
    assert beam.fspl_db(2.0, 28e9) == pytest.approx(67.41, abs=0.005)
    for r, f in [(0.3, 1e9), (2.0, 28e9), (150.0, 6e10)]:
        assert beam.fspl_db(2 * r, f) - beam.fspl_db(r, f) == pytest.approx(20 * math.log10(2), abs=1e-9)
        assert beam.fspl_db(r, 2 * f) - beam.fspl_db(r, f) == pytest.approx(6.0206, abs=1e-4)
    with pytest.raises(ValueError):
        beam.fspl_db(0.0, 28e9)
    with pytest.raises(ValueError):
        beam.fspl_db(1.0, -1.0)


def test_fs_total_boresight_and_offset():
    link = presets.stage1_link(28e9)
    base = beam.fs_total_pl_db(link)
    assert base == pytest.approx(beam.fspl_db(2.0, 28e9) + 2 - 4.5 - 23.5, abs=1e-12)
    off = beam.fs_total_pl_db(link, BORESIGHT, Pointing(60 * DEG, 0))
    assert off - base == pytest.approx(84.28839878591474, abs=1e-9)


def test_fs_total_isotropic():
    iso = CosineBeamPattern(0, 0, 0)
    link = FreeSpaceLink(3.0, 10e9, iso, iso, 0.5, 0.25)
    at = Pointing(1.2, 0.4)
    assert beam.fs_total_pl_db(link, at, at) == pytest.approx(beam.fspl_db(3.0, 10e9) + 0.75, abs=1e-12)


@pytest.mark.parametrize("n_r", [1, 4, 28])
def test_log_expanded_matches_gain_form(n_r):
    link = FreeSpaceLink(2.0, 28e9, CosineBeamPattern(1, 1, 4.5), CosineBeamPattern(n_r, n_r, 23.5))
    theta = np.arange(0, 86) * DEG
    a = beam.fs_total_pl_db(link, BORESIGHT, Pointing(theta, np.zeros_like(theta)))
    b = beam.fs_total_pl_db_from_gains(link, BORESIGHT, Pointing(theta, np.zeros_like(theta)))
    assert np.max(np.abs(a - b)) < 1e-9


def test_ris_linear():
    link = RisLink(0.20576, 0.20576, 2.0, 2.0, CosineBeamPattern(0, 0), CosineBeamPattern(0, 0))
    assert beam.ris_pl_linear(link, 1.0, 1.0) == pytest.approx(7.094210884322928e-07, rel=1e-12)
    assert beam.ris_pl_linear(link, 1.0, 1.0) == pytest.approx(7.09e-7, rel=1e-3)
    far = RisLink(0.20576, 0.20576, 4.0, 4.0, CosineBeamPattern(0, 0), CosineBeamPattern(0, 0))
    assert beam.ris_pl_linear(far, 1.0, 1.0) == pytest.approx(beam.ris_pl_linear(link, 1, 1) / 16, rel=1e-12)
    null = RisLink(0.2, 0.2, 2.0, 2.0, CosineBeamPattern(0, 0), CosineBeamPattern(0, 0), theta_axis_rad=math.pi / 2)
    assert beam.ris_pl_linear(null, 1.0, 1.0) == pytest.approx(0.0, abs=1e-40)


def test_ris_total_terms():
    l2 = presets.stage2_link(2.0)
    l3 = presets.stage2_link(3.0)
    assert beam.power_divider_loss_db(4, 7.5) == 30.0
    assert beam.ris_total_pl_db(l3) - beam.ris_total_pl_db(l2) == pytest.approx(7.0436503622272495, abs=1e-9)
    flat = RisLink(0.20576, 0.20576, 2.0, 2.0, l2.tx_pattern, l2.rx_pattern, theta_axis_rad=0.0)
    tilted = RisLink(0.20576, 0.20576, 2.0, 2.0, l2.tx_pattern, l2.rx_pattern, theta_axis_rad=35 * DEG)
    # the axis term is -1.73 dB of gain, i.e. +1.73 dB of loss in the normalized sign convention
    shift = beam.ris_total_pl_db(tilted) - beam.ris_total_pl_db(flat)
    assert shift == pytest.approx(1.732709611502841, abs=1e-9)
    shift_lit = beam.ris_total_pl_db(tilted, paper_exact_eq8=True) - beam.ris_total_pl_db(flat, paper_exact_eq8=True)
    assert shift_lit == pytest.approx(-1.732709611502841, abs=1e-9)


def test_ris_total_matches_linear_form():
    link = presets.stage2_link(2.0)
    tx, rx = Pointing(10 * DEG, 5 * DEG), Pointing(40 * DEG, 0)
    g_t = 10 ** (beam.gain_dbi(link.tx_pattern, tx) / 10)
    g_r = 10 ** (beam.gain_dbi(link.rx_pattern, rx) / 10)
    lin_db = -10 * math.log10(beam.ris_pl_linear(link, g_t, g_r))
    extra = link.l_pd_db + link.l_connector_db + link.l_cable_db - link.g_bf_db
    assert beam.ris_total_pl_db(link, tx, rx) == pytest.approx(lin_db + extra, abs=1e-9)


def test_steering_angle():
    assert beam.steering_angle_rad(2.0, 1.0) == pytest.approx(math.pi / 2)
    assert beam.steering_angle_rad(1.0, 1.0) == pytest.approx(math.pi / 6)
    with pytest.raises(ValueError):
        beam.steering_angle_rad(4.0, 1.0)


def test_delta_pl():
    assert beam.delta_pl(70.0, 70.0) == 0.0
    assert beam.delta_pl(154.3, 70.0) == pytest.approx(84.3)
    assert beam.delta_pl(1.5, 4.0) == -beam.delta_pl(4.0, 1.5)


def test_amplitude_derivative_matches_fd():
    p = CosineBeamPattern(28, 28)
    t = np.linspace(0.05, 1.5, 50)
    step = 1e-6
    fd = (beam.pattern_amplitude(p, t + step) - beam.pattern_amplitude(p, t - step)) / (2 * step)
    assert np.allclose(beam.pattern_amplitude_derivative(p, t), fd, rtol=1e-6, atol=0)


@settings(max_examples=200, deadline=None)
@given(
    n=st.floats(0.1, 40), m=st.floats(0, 40),
    theta=st.floats(0, math.pi / 2), phi=st.floats(-math.pi, math.pi),
)
def test_pattern_bounds(n, m, theta, phi):
    u = beam.normalized_pattern(CosineBeamPattern(n, m), Pointing(theta, phi))
    assert 0.0 <= u <= 1.0


@settings(max_examples=100, deadline=None)
@given(n=st.floats(0.1, 40), a=st.floats(1e-3, 1.5), b=st.floats(1e-3, 1.5))
def test_pattern_strictly_decreasing(n, a, b):
    lo, hi = sorted((a, b))
    if hi - lo < 1e-6:
        return
    p = CosineBeamPattern(n, 1)
    u_lo = beam.normalized_pattern(p, Pointing(lo, 0))
    u_hi = beam.normalized_pattern(p, Pointing(hi, 0))
    assert u_hi <= u_lo
    if u_lo > 1e-300:
        assert u_hi < u_lo
