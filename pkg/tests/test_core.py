import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lorawan_adr import core
from lorawan_adr.core import (
    ChannelModel,
    RadioLimits,
    TrafficProfile,
    db_to_linear,
    dbm_to_watt,
    duty_cycle,
    linear_to_db,
    noise_power,
    path_loss_gain,
    watt_to_dbm,
)


@pytest.mark.parametrize("dbm, watts", [(0, 1e-3), (14, 0.0251188643), (30, 1.0)])
def test_dbm_to_watt(dbm, watts):
    assert dbm_to_watt(dbm) == pytest.approx(watts, rel=1e-8)


@pytest.mark.parametrize("db, lin", [(0, 1.0), (6, 3.98107171), (-20, 0.01)])
def test_db_to_linear(db, lin):
    assert db_to_linear(db) == pytest.approx(lin, rel=1e-8)


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
def test_conversions_reject_non_finite(bad):
    with pytest.raises(ValueError):
        dbm_to_watt(bad)
    with pytest.raises(ValueError):
        db_to_linear(bad)


def test_dbm_monotone():
    x = np.linspace(-50, 50, 1001)
    assert np.all(np.diff(dbm_to_watt(x)) > 0)


@given(st.floats(min_value=-200, max_value=30))
def test_db_round_trip(log10x):
    x = 10.0**log10x
    if not 1e-20 <= x <= 1e3:
        return
    assert db_to_linear(linear_to_db(x)) == pytest.approx(x, rel=1e-12)


@given(st.floats(min_value=-60, max_value=60))
def test_dbm_round_trip(p):
    assert watt_to_dbm(dbm_to_watt(p)) == pytest.approx(p, abs=1e-11)


def test_noise_power():
    assert noise_power(6, 125e3) == pytest.approx(-117.0309, abs=1e-4)
    assert round(noise_power(6, 125e3)) == -117
    assert noise_power(0, 1) == -174
    # 10*log10(250e3) + 6 - 174
    assert noise_power(6, 250e3) == pytest.approx(-114.0206, abs=1e-4)
    with pytest.raises(ValueError):
        noise_power(6, 0)


def test_duty_cycle():
    assert duty_cycle(0.05146, 900) == pytest.approx(57.18e-6, rel=1e-3)
    assert duty_cycle(1.31891, 900) == pytest.approx(1465.5e-6, rel=1e-4)
    assert duty_cycle(1, 1) == 1
    with pytest.raises(ValueError):
        duty_cycle(2, 1)
    with pytest.raises(ValueError):
        duty_cycle(0, 1)


def test_path_loss_gain_examples():
    ch = ChannelModel(carrier_frequency=core.SPEED_OF_LIGHT / 0.345383)
    assert ch.wavelength == pytest.approx(0.345383, rel=1e-12)
    assert path_loss_gain(ch.wavelength / (4 * math.pi), ch) == pytest.approx(1.0, rel=1e-12)
    # mpmath, 40 digits
    assert path_loss_gain(1200.0, ch) == pytest.approx(1.7368090776696574e-13, rel=1e-10)
    for d in (1.0, 37.0, 1200.0):
        assert path_loss_gain(2 * d, ch) / path_loss_gain(d, ch) == pytest.approx(2**-2.75, rel=1e-12)
    with pytest.raises(ValueError):
        path_loss_gain(0.0, ch)


def test_path_loss_log_log_slope(channel):
    d = np.array([10.0, 300.0, 5000.0])
    slopes = np.diff(np.log(path_loss_gain(d, channel))) / np.diff(np.log(d))
    np.testing.assert_allclose(slopes, -channel.path_loss_exponent, rtol=1e-12)
    grid = np.linspace(1, 2000, 1000)
    assert np.all(np.diff(path_loss_gain(grid, channel)) < 0)


def test_channel_model_invariants():
    ch = ChannelModel(noise_power_dbm=None)
    assert ch.noise_power_dbm == pytest.approx(noise_power(6, 125e3))
    assert ch.wavelength == pytest.approx(299792458 / 868e6)
    with pytest.raises(ValueError):
        ChannelModel(path_loss_exponent=2.0)


def test_table_consistency(profiles):
    assert [sp.sf for sp in profiles] == list(range(7, 13))
    for sp in profiles:
        assert sp.sensitivity == -117 + sp.snr_threshold
    toa = [sp.time_on_air for sp in profiles]
    snr = [sp.snr_threshold for sp in profiles]
    assert toa == sorted(toa) and snr == sorted(snr, reverse=True)


def test_duty_cycles_match_table(inputs):
    listed = np.array([57.1, 114.3, 205.9, 366.3, 823.7, 1465.4]) * 1e-6
    np.testing.assert_allclose(inputs.duty_cycles, listed, rtol=5e-3)


def test_traffic_profile_validation():
    with pytest.raises(ValueError):
        TrafficProfile(900, (0.1,) * 6)
    with pytest.raises(ValueError):
        TrafficProfile(900, (0.1, 0.2))
    with pytest.raises(ValueError):
        TrafficProfile(900, (0.0, 0.1, 0.2, 0.3, 0.4, 0.5))


def test_radio_limits():
    lim = RadioLimits()
    assert lim.levels.tolist() == list(range(-1, 15))
    assert len(lim.levels) == 16
    with pytest.raises(ValueError):
        RadioLimits(-1, 14, 2)
    with pytest.raises(ValueError):
        RadioLimits(15, 14, 1)


def test_preset_overrides():
    inp = core.eu868_suburban(path_loss_exponent=3.0)
    assert inp.channel.path_loss_exponent == 3.0
    with pytest.raises(KeyError):
        core.eu868_suburban(bogus=1)
