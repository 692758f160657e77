import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hompeak.coincidence import (
    Interferogram,
    Kind,
    integrated_coincidence,
    joint_prob_dip,
    joint_prob_peak,
    scan,
    total_coincidence,
)
from hompeak.wavepacket import WavePacket, evaluate, overlap

DELTA = 2e7


def test_dip_zero_for_identical_packets():
    w = WavePacket(0.0, 1.0, 0.5)
    t = np.linspace(-4, 4, 9)
    np.testing.assert_array_equal(joint_prob_dip(w, w, t, 0.0), 0.0)
    assert integrated_coincidence(w, w, 0.0, Kind.DIP) < 1e-10


def test_peak_constructive_doubling():
    w = WavePacket(0.2, 1.3, 0.7, 0.1)
    t = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(joint_prob_peak(w, w, t, 0.0), 0.25 * np.abs(evaluate(w, t)) ** 4, rtol=1e-13)


def test_dip_plug_in_offset_centers():
    # packets a at 0 and b at 1.5 sigma, sigma=1, tau=4 sigma, t=-tau/2
    a, b = WavePacket(0.0, 1.0), WavePacket(1.5, 1.0)
    tau, t = 4.0, -2.0
    g = lambda t0, x: (2 * math.pi) ** -0.25 * math.exp(-((x - t0) ** 2) / 4)
    expected = 0.25 * (g(0, t + tau) * g(1.5, t) - g(1.5, t + tau) * g(0, t)) ** 2
    assert joint_prob_dip(a, b, t, tau) == pytest.approx(expected, rel=1e-13)


def test_beat_geometry():
    sigma = 1e-6
    ea, eb = WavePacket(0.0, sigma), WavePacket(0.0, sigma, DELTA)
    tz = math.pi / DELTA
    assert tz == pytest.approx(0.157e-6, abs=1e-9)
    assert integrated_coincidence(ea, eb, tz, Kind.PEAK) < 1e-10 * integrated_coincidence(ea, eb, 0.0, Kind.PEAK)
    taus = np.linspace(0.12e-6, 0.2e-6, 161)
    dip = scan(ea, eb, taus, Kind.DIP)
    # the exp(-tau^2/4 sigma^2) envelope pulls the maximum in by pi/(delta^3 sigma^2)
    shift = math.pi / (DELTA**3 * sigma**2)
    assert taus[np.argmax(dip.values)] == pytest.approx(tz - shift, abs=taus[1] - taus[0])


def test_dip_period():
    sigma = 1e-6
    ea, eb = WavePacket(0.0, sigma), WavePacket(0.0, sigma, DELTA)
    taus = np.linspace(-1e-6, 1e-6, 801)
    v = scan(ea, eb, taus, Kind.DIP).values
    minima = taus[1:-1][(v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:])]
    np.testing.assert_allclose(np.diff(minima), 2 * math.pi / DELTA, atol=2 * (taus[1] - taus[0]))
    assert 2 * math.pi / DELTA == pytest.approx(0.314e-6, abs=1e-9)


def test_peak_scan_even():
    ea, eb = WavePacket(0.0, 1.0), WavePacket(0.0, 1.0, 1.7)
    taus = np.linspace(-3, 3, 25)
    v = scan(ea, eb, taus, Kind.PEAK).values
    np.testing.assert_allclose(v, v[::-1], atol=1e-9)


def test_peak_max_at_zero_without_displacement():
    w = WavePacket(0.0, 1.0)
    taus = np.linspace(-2, 2, 81)
    v = scan(w, w, taus, Kind.PEAK).values
    assert taus[np.argmax(v)] == 0.0


def test_scan_sum_rule():
    ea, eb = WavePacket(0.0, 1.0), WavePacket(0.5, 1.2, 2.0)
    taus = np.linspace(-3, 3, 13)
    dip, peak = scan(ea, eb, taus, Kind.DIP).values, scan(ea, eb, taus, Kind.PEAK).values
    for tau, d, p in zip(taus, dip, peak):
        # integrated over t, the right-hand side of the parallelogram identity
        t = np.linspace(-12, 12, 20001)
        direct = 2 * (np.abs(evaluate(ea, t + tau) * evaluate(eb, t)) ** 2
                      + np.abs(evaluate(eb, t + tau) * evaluate(ea, t)) ** 2)
        rhs = np.trapezoid(direct, t)
        assert 4 * d + 16 * p == pytest.approx(rhs, rel=1e-8)


@pytest.mark.parametrize("delay", [0.0, 0.5, 1.0, 2.0, 3.5])
def test_total_dip_closed_form(delay):
    w = WavePacket(0.0, 1.0)
    expected = 0.5 * (1 - math.exp(-(delay**2) / 4))
    assert total_coincidence(w, w, delay, Kind.DIP) == pytest.approx(expected, abs=1e-8)


def test_total_matches_overlap_oracle():
    ea, eb = WavePacket(0.0, 1.0), WavePacket(0.3, 1.4, 0.8)
    kappa = overlap(ea, eb.delayed(0.9))
    assert total_coincidence(ea, eb, 0.9, Kind.DIP) == pytest.approx(0.5 * (1 - abs(kappa) ** 2), abs=1e-8)
    assert total_coincidence(ea, eb, 0.9, Kind.PEAK) == pytest.approx((1 + abs(kappa) ** 2) / 8, abs=1e-8)


def test_total_far_ratio_quarter():
    w = WavePacket(0.0, 1.0)
    peak = total_coincidence(w, w, 20.0, Kind.PEAK)
    dip = total_coincidence(w, w, 20.0, Kind.DIP)
    assert peak / dip == pytest.approx(0.25, abs=1e-8)


def test_scan_errors_and_normalisation():
    w = WavePacket(0.0, 1.0)
    with pytest.raises(ValueError):
        scan(w, w, [], Kind.PEAK)
    ifg = scan(w, w, np.linspace(-2, 2, 9), "peak", normalize=True)
    assert ifg.values.max() == 1.0
    assert np.all(ifg.stderr == 0)
    assert ifg.config["normalized"] is True


def test_interferogram_invariants():
    with pytest.raises(ValueError):
        Interferogram([0, 0], [1, 1], [0, 0], "dip")
    with pytest.raises(ValueError):
        Interferogram([0, 1], [-1, 1], [0, 0], "dip")
    with pytest.raises(ValueError):
        Interferogram([0, 1], [1, 1], [0, 0], "bump")


def test_interferogram_roundtrip():
    ifg = Interferogram([-1e-9, 0.0, 2.5e-9], [0.1, 0.05, 0.1 + 1e-17], [1e-3, 2e-3, 0.0], "dip", {"seed": 3})
    csv = ifg.to_csv()
    assert csv.splitlines()[1] == "tau_s,value,stderr"
    for back in (Interferogram.from_csv(csv), Interferogram.from_json(ifg.to_json())):
        np.testing.assert_array_equal(back.taus, ifg.taus)
        np.testing.assert_array_equal(back.values, ifg.values)
        np.testing.assert_array_equal(back.stderr, ifg.stderr)
        assert back.kind is Kind.DIP and back.config == {"seed": 3}


packets = st.builds(WavePacket, center=st.floats(-2, 2), sigma=st.floats(0.5, 2),
                    freq_displacement=st.floats(-3, 3), phase=st.floats(-3, 3))


@given(packets, packets, st.floats(-4, 4), st.floats(-4, 4))
def test_parallelogram_pointwise(ea, eb, t, tau):
    d, p = joint_prob_dip(ea, eb, t, tau), joint_prob_peak(ea, eb, t, tau)
    rhs = 2 * (abs(evaluate(ea, t + tau) * evaluate(eb, t)) ** 2 + abs(evaluate(eb, t + tau) * evaluate(ea, t)) ** 2)
    assert d >= 0 and p >= 0
    assert abs(4 * d + 16 * p - rhs) <= 1e-12 * max(1.0, rhs)
