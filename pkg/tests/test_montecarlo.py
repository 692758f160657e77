import math
import warnings

import numpy as np
import pytest

from hompeak.montecarlo import (
    DetectorModel,
    G2Error,
    HeraldedCounts,
    MuBoundWarning,
    SourceModel,
    TrialRng,
    gate_click_probabilities,
    g2_zero,
    hbt_expected,
    hbt_scan,
    hom_network,
    phase_averaged_probabilities,
    run_hbt,
    run_hom_scan,
    run_splitter_baseline,
    visibility,
)
from hompeak.network import modified_hom, standard_hom, transfer

IDEAL = DetectorModel(1.0, 0.0)
PAPER_DET = DetectorModel(0.15, 1e-5, 4e-9)
SIGMA = 1e-9


def test_vacuum_limit_gives_dark_rate():
    src = SourceModel(1e-12, sigma=SIGMA)
    det = DetectorModel(0.5, 3e-4)
    m = transfer(modified_hom(), ["d", "f", "g"])
    p = gate_click_probabilities(src, m, det, np.linspace(0, 6, 7))
    np.testing.assert_allclose(p, 3e-4, rtol=1e-6)


def test_standard_hom_theta_zero_oracle():
    m = transfer(standard_hom(), ["c", "d"])
    mu = 0.1
    # |(alpha + i beta)/sqrt2|^2 with alpha = beta = sqrt(mu): (mu + mu)/2 = mu
    alpha = beta = math.sqrt(mu)
    i_c = abs((alpha + 1j * beta) / math.sqrt(2)) ** 2
    assert i_c == pytest.approx(0.1)
    p = gate_click_probabilities(SourceModel(mu, sigma=SIGMA), m, IDEAL, 0.0)
    np.testing.assert_allclose(p, 1 - math.exp(-0.1), rtol=1e-12)


@pytest.mark.parametrize("delay", [0.0, 0.7e-9, 3e-9])
def test_intensity_conservation(delay):
    m = transfer(modified_hom())
    src = SourceModel(0.13, relative_delay=delay, freq_displacement=5e8, sigma=SIGMA)
    theta = np.linspace(0, 2 * np.pi, 17)
    p = gate_click_probabilities(src, m, DetectorModel(1e-9, 0.0), theta)
    intensity = -np.log1p(-p) / 1e-9
    np.testing.assert_allclose(intensity.sum(axis=0), 2 * 0.13, rtol=1e-6)


def test_detector_and_source_validation():
    with pytest.raises(ValueError):
        DetectorModel(1.2, 0.0)
    with pytest.raises(ValueError):
        DetectorModel(0.5, 1.0)
    with pytest.raises(ValueError):
        SourceModel(0.0)
    with pytest.warns(MuBoundWarning):
        SourceModel(0.3)
    with pytest.raises(ValueError):
        HeraldedCounts(10, 5, 4, 6)
    with pytest.raises(ValueError):
        run_hom_scan(SourceModel(0.05), standard_hom(), IDEAL, [0.0], 0, TrialRng(1))


def test_g2_estimator_values():
    assert g2_zero(HeraldedCounts(10**6, 10**4, 10**4, 100))[0] == 1.0
    assert g2_zero(HeraldedCounts(10**6, 10**4, 10**4, 78))[0] == 0.78
    assert g2_zero(HeraldedCounts(10**6, 10**4, 10**4, 125))[0] == 1.25


def test_g2_errors_carry_counts():
    c = HeraldedCounts(100, 0, 3, 0)
    with pytest.raises(G2Error) as info:
        g2_zero(c)
    assert info.value.counts == c


def test_g2_stderr_matches_resampling():
    # multinomial resampling of the four heralded outcomes
    n, pa, pb, pab = 200_000, 0.05, 0.04, 0.0025
    probs = [pab, pa - pab, pb - pab, 1 - pa - pb + pab]
    gen = np.random.default_rng(5)
    draws = gen.multinomial(n, probs, size=4000)
    g2s = draws[:, 0] * n / ((draws[:, 0] + draws[:, 1]) * (draws[:, 0] + draws[:, 2]))
    counts = HeraldedCounts(n, int(n * pa), int(n * pb), int(n * pab))
    _, err = g2_zero(counts)
    assert err == pytest.approx(np.std(g2s), rel=0.08)


def test_fixed_phase_scan_matches_click_oracle():
    src = SourceModel(0.2, phase_randomized=False, theta=0.9, sigma=SIGMA)
    trials = 400_000
    ifg = run_hom_scan(src, standard_hom(), IDEAL, [0.0, 0.5e-9], trials, TrialRng(11))
    m = transfer(standard_hom(), ["c", "d"])
    for k, tau in enumerate(ifg.taus):
        p = gate_click_probabilities(src.at_delay(tau), m, IDEAL, 0.9)
        expected = p[0] * p[1]  # fixed phase: independent outputs
        assert ifg.values[k] == pytest.approx(expected, abs=4 * ifg.stderr[k])
    # changing the fixed phase changes the coincidences
    p0 = np.prod(gate_click_probabilities(src, m, IDEAL, 0.0))
    p1 = np.prod(gate_click_probabilities(src, m, IDEAL, 0.9))
    assert abs(p0 - p1) > 10 * ifg.stderr[0]


def test_singles_converge_to_phase_average():
    src = SourceModel(0.1, sigma=SIGMA)
    trials = 10**6
    for network, outputs in ((standard_hom(), ("c", "d")), (modified_hom(), ("f", "g"))):
        ifg = run_hom_scan(src, network, IDEAL, [0.0, 1.2e-9], trials, TrialRng(3))
        m = transfer(network, outputs)
        for k, tau in enumerate(ifg.taus):
            avg = phase_averaged_probabilities(src.at_delay(tau), m, IDEAL)
            for n_out, p in zip((ifg.counts["n_1"][k], ifg.counts["n_2"][k]), avg):
                se = math.sqrt(p * (1 - p) / trials)
                assert abs(n_out / trials - p) <= 4 * se


def test_distinguishable_coincidences_factorise():
    src = SourceModel(0.1, sigma=SIGMA)
    trials = 10**6
    ifg = run_hom_scan(src, standard_hom(), IDEAL, [30e-9], trials, TrialRng(4))
    p1, p2 = ifg.counts["n_1"][0] / trials, ifg.counts["n_2"][0] / trials
    assert ifg.values[0] == pytest.approx(p1 * p2, abs=3 * ifg.stderr[0])


def test_scan_determinism_and_workers():
    src = SourceModel(0.1, sigma=SIGMA)
    taus = np.linspace(-3e-9, 3e-9, 5)
    a = run_hom_scan(src, standard_hom(), PAPER_DET, taus, 50_000, TrialRng(9), block_size=8192)
    b = run_hom_scan(src, standard_hom(), PAPER_DET, taus, 50_000, TrialRng(9), block_size=8192, workers=3)
    assert a.to_json() == b.to_json()
    c = run_hom_scan(src, standard_hom(), PAPER_DET, taus, 50_000, TrialRng(10), block_size=8192)
    assert a.counts != c.counts


def test_hbt_determinism():
    src = SourceModel(0.1, sigma=SIGMA)
    a = run_hbt(src, PAPER_DET, PAPER_DET, 0.0, 200_000, TrialRng(42))
    b = run_hbt(src, PAPER_DET, PAPER_DET, 0.0, 200_000, TrialRng(42))
    assert a == b


@pytest.mark.parametrize("mu", [0.05, 0.1, 0.2])
def test_dip_visibility_bound(mu):
    src = SourceModel(mu, sigma=SIGMA)
    taus = np.linspace(-10 * SIGMA, 10 * SIGMA, 21)
    ifg = run_hom_scan(src, hom_network("dip"), IDEAL, taus, 10**6, TrialRng(7))
    v, err = visibility(ifg, far=6 * SIGMA)
    assert v <= 0.5 + 3 * err


def test_peak_visibility_from_oracle():
    # phase-averaged oracle: f and g both follow I_c, so C0 / C_far = <(1 - s)^2> = 3/2
    src = SourceModel(1e-4, sigma=SIGMA)
    m = transfer(modified_hom(), ["f", "g"])
    theta = 2 * np.pi * np.arange(1024) / 1024
    c0 = np.mean(np.prod(gate_click_probabilities(src, m, IDEAL, theta), axis=0))
    cf = np.mean(np.prod(gate_click_probabilities(src.at_delay(50e-9), m, IDEAL, theta), axis=0))
    assert c0 / cf == pytest.approx(1.5, rel=1e-3)


def test_poisson_baseline():
    counts = run_splitter_baseline(0.5, IDEAL, 10**6, TrialRng(8))
    g2, err = g2_zero(counts)
    assert abs(g2 - 1.0) <= 3 * err


@pytest.mark.parametrize("kind,delay", [("peak", 0.0), ("dip", 0.0), ("peak", 30e-9), ("dip", 1.5e-9)])
def test_hbt_matches_oracle_at_high_rate(kind, delay):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MuBoundWarning)
        src = SourceModel(0.8, sigma=SIGMA)
    counts = run_hbt(src, IDEAL, IDEAL, delay, 10**6, TrialRng(21), kind)
    g2, err = g2_zero(counts)
    expected = hbt_expected(src, IDEAL, IDEAL, delay, kind)
    assert counts.n_AB > 1000
    assert abs(g2 - expected["g2"]) <= 4 * err
    assert counts.n_herald / 10**6 == pytest.approx(expected["p_herald"], abs=4 * math.sqrt(expected["p_herald"] / 10**6))


def test_heralded_oracle_regimes():
    src = SourceModel(0.05, sigma=SIGMA)
    peak = hbt_expected(src, PAPER_DET, PAPER_DET, 0.0, "peak")["g2"]
    dip = hbt_expected(src, PAPER_DET, PAPER_DET, 0.0, "dip")["g2"]
    far = hbt_expected(src, PAPER_DET, PAPER_DET, 40e-9, "peak")["g2"]
    # classical intensities: herald-weighted g2 >= 1 (Cauchy-Schwarz)
    assert dip > peak > 1.0
    assert far == pytest.approx(1.0, abs=1e-9)
    # low-rate limits: <(1-s)^3><1-s>/<(1-s)^2>^2 = 10/9 and <(1+s)(1-s)^2>/<1-s^2>^2 = 2
    assert peak == pytest.approx(10 / 9, rel=2e-2)
    assert dip == pytest.approx(2.0, rel=2e-2)


def test_dark_counts_drive_g2_to_one():
    src = SourceModel(0.05, sigma=SIGMA)
    values = [hbt_expected(src, DetectorModel(0.15, d), DetectorModel(0.15, d), 0.0, "dip")["g2"]
              for d in (1e-5, 1e-3, 1e-2)]
    assert values[0] > values[1] > values[2] > 1.0


def test_hbt_scan_structure():
    src = SourceModel(0.1, sigma=SIGMA)
    points = hbt_scan(src, PAPER_DET, PAPER_DET, [-20e-9, 0.0, 20e-9], 20_000, TrialRng(1), "peak")
    assert [p.delay for p in points] == [-20e-9, 0.0, 20e-9]
    again = hbt_scan(src, PAPER_DET, PAPER_DET, [-20e-9, 0.0, 20e-9], 20_000, TrialRng(1), "peak", workers=2)
    assert points == again
    with pytest.raises(ValueError):
        hbt_scan(src, PAPER_DET, PAPER_DET, [], 10, TrialRng(1))


def test_rng_contract():
    a = TrialRng(2**64 - 1, 3).generator(1, 2).random(4)
    b = TrialRng(2**64 - 1, 3).generator(1, 2).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, TrialRng(2**64 - 1, 4).generator(1, 2).random(4))
    with pytest.raises(ValueError):
        TrialRng(-1)
