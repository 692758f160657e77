"""Gated-detector Monte Carlo for weak-coherent-state interference.

Each trial is one detection gate. Both inputs carry coherent states of mean
photon number ``mu``; input ``b`` has relative phase ``theta`` (uniform per
gate when phase randomised). Distinguishability enters through the complex
mode overlap ``kappa`` of packet ``a`` with the delayed packet ``b``: writing
``eps_b = kappa eps_a + sqrt(1 - |kappa|^2) eps_perp``, the mean photon number
reaching output ``o`` is

    I_o = mu (|M_oa|^2 + |M_ob|^2 + 2 Re(conj(M_oa) M_ob kappa e^{i theta}))

For a fixed phase the outputs hold independent coherent states, so a gated
SPAD clicks with probability ``1 - (1 - dark) exp(-eta I_o)`` independently
of the others. This is exact for coherent inputs; all correlations between
detectors come from averaging over ``theta``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from hompeak.coincidence import Interferogram, Kind
from hompeak.network import ModeNetwork, TransferMatrix, hbt_network, modified_hom, standard_hom, transfer
from hompeak.wavepacket import WavePacket, overlap

__all__ = [
    "MU_MODEL_LIMIT",
    "MuBoundWarning",
    "G2Error",
    "SourceModel",
    "DetectorModel",
    "HeraldedCounts",
    "TrialRng",
    "HbtPoint",
    "gate_click_probabilities",
    "phase_averaged_probabilities",
    "run_hom_scan",
    "run_hbt",
    "hbt_expected",
    "run_splitter_baseline",
    "g2_zero",
    "hbt_scan",
    "visibility",
    "hom_network",
]

# mean photon number per gate above which the WCS interference model is not trusted
MU_MODEL_LIMIT = 0.2
BLOCK_SIZE = 1 << 18
RNG_ALGORITHM = "numpy Philox4x64-10 seeded by SeedSequence(seed, spawn_key=(stream, point, block))"


class MuBoundWarning(UserWarning):
    pass


class G2Error(ValueError):
    def __init__(self, message: str, counts: "HeraldedCounts"):
        super().__init__(f"{message}: {counts}")
        self.counts = counts


@dataclass(frozen=True)
class SourceModel:
    mu: float
    phase_randomized: bool = True
    relative_delay: float = 0.0
    freq_displacement: float = 0.0
    sigma: float = 1e-9
    theta: float = 0.0  # relative phase used when not phase randomised

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError(f"SourceModel.mu must be > 0, got {self.mu}")
        if not self.sigma > 0:
            raise ValueError(f"SourceModel.sigma must be > 0, got {self.sigma}")
        if self.mu > MU_MODEL_LIMIT:
            warnings.warn(f"mu={self.mu} exceeds the {MU_MODEL_LIMIT} validity bound of the WCS model",
                          MuBoundWarning, stacklevel=3)

    def at_delay(self, tau: float) -> "SourceModel":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MuBoundWarning)
            return replace(self, relative_delay=float(tau))

    def packets(self) -> tuple[WavePacket, WavePacket]:
        ea = WavePacket(0.0, self.sigma)
        eb = WavePacket(0.0, self.sigma, self.freq_displacement).delayed(self.relative_delay)
        return ea, eb

    def mode_overlap(self) -> complex:
        ea, eb = self.packets()
        return overlap(ea, eb)


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 0.15
    dark_prob: float = 1e-5
    gate_width: float = 4e-9

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"DetectorModel.efficiency must lie in [0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_prob < 1.0:
            raise ValueError(f"DetectorModel.dark_prob must lie in [0, 1), got {self.dark_prob}")

    def click_probability(self, intensity):
        return 1.0 - (1.0 - self.dark_prob) * np.exp(-self.efficiency * np.asarray(intensity))


@dataclass(frozen=True)
class HeraldedCounts:
    n_herald: int
    n_A: int
    n_B: int
    n_AB: int

    def __post_init__(self):
        if min(self.n_herald, self.n_A, self.n_B, self.n_AB) < 0:
            raise ValueError(f"counts must be non-negative: {self}")
        if not self.n_AB <= min(self.n_A, self.n_B) <= self.n_herald:
            raise ValueError(f"inconsistent counts, need n_AB <= min(n_A, n_B) <= n_herald: {self}")

    def __add__(self, other: "HeraldedCounts") -> "HeraldedCounts":
        return HeraldedCounts(self.n_herald + other.n_herald, self.n_A + other.n_A,
                              self.n_B + other.n_B, self.n_AB + other.n_AB)


@dataclass(frozen=True)
class TrialRng:
    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def generator(self, point: int = 0, block: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, point, block))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class HbtPoint:
    delay: float
    g2: float | None
    g2_stderr: float | None
    counts: HeraldedCounts
    g2_expected: float

    def as_dict(self) -> dict:
        return {"delay_s": self.delay, "g2": self.g2, "g2_stderr": self.g2_stderr,
                "g2_expected": self.g2_expected, **asdict(self.counts)}


def _detector_rows(det: DetectorModel | Mapping[str, DetectorModel], rows: Sequence[str]):
    if isinstance(det, DetectorModel):
        return [det] * len(rows)
    return [det[r] for r in rows]


def gate_click_probabilities(source: SourceModel, matrix: TransferMatrix,
                             det: DetectorModel | Mapping[str, DetectorModel],
                             theta, kappa: complex | None = None) -> np.ndarray:
    """Click probability at each row of ``matrix``; shape ``(rows,) + theta.shape``.

    ``det`` is one detector model for all outputs or a mapping keyed by
    output label. ``kappa`` defaults to ``source.mode_overlap()``.
    """
    if kappa is None:
        kappa = source.mode_overlap()
    theta = np.asarray(theta, dtype=float)
    ia, ib = matrix.cols.index("a"), matrix.cols.index("b")
    ma, mb = matrix.entries[:, ia], matrix.entries[:, ib]
    direct = np.abs(ma) ** 2 + np.abs(mb) ** 2
    cross = np.conj(ma) * mb * kappa
    phasor = np.exp(1j * theta)
    shape = (len(matrix.rows),) + (1,) * theta.ndim
    intensity = source.mu * (direct.reshape(shape) + 2.0 * np.real(cross.reshape(shape) * phasor))
    intensity = np.maximum(intensity, 0.0)
    probs = np.empty_like(intensity)
    for k, d in enumerate(_detector_rows(det, matrix.rows)):
        probs[k] = d.click_probability(intensity[k])
    return probs


def _theta_grid(source: SourceModel, n_theta: int) -> np.ndarray:
    if not source.phase_randomized:
        return np.array([source.theta])
    # trapezoid on a periodic integrand: spectrally accurate
    return 2.0 * np.pi * np.arange(n_theta) / n_theta


def phase_averaged_probabilities(source: SourceModel, matrix: TransferMatrix, det, n_theta: int = 1024,
                                 kappa: complex | None = None) -> np.ndarray:
    """Single-output click probabilities averaged over the relative phase."""
    return gate_click_probabilities(source, matrix, det, _theta_grid(source, n_theta), kappa).mean(axis=1)


def _draw_thetas(source: SourceModel, gen: np.random.Generator, n: int) -> np.ndarray:
    if source.phase_randomized:
        return gen.uniform(0.0, 2.0 * np.pi, n)
    return np.full(n, source.theta)


def _blocks(trials: int, block_size: int):
    b = 0
    done = 0
    while done < trials:
        n = min(block_size, trials - done)
        yield b, n
        done += n
        b += 1


def _default_outputs(network: ModeNetwork) -> tuple[str, str]:
    modes = network.terminal_modes
    if "f" in modes and "g" in modes:
        return ("f", "g")
    if "c" in modes and "d" in modes:
        return ("c", "d")
    raise ValueError(f"cannot infer monitored outputs from terminal modes {modes}")


def _check_trials(trials: int):
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials}")


def _hom_point(source: SourceModel, matrix: TransferMatrix, det, trials: int,
               rng: TrialRng, point: int, block_size: int) -> tuple[int, int, int]:
    kappa = source.mode_overlap()
    n1 = n2 = n12 = 0
    for block, n in _blocks(trials, block_size):
        gen = rng.generator(point, block)
        theta = _draw_thetas(source, gen, n)
        p = gate_click_probabilities(source, matrix, det, theta, kappa)
        clicks = gen.random(p.shape) < p
        n1 += int(clicks[0].sum())
        n2 += int(clicks[1].sum())
        n12 += int((clicks[0] & clicks[1]).sum())
    return n1, n2, n12


def run_hom_scan(source: SourceModel, network: ModeNetwork, det, taus: Sequence[float], trials: int,
                 rng: TrialRng, outputs: Sequence[str] | None = None, block_size: int = BLOCK_SIZE,
                 workers: int = 1) -> Interferogram:
    """Coincidence probability per gate between two outputs versus packet delay.

    Point ``i`` of the scan draws from its own stream ``(seed, stream, i)``,
    so the result does not depend on ``workers``.
    """
    _check_trials(trials)
    taus = np.asarray(taus, dtype=float)
    if taus.size == 0:
        raise ValueError("run_hom_scan needs at least one delay")
    outputs = tuple(outputs) if outputs is not None else _default_outputs(network)
    matrix = transfer(network, outputs)
    kind = Kind.PEAK if set(outputs) == {"f", "g"} else Kind.DIP

    def one(i):
        return _hom_point(source.at_delay(taus[i]), matrix, det, trials, rng, i, block_size)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            tallies = list(pool.map(one, range(len(taus))))
    else:
        tallies = [one(i) for i in range(len(taus))]
    n1, n2, n12 = (np.array(x) for x in zip(*tallies))
    p = n12 / trials
    stderr = np.sqrt(p * (1.0 - p) / trials)
    config = {
        "engine": "montecarlo",
        "source": asdict(source),
        "detector": _det_config(det),
        "outputs": list(outputs),
        "trials": int(trials),
        "seed": rng.seed,
        "stream": rng.stream,
        "rng": RNG_ALGORITHM,
    }
    counts = {"trials": [int(trials)] * len(taus), "n_1": n1.tolist(), "n_2": n2.tolist(), "n_12": n12.tolist()}
    return Interferogram(taus, p, stderr, kind, config, counts)


def _det_config(det):
    if isinstance(det, DetectorModel):
        return asdict(det)
    return {k: asdict(v) for k, v in det.items()}


def _hbt_matrix(kind: str) -> tuple[TransferMatrix, dict[str, int]]:
    network, herald = hbt_network(kind)
    matrix = transfer(network, (herald, "A", "B"))
    return matrix, {"herald": 0, "A": 1, "B": 2}


def run_hbt(source: SourceModel, det_herald: DetectorModel, det_AB: DetectorModel, herald_delay: float,
            trials: int, rng: TrialRng, kind: Kind | str = Kind.PEAK, point: int = 0,
            block_size: int = BLOCK_SIZE) -> HeraldedCounts:
    """Heralded HBT tallies at one herald time tuning.

    ``kind='peak'`` heralds on ``g`` of the modified interferometer and
    analyses ``f``; ``kind='dip'`` heralds on ``d`` and analyses ``c``.
    ``herald_delay`` is the relative packet delay at which heralding happens.
    """
    _check_trials(trials)
    kind = Kind.parse(kind)
    matrix, _ = _hbt_matrix(kind.value)
    src = source.at_delay(herald_delay)
    kappa = src.mode_overlap()
    dets = {matrix.rows[0]: det_herald, "A": det_AB, "B": det_AB}
    total = HeraldedCounts(0, 0, 0, 0)
    for block, n in _blocks(trials, block_size):
        gen = rng.generator(point, block)
        theta = _draw_thetas(src, gen, n)
        p = gate_click_probabilities(src, matrix, dets, theta, kappa)
        clicks = gen.random(p.shape) < p
        h = clicks[0]
        a = clicks[1] & h
        b = clicks[2] & h
        total = total + HeraldedCounts(int(h.sum()), int(a.sum()), int(b.sum()), int((a & b).sum()))
    return total


def hbt_expected(source: SourceModel, det_herald: DetectorModel, det_AB: DetectorModel,
                 herald_delay: float, kind: Kind | str = Kind.PEAK, n_theta: int = 1024) -> dict[str, float]:
    """Phase-averaged heralded probabilities and g2 for the same model as ``run_hbt``."""
    kind = Kind.parse(kind)
    matrix, _ = _hbt_matrix(kind.value)
    src = source.at_delay(herald_delay)
    dets = {matrix.rows[0]: det_herald, "A": det_AB, "B": det_AB}
    p = gate_click_probabilities(src, matrix, dets, _theta_grid(src, n_theta))
    ph, pa, pb = p
    p_h = ph.mean()
    p_a = (ph * pa).mean() / p_h
    p_b = (ph * pb).mean() / p_h
    p_ab = (ph * pa * pb).mean() / p_h
    return {"p_herald": float(p_h), "P_A": float(p_a), "P_B": float(p_b), "P_AB": float(p_ab),
            "g2": float(p_ab / (p_a * p_b))}


def run_splitter_baseline(mu: float, det: DetectorModel, trials: int, rng: TrialRng,
                          block_size: int = BLOCK_SIZE) -> HeraldedCounts:
    """Unheralded HBT on one coherent input; every gate counts as a herald.

    A single input has no reference to interfere with, so phase
    randomisation leaves each output at the fixed mean ``mu / 2``.
    """
    _check_trials(trials)
    matrix = transfer(ModeNetwork(("a", "v")).then(("a", "v"), ("A", "B")), ("A", "B"))
    p = det.click_probability(mu * np.abs(matrix.entries[:, 0]) ** 2)
    total = HeraldedCounts(0, 0, 0, 0)
    for block, n in _blocks(trials, block_size):
        clicks = rng.generator(0, block).random((2, n)) < p[:, None]
        total = total + HeraldedCounts(n, int(clicks[0].sum()), int(clicks[1].sum()),
                                       int((clicks[0] & clicks[1]).sum()))
    return total


def g2_zero(counts: HeraldedCounts) -> tuple[float, float]:
    """Heralded ``g2(0) = P_AB / (P_A P_B)`` with ``P_X = n_X / n_herald``.

    The standard error is the multinomial delta-method error over the four
    outcomes of a heralded gate (AB, A only, B only, neither). With no
    coincidences the error of a single-coincidence result is reported.
    """
    n, na, nb, nab = counts.n_herald, counts.n_A, counts.n_B, counts.n_AB
    if n <= 0 or na <= 0 or nb <= 0:
        raise G2Error("g2(0) undefined without heralds and singles on both A and B", counts)
    g2 = nab * n / (na * nb)
    m = max(nab, 1)
    n10, n01 = na - nab, nb - nab
    n00 = n - na - nb + nab
    grad11 = 1.0 / m - 1.0 / na - 1.0 / nb + 1.0 / n
    grad10 = -1.0 / na + 1.0 / n
    grad01 = -1.0 / nb + 1.0 / n
    grad00 = 1.0 / n
    var_log = grad11**2 * m + grad10**2 * n10 + grad01**2 * n01 + grad00**2 * n00
    scale = g2 if nab > 0 else n / (na * nb)
    return float(g2), float(scale * math.sqrt(max(var_log, 0.0)))


def hbt_scan(source: SourceModel, det_herald: DetectorModel, det_AB: DetectorModel,
             herald_delays: Sequence[float], trials: int, rng: TrialRng,
             kind: Kind | str = Kind.PEAK, workers: int = 1) -> list[HbtPoint]:
    """``run_hbt`` and ``g2_zero`` at each herald delay.

    ``counts.n_A`` and ``counts.n_B`` are the herald-A and herald-B coincidence
    curves. Points where g2 is undefined carry ``g2=None``.
    """
    delays = [float(d) for d in herald_delays]
    if not delays:
        raise ValueError("hbt_scan needs at least one herald delay")
    kind = Kind.parse(kind)

    def one(i):
        counts = run_hbt(source, det_herald, det_AB, delays[i], trials, rng, kind, point=i)
        expected = hbt_expected(source, det_herald, det_AB, delays[i], kind)["g2"]
        try:
            g2, err = g2_zero(counts)
        except G2Error:
            g2, err = None, None
        return HbtPoint(delays[i], g2, err, counts, expected)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, range(len(delays))))
    return [one(i) for i in range(len(delays))]


def visibility(ifg: Interferogram, far: float | None = None) -> tuple[float, float]:
    """Interferogram contrast ``(C_far - C_0) / C_far`` and its standard error.

    The sign is flipped for peaks so an ideal dip or peak reads positive;
    noise can still push a weak contrast below zero.

    ``C_0`` is the sample nearest zero delay; ``C_far`` is the mean over
    samples with ``|tau| >= far`` (default: the outer fifth of the grid).
    """
    taus = ifg.taus
    if far is None:
        far = 0.8 * np.max(np.abs(taus))
    outer = np.abs(taus) >= far
    if not outer.any():
        raise ValueError(f"no samples with |tau| >= {far}")
    i0 = int(np.argmin(np.abs(taus)))
    c0, e0 = ifg.values[i0], ifg.stderr[i0]
    cf = ifg.values[outer].mean()
    ef = math.sqrt(np.sum(ifg.stderr[outer] ** 2)) / outer.sum()
    if cf <= 0:
        raise ValueError("far-region coincidences are zero; visibility undefined")
    sign = 1.0 if ifg.kind is Kind.DIP else -1.0
    v = sign * (cf - c0) / cf
    err = math.sqrt((e0 / cf) ** 2 + (c0 * ef / cf**2) ** 2)
    return float(v), float(err)


def hom_network(kind: Kind | str) -> ModeNetwork:
    return standard_hom() if Kind.parse(kind) is Kind.DIP else modified_hom()
