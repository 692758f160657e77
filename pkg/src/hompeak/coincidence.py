"""Analytic two-photon joint detection probabilities and interferograms.

``tau`` in the joint probabilities is the difference between the two
detection times: detector one clicks at ``t``, detector two at ``t + tau``.
The dip form belongs to the standard interferometer (outputs c, d), the peak
form to the modified one (outputs f, g).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from hompeak.quadrature import adaptive_simpson
from hompeak.wavepacket import SUPPORT_SIGMAS, WavePacket, evaluate

__all__ = [
    "Kind",
    "Interferogram",
    "joint_prob_dip",
    "joint_prob_peak",
    "integrated_coincidence",
    "total_coincidence",
    "scan",
]


class Kind(str, enum.Enum):
    DIP = "dip"
    PEAK = "peak"

    @classmethod
    def parse(cls, value: "Kind | str") -> "Kind":
        try:
            return cls(value.lower() if isinstance(value, str) else value)
        except ValueError:
            raise ValueError(f"kind must be 'dip' or 'peak', got {value!r}") from None


@dataclass
class Interferogram:
    taus: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    kind: Kind
    config: dict[str, Any] = field(default_factory=dict)
    # raw tallies for Monte Carlo curves (trials, singles, coincidences)
    counts: dict[str, list[int]] | None = None

    def __post_init__(self):
        self.taus = np.asarray(self.taus, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        self.kind = Kind.parse(self.kind)
        if not (len(self.taus) == len(self.values) == len(self.stderr)):
            raise ValueError("taus, values and stderr must have equal length")
        if len(self.taus) and np.any(np.diff(self.taus) <= 0):
            raise ValueError("taus must be strictly increasing")
        if np.any(self.values < 0) or np.any(self.stderr < 0):
            raise ValueError("interferogram values and errors must be non-negative")

    def __len__(self):
        return len(self.taus)

    def normalized(self) -> "Interferogram":
        peak = self.values.max()
        if peak <= 0:
            return self
        return Interferogram(self.taus, self.values / peak, self.stderr / peak, self.kind,
                             dict(self.config, normalized=True), self.counts)

    def to_csv(self) -> str:
        lines = ["# " + json.dumps({"kind": self.kind.value, "config": self.config}, sort_keys=True)]
        lines.append("tau_s,value,stderr")
        lines += [f"{t!r},{v!r},{e!r}" for t, v, e in zip(self.taus.tolist(), self.values.tolist(), self.stderr.tolist())]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "kind": self.kind.value,
            "config": self.config,
            "samples": [
                {"tau_s": t, "value": v, "stderr": e}
                for t, v, e in zip(self.taus.tolist(), self.values.tolist(), self.stderr.tolist())
            ],
        }
        if self.counts is not None:
            doc["counts"] = self.counts
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Interferogram":
        doc = json.loads(text)
        s = doc["samples"]
        return cls([x["tau_s"] for x in s], [x["value"] for x in s], [x["stderr"] for x in s],
                   doc["kind"], doc.get("config", {}), doc.get("counts"))

    @classmethod
    def from_csv(cls, text: str) -> "Interferogram":
        meta: dict[str, Any] = {}
        rows = []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                meta = json.loads(line[1:])
                continue
            if line.startswith("tau_s"):
                continue
            rows.append([float(x) for x in line.split(",")])
        arr = np.array(rows, dtype=float).reshape(-1, 3)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], meta.get("kind", "dip"), meta.get("config", {}))


def joint_prob_dip(ea: WavePacket, eb: WavePacket, t, tau):
    """``(1/4) |ea(t+tau) eb(t) - eb(t+tau) ea(t)|^2``."""
    t = np.asarray(t, dtype=float)
    amp = evaluate(ea, t + tau) * evaluate(eb, t) - evaluate(eb, t + tau) * evaluate(ea, t)
    return 0.25 * np.abs(amp) ** 2


def joint_prob_peak(ea: WavePacket, eb: WavePacket, t, tau):
    """``(1/16) |ea(t+tau) eb(t) + eb(t+tau) ea(t)|^2``."""
    t = np.asarray(t, dtype=float)
    amp = evaluate(ea, t + tau) * evaluate(eb, t) + evaluate(eb, t + tau) * evaluate(ea, t)
    return np.abs(amp) ** 2 / 16.0


_JOINT = {Kind.DIP: joint_prob_dip, Kind.PEAK: joint_prob_peak}


def _t_support(ea: WavePacket, eb: WavePacket, tau: float) -> tuple[float, float]:
    # both ea(t), eb(t) and ea(t+tau), eb(t+tau) must be covered
    smax = max(ea.sigma, eb.sigma)
    lo_c, hi_c = min(ea.center, eb.center), max(ea.center, eb.center)
    lo = min(lo_c, lo_c - tau) - SUPPORT_SIGMAS * smax
    hi = max(hi_c, hi_c - tau) + SUPPORT_SIGMAS * smax
    return lo, hi


def integrated_coincidence(ea: WavePacket, eb: WavePacket, tau: float, kind: Kind | str,
                           epsabs: float = 1e-10, epsrel: float = 1e-10) -> float:
    """Coincidence density at detection-time difference ``tau``, integrated over ``t``."""
    joint = _JOINT[Kind.parse(kind)]
    lo, hi = _t_support(ea, eb, tau)
    val = adaptive_simpson(lambda t: joint(ea, eb, t, tau), lo, hi, epsabs=epsabs, epsrel=epsrel)
    return max(float(np.real(val)), 0.0)


def total_coincidence(ea: WavePacket, eb: WavePacket, delay: float, kind: Kind | str,
                      epsabs: float = 1e-10, epsrel: float = 1e-9) -> float:
    """Total coincidence probability when packet ``eb`` is delayed by ``delay``.

    Integrates the joint probability over both detection times, so the result
    is dimensionless; this is the quantity swept by an optical delay line.
    """
    kind = Kind.parse(kind)
    eb = eb.delayed(delay)
    smax = max(ea.sigma, eb.sigma)
    spread = abs(ea.center - eb.center) + 2.0 * SUPPORT_SIGMAS * smax

    def inner(taus):
        return np.array([integrated_coincidence(ea, eb, float(s), kind, epsabs=epsabs, epsrel=epsrel)
                         for s in taus])

    return float(adaptive_simpson(inner, -spread, spread, epsabs=epsabs, epsrel=epsrel, initial_panels=16))


def scan(ea: WavePacket, eb: WavePacket, taus: Sequence[float], kind: Kind | str,
         normalize: bool = False) -> Interferogram:
    """Analytic interferogram over detection-time differences ``taus``."""
    taus = np.asarray(taus, dtype=float)
    if taus.size == 0:
        raise ValueError("scan needs at least one tau")
    kind = Kind.parse(kind)
    values = np.array([integrated_coincidence(ea, eb, float(t), kind) for t in taus])
    config = {
        "engine": "analytic",
        "packet_a": _packet_dict(ea),
        "packet_b": _packet_dict(eb),
    }
    out = Interferogram(taus, values, np.zeros_like(values), kind, config)
    return out.normalized() if normalize else out


def _packet_dict(wp: WavePacket) -> dict[str, Any]:
    return {"center": wp.center, "sigma": wp.sigma, "freq_displacement": wp.freq_displacement,
            "phase": wp.phase, "shape": wp.shape.value}
