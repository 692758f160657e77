"""Complex spatio-temporal wave-packet envelopes.

A packet is a unit-norm Gaussian envelope with a carrier offset:

    eps(t) = (2 pi sigma^2)^(-1/4) exp(-(t - t0)^2 / (4 sigma^2)) exp(-i (delta t + phi0))

so that ``sigma`` is the standard deviation of ``|eps|^2`` and the carrier
phase is referenced to absolute time. Times are seconds, ``delta`` is rad/s.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from hompeak.quadrature import adaptive_simpson

__all__ = ["Shape", "WavePacket", "evaluate", "overlap", "SUPPORT_SIGMAS"]

# |eps|^2 is below 1e-14 of its peak beyond this many sigmas
SUPPORT_SIGMAS = 8.0


class Shape(enum.Enum):
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class WavePacket:
    center: float = 0.0
    sigma: float = 1.0
    freq_displacement: float = 0.0
    phase: float = 0.0
    shape: Shape = Shape.GAUSSIAN

    def __post_init__(self):
        for name in ("center", "sigma", "freq_displacement", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"WavePacket.{name} must be finite")
        if self.sigma <= 0:
            raise ValueError(f"WavePacket.sigma must be > 0, got {self.sigma}")

    def __call__(self, t):
        return evaluate(self, t)

    def delayed(self, tau: float) -> "WavePacket":
        """The same field arriving ``tau`` later: ``eps'(t) = eps(t - tau)``."""
        return replace(self, center=self.center + tau, phase=self.phase - self.freq_displacement * tau)

    def support(self, sigmas: float = SUPPORT_SIGMAS) -> tuple[float, float]:
        return self.center - sigmas * self.sigma, self.center + sigmas * self.sigma


def evaluate(wp: WavePacket, t):
    """Complex amplitude ``eps(t)``; ``t`` may be a scalar or an array."""
    t = np.asarray(t, dtype=float)
    norm = (2.0 * math.pi * wp.sigma**2) ** -0.25
    env = norm * np.exp(-((t - wp.center) ** 2) / (4.0 * wp.sigma**2))
    val = env * np.exp(-1j * (wp.freq_displacement * t + wp.phase))
    return complex(val) if val.ndim == 0 else val


def overlap(wp1: WavePacket, wp2: WavePacket, epsabs: float = 1e-10) -> complex:
    """Mode overlap ``<wp1|wp2> = int conj(eps1(t)) eps2(t) dt``."""
    smax = max(wp1.sigma, wp2.sigma)
    lo = min(wp1.center, wp2.center) - SUPPORT_SIGMAS * smax
    hi = max(wp1.center, wp2.center) + SUPPORT_SIGMAS * smax

    def integrand(t):
        return np.conj(evaluate(wp1, t)) * evaluate(wp2, t)

    return complex(adaptive_simpson(integrand, lo, hi, epsabs=epsabs, epsrel=0.0))
