"""Gaussian-beat interferogram fits.

Model::

    C(tau) = B (1 + s V exp(-(tau - tau0)^2 / (2 w^2)) cos(delta tau + phi))

with ``s = -1`` for a dip and ``+1`` for a peak. ``tau0`` is held at zero
unless ``fit_center=True``. The optimiser is Levenberg-Marquardt on the
analytic Jacobian; when the Jacobian is rank deficient at the solution (for
instance ``delta = phi = 0`` data, where both beat columns vanish) the result
is re-polished with Nelder-Mead and the lower cost wins.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from hompeak.coincidence import Interferogram, Kind

__all__ = ["BeatFitModel", "FitResult", "FitError", "beat_model", "initial_guess", "fit", "MIN_SAMPLES"]

MIN_SAMPLES = 8
MAX_ITER = 200
XTOL = 1e-10
BEAT_RESOLVED = 1.0
PARAMS = ("baseline", "visibility", "envelope_width", "beat_freq", "beat_phase", "center")


@dataclass(frozen=True)
class BeatFitModel:
    baseline: float
    visibility: float
    envelope_width: float
    beat_freq: float
    beat_phase: float
    sign: Kind
    center: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sign", Kind.parse(self.sign))
        if not self.baseline > 0:
            raise ValueError(f"baseline must be > 0, got {self.baseline}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")
        if not self.envelope_width > 0:
            raise ValueError(f"envelope_width must be > 0, got {self.envelope_width}")

    def __call__(self, tau):
        return beat_model(np.asarray(tau, dtype=float), self._vector(), _sgn(self.sign))

    def _vector(self) -> np.ndarray:
        return np.array([self.baseline, self.visibility, self.envelope_width,
                         self.beat_freq, self.beat_phase, self.center])


@dataclass
class FitResult:
    model: BeatFitModel
    stderr: dict[str, float]
    rms: float
    iterations: int
    converged: bool
    method: str
    cost: float
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        params = asdict(self.model)
        params["sign"] = self.model.sign.value
        return {"parameters": params, "stderr": self.stderr, "rms": self.rms,
                "iterations": self.iterations, "converged": self.converged,
                "method": self.method, "cost": self.cost, **self.extras}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"


class FitError(RuntimeError):
    def __init__(self, message: str, best: FitResult | None = None):
        super().__init__(message)
        self.best = best


def _sgn(kind: Kind | str) -> float:
    return -1.0 if Kind.parse(kind) is Kind.DIP else 1.0


def beat_model(tau: np.ndarray, p: np.ndarray, s: float) -> np.ndarray:
    b, v, w, d, phi, c = p
    env = np.exp(-((tau - c) ** 2) / (2.0 * w**2))
    return b * (1.0 + s * v * env * np.cos(d * tau + phi))


def _jacobian(tau: np.ndarray, p: np.ndarray, s: float) -> np.ndarray:
    b, v, w, d, phi, c = p
    u = tau - c
    env = np.exp(-(u**2) / (2.0 * w**2))
    arg = d * tau + phi
    k, sn = np.cos(arg), np.sin(arg)
    bve = b * s * v * env
    return np.column_stack([
        1.0 + s * v * env * k,
        b * s * env * k,
        bve * k * u**2 / w**3,
        -bve * sn * tau,
        -bve * sn,
        bve * k * u / w**2,
    ])


def _check(data: Interferogram):
    if len(data) < MIN_SAMPLES:
        raise FitError(f"need at least {MIN_SAMPLES} samples to fit, got {len(data)}")


def initial_guess(data: Interferogram, sign: Kind | str) -> BeatFitModel:
    """Moment and spectrum based starting point for ``fit``."""
    _check(data)
    tau, y = data.taus, data.values
    n = len(tau)
    order = np.argsort(-np.abs(tau))
    outer = order[: max(1, n // 10)]
    base = float(np.mean(y[outer]))
    if base <= 0:
        base = float(np.mean(y)) or 1.0
    dev = y / base - 1.0
    vis = float(min(np.max(np.abs(dev)), 1.0))

    # envelope: second moment of |deviation| above the outer noise floor
    floor = float(np.median(np.abs(dev[outer])))
    weight = np.clip(np.abs(dev) - floor, 0.0, None)
    span = float(tau.max() - tau.min())
    if weight.sum() > 0:
        width = math.sqrt(float(np.sum(weight * tau**2) / weight.sum()))
    else:
        width = span / 4.0
    width = min(max(width, span / (4.0 * n)), span)

    # beat: dominant non-zero frequency of the mean-subtracted samples
    step = float(np.median(np.diff(tau)))
    omega = np.linspace(0.0, math.pi / step, 4096)
    centred = y - y.mean()
    power = np.abs(np.exp(-1j * np.outer(omega, tau)) @ centred)
    k = 1 + int(np.argmax(power[1:]))
    delta = 0.0
    if k < len(omega) - 1 and power[k] > power[k - 1] and power[k] >= power[k + 1]:
        lo, mid, hi = power[k - 1], power[k], power[k + 1]
        denom = lo - 2.0 * mid + hi
        shift = 0.5 * (lo - hi) / denom if denom != 0 else 0.0
        delta = float(omega[k] + shift * (omega[1] - omega[0]))
    return BeatFitModel(base, vis, width, delta, 0.0, sign)


def _canonical(p: np.ndarray) -> np.ndarray:
    b, v, w, d, phi, c = p
    if v < 0:
        v, phi = -v, phi + math.pi
    if d < 0:
        d, phi = -d, -phi
    phi = math.remainder(phi, 2.0 * math.pi)
    return np.array([b, v, abs(w), d, phi, c])


def _lm(tau, y, sw, p0, scale, free, s):
    """Levenberg-Marquardt in scaled coordinates ``q = p / scale``."""
    def resid(p):
        return sw * (beat_model(tau, p, s) - y)

    p = p0.copy()
    r = resid(p)
    cost = float(r @ r)
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        j = (sw[:, None] * _jacobian(tau, p, s))[:, free] * scale[free]
        jtj = j.T @ j
        g = j.T @ r
        diag = np.maximum(np.diag(jtj), 1e-9 * max(np.max(np.diag(jtj)), 1e-300))
        improved = False
        while lam < 1e16:
            try:
                dq = -np.linalg.solve(jtj + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = p.copy()
            trial[free] += dq * scale[free]
            r_new = resid(trial)
            cost_new = float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new <= cost:
                improved = True
                lam = max(lam / 3.0, 1e-12)
                break
            lam *= 4.0
        if not improved:
            converged = True  # no downhill step at any damping: stationary point
            break
        small = np.all(np.abs(dq) <= XTOL * (np.abs(trial[free] / scale[free]) + 1.0))
        p, r, cost = trial, r_new, cost_new
        if small or cost == 0.0:
            converged = True
            break
    return p, cost, it, converged


def _multistart(tau, y, sw, base, scale, free, s, delta_guess):
    """Best converged LM run over a few beat phase/frequency starts."""
    runs = []
    deltas = {delta_guess, 0.0} if free[3] else {base[3]}
    phases = (0.0, 0.5 * math.pi, math.pi, -0.5 * math.pi) if free[4] else (base[4],)
    for phi0 in phases:
        for d0 in deltas:
            start = base.copy()
            start[3], start[4] = d0, phi0
            runs.append(_lm(tau, y, sw, start, scale, free, s))
    pool = [r for r in runs if r[3]] or runs
    p, cost, it, ok = min(pool, key=lambda r: r[1])
    return p, cost, it, ok, "levenberg-marquardt"


def fit(data: Interferogram, sign: Kind | str, fit_center: bool = False,
        guess: BeatFitModel | None = None) -> FitResult:
    """Weighted least-squares fit of the Gaussian-beat model to ``data``.

    Weights are ``1/stderr^2`` when every sample has a positive error, else
    uniform; in the uniform case the covariance is scaled by the residual
    variance. Raises ``FitError`` (with ``best`` attached) when no start
    converges within the iteration cap.
    """
    _check(data)
    sign = Kind.parse(sign)
    s = _sgn(sign)
    tau, y = data.taus, data.values
    weighted = bool(np.all(data.stderr > 0))
    sw = 1.0 / data.stderr if weighted else np.ones_like(y)
    g0 = guess or initial_guess(data, sign)
    base = g0._vector()
    w0 = g0.envelope_width
    scale = np.array([abs(g0.baseline), 1.0, w0, 1.0 / w0, 1.0, w0])
    free = np.array([True, True, True, True, True, fit_center])

    p, cost, it, ok, method = _multistart(tau, y, sw, base, scale, free, s, g0.beat_freq)
    p = _canonical(p)
    # below one radian of beat phase per envelope width the beat cannot be
    # told apart from a change in visibility and width
    if p[3] * p[2] < BEAT_RESOLVED:
        free[3] = free[4] = False
        base = base.copy()
        base[3] = base[4] = 0.0
        p, cost, it, ok, method = _multistart(tau, y, sw, base, scale, free, s, 0.0)
        method += ", beat unresolved (delta, phi fixed at 0)"

    j = (sw[:, None] * _jacobian(tau, p, s))[:, free] * scale[free]
    sv = np.linalg.svd(j, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0] or not ok:
        def objective(q):
            pp = p.copy()
            pp[free] = q * scale[free]
            r = sw * (beat_model(tau, pp, s) - y)
            return float(r @ r)

        res = minimize(objective, p[free] / scale[free], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14 * max(cost, 1e-300), "maxiter": 20000,
                                "maxfev": 40000, "adaptive": True})
        it += int(res.nit)
        if res.fun < cost:
            p = p.copy()
            p[free] = res.x * scale[free]
            cost, method = float(res.fun), "nelder-mead"
        ok = ok or bool(res.success)

    p = _canonical(p)
    n_free = int(free.sum())
    j = (sw[:, None] * _jacobian(tau, p, s))[:, free] * scale[free]
    cov = np.linalg.pinv(j.T @ j)
    if not weighted:
        cov *= cost / max(len(y) - n_free, 1)
    errs = np.full(len(PARAMS), 0.0)
    errs[free] = np.sqrt(np.clip(np.diag(cov), 0.0, None)) * scale[free]
    resid = beat_model(tau, p, s) - y
    rms = float(np.sqrt(np.mean(resid**2)))
    stderr = {name: float(e) for name, e, on in zip(PARAMS, errs, free) if on}

    try:
        model = BeatFitModel(*(float(x) for x in p[:5]), sign, float(p[5]))
    except ValueError as exc:
        raise FitError(f"fit left the model domain: {exc}") from None
    result = FitResult(model, stderr, rms, it, ok, method, cost)
    if not ok:
        raise FitError(f"fit did not converge within {MAX_ITER} iterations", best=result)
    return result
