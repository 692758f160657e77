"""Experiment configuration: JSON schema, validation and loading.

A config is a JSON object::

    {
      "name": "fig2_peak",                  # output file stem
      "mode": "analytic-peak",              # analytic-dip | analytic-peak | wcs-dip | wcs-peak | hbt-scan | fit
      "packet": {"sigma": 1e-6, "delta_rel": 2e7},     # seconds, rad/s
      "source": {"mu": 0.05, "phase_randomized": true},
      "detectors": {"monitor": {...}, "herald": {...}, "ab": {...}},
      "tau": {"start": -5e-7, "stop": 5e-7, "count": 401},   # or "taus": [...]
      "trials": 1000000,
      "seed": 42,
      "normalize": false,
      "hbt_kinds": ["peak", "dip"],
      "fit": {"input": "fig3_dip.csv", "sign": "dip", "fit_center": false}
    }

Detector entries take ``efficiency``, ``dark_prob`` and ``gate_width``.
Unknown keys are errors.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from hompeak.montecarlo import MU_MODEL_LIMIT

__all__ = ["ConfigError", "ExperimentConfig", "MODES", "load_config", "parse_config"]

log = logging.getLogger(__name__)

MODES = ("analytic-dip", "analytic-peak", "wcs-dip", "wcs-peak", "hbt-scan", "fit")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class PacketConfig:
    sigma: float = 1e-6
    delta_rel: float = 0.0


@dataclass
class SourceConfig:
    mu: float = 0.05
    phase_randomized: bool = True
    theta: float = 0.0


@dataclass
class DetectorConfig:
    efficiency: float = 0.15
    dark_prob: float = 1e-5
    gate_width: float = 4e-9


@dataclass
class FitConfig:
    input: str = ""
    sign: str = "dip"
    fit_center: bool = False


@dataclass
class ExperimentConfig:
    mode: str
    name: str = "experiment"
    packet: PacketConfig = field(default_factory=PacketConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    detectors: dict[str, DetectorConfig] = field(default_factory=dict)
    tau: dict[str, float] | None = None
    taus: list[float] | None = None
    trials: int = 1_000_000
    seed: int = 0
    normalize: bool = False
    hbt_kinds: list[str] = field(default_factory=lambda: ["peak", "dip"])
    fit: FitConfig | None = None

    def tau_grid(self) -> np.ndarray:
        if self.taus is not None:
            return np.asarray(self.taus, dtype=float)
        return np.linspace(self.tau["start"], self.tau["stop"], int(self.tau["count"]))

    def detector(self, role: str) -> DetectorConfig:
        return self.detectors.get(role, DetectorConfig())

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["detectors"] = {k: asdict(v) for k, v in sorted(self.detectors.items())}
        return {k: v for k, v in d.items() if v is not None}


def _reject_unknown(obj: dict, allowed, where: str):
    for key in obj:
        if key not in allowed:
            hint = ""
            if "hz" in key.lower():
                hint = " (frequencies are given in rad/s via 'delta_rel'; Hz/MHz fields are not accepted)"
            raise ConfigError(f"{where}{key}", f"unknown field{hint}")


def _number(value, name: str, *, positive=False, lo=None, hi=None, hi_open=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(name, "must be finite")
    if positive and value <= 0:
        raise ConfigError(name, f"must be > 0, got {value}")
    if lo is not None and value < lo:
        raise ConfigError(name, f"must be >= {lo}, got {value}")
    if hi is not None and (value >= hi if hi_open else value > hi):
        raise ConfigError(name, f"must be {'<' if hi_open else '<='} {hi}, got {value}")
    return value


def _bool(value, name: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(name, f"expected true/false, got {value!r}")
    return value


def _int(value, name: str, lo: int, hi: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise ConfigError(name, f"expected an integer, got {value!r}")
    if value < lo or (hi is not None and value > hi):
        raise ConfigError(name, f"must lie in [{lo}, {hi if hi is not None else 'inf'}], got {value}")
    return value


def _object(value, name: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(name, f"expected an object, got {type(value).__name__}")
    return value


def parse_config(raw: dict[str, Any]) -> ExperimentConfig:
    """Validate a decoded JSON object and build an ``ExperimentConfig``."""
    raw = _object(raw, "<root>")
    _reject_unknown(raw, {f for f in ExperimentConfig.__dataclass_fields__}, "")
    if "mode" not in raw:
        raise ConfigError("mode", f"required; one of {', '.join(MODES)}")
    mode = raw["mode"]
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}, got {mode!r}")
    name = raw.get("name", "experiment")
    if not isinstance(name, str) or not name or "/" in name:
        raise ConfigError("name", f"must be a non-empty file stem, got {name!r}")

    pk = _object(raw.get("packet", {}), "packet")
    _reject_unknown(pk, PacketConfig.__dataclass_fields__, "packet.")
    packet = PacketConfig(
        sigma=_number(pk.get("sigma", 1e-6), "packet.sigma", positive=True),
        delta_rel=_number(pk.get("delta_rel", 0.0), "packet.delta_rel"),
    )

    sc = _object(raw.get("source", {}), "source")
    _reject_unknown(sc, SourceConfig.__dataclass_fields__, "source.")
    source = SourceConfig(
        mu=_number(sc.get("mu", 0.05), "source.mu", positive=True),
        phase_randomized=_bool(sc.get("phase_randomized", True), "source.phase_randomized"),
        theta=_number(sc.get("theta", 0.0), "source.theta"),
    )
    if source.mu > MU_MODEL_LIMIT and mode in ("wcs-dip", "wcs-peak", "hbt-scan"):
        log.warning("source.mu=%g exceeds the %g validity bound of the WCS model", source.mu, MU_MODEL_LIMIT)

    detectors = {}
    for role, d in _object(raw.get("detectors", {}), "detectors").items():
        if role not in ("monitor", "herald", "ab"):
            raise ConfigError(f"detectors.{role}", "unknown detector role (use monitor, herald, ab)")
        d = _object(d, f"detectors.{role}")
        _reject_unknown(d, DetectorConfig.__dataclass_fields__, f"detectors.{role}.")
        detectors[role] = DetectorConfig(
            efficiency=_number(d.get("efficiency", 0.15), f"detectors.{role}.efficiency", lo=0.0, hi=1.0),
            dark_prob=_number(d.get("dark_prob", 1e-5), f"detectors.{role}.dark_prob", lo=0.0, hi=1.0, hi_open=True),
            gate_width=_number(d.get("gate_width", 4e-9), f"detectors.{role}.gate_width", positive=True),
        )

    tau = taus = None
    if mode != "fit":
        if ("tau" in raw) == ("taus" in raw):
            raise ConfigError("tau", "give exactly one of 'tau' {start, stop, count} or 'taus' [list]")
        if "tau" in raw:
            t = _object(raw["tau"], "tau")
            _reject_unknown(t, ("start", "stop", "count"), "tau.")
            for k in ("start", "stop", "count"):
                if k not in t:
                    raise ConfigError(f"tau.{k}", "required")
            tau = {
                "start": _number(t["start"], "tau.start"),
                "stop": _number(t["stop"], "tau.stop"),
                "count": _int(t["count"], "tau.count", 2),
            }
            if tau["stop"] <= tau["start"]:
                raise ConfigError("tau.stop", "must be greater than tau.start")
        else:
            if not isinstance(raw["taus"], list) or len(raw["taus"]) < 2:
                raise ConfigError("taus", "expected a list of at least 2 delays")
            taus = [_number(x, f"taus[{i}]") for i, x in enumerate(raw["taus"])]
            if any(b <= a for a, b in zip(taus, taus[1:])):
                raise ConfigError("taus", "must be strictly increasing")

    kinds = raw.get("hbt_kinds", ["peak", "dip"])
    if not isinstance(kinds, list) or not kinds or any(k not in ("peak", "dip") for k in kinds):
        raise ConfigError("hbt_kinds", f"expected a non-empty list drawn from 'peak', 'dip', got {kinds!r}")

    fit = None
    if mode == "fit" or "fit" in raw:
        f = _object(raw.get("fit", {}), "fit")
        _reject_unknown(f, FitConfig.__dataclass_fields__, "fit.")
        if mode == "fit" and not f.get("input"):
            raise ConfigError("fit.input", "required in fit mode")
        if f.get("sign", "dip") not in ("dip", "peak"):
            raise ConfigError("fit.sign", f"must be 'dip' or 'peak', got {f.get('sign')!r}")
        fit = FitConfig(str(f.get("input", "")), f.get("sign", "dip"),
                        _bool(f.get("fit_center", False), "fit.fit_center"))

    return ExperimentConfig(
        mode=mode,
        name=name,
        packet=packet,
        source=source,
        detectors=detectors,
        tau=tau,
        taus=taus,
        trials=_int(raw.get("trials", 1_000_000), "trials", 1),
        seed=_int(raw.get("seed", 0), "seed", 0, 2**64 - 1),
        normalize=_bool(raw.get("normalize", False), "normalize"),
        hbt_kinds=list(kinds),
        fit=fit,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Load a config file, or the config embedded in a result file (JSON or CSV)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        if path.suffix == ".csv":
            first = text.splitlines()[0] if text else ""
            if not first.startswith("#"):
                raise ConfigError("--config", f"{path} carries no embedded config")
            doc = json.loads(first[1:])
        else:
            doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"{path} is not valid JSON: {exc}") from None
    return parse_config(_embedded(doc))


def _embedded(doc):
    if isinstance(doc, dict):
        if "experiment" in doc:
            return doc["experiment"]
        if isinstance(doc.get("config"), dict) and "experiment" in doc["config"]:
            return doc["config"]["experiment"]
    return doc
