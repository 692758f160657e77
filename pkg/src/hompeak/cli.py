"""Command-line harness.

    hompeak scan --config cfg.json [--out DIR] [--seed N] [--trials N] [--plot]
    hompeak hbt  --config cfg.json ...
    hompeak fit  --config cfg.json | --input data.csv [--sign dip|peak]
    hompeak recipes list
    hompeak recipes run NAME [--out DIR] [--seed N] [--trials N] [--plot]

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from hompeak.coincidence import Interferogram, Kind, scan
from hompeak.config import ConfigError, ExperimentConfig, FitConfig, load_config, parse_config
from hompeak.fitting import FitError, fit
from hompeak.montecarlo import (
    RNG_ALGORITHM,
    DetectorModel,
    SourceModel,
    TrialRng,
    hbt_scan,
    hom_network,
    run_hom_scan,
)
from hompeak.wavepacket import WavePacket

log = logging.getLogger("hompeak")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
SCAN_MODES = ("analytic-dip", "analytic-peak", "wcs-dip", "wcs-peak")


def _detector(cfg: ExperimentConfig, role: str) -> DetectorModel:
    d = cfg.detector(role)
    return DetectorModel(d.efficiency, d.dark_prob, d.gate_width)


def _source(cfg: ExperimentConfig) -> SourceModel:
    return SourceModel(mu=cfg.source.mu, phase_randomized=cfg.source.phase_randomized,
                       freq_displacement=cfg.packet.delta_rel, sigma=cfg.packet.sigma, theta=cfg.source.theta)


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def run_scan(cfg: ExperimentConfig, out: Path, plot: bool = False) -> list[Path]:
    kind = Kind.DIP if cfg.mode.endswith("dip") else Kind.PEAK
    taus = cfg.tau_grid()
    if cfg.mode.startswith("analytic"):
        ea = WavePacket(0.0, cfg.packet.sigma)
        eb = WavePacket(0.0, cfg.packet.sigma, cfg.packet.delta_rel)
        ifg = scan(ea, eb, taus, kind, normalize=cfg.normalize)
    else:
        ifg = run_hom_scan(_source(cfg), hom_network(kind), _detector(cfg, "monitor"), taus,
                           cfg.trials, TrialRng(cfg.seed))
        if cfg.normalize:
            ifg = ifg.normalized()
    ifg.config = {"experiment": cfg.to_dict(), **ifg.config}
    paths = [_write(out / f"{cfg.name}.csv", ifg.to_csv()), _write(out / f"{cfg.name}.json", ifg.to_json())]
    if plot:
        from hompeak.plotting import plot_interferogram

        plot_interferogram(ifg, out / f"{cfg.name}.svg", title=cfg.name)
        paths.append(out / f"{cfg.name}.svg")
    return paths


HBT_COLUMNS = ("delay_s", "g2", "g2_stderr", "n_herald", "n_A", "n_B", "n_AB")


def _hbt_csv(points, header: dict) -> str:
    lines = ["# " + json.dumps(header, sort_keys=True), ",".join(HBT_COLUMNS)]
    for p in points:
        row = p.as_dict()
        lines.append(",".join("nan" if row[c] is None else repr(row[c]) for c in HBT_COLUMNS))
    return "\n".join(lines) + "\n"


def run_hbt_scan(cfg: ExperimentConfig, out: Path, plot: bool = False) -> list[Path]:
    source = _source(cfg)
    herald, ab = _detector(cfg, "herald"), _detector(cfg, "ab")
    delays = cfg.tau_grid()
    header = {"experiment": cfg.to_dict(), "rng": RNG_ALGORITHM}
    doc = dict(header, scans={})
    paths = []
    for i, kind in enumerate(cfg.hbt_kinds):
        points = hbt_scan(source, herald, ab, delays, cfg.trials, TrialRng(cfg.seed, stream=i), kind)
        doc["scans"][kind] = [p.as_dict() for p in points]
        paths.append(_write(out / f"{cfg.name}_{kind}.csv", _hbt_csv(points, dict(header, kind=kind))))
        if plot:
            from hompeak.plotting import plot_hbt

            plot_hbt(points, out / f"{cfg.name}_{kind}.svg", title=f"{cfg.name} ({kind})")
            paths.append(out / f"{cfg.name}_{kind}.svg")
    paths.insert(0, _write(out / f"{cfg.name}.json", json.dumps(doc, sort_keys=True, indent=2) + "\n"))
    return paths


def _read_interferogram(fc: FitConfig, out: Path) -> Interferogram:
    src = Path(fc.input)
    if not src.is_absolute() and not src.exists() and (out / src).exists():
        src = out / src
    try:
        text = src.read_text()
    except OSError as exc:
        raise ConfigError("fit.input", f"cannot read {src}: {exc.strerror}") from None
    try:
        return Interferogram.from_json(text) if src.suffix == ".json" else Interferogram.from_csv(text)
    except (ValueError, KeyError) as exc:
        raise ConfigError("fit.input", f"{src} is not an interferogram file: {exc}") from None


def run_fit(cfg: ExperimentConfig, out: Path, plot: bool = False) -> list[Path]:
    data = _read_interferogram(cfg.fit, out)
    try:
        result = fit(data, cfg.fit.sign, fit_center=cfg.fit.fit_center)
    except FitError as exc:
        if exc.best is not None:
            _write(out / f"{cfg.name}.json", json.dumps({"experiment": cfg.to_dict(), **exc.best.as_dict()},
                                                         sort_keys=True, indent=2) + "\n")
        raise
    doc = {"experiment": cfg.to_dict(), **result.as_dict()}
    paths = [_write(out / f"{cfg.name}.json", json.dumps(doc, sort_keys=True, indent=2) + "\n")]
    if plot:
        from hompeak.plotting import plot_interferogram

        plot_interferogram(data, out / f"{cfg.name}.svg", fitted=result.model, title=cfg.name)
        paths.append(out / f"{cfg.name}.svg")
    return paths


def run(cfg: ExperimentConfig, out: str | Path, plot: bool = False) -> list[Path]:
    """Execute one experiment and return the files written."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.mode in SCAN_MODES:
        return run_scan(cfg, out, plot)
    if cfg.mode == "hbt-scan":
        return run_hbt_scan(cfg, out, plot)
    return run_fit(cfg, out, plot)


def recipe_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("hompeak.recipes").iterdir() if p.name.endswith(".json"))


def load_recipe(name: str) -> ExperimentConfig:
    if name not in recipe_names():
        raise ConfigError("recipe", f"unknown recipe {name!r}; available: {', '.join(recipe_names())}")
    raw = json.loads(resources.files("hompeak.recipes").joinpath(f"{name}.json").read_text())
    return parse_config(raw)


def _overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed", "must be an unsigned 64-bit integer")
        cfg = replace(cfg, seed=args.seed)
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("--trials", "must be >= 1")
        cfg = replace(cfg, trials=args.trials)
    return cfg


def _common(p: argparse.ArgumentParser, config: bool = True):
    if config:
        p.add_argument("--config", help="experiment config (or a result file embedding one)")
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--trials", type=int, help="override trials per point")
    p.add_argument("--plot", action="store_true", help="also write SVG plots")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hompeak", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("scan", help="analytic or Monte Carlo HOM interferogram"))
    _common(sub.add_parser("hbt", help="heralded HBT g2(0) scan"))
    p = sub.add_parser("fit", help="fit the Gaussian-beat model to an interferogram")
    _common(p)
    p.add_argument("--input", help="interferogram CSV/JSON (instead of --config)")
    p.add_argument("--sign", choices=("dip", "peak"), default="dip")
    p.add_argument("--fit-center", action="store_true")
    rec = sub.add_parser("recipes", help="bundled experiment recipes")
    rsub = rec.add_subparsers(dest="recipe_command", required=True)
    rsub.add_parser("list")
    p = rsub.add_parser("run")
    p.add_argument("name")
    _common(p, config=False)
    return parser


def _config_for(args) -> ExperimentConfig:
    if args.command == "recipes":
        return load_recipe(args.name)
    if args.command == "fit" and args.input:
        return parse_config({"mode": "fit", "name": Path(args.input).stem + "_fit",
                             "fit": {"input": args.input, "sign": args.sign, "fit_center": args.fit_center}})
    if not args.config:
        raise ConfigError("--config", "required")
    cfg = load_config(args.config)
    expected = {"scan": SCAN_MODES, "hbt": ("hbt-scan",), "fit": ("fit",)}[args.command]
    if cfg.mode not in expected:
        raise ConfigError("mode", f"{cfg.mode!r} cannot run under '{args.command}' (expected {', '.join(expected)})")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "recipes" and args.recipe_command == "list":
        for name in recipe_names():
            cfg = load_recipe(name)
            print(f"{name:16s} {cfg.mode}")
        return EXIT_OK
    try:
        cfg = _overrides(_config_for(args), args)
        paths = run(cfg, args.out, plot=args.plot)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, FitError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
