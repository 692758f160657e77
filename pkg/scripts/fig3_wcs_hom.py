"""Monte Carlo weak-coherent-state HOM dip and peak, with fitted visibilities."""

import argparse
from pathlib import Path

import numpy as np

from hompeak.fitting import fit
from hompeak.montecarlo import DetectorModel, SourceModel, TrialRng, hom_network, run_hom_scan, visibility
from hompeak.plotting import plot_interferogram


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, nargs="+", default=[0.05, 0.1, 0.2])
    ap.add_argument("--sigma", type=float, default=2e-9)
    ap.add_argument("--efficiency", type=float, default=0.15)
    ap.add_argument("--dark", type=float, default=1e-5)
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--points", type=int, default=41)
    ap.add_argument("--seed", type=int, default=2017)
    ap.add_argument("--out", default="results/fig3")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    det = DetectorModel(args.efficiency, args.dark)
    taus = np.linspace(-10 * args.sigma, 10 * args.sigma, args.points)
    print("kind  mu     V(contrast)      V(fit)")
    for stream, kind in enumerate(("dip", "peak")):
        for point, mu in enumerate(args.mu):
            src = SourceModel(mu, sigma=args.sigma)
            ifg = run_hom_scan(src, hom_network(kind), det, taus, args.trials, TrialRng(args.seed, 10 * stream + point))
            v, err = visibility(ifg, far=6 * args.sigma)
            res = fit(ifg, kind)
            tag = f"{kind}_mu{mu:g}"
            (out / f"{tag}.csv").write_text(ifg.to_csv())
            plot_interferogram(ifg, out / f"{tag}.svg", fitted=res.model, title=tag)
            print(f"{kind:5s} {mu:<5g}  {v:.3f} +- {err:.3f}   {res.model.visibility:.3f} +- "
                  f"{res.stderr['visibility']:.3f}")


if __name__ == "__main__":
    main()
