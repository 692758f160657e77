"""Analytic HOM peak and dip for frequency-displaced Gaussian packets.

Writes both interferograms (CSV + SVG) and prints where the peak curve first
vanishes and the dip curve first peaks, next to pi/delta.
"""

import argparse
import math
from pathlib import Path

import numpy as np

from hompeak.coincidence import scan
from hompeak.plotting import plot_interferogram
from hompeak.wavepacket import WavePacket


def first_extremum(values, minimum):
    sgn = 1 if minimum else -1
    v = sgn * values
    for i in range(1, len(v) - 1):
        if v[i] <= v[i - 1] and v[i] <= v[i + 1]:
            return i
    raise ValueError("no interior extremum")


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sigma", type=float, default=1e-6, help="packet width [s]")
    ap.add_argument("--delta", type=float, default=2e7, help="frequency displacement [rad/s]")
    ap.add_argument("--span", type=float, default=5e-7, help="scan half-range [s]")
    ap.add_argument("--points", type=int, default=401)
    ap.add_argument("--out", default="results/fig2")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    taus = np.linspace(-args.span, args.span, args.points)
    ea, eb = WavePacket(0.0, args.sigma), WavePacket(0.0, args.sigma, args.delta)
    positive = taus > 0
    for kind in ("peak", "dip"):
        ifg = scan(ea, eb, taus, kind, normalize=True)
        (out / f"{kind}.csv").write_text(ifg.to_csv())
        plot_interferogram(ifg, out / f"{kind}.svg", title=f"analytic {kind}, delta={args.delta:g} rad/s")
        i = first_extremum(ifg.values[positive], minimum=(kind == "peak"))
        label = "first zero" if kind == "peak" else "first maximum"
        print(f"{kind}: {label} at {taus[positive][i]:.4e} s (pi/delta = {math.pi / args.delta:.4e} s)")


if __name__ == "__main__":
    main()
