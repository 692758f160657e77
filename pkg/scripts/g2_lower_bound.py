"""Sweep the heralded-g2 oracle over rates, detectors and delays.

With A and B both fed by the same analysed mode (the other splitter port is
vacuum), their click probabilities rise together with that mode's intensity,
so for any herald weighting over the random phase the heralded g2 cannot fall
below 1. This prints the sweep minimum as a numerical check.
"""

import itertools
import warnings

from hompeak.montecarlo import DetectorModel, MuBoundWarning, SourceModel, hbt_expected


def main():
    warnings.simplefilter("ignore", MuBoundWarning)
    sigma = 2e-9
    worst = (float("inf"), None)
    grid = itertools.product(("peak", "dip"), (0.005, 0.05, 0.2, 0.5, 1.0), ((0.15, 1e-5), (1.0, 0.0), (0.5, 1e-3)),
                             (0.0, 0.5, 1.0, 2.0, 5.0), (0.0, 1e8, 1e9))
    for kind, mu, (eta, dark), delay, delta in grid:
        src = SourceModel(mu, sigma=sigma, freq_displacement=delta)
        det = DetectorModel(eta, dark)
        g2 = hbt_expected(src, det, det, delay * sigma, kind)["g2"]
        if g2 < worst[0]:
            worst = (g2, (kind, mu, eta, dark, delay, delta))
    print(f"minimum heralded g2 over sweep: {worst[0]:.6f} at (kind, mu, eta, dark, delay/sigma, delta) = {worst[1]}")


if __name__ == "__main__":
    main()
