#!/usr/bin/env python3
"""Monte-Carlo localization accuracy for convex vs non-convex anchor layouts.

Anchors sit roughly 8 m from the target; bearings carry truncated Gaussian
noise. The convex layout spreads 7 anchors around the full circle, the
non-convex one packs 6 anchors into a sector, which degrades conditioning.
"""

import argparse
import math

import numpy as np

from csibearing import BearingObservation, localize


def trial(seed: int, convex: bool, sigma_deg: float, sector_deg: float) -> float:
    rng = np.random.default_rng(seed)
    target = rng.uniform(-1.0, 1.0, 2)
    if convex:
        n = 7
        angles = 2 * math.pi * np.arange(n) / n + rng.uniform(0, 2 * math.pi)
    else:
        n = 6
        angles = math.radians(sector_deg) * np.arange(n) / (n - 1) + rng.uniform(0, 2 * math.pi)
    radii = rng.uniform(7.0, 9.0, n)
    anchors = target + np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
    sigma = math.radians(sigma_deg)
    noise = np.clip(rng.normal(0.0, sigma, n), -3 * sigma, 3 * sigma)
    observations = [
        BearingObservation(a, math.atan2(*(target - a)[::-1]) + dn)
        for a, dn in zip(anchors, noise)
    ]
    return float(np.linalg.norm(localize(observations).position - target))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--sigma-deg", type=float, default=5.10, help="bearing noise std")
    parser.add_argument("--sector-deg", type=float, default=100.0)
    args = parser.parse_args()

    for convex in (True, False):
        errors = [
            trial(seed, convex, args.sigma_deg, args.sector_deg)
            for seed in range(args.trials)
        ]
        label = "convex-hull (7)" if convex else f"non-convex (6, {args.sector_deg:.0f} deg)"
        print(
            f"{label:<24} median {np.median(errors):.3f} m   "
            f"p90 {np.percentile(errors, 90):.3f} m   mean {np.mean(errors):.3f} m"
        )


if __name__ == "__main__":
    main()
