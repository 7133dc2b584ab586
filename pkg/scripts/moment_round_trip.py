"""Measure -> moments -> solve -> measure over random flat instances, grouped
by (r, l); prints recovery errors and condition-(B) sharpness."""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field

import numpy as np

from momext.moment_problem import check_condition_B, match_atoms, random_flat_instance, solve, verify_solution


@dataclass
class RoundTripConfig:
    shapes: list = field(default_factory=lambda: [(1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)])
    trials_per_shape: int = 20
    max_atoms: int = 6
    seed: int = 0


def run(cfg: RoundTripConfig):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for r, l in cfg.shapes:
        # Hankel-only boxes are badly conditioned beyond a few atoms.
        kmax = cfg.max_atoms if l else min(cfg.max_atoms, 3)
        hd = werr = dev = sharp = 0.0
        t0 = time.perf_counter()
        for _ in range(cfg.trials_per_shape):
            mu, S = random_flat_instance(rng, r, l, int(rng.integers(1, kmax + 1)))
            nu = solve(S)
            h, _, w = match_atoms(mu, nu)
            hd, werr = max(hd, h), max(werr, w)
            dev = max(dev, verify_solution(nu, S).max_deviation)
            for j, c in check_condition_B(S).constants.items():
                sharp = max(sharp, abs(c - np.max(mu.x[:, j - 1] ** 2)))
        rows.append((r, l, hd, werr, dev, sharp, time.perf_counter() - t0))
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--trials", type=int, default=RoundTripConfig.trials_per_shape)
    p.add_argument("--seed", type=int, default=RoundTripConfig.seed)
    a = p.parse_args(argv)
    rows = run(RoundTripConfig(trials_per_shape=a.trials, seed=a.seed))
    print(f"{'r':>2} {'l':>2} {'hausdorff':>10} {'weight err':>10} {'moment dev':>10} {'|C_j-max x^2|':>14} {'sec':>6}")
    for r, l, hd, w, dev, sharp, sec in rows:
        print(f"{r:>2} {l:>2} {hd:10.2e} {w:10.2e} {dev:10.2e} {sharp:14.2e} {sec:6.2f}")


if __name__ == "__main__":
    main()
