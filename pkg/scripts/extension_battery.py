"""Random commuting tuples, rotated into random bases, pushed through
build_extension; reports worst defects and timing."""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

import numpy as np

from momext.cayley_extension import build_extension, generate_instance, rotate_instance
from momext.errors import EigenvalueOne
from momext.numerics import dagger, fro, haar_unitary


@dataclass
class BatteryConfig:
    trials: int = 200
    max_dim: int = 24
    max_codim: int = 4
    max_rho: int = 3
    max_tau: int = 2
    seed: int = 0
    rotate: bool = True


def run(cfg: BatteryConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    worst = {"extension": 0.0, "self_adjointness": 0.0, "commutation": 0.0}
    eigenvalue_one = 0
    t0 = time.perf_counter()
    for trial in range(cfg.trials):
        n = int(rng.integers(2, cfg.max_dim + 1))
        codim = int(rng.integers(1, min(cfg.max_codim, n - 1) + 1))
        T = generate_instance(n, codim, int(rng.integers(1, cfg.max_rho + 1)),
                              int(rng.integers(0, cfg.max_tau + 1)), seed=cfg.seed * 100003 + trial)
        if cfg.rotate:
            T = rotate_instance(T, haar_unitary(n, rng))
        try:
            A = build_extension(T).A1_hat
        except EigenvalueOne:
            eigenvalue_one += 1
            continue
        ext = max(np.linalg.norm(A @ q - a) for q, a in zip(T.A1.domain.basis.T, T.A1.action.T))
        worst["extension"] = max(worst["extension"], ext)
        worst["self_adjointness"] = max(worst["self_adjointness"], fro(A - dagger(A)) / fro(A))
        for X in T.A_rest + T.B_list:
            worst["commutation"] = max(worst["commutation"], fro(A @ X - X @ A) / (fro(A) * fro(X)))
    return {"worst": worst, "eigenvalue_one": eigenvalue_one, "seconds": time.perf_counter() - t0}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--trials", type=int, default=BatteryConfig.trials)
    p.add_argument("--max-dim", type=int, default=BatteryConfig.max_dim)
    p.add_argument("--seed", type=int, default=BatteryConfig.seed)
    p.add_argument("--no-rotate", action="store_true")
    a = p.parse_args(argv)
    out = run(BatteryConfig(trials=a.trials, max_dim=a.max_dim, seed=a.seed, rotate=not a.no_rotate))
    for k, v in out["worst"].items():
        print(f"worst {k:17s} {v:.3e}")
    print(f"EigenvalueOne failures  {out['eigenvalue_one']}")
    print(f"elapsed                 {out['seconds']:.2f} s")


if __name__ == "__main__":
    main()
