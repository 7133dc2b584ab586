"""Regenerate the JSON fixtures and golden CLI outputs under tests/fixtures."""
from __future__ import annotations

import argparse
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from momext import serialization as io
from momext.antilinear import Conjugation
from momext.cayley_extension import CommutingTupleInstance, PartialSymmetricOperator
from momext.moment_problem import AtomicMeasure, MomentTable
from momext.numerics import Subspace, haar_unitary


@dataclass
class FixtureConfig:
    out_dir: Path = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
    seed: int = 20240611
    family_dim: int = 6


def theta_tuple(theta: float) -> CommutingTupleInstance:
    e1 = np.array([[1.0], [0.0]], dtype=complex)
    A1 = PartialSymmetricOperator(2, Subspace(2, e1), e1.copy())
    B = np.diag([1.0, np.exp(1j * theta)])
    return CommutingTupleInstance(2, A1, [], [B], Conjugation.plain(2), 1j)


def commuting_family(cfg: FixtureConfig):
    rng = np.random.default_rng(cfg.seed)
    V = haar_unitary(cfg.family_dim, rng)
    out = []
    for _ in range(3):
        ph = rng.uniform(-np.pi, np.pi, cfg.family_dim)
        ph[1] = ph[0]  # a repeated eigenvalue
        out.append((V * np.exp(1j * ph)) @ V.conj().T)
    return out


def write_inputs(cfg: FixtureConfig):
    d = cfg.out_dir
    d.mkdir(parents=True, exist_ok=True)
    io.write_json(d / "commuting_family.json", {"unitaries": [io.matrix_to_json(U) for U in commuting_family(cfg)]})
    io.write_json(d / "identity_family.json", {"unitaries": [io.matrix_to_json(np.eye(3))]})
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.diag([1, -1]).astype(complex)
    io.write_json(d / "noncommuting_family.json", {"unitaries": [io.matrix_to_json(X), io.matrix_to_json(Z)]})
    bad = io.matrix_to_json(np.eye(2))
    bad["data"] = bad["data"][:3]
    io.write_json(d / "malformed_family.json", {"unitaries": [bad]})

    io.write_json(d / "theta_pi3_tuple.json", io.tuple_to_json(theta_tuple(np.pi / 3)))
    io.write_json(d / "theta_zero_tuple.json", io.tuple_to_json(theta_tuple(0.0)))
    A = np.diag([0.5, -1.25, 2.0]).astype(complex)
    io.write_json(
        d / "codim0_tuple.json",
        io.tuple_to_json(CommutingTupleInstance(3, PartialSymmetricOperator.total(A), [], [np.diag([1j, -1, 1j])])),
    )
    flip = theta_tuple(np.pi / 3)
    flip = CommutingTupleInstance(2, flip.A1, [], flip.B_list, Conjugation(np.array([[0, 1], [1, 0]])), 1j)
    io.write_json(d / "violating_tuple.json", io.tuple_to_json(flip))

    two = AtomicMeasure.from_atoms(1, 1, [((1.0,), (0.0,), 0.5), ((-1.0,), (np.pi / 2,), 0.5)])
    io.write_json(d / "two_atom_measure.json", io.measure_to_json(two))
    dirac = AtomicMeasure.from_atoms(1, 1, [((0.0,), (0.0,), 1.0)])
    io.write_json(d / "dirac_measure.json", io.measure_to_json(dirac))
    neg = {((0,), (0,)): -1.0}
    S = MomentTable(1, 1, (1,), (1,), {ix: neg.get(ix, 0.0) for ix in MomentTable(1, 1, (1,), (1,), {}).required_indices()})
    io.write_json(d / "negative_mass_moments.json", io.moments_to_json(S))


def momext(*args):
    return subprocess.run([sys.executable, "-m", "momext", *map(str, args)], check=True, capture_output=True, text=True)


def write_golden(cfg: FixtureConfig):
    d = cfg.out_dir
    g = d / "golden"
    g.mkdir(exist_ok=True)
    momext("gen-moments", "--measure", d / "two_atom_measure.json", "--m-box", "3", "--n-box", "3",
           "--output", d / "two_atom_moments.json")
    momext("gen-moments", "--measure", d / "dirac_measure.json", "--m-box", "1", "--n-box", "1",
           "--output", d / "dirac_moments.json")
    momext("factorize", "--input", d / "commuting_family.json", "--mode", "right", "--seed", 0,
           "--output", g / "factorize_right.json")
    momext("factorize", "--input", d / "commuting_family.json", "--mode", "left", "--seed", 0,
           "--output", g / "factorize_left.json")
    momext("extend", "--tuple", d / "theta_pi3_tuple.json", "--seed", 0, "--output", g / "extend_theta_pi3.json")
    momext("solve", "--moments", d / "two_atom_moments.json", "--seed", 0, "--output", g / "solve_two_atom.json")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out-dir", type=Path, default=FixtureConfig.out_dir)
    p.add_argument("--skip-golden", action="store_true")
    args = p.parse_args(argv)
    cfg = FixtureConfig(out_dir=args.out_dir)
    write_inputs(cfg)
    if not args.skip_golden:
        write_golden(cfg)
    print(f"fixtures written to {cfg.out_dir}")


if __name__ == "__main__":
    main()
