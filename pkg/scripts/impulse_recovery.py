"""Impulse recovery on the 2x2 Jordan block with x0 = (0, 1) and no forcing.

The limit carries -e1 * delta; the script shows how the bump pairings of x_i
approach -e^{-1} (the bump's value at 0) as i grows.
"""

import argparse
import math

import numpy as np

from singpert import PerturbationFamily, SolveRequest, StudyConfig, run_study, solve_singular


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--indices", type=int, nargs="+", default=[16, 32, 64, 128, 256, 512])
    args = ap.parse_args()

    N = np.array([[0.0, 1.0], [0.0, 0.0]])
    req = SolveRequest(N, [0.0, 1.0], None)
    print("impulses of the limit:", {k: v.tolist() for k, v in solve_singular(req).impulse_dict().items()})
    rep = run_study(StudyConfig(req, PerturbationFamily("shift", N), args.indices))
    target = -math.exp(-1)
    for r in rep.rows_for("e1@0"):
        print(f"i={r.i:>4}  <x_i, lam> = {r.pairing_perturbed:+.8f}  relative error {abs(r.pairing_perturbed - target) / abs(target):.2e}")
    print(f"verdict {rep.verdict}, bounded k = {rep.bounded_k}")


if __name__ == "__main__":
    main()
