"""Layer-integral table int_0^1 i^-k ||exp(N_i^-1 t)|| dt for Jordan blocks.

Prints max/min over the indices for each block size and k, and checks that
the unstable family N + I/i is reported as divergent.
"""

import argparse

import numpy as np

from singpert import PerturbationFamily, QuadratureSpec, SolveRequest, StudyConfig, run_study
from singpert.perturbed import layer_integral_estimate


def jordan(size):
    return np.eye(size, k=1)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--k-max", type=int, default=3)
    args = ap.parse_args()
    indices = [2**e for e in range(2, 10)]
    quad = QuadratureSpec()

    print(f"indices {indices}")
    for size in args.sizes:
        fam = PerturbationFamily("shift", jordan(size))
        cells = []
        for k in range(args.k_max + 1):
            vals = [layer_integral_estimate(fam.realize(i), k, quad).value for i in indices]
            cells.append(f"k={k}: {max(vals) / min(vals):9.3g}")
        print(f"size {size}:  " + "  ".join(cells))

    for size in args.sizes:
        N = jordan(size)
        fam = PerturbationFamily("custom", N, members=lambda i, N=N: N + np.eye(size) / i, name="unstable")
        verdict = run_study(StudyConfig(SolveRequest(N, np.ones(size), None), fam, indices)).verdict
        print(f"N + I/i, size {size}: {verdict}")


if __name__ == "__main__":
    main()
