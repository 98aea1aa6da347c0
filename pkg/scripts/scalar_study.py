"""Scalar convergence study: N = 0, x0 = 2, f = 1 under N_i = -1/i.

Pairs x_i against a bump centred at 0 and prints the error table, the fitted
rate and the verdict. Usage: python scripts/scalar_study.py [--max-exp 9]
"""

import argparse
import time

from singpert import PerturbationFamily, SolveRequest, StudyConfig, TestFunction, parse_signal, run_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-exp", type=int, default=9, help="largest index is 2**max_exp")
    ap.add_argument("--csv", help="also write the rows as CSV")
    args = ap.parse_args()

    indices = [2**e for e in range(4, args.max_exp + 1)]
    req = SolveRequest([[0.0]], [2.0], parse_signal("[1]"))
    lam = TestFunction(0.0, 1.0, (1.0,), label="bump0")
    cfg = StudyConfig(req, PerturbationFamily("shift", [[0.0]]), indices, bank=[lam], threshold=5e-3)
    start = time.perf_counter()
    rep = run_study(cfg)
    elapsed = time.perf_counter() - start

    print(f"{'i':>6} {'pairing x_i':>14} {'limit':>14} {'abs error':>11}")
    for r in rep.rows:
        print(f"{r.i:>6} {r.pairing_perturbed:>14.8f} {r.pairing_limit:>14.8f} {r.abs_error:>11.3e}")
    print(f"rate {rep.rates['bump0']:.3f}, verdict {rep.verdict}, {elapsed:.2f} s")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(rep.to_csv())


if __name__ == "__main__":
    main()
