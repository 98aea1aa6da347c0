"""Command-line front end: ``singpert <subcommand> --config file.json``.

Exit codes: 0 on success, 1 on numeric failure, 2 on input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import (
    is_pencil,
    load_json,
    parse_bank,
    parse_family,
    parse_pencil,
    parse_quad,
    parse_system,
    quad_with_overrides,
)
from .distributions import gf_to_json, pair
from .errors import InputError, NumericError
from .harness import (
    INNER_TIGHTENING,
    StudyConfig,
    localization_check,
    pair_perturbed,
    run_study,
    testfn_id,
    uniqueness_study,
)
from .pencil import solve_descriptor, weierstrass_reduce
from .perturbed import PerturbedSolution
from .singular import consistent_initial_set_check, solve_singular, summary
from .test_functions import testfn_from_json

log = logging.getLogger("singpert")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--quad-abs", type=float, help="absolute quadrature tolerance")
    p.add_argument("--quad-rel", type=float, help="relative quadrature tolerance")
    p.add_argument("--max-subdiv", type=int, help="quadrature subdivision cap")
    p.add_argument("--k-max", type=int, help="largest k in the layer-integral search")
    p.add_argument("--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="singpert", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    sub.add_parser("solve", parents=[common], help="distributional solution as JSON")
    p = sub.add_parser("perturb", parents=[common], help="grid CSV of a perturbed solution")
    p.add_argument("--index", type=int, help="family index i (overrides config)")
    p.add_argument("--t-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=21)
    sub.add_parser("reduce", parents=[common], help="slow/fast reduction of a pencil")
    p = sub.add_parser("pair", parents=[common], help="pair the limit (and optionally x_i) with one test function")
    p.add_argument("--index", type=int, help="also pair the perturbed solution for this i")
    sub.add_parser("converge", parents=[common], help="convergence study report")
    sub.add_parser("uniqueness", parents=[common], help="compare several perturbation families")
    sub.add_parser("localize", parents=[common], help="Hermite-extension localization check")
    return parser


# Emitters -----------------------------------------------------------------------


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


# Subcommands ----------------------------------------------------------------------


def _quad(cfg, args):
    return quad_with_overrides(parse_quad(cfg.get("quad")), args.quad_abs, args.quad_rel, args.max_subdiv)


def _system_section(cfg):
    return cfg["system"] if "system" in cfg else cfg


def cmd_solve(cfg, args):
    system = _system_section(cfg)
    if is_pencil(system):
        p, x0, g = parse_pencil(system)
        sol = solve_descriptor(p, x0, g, quad=_quad(cfg, args))
        _emit(_json_text(sol.to_json()), args.out)
        return
    req = parse_system(system)
    x = solve_singular(req)
    report = {
        "index": req.certificate().q,
        "consistent": consistent_initial_set_check(req.N, req.f, req.x0, req.tol),
        "solution": gf_to_json(x),
    }
    _emit(_json_text(report), args.out)
    print(summary(req, x), file=sys.stderr)


def _family(cfg, req):
    return parse_family(cfg.get("family", {"kind": "shift"}), req.N)


def cmd_perturb(cfg, args):
    req = parse_system(_system_section(cfg))
    i = args.index if args.index is not None else cfg.get("index")
    if i is None:
        raise InputError("perturb needs --index or an 'index' entry in the config")
    sol = PerturbedSolution(_family(cfg, req).realize(i), req.x0, req.f, _quad(cfg, args))
    ts = np.linspace(0.0, args.t_max, args.points)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{k + 1}" for k in range(req.n)])
    for t in ts:
        w.writerow([repr(float(t))] + [repr(float(v)) for v in sol(t)])
    _emit(buf.getvalue(), args.out)


def cmd_reduce(cfg, args):
    p, _, _ = parse_pencil(_system_section(cfg))
    _emit(_json_text(weierstrass_reduce(p, cfg.get("tol", 1e-8)).to_json()), args.out)


def _testfn(cfg):
    if "testfn" not in cfg:
        raise InputError("config needs a 'testfn' entry")
    return testfn_from_json(cfg["testfn"])


def cmd_pair(cfg, args):
    req = parse_system(_system_section(cfg))
    quad = _quad(cfg, args)
    lam = _testfn(cfg)
    lim = pair(solve_singular(req), lam, quad)
    report = {"testfn_id": testfn_id(lam, 0), "pairing_limit": lim.value, "quad_err_estimate": lim.quadrature_error_estimate}
    i = args.index if args.index is not None else cfg.get("index")
    if i is not None:
        sol = PerturbedSolution(_family(cfg, req).realize(i), req.x0, req.f, quad.tightened(INNER_TIGHTENING))
        pp = pair_perturbed(sol, lam, quad)
        report.update(i=i, pairing_perturbed=pp.value, perturbed_err_estimate=pp.error, abs_error=abs(pp.value - lim.value))
    _emit(_json_text(report), args.out)


def _study_parts(cfg, args):
    req = parse_system(_system_section(cfg))
    bank = parse_bank(cfg.get("bank"), req.n, req.certificate().q)
    k_max = args.k_max if args.k_max is not None else cfg.get("k_search_max", 3)
    return req, bank, _quad(cfg, args), k_max


def cmd_converge(cfg, args):
    req, bank, quad, k_max = _study_parts(cfg, args)
    study = StudyConfig(
        req, _family(cfg, req), _indices(cfg), bank, quad, k_max, cfg.get("threshold")
    )
    report = run_study(study)
    fmt = args.format or ("csv" if args.out and args.out.endswith(".csv") else "json")
    if fmt == "csv":
        _emit(report.to_csv(), args.out)
        if args.out:
            Path(args.out).with_suffix(".json").write_text(_json_text(report.to_dict()))
    else:
        _emit(_json_text(report.to_dict()), args.out)
    print(f"verdict: {report.verdict} (threshold {report.threshold:g})", file=sys.stderr)


def _indices(cfg):
    if "indices" not in cfg:
        raise InputError("config needs 'indices'")
    return cfg["indices"]


def cmd_uniqueness(cfg, args):
    req, bank, quad, k_max = _study_parts(cfg, args)
    specs = cfg.get("families")
    if not isinstance(specs, list):
        raise InputError("uniqueness needs a 'families' list")
    fams = [parse_family(s, req.N) for s in specs]
    rep = uniqueness_study(req, fams, _indices(cfg), bank, quad, k_max, cfg.get("threshold"))
    _emit(_json_text(rep.to_dict()), args.out)
    print(f"families agree: {rep.agree}", file=sys.stderr)


def cmd_localize(cfg, args):
    req = parse_system(_system_section(cfg))
    for key in ("index", "b"):
        if key not in cfg:
            raise InputError(f"localize needs {key!r} in the config")
    diff = localization_check(req, _family(cfg, req), int(cfg["index"]), float(cfg["b"]), _testfn(cfg), _quad(cfg, args))
    _emit(_json_text({"index": cfg["index"], "b": cfg["b"], "difference": diff}), args.out)


COMMANDS = {
    "solve": cmd_solve,
    "perturb": cmd_perturb,
    "reduce": cmd_reduce,
    "pair": cmd_pair,
    "converge": cmd_converge,
    "uniqueness": cmd_uniqueness,
    "localize": cmd_localize,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](load_json(args.config), args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
