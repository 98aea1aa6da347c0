"""Convergence studies: pair perturbed solutions and the distributional limit
against a bank of test functions over an increasing index sequence."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import pair
from .errors import InputError, NumericError, PreconditionError
from .perturbed import Divergent, PerturbationFamily, PerturbedSolution, layer_integral_estimate
from .quadrature import QuadratureSpec, integrate
from .signal_lang import hermite_extend
from .singular import SolveRequest, solve_singular
from .test_functions import standard_bank

log = logging.getLogger(__name__)

BOUNDED_RATIO = 10.0
CSV_COLUMNS = ("i", "testfn_id", "pairing_perturbed", "pairing_limit", "abs_error", "quad_err_estimate")
# inner (convolution) quadrature runs this much tighter than the outer pairing
INNER_TIGHTENING = 1e-2


@dataclass(frozen=True)
class PerturbedPairing:
    value: float
    error: float


def pair_perturbed(sol: PerturbedSolution, lam, quad: QuadratureSpec) -> PerturbedPairing:
    """``int_0^inf x_i(t) . lam(t) dt`` over ``supp lam`` with layer-aware splits."""
    lo, hi = lam.support
    lo = max(lo, 0.0)
    if hi <= lo:
        return PerturbedPairing(0.0, 0.0)
    direction = np.asarray(lam.direction)
    inner_err = [0.0]

    def integrand(ts):
        out = np.empty(len(ts))
        phi = lam.scalar(ts)
        for k, (t, w) in enumerate(zip(ts, phi)):
            if w == 0.0:
                out[k] = 0.0
                continue
            x, e = sol.value_and_error(t)
            inner_err[0] = max(inner_err[0], e)
            out[k] = w * float(direction @ x)
        return out

    pts = sol.layer_points(0.0, 1.0) + list(sol.f.breakpoints)
    res = integrate(integrand, lo, hi, quad, points=pts)
    mass = integrate(lambda t: np.abs(lam.scalar(t)), lo, hi, quad).value
    return PerturbedPairing(float(res.value), res.error + inner_err[0] * mass)


@dataclass(frozen=True)
class StudyRow:
    i: int
    testfn_id: str
    pairing_perturbed: float
    pairing_limit: float
    abs_error: float
    quad_err_estimate: float
    failed: str | None = None


@dataclass
class StudyConfig:
    system: SolveRequest
    family: PerturbationFamily
    indices: tuple
    bank: list | None = None
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    k_search_max: int = 3
    threshold: float | None = None

    def __post_init__(self):
        self.indices = tuple(int(i) for i in self.indices)
        if len(self.indices) < 2:
            raise InputError("a study needs at least two indices")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise InputError("indices must be strictly increasing")
        if self.family.n != self.system.n:
            raise InputError("family and system dimensions differ")
        if self.bank is None:
            self.bank = standard_bank(self.system.n, self.system.certificate().q)
        if not self.bank:
            raise InputError("test-function bank is empty")
        ids = [testfn_id(lam, j) for j, lam in enumerate(self.bank)]
        if len(set(ids)) != len(ids):
            raise InputError("test-function ids must be unique")
        if self.k_search_max < 0:
            raise InputError("k_search_max must be nonnegative")

    @property
    def verdict_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        return max(1e-3, 10 * self.quad.abs_tol)


def testfn_id(lam, j):
    return lam.label or f"tf{j}"


@dataclass
class ConvergenceReport:
    family: str
    rows: list
    rates: dict
    boundedness: dict
    bounded_k: int | None
    verdict: str
    threshold: float
    norm: str = "frobenius"
    warnings: list = field(default_factory=list)

    def rows_for(self, tf_id):
        return [r for r in self.rows if r.testfn_id == tf_id and r.failed is None]

    @property
    def testfn_ids(self):
        seen = []
        for r in self.rows:
            if r.testfn_id not in seen:
                seen.append(r.testfn_id)
        return seen

    def final_rows(self) -> dict:
        return {tid: self.rows_for(tid)[-1] for tid in self.testfn_ids if self.rows_for(tid)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            if r.failed is None:
                w.writerow([r.i, r.testfn_id, repr(r.pairing_perturbed), repr(r.pairing_limit),
                            repr(r.abs_error), repr(r.quad_err_estimate)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "verdict": self.verdict,
            "threshold": self.threshold,
            "norm": self.norm,
            "rows": [r.__dict__ for r in self.rows],
            "rates": self.rates,
            "boundedness": {
                str(k): [{"i": i, "value": v, "error": e} for i, v, e in entries]
                for k, entries in self.boundedness.items()
            },
            "bounded_k": self.bounded_k,
            "warnings": list(self.warnings),
        }


def boundedness_table(family, indices, k_max, quad):
    """``{k: [(i, value, error), ...]}`` and the smallest bounded ``k``.

    ``value`` is ``None`` for a divergent integral and ``nan`` when the
    estimate itself failed (for example a singular member).
    """
    table = {}
    bounded_k = None
    for k in range(k_max + 1):
        entries = []
        for i in indices:
            try:
                est = layer_integral_estimate(family.realize(i), k, quad)
            except NumericError as exc:
                log.warning("layer integral failed for i=%d, k=%d: %s", i, k, exc)
                entries.append((i, math.nan, math.nan))
                continue
            if est is Divergent:
                entries.append((i, None, None))
            else:
                entries.append((i, est.value, est.error))
        table[k] = entries
        vals = [v for _, v, _ in entries]
        if bounded_k is None and all(v is not None and v > 0 for v in vals):
            if max(vals) / min(vals) <= BOUNDED_RATIO:
                bounded_k = k
    return table, bounded_k


def fit_rate(indices, errors, floors):
    """Least-squares slope of ``log err`` against ``log i`` over errors above their noise floor."""
    pts = [(math.log(i), math.log(e)) for i, e, f in zip(indices, errors, floors) if e > 0 and e > f]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def _monotone_tail(rows, count=3):
    tail = rows[-count:]
    for a, b in zip(tail, tail[1:]):
        if b.abs_error > a.abs_error + a.quad_err_estimate + b.quad_err_estimate:
            return False
    return True


def run_study(cfg: StudyConfig) -> ConvergenceReport:
    threshold = cfg.verdict_threshold
    table, bounded_k = boundedness_table(cfg.family, cfg.indices, cfg.k_search_max, cfg.quad)
    divergent = any(all(table[k][j][1] is None for k in table) for j in range(len(cfg.indices)))
    if divergent:
        log.warning("layer integrals diverge for family %s; skipping pairings", cfg.family.name)
        return ConvergenceReport(cfg.family.name, [], {}, table, None, "divergent_family", threshold)

    limit = solve_singular(cfg.system)
    inner = cfg.quad.tightened(INNER_TIGHTENING)
    ids = [testfn_id(lam, j) for j, lam in enumerate(cfg.bank)]
    limits = [pair(limit, lam, cfg.quad) for lam in cfg.bank]
    rows, warnings = [], []
    for i in cfg.indices:
        try:
            sol = PerturbedSolution(cfg.family.realize(i), cfg.system.x0, cfg.system.f, inner)
        except NumericError as exc:
            warnings.append(f"i={i}: {exc}")
            rows.extend(StudyRow(i, tid, math.nan, lim.value, math.nan, math.nan, str(exc)) for tid, lim in zip(ids, limits))
            continue
        for tid, lam, lim in zip(ids, cfg.bank, limits):
            try:
                pp = pair_perturbed(sol, lam, cfg.quad)
            except NumericError as exc:
                warnings.append(f"i={i}, {tid}: {exc}")
                rows.append(StudyRow(i, tid, math.nan, lim.value, math.nan, math.nan, str(exc)))
                continue
            rows.append(
                StudyRow(i, tid, pp.value, lim.value, abs(pp.value - lim.value), pp.error + lim.quadrature_error_estimate)
            )
    for w in warnings:
        log.warning("failed row excluded from verdict: %s", w)

    rates = {}
    verdict = "converging"
    for tid in ids:
        good = [r for r in rows if r.testfn_id == tid and r.failed is None]
        rates[tid] = fit_rate([r.i for r in good], [r.abs_error for r in good], [r.quad_err_estimate for r in good])
        if len(good) < 2 or not _monotone_tail(good) or good[-1].abs_error > threshold:
            verdict = "not_converging"
    return ConvergenceReport(cfg.family.name, rows, rates, table, bounded_k, verdict, threshold, warnings=warnings)


@dataclass
class UniquenessReport:
    reports: list
    comparisons: list
    agree: bool

    def to_dict(self):
        return {
            "agree": self.agree,
            "comparisons": self.comparisons,
            "families": [r.to_dict() for r in self.reports],
        }


def uniqueness_study(system, families, indices, bank=None, quad=QuadratureSpec(), k_search_max=3, threshold=None):
    """Run one study per family and compare their final-index pairings pairwise.

    Each pair must agree within three times the larger per-family final error
    plus the quadrature tolerance.
    """
    if len(families) < 2:
        raise PreconditionError("uniqueness needs at least two perturbation families")
    reports = []
    for fam in families:
        rep = run_study(StudyConfig(system, fam, indices, bank, quad, k_search_max, threshold))
        if rep.verdict != "converging":
            raise PreconditionError(f"family {fam.name} does not converge (verdict {rep.verdict})")
        reports.append(rep)
    comparisons = []
    agree = True
    for a in range(len(reports)):
        for b in range(a + 1, len(reports)):
            fa, fb = reports[a].final_rows(), reports[b].final_rows()
            for tid in fa:
                ra, rb = fa[tid], fb[tid]
                diff = abs(ra.pairing_perturbed - rb.pairing_perturbed)
                tol = 3 * max(ra.abs_error, rb.abs_error) + quad.abs_tol + ra.quad_err_estimate + rb.quad_err_estimate
                ok = diff <= tol
                agree &= ok
                comparisons.append(
                    {"families": [reports[a].family, reports[b].family], "testfn_id": tid,
                     "difference": diff, "tolerance": tol, "agree": ok}
                )
    return UniquenessReport(reports, comparisons, agree)


def localization_check(system: SolveRequest, family: PerturbationFamily, i: int, b: float, lam, quad=QuadratureSpec()) -> float:
    """``|<x_i, lam> - <y_i, lam>|`` where ``y_i`` uses the Hermite-extended forcing.

    ``lam`` must vanish beyond ``b``; the two trajectories then coincide on its
    support and only quadrature noise can separate the pairings.
    """
    if lam.support[1] > b:
        raise PreconditionError(f"test function support {lam.support} extends beyond b = {b}")
    q = system.certificate().q
    fb = hermite_extend(system.f, b, q)
    Ni = family.realize(i)
    inner = quad.tightened(INNER_TIGHTENING)
    x = pair_perturbed(PerturbedSolution(Ni, system.x0, system.f, inner), lam, quad)
    y = pair_perturbed(PerturbedSolution(Ni, system.x0, fb, inner), lam, quad)
    return abs(x.value - y.value)
