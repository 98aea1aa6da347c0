import math

import mpmath
import numpy as np
import pytest

from conftest import jordan_nilpotent
from singpert.errors import InputError, PreconditionError
from singpert.harness import (
    CSV_COLUMNS,
    StudyConfig,
    boundedness_table,
    fit_rate,
    localization_check,
    run_study,
    uniqueness_study,
)
from singpert.perturbed import PerturbationFamily
from singpert.quadrature import QuadratureSpec
from singpert.signal_lang import hermite_extend, parse_signal
from singpert.singular import SolveRequest
from singpert.test_functions import TestFunction, standard_bank

N2 = jordan_nilpotent([2])
SCALAR = SolveRequest([[0.0]], [2.0], parse_signal("[1]"))
BUMP0 = TestFunction(0.0, 1.0, (1.0,), label="bump0")


def scalar_error_oracle(i):
    """3 * int_0^1 exp(-i t) psi(t) dt in high precision."""
    mpmath.mp.dps = 30
    psi = lambda t: mpmath.exp(-i * t - 1 / (1 - t**2))
    return 3 * float(mpmath.quad(psi, [0, 1.0 / i, 10.0 / i, 1]))


def test_config_validation():
    fam = PerturbationFamily("shift", [[0.0]])
    with pytest.raises(InputError):
        StudyConfig(SCALAR, fam, [16])
    with pytest.raises(InputError):
        StudyConfig(SCALAR, fam, [32, 16])
    with pytest.raises(InputError):
        StudyConfig(SCALAR, fam, [16, 32], bank=[])
    with pytest.raises(InputError):
        StudyConfig(SCALAR, PerturbationFamily("shift", N2), [16, 32])
    cfg = StudyConfig(SCALAR, fam, [16, 32])
    assert len(cfg.bank) == 4
    assert cfg.verdict_threshold == 1e-3


def test_scalar_study_matches_oracle():
    cfg = StudyConfig(SCALAR, PerturbationFamily("shift", [[0.0]]), [25, 50, 100], bank=[BUMP0], threshold=2e-2)
    rep = run_study(cfg)
    for row in rep.rows:
        assert row.abs_error == pytest.approx(scalar_error_oracle(row.i), abs=1e-8)
        assert row.abs_error == abs(row.pairing_perturbed - row.pairing_limit)
    assert rep.rows[-1].abs_error == pytest.approx(3 * math.exp(-1) / 100, rel=0.01)
    assert rep.rates["bump0"] == pytest.approx(-1.0, abs=0.1)
    assert rep.verdict == "converging"


def test_trivial_study_converges_exactly():
    req = SolveRequest(N2, [0.0, 0.0], None)
    rep = run_study(StudyConfig(req, PerturbationFamily("shift", N2), [4, 8, 16]))
    assert all(r.abs_error == 0.0 for r in rep.rows)
    assert rep.verdict == "converging"
    assert all(v is None for v in rep.rates.values())


def test_divergent_family_is_flagged():
    fam = PerturbationFamily("custom", N2, members=lambda i: N2 + np.eye(2) / i, name="unstable")
    rep = run_study(StudyConfig(SolveRequest(N2, [0.0, 1.0], None), fam, [4, 8]))
    assert rep.verdict == "divergent_family"
    assert rep.rows == []
    assert all(v is None for entries in rep.boundedness.values() for _, v, _ in entries)


def test_impulse_recovery_study():
    req = SolveRequest(N2, [0.0, 1.0], None)
    rep = run_study(StudyConfig(req, PerturbationFamily("shift", N2), [128, 256, 512]))
    final = rep.final_rows()["e1@0"]
    assert final.pairing_limit == pytest.approx(-math.exp(-1), abs=1e-12)
    assert abs(final.pairing_perturbed - final.pairing_limit) <= 0.02 * math.exp(-1)
    assert rep.verdict == "converging"
    assert rep.bounded_k == 0


def test_failed_rows_are_isolated(caplog):
    members = {4: N2 - np.eye(2) / 4, 8: N2, 16: N2 - np.eye(2) / 16}
    fam = PerturbationFamily("custom", N2, members=members)
    req = SolveRequest(N2, [0.0, 1.0], None)
    rep = run_study(StudyConfig(req, fam, [4, 8, 16], bank=standard_bank(2)[:1]))
    failed = [r for r in rep.rows if r.failed]
    assert [r.i for r in failed] == [8]
    assert rep.warnings and "failed row" in caplog.text
    assert len(rep.rows_for("e1@0")) == 2
    assert "8" not in rep.to_csv().split("\n")[2].split(",")[0]


def test_report_serialization_is_deterministic():
    cfg = StudyConfig(SCALAR, PerturbationFamily("shift", [[0.0]]), [8, 16], bank=[BUMP0])
    a, b = run_study(cfg), run_study(cfg)
    assert a.to_csv() == b.to_csv()
    assert a.to_dict() == b.to_dict()
    header = a.to_csv().splitlines()[0].split(",")
    assert tuple(header) == CSV_COLUMNS
    assert a.to_dict()["threshold"] == 1e-3


def test_fit_rate():
    i = np.array([10, 20, 40, 80])
    assert fit_rate(i, 5.0 / i**2, [0] * 4) == pytest.approx(-2.0)
    assert fit_rate(i, [0.0] * 4, [0] * 4) is None


def test_boundedness_table_shapes():
    fam = PerturbationFamily("shift", jordan_nilpotent([3]))
    table, k = boundedness_table(fam, [4, 16, 64], 2, QuadratureSpec())
    assert set(table) == {0, 1, 2}
    assert k is not None


def test_uniqueness_needs_two_families():
    with pytest.raises(PreconditionError):
        uniqueness_study(SCALAR, [PerturbationFamily("shift", [[0.0]])], [16, 32])


def test_uniqueness_scalar_shift_and_scaled_shift():
    fams = [PerturbationFamily("shift", [[0.0]]), PerturbationFamily("scaled_shift", [[0.0]], scale=2.0)]
    rep = uniqueness_study(SCALAR, fams, [64, 128, 256, 512], bank=[BUMP0], threshold=1e-2)
    assert rep.agree
    assert len(rep.comparisons) == 1


def test_uniqueness_rejects_non_converging_family():
    fams = [PerturbationFamily("shift", [[0.0]]), PerturbationFamily("scaled_shift", [[0.0]], scale=2.0)]
    with pytest.raises(PreconditionError):
        uniqueness_study(SCALAR, fams, [4, 8], bank=[BUMP0])


def test_localization_examples():
    req = SolveRequest([[0.0]], [1.0], parse_signal("[sin(t)]"))
    fam = PerturbationFamily("shift", [[0.0]])
    lam = TestFunction(1.0, 1.0, (1.0,))
    assert localization_check(req, fam, 16, 3.0, lam) <= 2e-10
    with pytest.raises(PreconditionError):
        localization_check(req, fam, 16, 3.0, TestFunction(5.0, 1.0, (1.0,)))


def test_localization_with_compactly_supported_forcing():
    req = SolveRequest(N2, [0.0, 0.0], hermite_extend(parse_signal("[t^2, 1]"), 1.0, 2))
    assert req.f.breakpoints == (1.0, 2.0)
    fam = PerturbationFamily("shift", N2)
    lam = TestFunction(1.5, 1.0, (0.6, 0.8))
    assert localization_check(req, fam, 8, 3.0, lam) <= 2e-10
    ext = hermite_extend(req.f, 3.0, 2)
    assert ext.pieces[:3] == req.f.pieces
    assert ext.pieces[3].is_zero()
