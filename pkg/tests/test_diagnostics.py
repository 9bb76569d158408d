"""Check-row semantics and reduced-scale runs of the validation suites.

The full-scale suites (the defaults for seed 0) are exercised by the
acceptance tests; here we pin the row bookkeeping and confirm the suites
stay green on cheaper grids.
"""

import pytest

from zopref.diagnostics import (
    SUITES,
    CheckRow,
    _row,
    bounds_suite,
    preference_suite,
    run_suite,
)


def test_row_relation_semantics():
    assert _row("s", "n", 1.0, 2.0).passed
    assert not _row("s", "n", 2.0, 1.0).passed
    assert _row("s", "n", 1.0, 1.0, "<=").passed
    assert not _row("s", "n", 1.0, 1.0, "<").passed
    assert _row("s", "n", 1.0, 1.0, "<", tolerance=1e-9).passed
    assert _row("s", "n", 2.0, 1.0, ">").passed
    assert not _row("s", "n", 1.0, 1.0, ">").passed
    with pytest.raises(ValueError, match="relation"):
        _row("s", "n", 0.0, 0.0, "==")
    row = _row("bounds", "margin/x", 0.5, 2.0)
    assert isinstance(row, CheckRow)
    assert (row.suite, row.name, row.lhs, row.rhs) == ("bounds", "margin/x", 0.5, 2.0)


def test_bounds_suite_reduced_grid_passes():
    rows = bounds_suite(seed=0, n_mdps=3)
    # 3 mdps x 2 gammas x 3 kappas x 4 horizons margins plus the decay row.
    assert len(rows) == 3 * 2 * 3 * 4 + 1
    assert all(r.passed for r in rows), [r.name for r in rows if not r.passed]
    assert rows[-1].name == "truncation-decay/k2H8-vs-k0H1"
    assert all(r.suite == "bounds" for r in rows)


def test_preference_suite_reduced_passes():
    rows = preference_suite(seed=0, reps=100, evaluator_counts=(10, 100, 1000))
    assert all(r.passed for r in rows), [r.name for r in rows if not r.passed]
    # Adjacent-pair rows only; no quarter row without M=10000 in the sweep.
    assert [r.name for r in rows] == ["median-error/M100-vs-M10",
                                      "median-error/M1000-vs-M100"]


def test_run_suite_dispatch():
    rows = run_suite("preference")
    assert rows and all(r.suite == "preference" for r in rows)
    with pytest.raises(ValueError, match="unknown suite"):
        run_suite("nope")
    assert SUITES == ("bounds", "estimator", "preference")
