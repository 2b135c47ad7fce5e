"""Acceptance suite: every criterion at its stated tolerance, one summary line each."""

import json

import pytest

from horoforge.acceptance import CRITERIA, VerifyOptions, run_criterion


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k, capsys):
    r = run_criterion(k, VerifyOptions(seed=0))
    with capsys.disabled():
        print(f"\n{r.line()}")
    assert r.passed, json.dumps(r.to_json(), default=str)[:2000]


def test_every_criterion_is_registered():
    assert sorted(CRITERIA) == list(range(1, 13))


@pytest.mark.parametrize("k", [7, 9])
def test_corrupted_slope_convention_is_caught(k):
    r = run_criterion(k, VerifyOptions(corrupt_convention=True))
    assert not r.passed
    assert r.failed_invariant


@pytest.mark.parametrize("k", [1, 2, 3, 4, 7])
def test_impossible_tolerance_is_reported_as_failure(k):
    r = run_criterion(k, VerifyOptions(tol_override=1e-18))
    assert r.tolerance == 1e-18
    assert not r.passed


def test_result_lines_are_stable():
    r = run_criterion(3, VerifyOptions())
    assert r.line().startswith("[PASS] criterion  3 funk")
    d = r.to_json()
    assert d["criterion"] == 3 and d["passed"] is True


def test_unknown_criterion():
    with pytest.raises(ValueError):
        run_criterion(99, VerifyOptions())
