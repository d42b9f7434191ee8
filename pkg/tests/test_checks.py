"""
Tests for the finite-difference gradient suites.
"""

import pytest

from src.lumenfield.checks import CASE_CHOICES, CheckResult, run_checks


class TestChecks:

    def test_autodiff_suite_passes(self):
        results = run_checks("autodiff")
        assert results and all(r.suite == "autodiff" for r in results)
        failed = [r.name for r in results if not r.passed]
        assert failed == []

    def test_loss_suite_passes(self):
        assert all(r.passed for r in run_checks("losses", seed=3))

    @pytest.mark.slow
    def test_all_suites(self):
        results = run_checks()
        assert {r.suite for r in results} == set(CASE_CHOICES) - {"all"}
        assert all(r.passed for r in results)

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            run_checks("network")

    def test_pass_is_strict(self):
        assert not CheckResult("s", "n", 1e-4, 1e-4).passed
        assert CheckResult("s", "n", 0.0, 1e-4).passed
