"""
Tests for the invariant suite runner.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from cmvkit.choice_seq import SequenceKind, random_choice_sequence
from cmvkit.verify import (
    InvariantSuite,
    check_cmv_unitarity,
    check_naimark_moments,
    check_schur_round_trip,
    check_sequence,
    default_suite,
)


@pytest.fixture
def small_suite():
    suite = InvariantSuite()
    suite.register_check("cmv_unitarity", check_cmv_unitarity, 1e-10)
    suite.register_check("schur_round_trip", check_schur_round_trip, 1e-8)
    suite.register_check("naimark_moments", check_naimark_moments, 1e-9)
    return suite


class TestInvariantSuite:

    def test_small_run_passes(self, small_suite):
        report = small_suite.run(seed=11, cases=4, workers=2)
        assert report.passed, report.to_dict()
        assert report.cases == 4
        assert set(report.invariants) == {"cmv_unitarity", "schur_round_trip", "naimark_moments"}

    def test_worker_count_does_not_change_results(self, small_suite):
        serial = small_suite.run(seed=5, cases=3, workers=1)
        parallel = small_suite.run(seed=5, cases=3, workers=3)
        for name in serial.invariants:
            assert serial.invariants[name].max_residual == parallel.invariants[name].max_residual

    def test_failing_check_is_counted(self):
        suite = InvariantSuite()
        suite.register_check("always_large", lambda rng: 1.0 + rng.uniform(), 0.5)
        report = suite.run(cases=3, workers=1)
        summary = report.invariants["always_large"]
        assert summary.failures == 3
        assert not report.passed

    def test_raising_check_is_recorded(self):
        def broken(rng):
            raise np.linalg.LinAlgError("singular")

        suite = InvariantSuite()
        suite.register_check("broken", broken, 1.0)
        report = suite.run(cases=2, workers=2)
        summary = report.invariants["broken"]
        assert len(summary.errors) == 2
        assert "LinAlgError" in summary.errors[0]
        assert not summary.passed

    def test_nan_residual_fails(self):
        suite = InvariantSuite()
        suite.register_check("nan", lambda rng: float("nan"), 1.0)
        assert suite.run(cases=1, workers=1).invariants["nan"].failures == 1

    def test_default_suite_registers_all_checks(self):
        assert len(default_suite().checks) == 19

    def test_default_suite_single_case(self):
        report = default_suite().run(seed=0, cases=1, workers=1)
        assert report.passed, report.to_dict()


def test_check_sequence():
    seq = random_choice_sequence(2, 2, 3, seed=9, kind=SequenceKind.TERMINATE_UNITARY)
    report = check_sequence(seq)
    assert report.passed, report.to_dict()
    assert "unitarity_u0" in report.residuals
    assert "bandwidth_u0_tilde" in report.residuals
