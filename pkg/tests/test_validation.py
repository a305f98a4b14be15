#!/usr/bin/env python3
"""
Tests for the invariant validation suites.
"""

import math
import unittest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.adiabatic_counting.analytics.validation import InvariantValidator, SuiteResult, run_suites
from src.adiabatic_counting.core.models import ScheduleWeights, ValidationLevel


def flipped_weights(theta: float) -> ScheduleWeights:
    """Schedule weights with the sign of s3 flipped."""
    c = math.cos(theta)
    s = math.sin(theta)
    return ScheduleWeights(s0=(1 + c) / 2, s1=s / 2, s2=(1 - c) / 2, s3=s / 2)


class TestInvariantSuites(unittest.TestCase):

    def test_fast_level_passes(self):
        results = run_suites(ValidationLevel.FAST)
        self.assertEqual(len(results), len(InvariantValidator().suites()))
        failed = [r.to_dict() for r in results if not r.passed]
        self.assertEqual(failed, [])

    def test_only_selected_suites_run(self):
        results = run_suites(ValidationLevel.FAST, only=['database', 'estimator_exhaustive'])
        self.assertEqual([r.name for r in results], ['database', 'estimator_exhaustive'])
        self.assertTrue(all(r.passed for r in results))

    def test_schedule_shape_suite(self):
        results = run_suites(ValidationLevel.FAST, only=['path_independence'])
        self.assertEqual([r.name for r in results], ['path_independence'])
        self.assertTrue(results[0].passed, results[0].detail)

    def test_broken_schedule_is_detected(self):
        results = run_suites(ValidationLevel.FAST, weights=flipped_weights, only=['schedule_sum'])
        self.assertEqual(len(results), 1)
        self.assertFalse(results[0].passed)

    def test_exceptions_become_failures(self):
        validator = InvariantValidator()

        def exploding():
            raise RuntimeError("boom")

        validator.suites = lambda: {'exploding': exploding}
        results = validator.run()
        self.assertEqual(results, [SuiteResult('exploding', False, 'RuntimeError: boom')])

    def test_level_from_string(self):
        self.assertTrue(InvariantValidator('full').full)
        self.assertFalse(InvariantValidator('fast').full)


if __name__ == '__main__':
    unittest.main()
