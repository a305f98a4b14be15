#!/usr/bin/env python3
"""
Tests for stage planning, the cost ledger and the counting scheduler.
"""

import math
import unittest
from fractions import Fraction
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.adiabatic_counting.analysis.scheduler import (
    PHASE_BUDGET, CountingScheduler, cost_ledger, default_repetitions,
    delta_bound, plan_stages, run_counting, scaling_curve, worst_case_delta_bound
)
from src.adiabatic_counting.core.database import create_database
from src.adiabatic_counting.core.exceptions import GuardExceeded, ParameterOutOfRange
from src.adiabatic_counting.core.models import EngineMode, IntegrationConfig


class TestStagePlan(unittest.TestCase):

    def test_default_repetitions(self):
        self.assertEqual(default_repetitions(4), (46, 23.0))

    def test_plan_shape(self):
        stages = plan_stages(4)
        self.assertEqual([s.j for s in stages], [1, 2, 3, 4])
        self.assertEqual([s.R_j for s in stages], [115, 92, 69, 46])
        for s in stages:
            self.assertAlmostEqual(s.omega_j, 0.05 * 2 ** (-s.j / 2), places=15)
            self.assertAlmostEqual(s.T_j, (2 ** s.j) * math.pi / s.omega_j, places=9)
        for a, b in zip(stages, stages[1:]):
            self.assertAlmostEqual(b.T_j / a.T_j, 2 ** 1.5, places=12)

    def test_explicit_repetitions(self):
        stages = plan_stages(3, r0=10, r_slope=2.5)
        self.assertEqual([s.R_j for s in stages], [15, 13, 10])

    def test_phase_budget_holds(self):
        for s in plan_stages(12):
            self.assertLess(worst_case_delta_bound(s.omega_j, s.j), PHASE_BUDGET)
            for alpha in (0.0, 0.1, 0.25, 0.4, 0.49):
                self.assertLess(delta_bound(alpha, s.omega_j, s.j), PHASE_BUDGET)

    def test_invalid_plans(self):
        with self.assertRaises(ParameterOutOfRange):
            plan_stages(0)
        with self.assertRaises(ParameterOutOfRange):
            plan_stages(4, c_omega=0.2)
        with self.assertRaises(ParameterOutOfRange):
            plan_stages(4, r0=0)


class TestCostLedger(unittest.TestCase):

    def test_total_matches_closed_form(self):
        stages = plan_stages(8)
        ledger = cost_ledger(stages)
        closed = (math.pi / 0.05) * sum(2 * s.R_j * 2 ** (1.5 * s.j) for s in stages)
        self.assertLess(abs(ledger.total - closed) / closed, 1e-9)
        self.assertEqual(len(ledger.to_dict()['per_stage']), 8)

    def test_scaling_slope(self):
        curve = scaling_curve(4, 12)
        self.assertEqual([p[0] for p in curve.points], list(range(4, 13)))
        self.assertGreaterEqual(curve.slope, 1.4)
        self.assertLessEqual(curve.slope, 1.6)
        self.assertGreater(curve.r_value, 0.99)

    def test_scaling_range(self):
        with self.assertRaises(ParameterOutOfRange):
            scaling_curve(6, 6)
        with self.assertRaises(ParameterOutOfRange):
            scaling_curve(4, 21)


class TestCountingScheduler(unittest.TestCase):

    def setUp(self):
        self.db = create_database(4, [3, 7, 9, 12, 14])

    def test_run_structure(self):
        result = run_counting(self.db, 4, seed=3)
        self.assertEqual(len(result.estimate.bits), 5)
        self.assertEqual(result.estimate.bits[0], 0)
        self.assertEqual(result.estimate.epsilon, Fraction(1, 16))
        self.assertEqual(len(result.diagnostics), 4)
        self.assertEqual(result.alpha_true, Fraction(5, 16))
        self.assertEqual(result.mode, EngineMode.CLOSED_FORM)
        self.assertAlmostEqual(result.ledger.total, cost_ledger(plan_stages(4)).total, places=6)
        for d in result.diagnostics:
            gap = (d.arg_phase - d.ideal_phase) % (2 * math.pi)
            self.assertLess(min(gap, 2 * math.pi - gap), 0.05)
            self.assertGreater(d.p_success, 0.99)

    def test_runs_are_deterministic(self):
        first = run_counting(self.db, 4, seed=17)
        second = run_counting(self.db, 4, seed=17)
        self.assertEqual(first.estimate.bits, second.estimate.bits)
        self.assertEqual([d.qX for d in first.diagnostics], [d.qX for d in second.diagnostics])
        self.assertEqual([d.qY for d in first.diagnostics], [d.qY for d in second.diagnostics])

    def test_nothing_marked_gives_zero(self):
        db = create_database(4, [])
        for seed in range(10):
            result = run_counting(db, 4, seed=seed)
            self.assertEqual(result.estimate.value, 0)
            self.assertTrue(result.success)

    def test_mode_limits(self):
        with self.assertRaises(GuardExceeded):
            run_counting(self.db, 30)
        with self.assertRaises(GuardExceeded):
            run_counting(self.db, 11, mode=EngineMode.INTEGRATE_2D)
        with self.assertRaises(GuardExceeded):
            run_counting(create_database(7, [1]), 2, mode=EngineMode.FULL)

    def test_engines_agree(self):
        db = create_database(3, [5])
        cfg = IntegrationConfig(step=0.005)
        closed = CountingScheduler().run(db, 3, EngineMode.CLOSED_FORM, seed=8)
        integrated = CountingScheduler(integration=cfg).run(db, 3, EngineMode.INTEGRATE_2D, seed=8)
        self.assertEqual(
            [d.eta for d in closed.diagnostics], [d.eta for d in integrated.diagnostics]
        )
        self.assertEqual(closed.estimate.value, integrated.estimate.value)
        for a, b in zip(closed.diagnostics, integrated.diagnostics):
            self.assertLess(abs(a.inner - b.inner), 1e-6)

    def test_stage_table(self):
        scheduler = CountingScheduler()
        result = scheduler.run(self.db, 3, seed=1)
        rows = scheduler.generate_stage_table(result)
        self.assertEqual([r['stage'] for r in rows], [1, 2, 3])
        self.assertIn('eta', rows[0])


if __name__ == '__main__':
    unittest.main()
