#!/usr/bin/env python3
"""
End-to-end tests for the counting pipeline: instance file to alpha estimate to reports.
"""

import unittest
import tempfile
import json
import statistics
from fractions import Fraction
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.adiabatic_counting.core.database import create_database, load_instance
from src.adiabatic_counting.core.models import EngineMode, IntegrationConfig
from src.adiabatic_counting.analysis.estimator import exact_etas, recover_bits
from src.adiabatic_counting.analysis.scheduler import CountingScheduler, run_counting
from src.adiabatic_counting.output.report import ReportGenerator


class TestEndToEndCounting(unittest.TestCase):
    """Test the complete counting pipeline from instance to estimate."""

    TRIALS = 200

    def setUp(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()

    def test_every_sixteenth_is_counted(self):
        """N = 16, every M below N/2, m = 4: majority success in closed-form mode."""
        for count in range(8):
            db = create_database(4, range(count))
            successes = sum(run_counting(db, 4, seed=seed).success for seed in range(self.TRIALS))
            self.assertGreater(successes / self.TRIALS, 0.5, f"M={count}")

            exact = recover_bits(exact_etas(db.alpha, 4))
            self.assertEqual(exact.value, db.alpha, f"M={count}")

    def test_five_of_sixteen(self):
        """The most frequent answer for M = 5 is exactly 5/16."""
        db = create_database(4, [0, 3, 6, 10, 13])
        estimates = [run_counting(db, 4, seed=seed).estimate.value for seed in range(self.TRIALS)]
        exact_hits = sum(value == Fraction(5, 16) for value in estimates)
        self.assertGreater(exact_hits / self.TRIALS, 0.5)
        self.assertLessEqual(statistics.median(abs(v - Fraction(5, 16)) for v in estimates), Fraction(1, 16))

    def test_full_space_engine(self):
        """The controlled full-space evolution reproduces the closed-form stage phases."""
        db = create_database(2, [1])
        cfg = IntegrationConfig(step=0.005)
        full = CountingScheduler(integration=cfg).run(db, 2, EngineMode.FULL, seed=21)
        closed = CountingScheduler().run(db, 2, EngineMode.CLOSED_FORM, seed=21)

        self.assertEqual([d.eta for d in full.diagnostics], [d.eta for d in closed.diagnostics])
        for f, c in zip(full.diagnostics, closed.diagnostics):
            self.assertLess(f.leakage, 1e-9)
            self.assertLess(abs(f.inner - c.inner), 1e-6)

    def test_instance_file_to_reports(self):
        """Load an instance from disk, count, and write the reports."""
        instance = Path(self.temp_dir) / "instance.txt"
        instance.write_text("n=5\nmarked=1,4,9,16,25,30\n")
        db = load_instance(str(instance))
        self.assertEqual(db.alpha, Fraction(3, 16))

        result = run_counting(db, 5, seed=2)
        reports = ReportGenerator(self.temp_dir)
        result_file = reports.generate_result_json(result)
        stages_file = reports.generate_stages_jsonl(result)

        with open(result_file, 'r') as f:
            data = json.load(f)
        self.assertEqual(len(data['bits']), 6)
        self.assertEqual(data['epsilon'], 1 / 32)
        self.assertEqual(len(data['ledger']['per_stage']), 5)
        self.assertEqual(len(Path(stages_file).read_text().splitlines()), 6)

    def tearDown(self):
        """Clean up test fixtures."""
        import shutil
        shutil.rmtree(self.temp_dir, ignore_errors=True)


if __name__ == '__main__':
    unittest.main()
