#!/usr/bin/env python3
"""
Tests for counting instances, the phase oracle and the {|0^>, |1^>} subspace.
"""

import unittest
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.adiabatic_counting.core.database import (
    apply_phase_oracle, create_database, embed, equal_up_to_global_phase,
    kickback_equivalence_batch, kickback_equivalence_check, load_instance,
    one_hat, project_to_subspace, psi_k, zero_hat
)
from src.adiabatic_counting.core.exceptions import (
    AlphaTooLarge, DegenerateSubspace, IndexOutOfRange, InstanceFormatError,
    LengthMismatch, NonPowerOfTwoDomain
)
from src.adiabatic_counting.core.models import SubspaceState


class TestMarkedDatabase(unittest.TestCase):
    """Instance construction and validation."""

    def test_alpha_is_exact(self):
        db = create_database(3, [1, 5])
        self.assertEqual(db.size, 8)
        self.assertEqual(db.marked_count, 2)
        self.assertEqual(db.alpha, Fraction(1, 4))
        self.assertEqual(db.beta, Fraction(3, 4))

    def test_marked_set_is_sorted_and_deduplicated(self):
        db = create_database(3, [5, 1, 1])
        self.assertEqual(db.marked, (1, 5))
        self.assertEqual(db.f(5), 1)
        self.assertEqual(db.f(2), 0)

    def test_numpy_integer_sizes_are_accepted(self):
        db = create_database(np.int64(3), np.array([1, 6]))
        self.assertEqual(db.n, 3)
        self.assertIs(type(db.n), int)
        self.assertEqual(db.size, 8)
        self.assertEqual(db.marked, (1, 6))
        with self.assertRaises(NonPowerOfTwoDomain):
            create_database(3.0, [])
        with self.assertRaises(NonPowerOfTwoDomain):
            create_database(True, [])

    def test_invalid_instances(self):
        with self.assertRaises(NonPowerOfTwoDomain):
            create_database(0, [])
        with self.assertRaises(IndexOutOfRange):
            create_database(3, [8])
        with self.assertRaises(AlphaTooLarge):
            create_database(3, [0, 1, 2, 3])


class TestOracleAndSubspace(unittest.TestCase):
    """Phase oracle, basis states and projections."""

    def setUp(self):
        self.db = create_database(3, [0, 5, 6])

    def test_basis_is_orthonormal(self):
        e0, e1 = zero_hat(self.db), one_hat(self.db)
        self.assertAlmostEqual(np.linalg.norm(e0), 1.0, places=14)
        self.assertAlmostEqual(np.linalg.norm(e1), 1.0, places=14)
        self.assertLess(abs(np.vdot(e0, e1)), 1e-15)

    def test_one_hat_is_zero_without_marked_items(self):
        db = create_database(2, [])
        self.assertEqual(np.count_nonzero(one_hat(db)), 0)

    def test_oracle_powers_match_psi_k(self):
        v = psi_k(self.db, 0)
        for k in range(1, 5):
            v = apply_phase_oracle(self.db, v)
            np.testing.assert_allclose(v, psi_k(self.db, k), atol=1e-15)
        np.testing.assert_allclose(psi_k(self.db, 4), psi_k(self.db, 0), atol=0)

    def test_oracle_rejects_wrong_length(self):
        with self.assertRaises(LengthMismatch):
            apply_phase_oracle(self.db, np.ones(4))

    def test_global_phase_comparison(self):
        v = psi_k(self.db, 1)
        self.assertTrue(equal_up_to_global_phase(np.exp(0.7j) * v, v))
        self.assertFalse(equal_up_to_global_phase(psi_k(self.db, 2), v))

    def test_kickback_matches_phase_oracle(self):
        rng = np.random.default_rng(11)
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        v /= np.linalg.norm(v)
        self.assertTrue(kickback_equivalence_check(self.db, v))

    def test_kickback_on_every_basis_state(self):
        for n, marked in [(2, []), (2, [2]), (3, [1, 3]), (3, [0, 4, 7])]:
            db = create_database(n, marked)
            results = kickback_equivalence_batch(db, np.eye(db.size, dtype=complex))
            self.assertTrue(results.all(), f"n={n}, marked={marked}")

    def test_projection_round_trip(self):
        s = SubspaceState(complex(0.6, 0.0), complex(0.0, 0.8))
        projection = project_to_subspace(self.db, embed(self.db, s))
        self.assertLess(projection.leakage, 1e-14)
        self.assertAlmostEqual(projection.state.x, s.x, places=14)
        self.assertAlmostEqual(projection.state.y, s.y, places=14)

    def test_projection_reports_leakage(self):
        db = create_database(2, [1])
        v = np.zeros(4, dtype=complex)
        v[0] = 1
        projection = project_to_subspace(db, v)
        self.assertAlmostEqual(projection.leakage, np.sqrt(2 / 3), places=14)
        self.assertAlmostEqual(abs(projection.state.x), 1.0, places=14)

    def test_projection_without_marked_items(self):
        db = create_database(2, [])
        projection = project_to_subspace(db, psi_k(db, 0))
        self.assertTrue(projection.degenerate)
        self.assertEqual(projection.state.y, 0)
        with self.assertRaises(DegenerateSubspace):
            project_to_subspace(db, psi_k(db, 0), strict=True)


class TestInstanceFiles(unittest.TestCase):
    """Loading instances from disk."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def _write(self, text: str) -> str:
        path = Path(self.temp_dir) / "instance.txt"
        path.write_text(text)
        return str(path)

    def test_load_instance(self):
        db = load_instance(self._write("n=4\nmarked=3,7,9\n"))
        self.assertEqual(db.size, 16)
        self.assertEqual(db.marked, (3, 7, 9))

    def test_empty_marked_list(self):
        db = load_instance(self._write("n=3\nmarked=\n"))
        self.assertEqual(db.marked_count, 0)

    def test_malformed_instance(self):
        with self.assertRaises(InstanceFormatError):
            load_instance(self._write("n=4\n"))
        with self.assertRaises(InstanceFormatError):
            load_instance(self._write("n=four\nmarked=1\n"))
        with self.assertRaises(InstanceFormatError):
            load_instance(self._write("n=4\nmarked=1\ncolor=blue\n"))

    def test_missing_file(self):
        with self.assertRaises(OSError):
            load_instance(str(Path(self.temp_dir) / "absent.txt"))

    def tearDown(self):
        import shutil
        shutil.rmtree(self.temp_dir, ignore_errors=True)


if __name__ == '__main__':
    unittest.main()
