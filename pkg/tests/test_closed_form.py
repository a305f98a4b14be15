#!/usr/bin/env python3
"""
Tests for the exact two-level solution, the branch overlap and its small-omega limits.
"""

import itertools
import math
import unittest
from pathlib import Path

import numpy as np

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.adiabatic_counting.core.closed_form import (
    denominator_expansion_residual, evolve_closed_form, lambda_form_coefficients,
    mu1_expansion_check, overlap_report, perturbative_coefficients,
    perturbative_limits, schrodinger_residual, solve_closed_form
)
from src.adiabatic_counting.core.exceptions import ParameterOutOfRange

ALPHAS = (0.05, 0.15, 0.25, 0.35, 0.45)
OMEGAS = (0.01, 0.02, 0.03, 0.04, 0.05)


class TestClosedFormSolution(unittest.TestCase):
    """Coefficient identities and the Schrodinger equation."""

    def test_coefficient_identities(self):
        for alpha, omega in itertools.product(ALPHAS, OMEGAS):
            sol = solve_closed_form(alpha, omega)
            self.assertAlmostEqual(sol.A + sol.B, math.sqrt(sol.beta), places=12)
            self.assertAlmostEqual(sol.C + sol.D, math.sqrt(sol.alpha), places=12)
            self.assertAlmostEqual(sol.omega1 - sol.omega2, sol.E, places=12)
            self.assertAlmostEqual(sol.omega1 + sol.omega2, sol.omega, places=12)

    def test_lambda_forms_agree(self):
        for alpha, omega in itertools.product(ALPHAS, OMEGAS):
            sol = solve_closed_form(alpha, omega)
            np.testing.assert_allclose(
                (sol.A, sol.B, sol.C, sol.D), lambda_form_coefficients(alpha, omega), atol=1e-12
            )

    def test_nothing_marked(self):
        sol = solve_closed_form(0.0, 0.03)
        self.assertEqual((sol.A, sol.B, sol.C, sol.D), (1.0, 0.0, 0.0, 0.0))
        report = overlap_report(0.0, 0.03, 2 * math.pi / 0.03)
        self.assertEqual(report.mu1, 0.0)
        self.assertAlmostEqual(report.p_success, 1.0, places=12)

    def test_initial_state_and_norm(self):
        sol = solve_closed_form(0.3, 0.04)
        start = evolve_closed_form(sol, 0.0)
        self.assertAlmostEqual(start.x, math.sqrt(0.7), places=12)
        self.assertAlmostEqual(start.y, math.sqrt(0.3), places=12)
        for t in (1.0, 50.0, 157.0):
            for reversed_ in (False, True):
                self.assertAlmostEqual(evolve_closed_form(sol, t, reversed_).norm, 1.0, places=10)

    def test_schrodinger_residual(self):
        for alpha, omega in [(0.1, 0.01), (0.25, 0.05), (0.45, 0.03)]:
            sol = solve_closed_form(alpha, omega)
            for reversed_ in (False, True):
                self.assertLess(schrodinger_residual(sol, 37.0, reversed=reversed_), 1e-6)

    def test_parameter_ranges(self):
        with self.assertRaises(ParameterOutOfRange):
            solve_closed_form(0.5, 0.01)
        with self.assertRaises(ParameterOutOfRange):
            solve_closed_form(0.2, 0.6)
        with self.assertRaises(ParameterOutOfRange):
            solve_closed_form(0.2, 0.0)
        with self.assertRaises(ParameterOutOfRange):
            evolve_closed_form(solve_closed_form(0.2, 0.01), -1.0)


class TestOverlap(unittest.TestCase):
    """Overlap of the reversed branch with the forward branch."""

    def test_direct_and_expanded_overlap_agree(self):
        for alpha, omega in itertools.product(ALPHAS, OMEGAS):
            for T in (2 * math.pi / omega, 4 * math.pi / omega, 33.3):
                report = overlap_report(alpha, omega, T)
                self.assertLess(abs(report.inner - report.formula_inner), 1e-10)

    def test_phase_tracks_twice_the_berry_phase(self):
        for j in (1, 2, 3):
            omega = 0.01
            report = overlap_report(0.25, omega, (2 ** j) * math.pi / omega)
            ideal = 2 * math.pi * (2 ** j) * 0.25
            self.assertLess(abs(report.mu1 - ideal) / ideal, 1e-3)
            self.assertLess(abs(np.angle(report.inner * np.exp(-1j * ideal))), 1e-3)

    def test_success_and_phase_bounds(self):
        for alpha, omega in itertools.product(ALPHAS, OMEGAS):
            report = overlap_report(alpha, omega, 2 * math.pi / omega)
            allowed = 8 * alpha * (1 - alpha) * omega ** 2 + 50 * omega ** 3
            self.assertLessEqual(1 - report.p_success, allowed)
            self.assertGreaterEqual(report.p_success, 0.5)
            self.assertLessEqual(report.p_success, 1.0)
            phase_gap = (report.arg_phase - report.mu1) % (2 * math.pi)
            self.assertLessEqual(min(phase_gap, 2 * math.pi - phase_gap), allowed)

    def test_mu1_expansion(self):
        for alpha in (0.1, 0.25, 0.4):
            for omega in (0.02, 0.01):
                self.assertLess(mu1_expansion_check(alpha, omega, 2), 2.0)
        self.assertEqual(mu1_expansion_check(0.0, 0.02, 2), 0.0)

    def test_evolution_time_must_be_positive(self):
        with self.assertRaises(ParameterOutOfRange):
            overlap_report(0.2, 0.01, 0.0)


class TestPerturbativeLimits(unittest.TestCase):
    """Small-omega behaviour of the primed-unprimed coefficient products."""

    def test_coefficients_within_five_percent(self):
        omega = 0.005
        for alpha in (0.1, 0.3):
            exact = perturbative_coefficients(alpha, omega)
            limits = perturbative_limits(alpha, omega)
            for e, lim, base in zip(exact, limits, (1.0, 0.0, 0.0, 0.0)):
                self.assertLess(abs((e - base) / (lim - base) - 1), 0.05)

    def test_leading_residual_shrinks_faster_than_omega_squared(self):
        alpha = 0.3

        def residual(omega):
            return abs(perturbative_coefficients(alpha, omega)[0] - perturbative_limits(alpha, omega)[0])

        self.assertGreater(residual(0.01) / residual(0.005), 7)

    def test_denominator_expansion(self):
        self.assertLess(abs(denominator_expansion_residual(0.3, 0.005)), 1e-6)
        ratio = abs(denominator_expansion_residual(0.3, 0.01)) / abs(denominator_expansion_residual(0.3, 0.005))
        self.assertGreater(ratio, 7)


if __name__ == '__main__':
    unittest.main()
