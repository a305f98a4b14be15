#!/usr/bin/env python3
"""
Invariant Validation Suites
Numerical checks of every model invariant, run by `adiabatic-counting validate`
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np

from ..analysis.estimator import exact_etas, recover_bits
from ..analysis.scheduler import DEFAULT_C_OMEGA, PHASE_BUDGET, cost_ledger, delta_bound, plan_stages, scaling_curve
from ..core.closed_form import (
    evolve_closed_form,
    lambda_form_coefficients,
    overlap_report,
    perturbative_coefficients,
    perturbative_limits,
    schrodinger_residual,
    solve_closed_form,
)
from ..core.database import (
    apply_phase_oracle,
    create_database,
    embed,
    kickback_equivalence_batch,
    project_to_subspace,
    psi_k,
    subspace_basis,
)
from ..core.hamiltonian import (
    WeightFunction,
    ground_state,
    ground_state_full,
    hamiltonian_2x2,
    hamiltonian_full,
    schedule_weights,
)
from ..core.integrator import (
    control_blocks,
    integrate_2d,
    integrate_full,
    numeric_berry_phase,
    schedule_phase_gap,
)
from ..core.models import IntegrationConfig, SubspaceState, ValidationLevel

logger = logging.getLogger(__name__)


@dataclass
class SuiteResult:
    """Outcome of one invariant suite"""
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self):
        return {'name': self.name, 'passed': self.passed, 'detail': self.detail}


def _all_databases(max_n: int):
    """Every database with 1 <= n <= max_n and fewer than N/2 marked items."""
    for n in range(1, max_n + 1):
        size = 1 << n
        for count in range(size // 2):
            for marked in itertools.combinations(range(size), count):
                yield create_database(n, marked)


def _circular_angle(a: float, b: float) -> float:
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


class InvariantValidator:
    """
    Runs the invariant suites at a given level.

    The schedule-weight function is injectable so that a deliberately broken
    weight set can be shown to fail the schedule suites.
    """

    def __init__(self, level: ValidationLevel = ValidationLevel.FAST, weights: WeightFunction = schedule_weights):
        self.level = ValidationLevel(level)
        self.weights = weights

    @property
    def full(self) -> bool:
        return self.level is ValidationLevel.FULL

    # ------------------------------------------------------------------ database

    def database_suite(self) -> SuiteResult:
        worst = 0.0
        for n, marked in [(2, [1]), (3, [3]), (3, [0, 5, 6]), (4, [1, 2, 4, 8, 15])]:
            db = create_database(n, marked)
            e0, e1 = subspace_basis(db)
            worst = max(worst, abs(np.vdot(e0, e1)), abs(np.linalg.norm(e0) - 1), abs(np.linalg.norm(e1) - 1))

            v = psi_k(db, 0)
            for k in range(4):
                worst = max(worst, float(np.max(np.abs(psi_k(db, k) - v))))
                v = apply_phase_oracle(db, v)

            s = SubspaceState(complex(0.6, 0.1), complex(-0.3, 0.734847))
            s = SubspaceState(s.x / s.norm, s.y / s.norm)
            back = project_to_subspace(db, embed(db, s)).state
            worst = max(worst, abs(back.x - s.x), abs(back.y - s.y))

        return SuiteResult("database", worst <= 1e-12, f"max deviation {worst:.2e}")

    def kickback_suite(self) -> SuiteResult:
        max_n = 4 if self.full else 3
        checked = 0
        for db in _all_databases(max_n):
            if not kickback_equivalence_batch(db, np.eye(db.size, dtype=complex)).all():
                return SuiteResult("kickback", False, f"failed for N={db.size}, marked={db.marked}")
            checked += 1
        return SuiteResult("kickback", True, f"{checked} databases, all basis states, N <= {1 << max_n}")

    # --------------------------------------------------------------- hamiltonian

    def schedule_suite(self) -> SuiteResult:
        thetas = np.linspace(0, 2 * math.pi, 64, endpoint=False)
        worst_sum = max(abs(self.weights(t).total - 1) for t in thetas)

        db = create_database(3, [0, 2, 5])
        worst_collapse = 0.0
        for theta in (0.0, 0.9, 2.5, 4.0):
            h = hamiltonian_full(db, theta, weights=self.weights)
            psi = ground_state_full(db, theta)
            projector = np.eye(db.size) - np.outer(psi, psi.conj())
            worst_collapse = max(worst_collapse, float(np.max(np.abs(h - projector))))

        passed = worst_sum <= 1e-12 and worst_collapse <= 1e-12
        return SuiteResult(
            "schedule_sum", passed,
            f"weight sum error {worst_sum:.2e}, collapse error {worst_collapse:.2e}",
        )

    def hamiltonian_suite(self) -> SuiteResult:
        worst = 0.0
        for alpha in (0.0, 0.1, 0.2, 0.3, 0.4):
            for theta in np.linspace(0, 2 * math.pi, 32, endpoint=False):
                h = hamiltonian_2x2(alpha, theta)
                evals = np.linalg.eigvalsh(h)
                g = ground_state(alpha, theta).as_array()
                worst = max(
                    worst,
                    float(np.max(np.abs(h - h.conj().T))),
                    float(np.max(np.abs(h @ h - h))),
                    float(np.max(np.abs(evals - [0.0, 1.0]))),
                    float(np.linalg.norm(h @ g)),
                )
        return SuiteResult("hamiltonian_grid", worst <= 1e-10, f"max deviation {worst:.2e}")

    def subspace_consistency_suite(self) -> SuiteResult:
        sizes = [(2, [1]), (3, [1, 6]), (4, [0, 3, 9])]
        worst = 0.0
        for n, marked in sizes:
            db = create_database(n, marked)
            e0, e1 = subspace_basis(db)
            s = SubspaceState(complex(0.8, 0.0), complex(0.0, 0.6))
            for theta in (0.3, 1.7, 5.1):
                image = hamiltonian_full(db, theta) @ embed(db, s)
                coords = np.array([np.vdot(e0, image), np.vdot(e1, image)])
                worst = max(worst, float(np.max(np.abs(coords - hamiltonian_2x2(db.alpha_float, theta) @ s.as_array()))))
        return SuiteResult("subspace_consistency", worst <= 1e-12, f"max deviation {worst:.2e}")

    # --------------------------------------------------------------- closed form

    def closed_form_suite(self) -> SuiteResult:
        alphas = (0.05, 0.15, 0.25, 0.35, 0.45)
        omegas = (0.01, 0.02, 0.03, 0.04, 0.05)
        worst_identity = 0.0
        worst_overlap = 0.0
        worst_residual = 0.0
        for alpha, omega in itertools.product(alphas, omegas):
            sol = solve_closed_form(alpha, omega)
            lam = lambda_form_coefficients(alpha, omega)
            worst_identity = max(
                worst_identity,
                abs(sol.A + sol.B - math.sqrt(sol.beta)),
                abs(sol.C + sol.D - math.sqrt(sol.alpha)),
                abs(sol.omega1 - sol.omega2 - sol.E),
                abs(sol.omega1 + sol.omega2 - sol.omega),
                max(abs(p - q) for p, q in zip((sol.A, sol.B, sol.C, sol.D), lam)),
            )
            T = 2 * math.pi / omega
            rep = overlap_report(alpha, omega, T)
            worst_overlap = max(worst_overlap, abs(rep.inner - rep.formula_inner))
            for reversed_ in (False, True):
                worst_identity = max(worst_identity, abs(evolve_closed_form(sol, T, reversed_).norm - 1))
                worst_residual = max(worst_residual, schrodinger_residual(sol, 0.37 * T, reversed=reversed_))

        passed = worst_identity <= 1e-10 and worst_overlap <= 1e-10 and worst_residual <= 1e-6
        return SuiteResult(
            "closed_form", passed,
            f"identities {worst_identity:.2e}, overlap {worst_overlap:.2e}, residual {worst_residual:.2e}",
        )

    def bounds_suite(self) -> SuiteResult:
        alphas = (0.05, 0.15, 0.25, 0.35, 0.45)
        omegas = (0.01, 0.02, 0.03, 0.04, 0.05)
        worst_margin = -math.inf
        for alpha, omega in itertools.product(alphas, omegas):
            rep = overlap_report(alpha, omega, 2 * math.pi / omega)
            allowed = 8 * alpha * (1 - alpha) * omega ** 2 + 50 * omega ** 3
            worst_margin = max(
                worst_margin,
                (1 - rep.p_success) - allowed,
                _circular_angle(rep.arg_phase, rep.mu1) - allowed,
            )

        ratios = []
        for alpha in (0.1, 0.25):
            omega = 0.005
            rep = overlap_report(alpha, omega, 2 * math.pi / omega)
            ratios.append((1 - rep.p_success) / (alpha * (1 - alpha) * omega ** 2))

        passed = worst_margin <= 0 and all(0 < r <= 8.5 for r in ratios)
        return SuiteResult(
            "success_and_phase_bounds", passed,
            f"worst margin {worst_margin:.2e}, limit ratios {', '.join(f'{r:.3f}' for r in ratios)}",
        )

    def perturbative_suite(self) -> SuiteResult:
        worst = 0.0
        for alpha in (0.1, 0.3):
            omega = 0.005
            exact = perturbative_coefficients(alpha, omega)
            limits = perturbative_limits(alpha, omega)
            base = (1.0, 0.0, 0.0, 0.0)
            for e, lim, b in zip(exact, limits, base):
                worst = max(worst, abs((e - b) / (lim - b) - 1))
        return SuiteResult("perturbative_coefficients", worst <= 0.05, f"max relative deviation {worst:.3e}")

    # ---------------------------------------------------------------- integrator

    def integrator_suite(self) -> SuiteResult:
        if self.full:
            grid = list(itertools.product((0.1, 0.25, 0.3, 0.45), (0.01, 0.02, 0.05)))
        else:
            grid = [(0.3, 0.05), (0.1, 0.02)]
        cfg = IntegrationConfig(step=1e-3)
        worst = 0.0
        for alpha, omega in grid:
            T = 2 * math.pi / omega
            numeric = integrate_2d(alpha, omega, T, cfg=cfg)
            exact = evolve_closed_form(solve_closed_form(alpha, omega), T)
            worst = max(worst, 1 - numeric.fidelity(exact), abs(numeric.norm - 1))
        return SuiteResult("integrator_vs_closed_form", worst <= 1e-8, f"max infidelity {worst:.2e}")

    def full_space_suite(self) -> SuiteResult:
        instances = [(2, [1]), (4, [1, 6, 11])] if self.full else [(2, [1])]
        cfg = IntegrationConfig(step=1e-3)
        omega = 0.05
        T = 2 * math.pi / omega
        worst_leak = 0.0
        worst_fid = 0.0
        for n, marked in instances:
            db = create_database(n, marked)
            state = integrate_full(db, omega, T, cfg=cfg)
            blocks = control_blocks(db, state)
            fwd = integrate_2d(db.alpha_float, omega, T, cfg=cfg)
            bwd = integrate_2d(db.alpha_float, omega, T, reversed=True, cfg=cfg)
            worst_leak = max(worst_leak, *(b.leakage for b in blocks))
            worst_fid = max(worst_fid, 1 - blocks[0].state.fidelity(fwd), 1 - blocks[1].state.fidelity(bwd))
        passed = worst_leak <= 1e-9 and worst_fid <= 1e-8
        return SuiteResult("full_space", passed, f"leakage {worst_leak:.2e}, infidelity {worst_fid:.2e}")

    def path_independence_suite(self) -> SuiteResult:
        omega = 0.02
        cases = [(a, j) for a in (0.1, 0.25, 0.4) for j in (1, 2)] if self.full else [(0.25, 1)]
        cfg = IntegrationConfig(step=0.005)
        bound = 20 * omega ** 2
        worst = max(schedule_phase_gap(alpha, omega, j, cfg) for alpha, j in cases)
        return SuiteResult("path_independence", worst <= bound, f"max phase gap {worst:.2e} <= {bound:.1e}")

    def berry_phase_suite(self) -> SuiteResult:
        rng = np.random.default_rng(7)
        alphas = [0.25, 0.0] + list(rng.uniform(0, 0.5, 20 if self.full else 5))
        worst = max(abs(numeric_berry_phase(a, 1, 10_000) - 2 * math.pi * a) for a in alphas)
        return SuiteResult("berry_phase", worst <= 1e-6, f"max error {worst:.2e}")

    # ----------------------------------------------------------------- estimator

    def estimator_suite(self) -> SuiteResult:
        cases = [(n, m) for n in (3, 4, 5) for m in (3, 4, 5)] if self.full else [(4, 4), (5, 3)]
        for n, m in cases:
            size = 1 << n
            for count in range(size // 2):
                alpha = Fraction(count, size)
                estimate = recover_bits(exact_etas(alpha, m))
                if abs(estimate.value - alpha) > Fraction(1, 2 ** m):
                    return SuiteResult(
                        "estimator_exhaustive", False,
                        f"alpha={alpha}, m={m}: recovered {estimate.value}",
                    )
        return SuiteResult("estimator_exhaustive", True, f"{len(cases)} (N, m) combinations")

    # ----------------------------------------------------------------- scheduler

    def plan_budget_suite(self) -> SuiteResult:
        max_m = 12 if self.full else 6
        stages = plan_stages(max_m)
        alphas = [i / 100 for i in range(50)]
        worst = max(delta_bound(a, s.omega_j, s.j) for s in stages for a in alphas)
        return SuiteResult("plan_budget", worst < PHASE_BUDGET, f"max budget {worst:.4f} < {PHASE_BUDGET:.4f}")

    def ledger_suite(self) -> SuiteResult:
        m = 8
        stages = plan_stages(m)
        ledger = cost_ledger(stages)
        closed = (math.pi / DEFAULT_C_OMEGA) * sum(2 * s.R_j * 2 ** (1.5 * s.j) for s in stages)
        rel = abs(ledger.total - closed) / closed
        ratios_ok = all(
            abs(b.T_j / a.T_j - 2 ** 1.5) <= 1e-9 * 2 ** 1.5 for a, b in zip(stages, stages[1:])
        )
        curve = scaling_curve(4, 12)
        passed = rel <= 1e-9 and ratios_ok and 1.4 <= curve.slope <= 1.6
        return SuiteResult("ledger_and_scaling", passed, f"ledger error {rel:.2e}, slope {curve.slope:.4f}")

    # --------------------------------------------------------------------- all

    def suites(self) -> Dict[str, Callable[[], SuiteResult]]:
        return {
            'database': self.database_suite,
            'kickback': self.kickback_suite,
            'schedule_sum': self.schedule_suite,
            'hamiltonian_grid': self.hamiltonian_suite,
            'subspace_consistency': self.subspace_consistency_suite,
            'closed_form': self.closed_form_suite,
            'success_and_phase_bounds': self.bounds_suite,
            'perturbative_coefficients': self.perturbative_suite,
            'integrator_vs_closed_form': self.integrator_suite,
            'full_space': self.full_space_suite,
            'path_independence': self.path_independence_suite,
            'berry_phase': self.berry_phase_suite,
            'estimator_exhaustive': self.estimator_suite,
            'plan_budget': self.plan_budget_suite,
            'ledger_and_scaling': self.ledger_suite,
        }

    def run(self, only: Optional[List[str]] = None) -> List[SuiteResult]:
        results = []
        for name, suite in self.suites().items():
            if only and name not in only:
                continue
            try:
                result = suite()
            except Exception as e:
                logger.error(f"Suite {name} raised {type(e).__name__}: {e}")
                result = SuiteResult(name, False, f"{type(e).__name__}: {e}")
            level = logging.INFO if result.passed else logging.WARNING
            logger.log(level, f"{name}: {'PASS' if result.passed else 'FAIL'} ({result.detail})")
            results.append(result)
        return results


def run_suites(
    level: ValidationLevel = ValidationLevel.FAST,
    weights: WeightFunction = schedule_weights,
    only: Optional[List[str]] = None,
) -> List[SuiteResult]:
    return InvariantValidator(level, weights).run(only)
