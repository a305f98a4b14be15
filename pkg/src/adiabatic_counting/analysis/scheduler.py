"""
Stage planning, end-to-end counting runs and evolution-time accounting.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from ..core.closed_form import overlap_report
from ..core.exceptions import GuardExceeded, ParameterOutOfRange, PlanBudgetViolation
from ..core.integrator import control_blocks, control_coherence, integrate_2d, integrate_full
from ..core.hamiltonian import MAX_CONTROLLED_SIZE
from ..core.models import (
    OMEGA_MAX,
    CostLedger,
    CountingResult,
    EngineMode,
    EtaEstimate,
    IntegrationConfig,
    MarkedDatabase,
    MeasurementPlan,
    StageConfig,
    StageCost,
    StageDiagnostics,
)
from .estimator import (
    chernoff_repetitions,
    estimate_eta,
    measurement_plan,
    measurement_probabilities,
    recover_bits,
    sample_counts,
)

logger = logging.getLogger(__name__)

PHASE_BUDGET = 2 * math.pi / 32
MAX_M = {
    EngineMode.CLOSED_FORM: 20,
    EngineMode.INTEGRATE_2D: 10,
    EngineMode.FULL: 10,
}
DEFAULT_DELTA = 0.22
DEFAULT_FAILURE_PROB = 0.1
DEFAULT_C_OMEGA = 0.05


@dataclass(frozen=True)
class ScalingCurve:
    points: List[Tuple[int, float, float]]  # (m, epsilon, T_total)
    slope: float
    intercept: float
    r_value: float


def default_repetitions(m: int, delta: float = DEFAULT_DELTA, failure_prob: float = DEFAULT_FAILURE_PROB) -> Tuple[int, float]:
    """(r0, r_slope) with the per-stage failure budget split evenly over m stages."""
    r0 = chernoff_repetitions(delta, failure_prob / m)
    return r0, r0 / 2


def worst_case_delta_bound(omega: float, j: int) -> float:
    """Phase budget with alpha*beta and alpha*beta*|beta - alpha| both replaced by 1/4."""
    w2 = omega ** 2
    return 2 * math.pi * 2 * w2 + 2 * w2 + 2 * math.pi * (2 ** j) * 0.25 * w2


def delta_bound(alpha: float, omega: float, j: int) -> float:
    """
    2*pi*(1 - p_s) + 8 alpha beta omega^2 + 2*pi*2^j alpha beta |beta - alpha| omega^2,
    with p_s taken from the closed-form overlap at T = 2^j pi / omega.
    """
    if j < 1:
        raise ParameterOutOfRange(f"Stage index must be >= 1, got {j}")
    a = float(alpha)
    b = 1.0 - a
    T = (2 ** j) * math.pi / omega
    p_s = overlap_report(a, omega, T).p_success
    w2 = omega ** 2
    return (
        2 * math.pi * (1 - p_s)
        + 8 * a * b * w2
        + 2 * math.pi * (2 ** j) * a * b * abs(b - a) * w2
    )


def plan_stages(
    m: int,
    c_omega: float = DEFAULT_C_OMEGA,
    r0: Optional[int] = None,
    r_slope: Optional[float] = None,
    delta: float = DEFAULT_DELTA,
    failure_prob: float = DEFAULT_FAILURE_PROB,
) -> List[StageConfig]:
    """
    omega_j = c_omega 2^(-j/2), T_j = 2^j pi / omega_j, R_j = r0 + ceil(r_slope (m - j)).

    Raises PlanBudgetViolation when the worst-case phase budget of any stage
    reaches 2*pi/32.
    """
    if m < 1:
        raise ParameterOutOfRange(f"m must be >= 1, got {m}")
    if not 0 < c_omega <= OMEGA_MAX:
        raise ParameterOutOfRange(f"c_omega must lie in (0, {OMEGA_MAX}], got {c_omega}")

    default_r0, default_slope = default_repetitions(m, delta, failure_prob)
    r0 = default_r0 if r0 is None else r0
    r_slope = default_slope if r_slope is None else r_slope
    if r0 < 1 or r_slope < 0:
        raise ParameterOutOfRange(f"Invalid repetition schedule r0={r0}, r_slope={r_slope}")

    stages = []
    for j in range(1, m + 1):
        omega_j = c_omega * 2 ** (-j / 2)
        budget = worst_case_delta_bound(omega_j, j)
        if budget >= PHASE_BUDGET:
            raise PlanBudgetViolation(
                f"Stage {j}: worst-case phase error {budget:.4f} reaches 2*pi/32 at omega={omega_j:.4g}"
            )
        if 2 * budget >= PHASE_BUDGET:
            logger.warning(f"Stage {j}: phase budget margin below 2x ({budget:.4f} rad)")
        stages.append(StageConfig(
            j=j,
            omega_j=omega_j,
            T_j=(2 ** j) * math.pi / omega_j,
            R_j=r0 + math.ceil(r_slope * (m - j)),
        ))
    return stages


def cost_ledger(stages: List[StageConfig]) -> CostLedger:
    return CostLedger(per_stage=[StageCost(j=s.j, T_j=s.T_j, R_j=s.R_j) for s in stages])


class CountingScheduler:
    """Runs the staged counting procedure on one instance with one engine."""

    def __init__(
        self,
        c_omega: float = DEFAULT_C_OMEGA,
        delta: float = DEFAULT_DELTA,
        failure_prob: float = DEFAULT_FAILURE_PROB,
        r0: Optional[int] = None,
        r_slope: Optional[float] = None,
        integration: Optional[IntegrationConfig] = None,
    ):
        self.c_omega = c_omega
        self.delta = delta
        self.failure_prob = failure_prob
        self.r0 = r0
        self.r_slope = r_slope
        self.integration = integration or IntegrationConfig()

    def plan(self, m: int) -> List[StageConfig]:
        return plan_stages(m, self.c_omega, self.r0, self.r_slope, self.delta, self.failure_prob)

    def _check_guards(self, db: MarkedDatabase, m: int, mode: EngineMode) -> None:
        if m > MAX_M[mode]:
            raise GuardExceeded(f"m={m} exceeds the {mode.value} limit of {MAX_M[mode]}")
        if mode is EngineMode.FULL and db.size > MAX_CONTROLLED_SIZE:
            raise GuardExceeded(f"Full mode limited to N <= {MAX_CONTROLLED_SIZE}, got N={db.size}")

    def _stage_overlap(self, db: MarkedDatabase, stage: StageConfig, mode: EngineMode) -> Tuple[complex, float]:
        """Control-qubit coherence after the stage, and subspace leakage (full mode only)."""
        alpha = db.alpha_float
        if mode is EngineMode.CLOSED_FORM:
            return overlap_report(alpha, stage.omega_j, stage.T_j).inner, 0.0
        if mode is EngineMode.INTEGRATE_2D:
            fwd = integrate_2d(alpha, stage.omega_j, stage.T_j, reversed=False, cfg=self.integration)
            bwd = integrate_2d(alpha, stage.omega_j, stage.T_j, reversed=True, cfg=self.integration)
            return complex(np.vdot(bwd.as_array(), fwd.as_array())), 0.0
        state = integrate_full(db, stage.omega_j, stage.T_j, cfg=self.integration)
        leakage = max(p.leakage for p in control_blocks(db, state))
        return control_coherence(db, state), leakage

    def _run_stage(
        self,
        db: MarkedDatabase,
        stage: StageConfig,
        plan: MeasurementPlan,
        mode: EngineMode,
        seed: int,
    ) -> Tuple[EtaEstimate, StageDiagnostics]:
        inner, leakage = self._stage_overlap(db, stage, mode)
        p_x, p_y = measurement_probabilities(inner)

        if db.marked_count == 0:
            # nothing marked: the phase is identically 0, so no sampling is needed
            q_x, q_y = p_x, p_y
            eta = EtaEstimate(stage_j=stage.j, eta=Fraction(0), raw_phase=0.0)
        else:
            q_x, q_y = sample_counts(p_x, p_y, plan, seed, stage=stage.j)
            eta = estimate_eta(q_x, q_y, stage.j)

        ideal = (2 * math.pi * (2 ** stage.j) * db.alpha_float) % (2 * math.pi)
        diag = StageDiagnostics(
            stage=stage.j,
            omega_j=stage.omega_j,
            T_j=stage.T_j,
            R=stage.R_j,
            inner=inner,
            arg_phase=float(np.angle(inner)) % (2 * math.pi),
            ideal_phase=ideal,
            p_success=(1 + min(abs(inner) ** 2, 1.0)) / 2,
            pX=p_x,
            pY=p_y,
            qX=q_x,
            qY=q_y,
            eta=eta.eta,
            raw_phase=eta.raw_phase,
            degenerate=eta.degenerate,
            leakage=leakage,
        )
        logger.debug(
            f"Stage {stage.j}: arg={diag.arg_phase:.6f} ideal={ideal:.6f} "
            f"q=({q_x:.3f}, {q_y:.3f}) eta={eta.eta}"
        )
        return eta, diag

    def run(self, db: MarkedDatabase, m: int, mode: EngineMode = EngineMode.CLOSED_FORM, seed: int = 0) -> CountingResult:
        mode = EngineMode(mode)
        self._check_guards(db, m, mode)
        stages = self.plan(m)
        logger.info(f"Counting N={db.size} M={db.marked_count} with m={m}, mode={mode.value}, seed={seed}")

        etas = []
        diagnostics = []
        if db.marked_count == 0:
            logger.info("No marked items: every stage phase is exactly 0, sampling skipped")

        for stage in stages:
            plan = measurement_plan(self.delta, self.failure_prob / m, stage.R_j)
            eta, diag = self._run_stage(db, stage, plan, mode, seed)
            etas.append(eta)
            diagnostics.append(diag)

        estimate = recover_bits(etas)
        ledger = cost_ledger(stages)
        logger.info(f"alpha_hat={estimate.value} (true {db.alpha}), T_total={ledger.total:.6g}")
        return CountingResult(
            estimate=estimate,
            ledger=ledger,
            diagnostics=diagnostics,
            alpha_true=db.alpha,
            mode=mode,
            seed=seed,
        )

    def generate_stage_table(self, result: CountingResult) -> List[Dict]:
        """One row per stage, suitable for stages.jsonl or a CSV export."""
        return [d.to_dict() for d in result.diagnostics]


def run_counting(
    db: MarkedDatabase,
    m: int,
    mode: EngineMode = EngineMode.CLOSED_FORM,
    seed: int = 0,
    **scheduler_options,
) -> CountingResult:
    return CountingScheduler(**scheduler_options).run(db, m, mode, seed)


def scaling_curve(
    m_lo: int,
    m_hi: int,
    c_omega: float = DEFAULT_C_OMEGA,
    delta: float = DEFAULT_DELTA,
    failure_prob: float = DEFAULT_FAILURE_PROB,
    r0: Optional[int] = None,
    r_slope: Optional[float] = None,
) -> ScalingCurve:
    """Planned T_total for m in [m_lo, m_hi] and the log-log slope against 1/epsilon."""
    if not 1 <= m_lo < m_hi <= MAX_M[EngineMode.CLOSED_FORM]:
        raise ParameterOutOfRange(
            f"Need 1 <= m_lo < m_hi <= {MAX_M[EngineMode.CLOSED_FORM]}, got ({m_lo}, {m_hi})"
        )

    points = []
    for m in range(m_lo, m_hi + 1):
        ledger = cost_ledger(plan_stages(m, c_omega, r0, r_slope, delta, failure_prob))
        points.append((m, 2.0 ** -m, ledger.total))

    fit = stats.linregress(
        [math.log(1 / eps) for _, eps, _ in points],
        [math.log(total) for _, _, total in points],
    )
    logger.info(f"Scaling slope {fit.slope:.4f} over m={m_lo}..{m_hi}")
    return ScalingCurve(points=points, slope=float(fit.slope), intercept=float(fit.intercept), r_value=float(fit.rvalue))
