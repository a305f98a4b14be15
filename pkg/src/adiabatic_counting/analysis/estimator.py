"""
Phase estimation from control-qubit measurements and binary recovery of alpha.

Stage j prepares the relative phase 2*pi*(2^j alpha). Measuring the control
qubit in the X and Y bases gives cos and sin of that phase, the estimate is
rounded to the nearest eighth, and the stages are combined from the finest
(j = m) to the coarsest (j = 1) keeping a rolling three-bit window.
"""

import logging
import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.exceptions import AmbiguousBit, DegenerateSamples, NonPhysicalOverlap, ParameterOutOfRange
from ..core.models import AlphaEstimate, EtaEstimate, MeasurementPlan

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]

GRID = 8
BASIS_X = 0
BASIS_Y = 1


def circular_distance(a: Number, b: Number) -> Number:
    d = (a - b) % 1
    return min(d, 1 - d)


def round_to_eighths(raw_phase: Number) -> Fraction:
    """Nearest point of {0, 1/8, ..., 7/8} on the circle; ties go to the lower grid value."""
    k = math.ceil(GRID * raw_phase - Fraction(1, 2)) % GRID
    return Fraction(k, GRID)


def measurement_probabilities(inner: complex) -> Tuple[float, float]:
    """P(|+>) in the X basis and P((|0> + i|1>)/sqrt 2) in the Y basis for coherence `inner`."""
    if abs(inner) > 1 + 1e-9:
        raise NonPhysicalOverlap(f"|inner| = {abs(inner):.12f} exceeds 1")
    p_x = min(max((1 + inner.real) / 2, 0.0), 1.0)
    p_y = min(max((1 - inner.imag) / 2, 0.0), 1.0)
    return p_x, p_y


def chernoff_repetitions(delta: float, failure_prob: float) -> int:
    """Smallest R with 2 exp(-2 delta^2 R) <= failure_prob."""
    if not 0 < delta < 0.5:
        raise ParameterOutOfRange(f"delta must lie in (0, 1/2), got {delta}")
    if not failure_prob > 0:
        raise ParameterOutOfRange(f"failure_prob must be positive, got {failure_prob}")
    if failure_prob >= 2:
        return 1
    return max(1, math.ceil(math.log(2 / failure_prob) / (2 * delta ** 2)))


def measurement_plan(delta: float, failure_prob: float, repetitions: Optional[int] = None) -> MeasurementPlan:
    if repetitions is None:
        repetitions = chernoff_repetitions(delta, failure_prob)
    plan = MeasurementPlan(delta=delta, failure_prob=failure_prob, repetitions=repetitions)
    if not plan.sufficient:
        logger.warning(
            f"{repetitions} repetitions fall short of the Chernoff count for "
            f"delta={delta}, failure_prob={failure_prob}"
        )
    return plan


def stage_rng(seed: int, stage: int, basis: int) -> np.random.Generator:
    """Independent generator per (seed, stage, basis)."""
    return np.random.default_rng(np.random.SeedSequence([seed, stage, basis]))


def sample_counts(pX: float, pY: float, plan: MeasurementPlan, rng_seed: int, stage: int = 0) -> Tuple[float, float]:
    """Empirical |+> frequencies from plan.repetitions fresh evolutions per basis."""
    for p in (pX, pY):
        if not 0 <= p <= 1:
            raise ParameterOutOfRange(f"Probability {p} outside [0, 1]")
    r = plan.repetitions
    hits_x = np.count_nonzero(stage_rng(rng_seed, stage, BASIS_X).random(r) < pX)
    hits_y = np.count_nonzero(stage_rng(rng_seed, stage, BASIS_Y).random(r) < pY)
    return hits_x / r, hits_y / r


def estimate_eta(qX: float, qY: float, stage_j: int, strict: bool = False) -> EtaEstimate:
    """
    Reconstruct 2^j alpha mod 1 from the two frequencies and round it to eighths.

    Frequencies of exactly (1/2, 1/2) carry no phase information: the estimate
    is eta = 0 flagged degenerate, or DegenerateSamples when strict.
    """
    if qX == 0.5 and qY == 0.5:
        if strict:
            raise DegenerateSamples(f"Stage {stage_j}: both quadratures are exactly 1/2")
        logger.warning(f"Stage {stage_j}: degenerate samples, phase undefined; using eta = 0")
        return EtaEstimate(stage_j=stage_j, eta=Fraction(0), raw_phase=0.0, degenerate=True)

    raw = (math.atan2(1 - 2 * qY, 2 * qX - 1) / (2 * math.pi)) % 1.0
    if raw >= 1.0:
        raw = 0.0
    return EtaEstimate(stage_j=stage_j, eta=round_to_eighths(raw), raw_phase=raw)


def _three_bits(eta: Fraction) -> Tuple[int, int, int]:
    k = int(eta * GRID) % GRID
    return (k >> 2) & 1, (k >> 1) & 1, k & 1


def recover_bits(etas: Sequence[EtaEstimate], strict: bool = False) -> AlphaEstimate:
    """
    Binary digits alpha_1..alpha_{m+1} of alpha from one estimate per stage.

    eta_j approximates 0.alpha_{j+1} alpha_{j+2} ... . The window starts from
    the three bits of eta_m; each coarser stage then picks the bit b whose
    0.b alpha_{j+2} alpha_{j+3} lies closest to eta_j. alpha_1 is 0.
    """
    ordered = sorted(etas, key=lambda e: e.stage_j)
    m = len(ordered)
    if m == 0 or [e.stage_j for e in ordered] != list(range(1, m + 1)):
        raise ParameterOutOfRange("Need exactly one estimate for each stage 1..m")

    bits = {}
    bits[m + 1], bits[m + 2], bits[m + 3] = _three_bits(ordered[-1].eta)

    ambiguous: List[int] = []
    for j in range(m - 1, 0, -1):
        eta = ordered[j - 1].eta
        tail = 2 * bits[j + 2] + bits[j + 3]
        d0 = circular_distance(Fraction(tail, GRID), eta)
        d1 = circular_distance(Fraction(4 + tail, GRID), eta)
        if d0 == d1:
            if strict:
                raise AmbiguousBit(f"Stage {j}: both candidate bits at distance {d0}")
            logger.warning(f"Stage {j}: ambiguous bit, choosing 0")
            ambiguous.append(j)
        bits[j + 1] = 0 if d0 <= d1 else 1

    digits = [0] + [bits[i] for i in range(2, m + 2)]
    value = sum((Fraction(d, 2 ** i) for i, d in enumerate(digits, start=1)), Fraction(0))
    return AlphaEstimate(
        bits=digits,
        value=value,
        m=m,
        epsilon=Fraction(1, 2 ** m),
        ambiguous_stages=sorted(ambiguous),
    )


def exact_etas(alpha: Number, m: int) -> List[EtaEstimate]:
    """Noise-free estimates: 2^j alpha mod 1 rounded to eighths, for j = 1..m."""
    if m < 1:
        raise ParameterOutOfRange(f"m must be >= 1, got {m}")
    out = []
    for j in range(1, m + 1):
        x = (Fraction(alpha) * 2 ** j) % 1
        out.append(EtaEstimate(stage_j=j, eta=round_to_eighths(x), raw_phase=float(x)))
    return out
