from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Integral
from typing import Dict, List, Optional, Tuple
import math

import numpy as np

from .exceptions import (
    AlphaTooLarge,
    IndexOutOfRange,
    NonPowerOfTwoDomain,
    ParameterOutOfRange,
    StepTooLarge,
)

# Plain numpy arrays; the aliases document intent at call sites.
StateVector = np.ndarray
HamiltonianMatrix = np.ndarray

OMEGA_MAX = 0.1
MAX_STEP = 0.1
DEFAULT_STEP = 1e-3


class EngineMode(Enum):
    CLOSED_FORM = "closed_form"
    INTEGRATE_2D = "integrate_2d"
    FULL = "full"


class ValidationLevel(Enum):
    FAST = "fast"
    FULL = "full"


@dataclass(frozen=True)
class MarkedDatabase:
    n: int
    marked: Tuple[int, ...] = ()

    def __post_init__(self):
        """Validate the instance after construction."""
        if isinstance(self.n, bool) or not isinstance(self.n, Integral) or self.n < 1:
            raise NonPowerOfTwoDomain(f"Qubit count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

        ordered = tuple(sorted(set(int(s) for s in self.marked)))
        for s in ordered:
            if s < 0 or s >= self.size:
                raise IndexOutOfRange(f"Marked index {s} outside [0, {self.size})")
        if 2 * len(ordered) >= self.size:
            raise AlphaTooLarge(
                f"{len(ordered)} marked items out of {self.size}: alpha must stay below 1/2"
            )
        object.__setattr__(self, "marked", ordered)

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def marked_count(self) -> int:
        return len(self.marked)

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.marked_count, self.size)

    @property
    def beta(self) -> Fraction:
        return 1 - self.alpha

    @property
    def alpha_float(self) -> float:
        # single conversion site between the exact fraction and the dynamics
        return float(self.alpha)

    def f(self, x: int) -> int:
        i = bisect_left(self.marked, x)
        return int(i < len(self.marked) and self.marked[i] == x)

    def marked_mask(self) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        mask[list(self.marked)] = True
        return mask


@dataclass(frozen=True)
class SubspaceState:
    """Amplitudes on the {|0^>, |1^>} basis."""
    x: complex
    y: complex

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.x) ** 2 + abs(self.y) ** 2)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=complex)

    @classmethod
    def from_array(cls, v: np.ndarray) -> "SubspaceState":
        return cls(complex(v[0]), complex(v[1]))

    def fidelity(self, other: "SubspaceState") -> float:
        return abs(np.vdot(self.as_array(), other.as_array())) ** 2


@dataclass(frozen=True)
class SubspaceProjection:
    state: SubspaceState
    leakage: float
    degenerate: bool = False


@dataclass(frozen=True)
class ScheduleWeights:
    s0: float
    s1: float
    s2: float
    s3: float

    @property
    def total(self) -> float:
        return self.s0 + self.s1 + self.s2 + self.s3

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.s0, self.s1, self.s2, self.s3)


@dataclass(frozen=True)
class PhaseRecord:
    gamma: float
    big_gamma: float
    winding: float  # theta endpoint 2^j * pi
    dynamic_phase: float = 0.0


@dataclass(frozen=True)
class ClosedFormSolution:
    alpha: float
    beta: float
    omega: float
    E: float
    omega1: float
    omega2: float
    lam: float
    A: float
    B: float
    C: float
    D: float


@dataclass(frozen=True)
class OverlapReport:
    inner: complex  # <phi'(T)|phi(T)>, the control-qubit coherence
    mu1: float
    mu2: float
    p_success: float
    arg_phase: float
    leak_magnitude: float
    mu1_printed: float = 0.0
    formula_inner: complex = 0j


@dataclass
class IntegrationConfig:
    step: Optional[float] = None  # None: min(1e-3, omega/50)
    scheme_order: int = 4
    store_trajectory: bool = False

    def __post_init__(self):
        if self.step is not None:
            if not self.step > 0:
                raise ParameterOutOfRange(f"Integration step must be positive, got {self.step}")
            if self.step > MAX_STEP:
                raise StepTooLarge(f"Integration step {self.step} exceeds {MAX_STEP}")
        if self.scheme_order != 4:
            raise ParameterOutOfRange("Only the classical fourth-order scheme is available")

    def resolve_step(self, omega: float) -> float:
        if self.step is not None:
            return self.step
        if not omega > 0:
            raise ParameterOutOfRange(f"Default step needs a positive sweep rate, got omega={omega}")
        return min(DEFAULT_STEP, omega / 50.0)


@dataclass(frozen=True)
class MeasurementPlan:
    delta: float
    failure_prob: float
    repetitions: int

    def __post_init__(self):
        if self.repetitions < 1:
            raise ParameterOutOfRange(f"Repetitions must be at least 1, got {self.repetitions}")

    @property
    def sufficient(self) -> bool:
        """True when the Chernoff bound covers (delta, failure_prob)."""
        if self.failure_prob >= 2:
            return True
        return self.repetitions >= math.log(2 / self.failure_prob) / (2 * self.delta ** 2)


@dataclass(frozen=True)
class EtaEstimate:
    stage_j: int
    eta: Fraction
    raw_phase: float
    degenerate: bool = False


@dataclass
class AlphaEstimate:
    bits: List[int]
    value: Fraction
    m: int
    epsilon: Fraction
    ambiguous_stages: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            'alpha_hat': float(self.value),
            'alpha_hat_fraction': str(self.value),
            'bits': list(self.bits),
            'm': self.m,
            'epsilon': float(self.epsilon),
            'ambiguous_stages': list(self.ambiguous_stages),
        }


@dataclass(frozen=True)
class StageConfig:
    j: int
    omega_j: float
    T_j: float
    R_j: int

    def __post_init__(self):
        if self.j < 1:
            raise ParameterOutOfRange(f"Stage index must be >= 1, got {self.j}")
        if not 0 < self.omega_j <= OMEGA_MAX:
            raise ParameterOutOfRange(f"Stage rate {self.omega_j} outside (0, {OMEGA_MAX}]")
        if self.R_j < 1:
            raise ParameterOutOfRange(f"Stage repetitions must be >= 1, got {self.R_j}")


@dataclass(frozen=True)
class StageCost:
    j: int
    T_j: float
    R_j: int
    bases: int = 2

    @property
    def stage_cost(self) -> float:
        return self.bases * self.R_j * self.T_j


@dataclass
class CostLedger:
    per_stage: List[StageCost] = field(default_factory=list)

    @property
    def total(self) -> float:
        return math.fsum(s.stage_cost for s in self.per_stage)

    def to_dict(self) -> Dict:
        return {
            'per_stage': [
                {'j': s.j, 'T_j': s.T_j, 'R_j': s.R_j, 'bases': s.bases, 'stage_cost': s.stage_cost}
                for s in self.per_stage
            ],
            'total': self.total,
        }


@dataclass(frozen=True)
class StageDiagnostics:
    stage: int
    omega_j: float
    T_j: float
    R: int
    inner: complex
    arg_phase: float
    ideal_phase: float
    p_success: float
    pX: float
    pY: float
    qX: float
    qY: float
    eta: Fraction
    raw_phase: float
    degenerate: bool = False
    leakage: float = 0.0

    def to_dict(self) -> Dict:
        return {
            'stage': self.stage,
            'omega_j': self.omega_j,
            'T_j': self.T_j,
            'R': self.R,
            'inner_re': self.inner.real,
            'inner_im': self.inner.imag,
            'arg_phase': self.arg_phase,
            'ideal_phase': self.ideal_phase,
            'p_success': self.p_success,
            'pX': self.pX,
            'pY': self.pY,
            'qX': self.qX,
            'qY': self.qY,
            'eta': float(self.eta),
            'raw_phase': self.raw_phase,
            'degenerate': self.degenerate,
            'leakage': self.leakage,
        }


@dataclass
class CountingResult:
    estimate: AlphaEstimate
    ledger: CostLedger
    diagnostics: List[StageDiagnostics]
    alpha_true: Fraction
    mode: EngineMode
    seed: int

    @property
    def error(self) -> Fraction:
        return abs(self.estimate.value - self.alpha_true)

    @property
    def success(self) -> bool:
        return self.error <= self.estimate.epsilon


@dataclass
class RunConfig:
    instance: Optional[str] = None
    m: int = 4
    mode: EngineMode = EngineMode.CLOSED_FORM
    seed: int = 0
    c_omega: float = 0.05
    delta: float = 0.22
    failure_prob: float = 0.1
    r0: Optional[int] = None
    r_slope: Optional[float] = None
    out: str = "./results"
    step: Optional[float] = None

    def __post_init__(self):
        """Coerce string values from config files and validate ranges."""
        if isinstance(self.mode, str):
            try:
                self.mode = EngineMode(self.mode)
            except ValueError:
                raise ParameterOutOfRange(f"Unknown mode: {self.mode}")

        if self.m < 1:
            raise ParameterOutOfRange("m must be at least 1")
        if not 0 < self.c_omega <= OMEGA_MAX:
            raise ParameterOutOfRange(f"c_omega must be in (0, {OMEGA_MAX}]")
        if not 0 < self.delta < 0.5:
            raise ParameterOutOfRange("delta must be in (0, 1/2)")
        if not self.failure_prob > 0:
            raise ParameterOutOfRange("failure_prob must be positive")
        if self.r0 is not None and self.r0 < 1:
            raise ParameterOutOfRange("r0 must be at least 1")
        if self.r_slope is not None and self.r_slope < 0:
            raise ParameterOutOfRange("r_slope cannot be negative")
        if self.step is not None:
            IntegrationConfig(step=self.step)
