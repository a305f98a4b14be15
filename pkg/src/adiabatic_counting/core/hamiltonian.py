"""
Interpolated oracle Hamiltonians H(theta) = sum_k s_k(theta) H_k.

Each H_k = I - |psi_k><psi_k| is built from the phase-oracle states, and the
interpolation collapses to I - |psi(theta)><psi(theta)| with ground state
sqrt(beta)|0^> + exp(-i theta) sqrt(alpha)|1^>.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Union

import numpy as np

from .database import one_hat, psi_k, zero_hat
from .exceptions import AlphaOutOfRange, DimensionTooLarge, ParameterOutOfRange
from .models import HamiltonianMatrix, MarkedDatabase, PhaseRecord, ScheduleWeights, StateVector, SubspaceState

logger = logging.getLogger(__name__)

MAX_CONTROLLED_SIZE = 64

Schedule = Callable[[np.ndarray], np.ndarray]
WeightFunction = Callable[[float], ScheduleWeights]


def check_alpha(alpha: Union[float, Fraction]) -> float:
    """Convert alpha to float once and enforce 0 <= alpha < 1/2."""
    a = float(alpha)
    if not 0 <= a < 0.5:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1/2), got {alpha}")
    return a


def schedule_weights(theta: float) -> ScheduleWeights:
    c = math.cos(theta)
    s = math.sin(theta)
    return ScheduleWeights(s0=(1 + c) / 2, s1=s / 2, s2=(1 - c) / 2, s3=-s / 2)


@dataclass(frozen=True)
class LinearSchedule:
    """theta(t) = omega * t"""
    omega: float

    def __call__(self, t):
        return self.omega * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class SmoothstepSchedule:
    """theta(t) = theta_end * u^2 (3 - 2u) with u = t/T; same endpoints, zero rate at both ends."""
    theta_end: float
    T: float

    def __call__(self, t):
        u = np.asarray(t, dtype=float) / self.T
        return self.theta_end * u * u * (3 - 2 * u)


def linear_schedule(omega: float) -> LinearSchedule:
    return LinearSchedule(omega)


def smoothstep_schedule(theta_end: float, T: float) -> SmoothstepSchedule:
    if T <= 0:
        raise ParameterOutOfRange(f"Schedule duration must be positive, got {T}")
    return SmoothstepSchedule(theta_end, T)


def hamiltonian_2x2(alpha: float, theta: float) -> HamiltonianMatrix:
    a = check_alpha(alpha)
    b = 1.0 - a
    off = math.sqrt(a * b)
    phase = complex(math.cos(theta), math.sin(theta))
    return np.array([[a, -off * phase], [-off * phase.conjugate(), b]], dtype=complex)


def hamiltonian_2x2_batch(alpha: float, thetas: np.ndarray) -> np.ndarray:
    """Stack of subspace Hamiltonians, shape (len(thetas), 2, 2)."""
    a = check_alpha(alpha)
    b = 1.0 - a
    off = math.sqrt(a * b)
    phase = np.exp(1j * np.asarray(thetas, dtype=float))
    h = np.empty(phase.shape + (2, 2), dtype=complex)
    h[..., 0, 0] = a
    h[..., 0, 1] = -off * phase
    h[..., 1, 0] = -off * phase.conj()
    h[..., 1, 1] = b
    return h


def oracle_hamiltonians(db: MarkedDatabase) -> List[HamiltonianMatrix]:
    """H_k = I - |psi_k><psi_k| for k = 0..3."""
    identity = np.eye(db.size, dtype=complex)
    hs = []
    for k in range(4):
        v = psi_k(db, k)
        hs.append(identity - np.outer(v, v.conj()))
    return hs


def ground_state_full(db: MarkedDatabase, theta: float) -> StateVector:
    state = ground_state(db.alpha_float, theta)
    return state.x * zero_hat(db) + state.y * one_hat(db)


def hamiltonian_full(
    db: MarkedDatabase,
    theta: float,
    controlled: bool = False,
    weights: WeightFunction = schedule_weights,
) -> HamiltonianMatrix:
    """
    Full-space H(theta) = sum_k s_k(theta) H_k.

    The controlled form is block diagonal over the control qubit (index c*N + x):
    H(theta) on the control-0 block and H(-theta) on the control-1 block. It is
    only materialized for N <= 64.
    """
    if controlled and db.size > MAX_CONTROLLED_SIZE:
        raise DimensionTooLarge(
            f"Controlled Hamiltonian limited to N <= {MAX_CONTROLLED_SIZE}, got N={db.size}"
        )

    hs = oracle_hamiltonians(db)

    def interpolate(angle: float) -> np.ndarray:
        s = weights(angle).as_tuple()
        return sum(w * h for w, h in zip(s, hs))

    if not controlled:
        return interpolate(theta)

    n = db.size
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    h[:n, :n] = interpolate(theta)
    h[n:, n:] = interpolate(-theta)
    return h


def ground_state(alpha: float, theta: float) -> SubspaceState:
    a = check_alpha(alpha)
    return SubspaceState(
        complex(math.sqrt(1.0 - a)),
        complex(math.cos(theta), -math.sin(theta)) * math.sqrt(a),
    )


def ground_states(alpha: float, thetas: np.ndarray) -> np.ndarray:
    """Vectorized ground_state: rows are (x, y) pairs."""
    a = check_alpha(alpha)
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty(thetas.shape + (2,), dtype=complex)
    out[..., 0] = math.sqrt(1.0 - a)
    out[..., 1] = np.exp(-1j * thetas) * math.sqrt(a)
    return out


def berry_phase_exact(alpha: float, j: int) -> PhaseRecord:
    """
    Berry phase after sweeping theta over [0, 2^j pi].

    The connection i<psi|d/dtheta psi> equals alpha everywhere, so gamma is
    alpha times the swept angle. The ground energy is 0, so no dynamic phase
    accumulates and the relative phase between branches is purely geometric.
    """
    a = check_alpha(alpha)
    if j < 1:
        raise ParameterOutOfRange(f"Stage index must be >= 1, got {j}")
    winding = (2 ** j) * math.pi
    gamma = winding * a
    return PhaseRecord(gamma=gamma, big_gamma=2 * gamma, winding=winding, dynamic_phase=0.0)
