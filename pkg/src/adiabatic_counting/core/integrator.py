"""
Fixed-step fourth-order integration of i d/dt phi = H(theta(t)) phi.

The two-level engine builds one step matrix per time step (the classical
RK4 update applied to the identity), in vectorized chunks, and multiplies
them together. It never diagonalizes H, so it stays independent of the
closed-form solution it is checked against.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .closed_form import check_omega, evolve_closed_form, solve_closed_form
from .database import one_hat, project_to_subspace, psi_k, zero_hat
from .exceptions import CostGuardExceeded, DimensionTooLarge, ParameterOutOfRange, TooFewSteps
from .hamiltonian import (
    MAX_CONTROLLED_SIZE,
    LinearSchedule,
    Schedule,
    check_alpha,
    ground_states,
    hamiltonian_2x2_batch,
    oracle_hamiltonians,
    smoothstep_schedule,
)
from .models import IntegrationConfig, MarkedDatabase, StateVector, SubspaceProjection, SubspaceState

logger = logging.getLogger(__name__)

MAX_STEPS = 1e9
NORM_DRIFT_LIMIT = 1e-9
LEAKAGE_LIMIT = 1e-9
CHUNK_SIZE = 65536
MIN_BERRY_STEPS = 1000

_I2 = np.eye(2, dtype=complex)


def _step_count(T: float, step: float) -> int:
    if not T > 0:
        raise ParameterOutOfRange(f"Evolution time must be positive, got {T}")
    if T / step > MAX_STEPS:
        raise CostGuardExceeded(f"T/step = {T / step:.3e} exceeds {MAX_STEPS:.0e}")
    return max(1, math.ceil(T / step - 1e-9))


def _rk4_step_matrices(alpha: float, schedule: Schedule, sign: float, t0: np.ndarray, h: float) -> np.ndarray:
    """RK4 one-step propagators for steps starting at t0, shape (len(t0), 2, 2)."""
    f1 = -1j * hamiltonian_2x2_batch(alpha, sign * schedule(t0))
    f2 = -1j * hamiltonian_2x2_batch(alpha, sign * schedule(t0 + h / 2))
    f4 = -1j * hamiltonian_2x2_batch(alpha, sign * schedule(t0 + h))
    k1 = f1
    k2 = f2 @ (_I2 + (h / 2) * k1)
    k3 = f2 @ (_I2 + (h / 2) * k2)
    k4 = f4 @ (_I2 + h * k3)
    return _I2 + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """mats[-1] @ ... @ mats[0] by pairwise reduction."""
    while len(mats) > 1:
        if len(mats) % 2:
            mats = np.concatenate([mats, _I2[None]])
        mats = mats[1::2] @ mats[0::2]
    return mats[0]


def _prefix_products(mats: np.ndarray) -> np.ndarray:
    """out[i] = mats[i] @ ... @ mats[0]."""
    out = mats.copy()
    d = 1
    while d < len(out):
        out[d:] = out[d:] @ out[:-d]
        d *= 2
    return out


def _propagate_2d(
    alpha: float,
    omega: float,
    T: float,
    reversed: bool,
    cfg: IntegrationConfig,
    schedule: Optional[Schedule],
    keep_states: bool,
) -> Tuple[np.ndarray, Optional[np.ndarray], Optional[np.ndarray]]:
    a = check_alpha(alpha)
    omega = check_omega(omega)
    step = cfg.resolve_step(omega)
    n_steps = _step_count(T, step)
    h = T / n_steps
    schedule = schedule or LinearSchedule(omega)
    sign = -1.0 if reversed else 1.0

    phi = np.array([math.sqrt(1 - a), math.sqrt(a)], dtype=complex)
    times = [np.zeros(1)] if keep_states else None
    states = [phi[None, :]] if keep_states else None

    for start in range(0, n_steps, CHUNK_SIZE):
        idx = np.arange(start, min(start + CHUNK_SIZE, n_steps))
        mats = _rk4_step_matrices(a, schedule, sign, idx * h, h)
        if keep_states:
            chunk_states = _prefix_products(mats) @ phi
            times.append((idx + 1) * h)
            states.append(chunk_states)
            phi = chunk_states[-1]
        else:
            phi = _ordered_product(mats) @ phi

    logger.debug(f"Integrated alpha={a} omega={omega} T={T:.4f} in {n_steps} steps of {h:.3e}")
    if keep_states:
        return phi, np.concatenate(times), np.concatenate(states)
    return phi, None, None


def _check_norm(phi: np.ndarray, label: str) -> None:
    drift = abs(float(np.linalg.norm(phi)) - 1.0)
    if drift > NORM_DRIFT_LIMIT:
        logger.warning(f"{label}: norm drift {drift:.3e} exceeds {NORM_DRIFT_LIMIT:.0e}")


def integrate_2d(
    alpha: float,
    omega: float,
    T: float,
    reversed: bool = False,
    cfg: Optional[IntegrationConfig] = None,
    schedule: Optional[Schedule] = None,
    buffer: Optional[List[Tuple[float, complex, complex]]] = None,
) -> SubspaceState:
    """
    Integrate the two-level system from (sqrt(beta), sqrt(alpha)) to time T.

    The sweep is theta = schedule(t), omega*t by default, negated when
    reversed. When cfg.store_trajectory is set and a buffer list is given,
    (t, x, y) rows for every step are appended to it.
    """
    cfg = cfg or IntegrationConfig()
    keep = cfg.store_trajectory and buffer is not None
    phi, times, states = _propagate_2d(alpha, omega, T, reversed, cfg, schedule, keep)
    _check_norm(phi, "integrate_2d")
    if keep:
        buffer.extend(zip(times.tolist(), states[:, 0].tolist(), states[:, 1].tolist()))
    return SubspaceState.from_array(phi)


def _full_generators(db: MarkedDatabase) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Controlled H = Ga + cos(theta) Gc + sin(theta) Gs over index c*N + x."""
    h0, h1, h2, h3 = oracle_hamiltonians(db)
    i2 = np.eye(2)
    z = np.diag([1.0, -1.0])
    return (
        np.kron(i2, (h0 + h2) / 2),
        np.kron(i2, (h0 - h2) / 2),
        np.kron(z, (h1 - h3) / 2),
    )


def integrate_full(
    db: MarkedDatabase,
    omega: float,
    T: float,
    cfg: Optional[IntegrationConfig] = None,
    schedule: Optional[Schedule] = None,
) -> StateVector:
    """
    Integrate the control qubit plus register under the controlled Hamiltonian,
    starting from (|0> + |1>)/sqrt(2) tensor psi_0. Returns all 2N amplitudes.
    """
    if db.size > MAX_CONTROLLED_SIZE:
        raise DimensionTooLarge(f"Full integration limited to N <= {MAX_CONTROLLED_SIZE}, got N={db.size}")
    omega = check_omega(omega)
    cfg = cfg or IntegrationConfig()
    step = cfg.resolve_step(omega)
    n_steps = _step_count(T, step)
    h = T / n_steps
    schedule = schedule or LinearSchedule(omega)

    ga, gc, gs = _full_generators(db)

    def generator(t: float) -> np.ndarray:
        theta = float(schedule(t))
        return -1j * (ga + math.cos(theta) * gc + math.sin(theta) * gs)

    phi = np.kron(np.array([1, 1], dtype=complex) / math.sqrt(2), psi_k(db, 0))
    f_next = generator(0.0)
    for k in range(n_steps):
        t = k * h
        f1 = f_next
        f2 = generator(t + h / 2)
        f_next = generator(t + h)
        k1 = f1 @ phi
        k2 = f2 @ (phi + (h / 2) * k1)
        k3 = f2 @ (phi + (h / 2) * k2)
        k4 = f_next @ (phi + h * k3)
        phi = phi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

    _check_norm(phi, "integrate_full")
    leakage = max(p.leakage for p in control_blocks(db, phi))
    if leakage > LEAKAGE_LIMIT:
        logger.warning(f"integrate_full: subspace leakage {leakage:.3e} exceeds {LEAKAGE_LIMIT:.0e}")
    logger.debug(f"Full integration N={db.size} omega={omega} T={T:.4f}: {n_steps} steps")
    return phi


def control_blocks(db: MarkedDatabase, state: StateVector) -> Tuple[SubspaceProjection, SubspaceProjection]:
    """Project the control-0 and control-1 register blocks (each rescaled by sqrt 2)."""
    n = db.size
    scale = math.sqrt(2)
    return (
        project_to_subspace(db, scale * state[:n]),
        project_to_subspace(db, scale * state[n:]),
    )


def control_coherence(db: MarkedDatabase, state: StateVector) -> complex:
    """2 rho_01 of the control qubit; equals <phi'(T)|phi(T)> for the controlled evolution."""
    n = db.size
    return complex(2 * np.vdot(state[n:], state[:n]))


def embed_full(db: MarkedDatabase, fwd: SubspaceState, bwd: SubspaceState) -> StateVector:
    """Control-qubit state built from the two branch states, for comparison with integrate_full."""
    e0, e1 = zero_hat(db), one_hat(db)
    return np.concatenate([fwd.x * e0 + fwd.y * e1, bwd.x * e0 + bwd.y * e1]) / math.sqrt(2)


def _midpoint_berry_sum(alpha: float, total_angle: float, n: int) -> float:
    thetas = np.linspace(0.0, total_angle, n + 1)
    psi = ground_states(alpha, thetas)
    mid = ground_states(alpha, (thetas[:-1] + thetas[1:]) / 2)
    increments = np.einsum('ki,ki->k', mid.conj(), psi[1:] - psi[:-1])
    return float(np.real(1j * increments.sum()))


def numeric_berry_phase(alpha: float, windings: int, steps: int) -> float:
    """
    Berry phase i * loop integral <psi|d psi> over theta in [0, 2 pi * windings].

    steps counts midpoint intervals per winding. The midpoint sums at steps
    and 2*steps are combined by Richardson extrapolation, which removes the
    leading step-squared error.
    """
    a = check_alpha(alpha)
    if windings < 1:
        raise ParameterOutOfRange(f"windings must be >= 1, got {windings}")
    if steps < MIN_BERRY_STEPS:
        raise TooFewSteps(f"Need at least {MIN_BERRY_STEPS} steps per winding, got {steps}")

    total = 2 * math.pi * windings
    coarse = _midpoint_berry_sum(a, total, steps * windings)
    fine = _midpoint_berry_sum(a, total, 2 * steps * windings)
    return (4 * fine - coarse) / 3


def convergence_order(
    alpha: float,
    omega: float,
    steps: Sequence[float] = (0.08, 0.04, 0.02),
    T: Optional[float] = None,
) -> List[float]:
    """
    Observed order between successive step sizes, measured on the terminal
    error against the closed-form solution.
    """
    T = T if T is not None else 2 * math.pi / omega
    exact = evolve_closed_form(solve_closed_form(alpha, omega), T).as_array()

    errors = []
    effective = []
    for step in steps:
        state = integrate_2d(alpha, omega, T, cfg=IntegrationConfig(step=step)).as_array()
        errors.append(float(np.linalg.norm(state - exact)))
        effective.append(T / _step_count(T, step))

    orders = [
        math.log(errors[i] / errors[i + 1]) / math.log(effective[i] / effective[i + 1])
        for i in range(len(errors) - 1)
    ]
    logger.info(f"Observed integration orders {orders} at alpha={alpha}, omega={omega}")
    return orders


def schedule_phase_gap(
    alpha: float,
    omega: float,
    stage: int = 1,
    cfg: Optional[IntegrationConfig] = None,
) -> float:
    """
    Wrapped difference between the branch phases arg <phi'|phi> produced by the
    linear schedule and by a smoothstep schedule sweeping the same angle
    2^stage pi in the same time.
    """
    T = (2 ** stage) * math.pi / check_omega(omega)
    phases = []
    for schedule in (LinearSchedule(omega), smoothstep_schedule((2 ** stage) * math.pi, T)):
        fwd = integrate_2d(alpha, omega, T, cfg=cfg, schedule=schedule)
        bwd = integrate_2d(alpha, omega, T, reversed=True, cfg=cfg, schedule=schedule)
        phases.append(float(np.angle(np.vdot(bwd.as_array(), fwd.as_array()))))
    gap = abs((phases[1] - phases[0] + math.pi) % (2 * math.pi) - math.pi)
    logger.info(f"Schedule phase gap {gap:.3e} at alpha={alpha}, omega={omega}, stage={stage}")
    return gap
