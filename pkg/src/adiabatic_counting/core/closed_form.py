"""
Exact two-level solution of i d/dt phi = H(+-omega t) phi from phi(0) = (sqrt(beta), sqrt(alpha)).

    x(t) = exp(-it/2) (A exp(i w1 t) + B exp(i w2 t))
    y(t) = exp(-it/2) (C exp(-i w1 t) + D exp(-i w2 t))

with w1,2 = (omega +- E)/2 and E = sqrt((1-omega)^2 + 4 alpha omega). The
reversed sweep uses the same expressions with omega -> -omega (primed values).
"""

import cmath
import logging
import math
from typing import Tuple

import numpy as np

from .exceptions import ParameterOutOfRange
from .hamiltonian import hamiltonian_2x2
from .models import ClosedFormSolution, OverlapReport, SubspaceState

logger = logging.getLogger(__name__)

OMEGA_LIMIT = 0.5
FORMULA_TOLERANCE = 1e-10


def check_omega(omega: float) -> float:
    if not 0 < omega < OMEGA_LIMIT:
        raise ParameterOutOfRange(f"omega must lie in (0, {OMEGA_LIMIT}), got {omega}")
    return float(omega)


def _check_parameters(alpha: float, omega: float) -> float:
    a = float(alpha)
    if not 0 <= a < 0.5:
        raise ParameterOutOfRange(f"alpha must lie in [0, 1/2), got {alpha}")
    check_omega(omega)
    return a


def _solve(alpha: float, omega: float) -> ClosedFormSolution:
    """Closed-form coefficients for a signed sweep rate, no range checks."""
    beta = 1.0 - alpha
    if alpha == 0:
        # nothing marked: the state never leaves |0^>
        E = abs(1.0 - omega)
        return ClosedFormSolution(
            alpha=0.0, beta=1.0, omega=omega, E=E,
            omega1=(omega + E) / 2, omega2=(omega - E) / 2,
            lam=0.0, A=1.0, B=0.0, C=0.0, D=0.0,
        )

    E = math.sqrt((1 - omega) ** 2 + 4 * alpha * omega)
    den = (1 - omega) ** 2 + 4 * alpha * omega + (beta - alpha - omega) * E
    sa, sb = math.sqrt(alpha), math.sqrt(beta)

    A = ((1 - omega) ** 2 - alpha * (1 - 3 * omega) + (beta - omega) * E) / den * sb
    B = (alpha * (1 + omega) - alpha * E) / den * sb
    C = ((1 + omega) ** 2 - beta * (1 + 3 * omega) - (alpha + omega) * E) / den * sa
    D = (beta * (1 - omega) + beta * E) / den * sa
    lam = 2 * math.sqrt(alpha * beta) / ((beta - alpha - omega) + E)

    return ClosedFormSolution(
        alpha=alpha, beta=beta, omega=omega, E=E,
        omega1=(omega + E) / 2, omega2=(omega - E) / 2,
        lam=lam, A=A, B=B, C=C, D=D,
    )


def lambda_form_coefficients(alpha: float, omega: float) -> Tuple[float, float, float, float]:
    """A, B, C, D rebuilt from lambda alone; an independent check on the E-based forms."""
    a = _check_parameters(alpha, omega)
    lam = _solve(a, omega).lam
    sa, sb = math.sqrt(a), math.sqrt(1.0 - a)
    norm = 1 + lam ** 2
    A = (lam * sa + sb) / norm
    C = (sa - lam * sb) / norm
    return A, -lam * C, C, lam * A


def solve_closed_form(alpha: float, omega: float) -> ClosedFormSolution:
    a = _check_parameters(alpha, omega)
    sol = _solve(a, omega)

    lam_forms = lambda_form_coefficients(a, omega)
    drift = max(abs(p - q) for p, q in zip((sol.A, sol.B, sol.C, sol.D), lam_forms))
    if drift > FORMULA_TOLERANCE:
        logger.warning(f"E-form and lambda-form coefficients differ by {drift:.3e} at alpha={a}, omega={omega}")
    return sol


def _primed(sol: ClosedFormSolution) -> ClosedFormSolution:
    return _solve(sol.alpha, -sol.omega)


def evolve_closed_form(sol: ClosedFormSolution, t: float, reversed: bool = False) -> SubspaceState:
    if t < 0:
        raise ParameterOutOfRange(f"Time must be non-negative, got {t}")
    s = _primed(sol) if reversed else sol
    envelope = cmath.exp(-0.5j * t)
    x = envelope * (s.A * cmath.exp(1j * s.omega1 * t) + s.B * cmath.exp(1j * s.omega2 * t))
    y = envelope * (s.C * cmath.exp(-1j * s.omega1 * t) + s.D * cmath.exp(-1j * s.omega2 * t))
    return SubspaceState(x, y)


def overlap_report(alpha: float, omega: float, T: float) -> OverlapReport:
    """
    Overlap of the reversed-sweep state with the forward-sweep state at time T.

    inner = <phi'(T)|phi(T)> is the coherence the control qubit ends up with.
    It is computed directly from the two evolved states and again from the
    four-term expansion in mu1 and mu2; the two must agree to 1e-10.

    mu1 is reported with the winding term omega*T added back, so it vanishes
    when nothing is marked and grows linearly in T. mu1_printed keeps
    (E - E')T/2, which differs from mu1 by a multiple of 2*pi whenever
    omega*T is.
    """
    a = _check_parameters(alpha, omega)
    if not T > 0:
        raise ParameterOutOfRange(f"Evolution time must be positive, got {T}")

    sol = _solve(a, omega)
    rev = _primed(sol)

    fwd = evolve_closed_form(sol, T).as_array()
    bwd = evolve_closed_form(sol, T, reversed=True).as_array()
    inner = complex(np.vdot(bwd, fwd))

    mu1_printed = (sol.E - rev.E) * T / 2
    mu2 = (sol.E + rev.E) * T / 2
    wind = cmath.exp(1j * omega * T)
    unwind = wind.conjugate()
    formula = (
        (sol.A * rev.A * wind + sol.D * rev.D * unwind) * cmath.exp(1j * mu1_printed)
        + (sol.B * rev.B * wind + sol.C * rev.C * unwind) * cmath.exp(-1j * mu1_printed)
        + (sol.A * rev.B * wind + rev.C * sol.D * unwind) * cmath.exp(1j * mu2)
        + (rev.A * sol.B * wind + sol.C * rev.D * unwind) * cmath.exp(-1j * mu2)
    )
    if abs(formula - inner) > FORMULA_TOLERANCE:
        logger.warning(f"Overlap expansion off by {abs(formula - inner):.3e} at alpha={a}, omega={omega}, T={T}")

    magnitude_sq = min(abs(inner) ** 2, 1.0)
    return OverlapReport(
        inner=inner,
        mu1=0.0 if a == 0 else mu1_printed + omega * T,
        mu2=mu2,
        p_success=(1 + magnitude_sq) / 2,
        arg_phase=cmath.phase(inner),
        leak_magnitude=math.sqrt(1.0 - magnitude_sq),
        mu1_printed=mu1_printed,
        formula_inner=formula,
    )


def perturbative_coefficients(alpha: float, omega: float) -> Tuple[float, float, float, float]:
    """(AA'+DD', BB'+CC', AB'+C'D, A'B+CD') from the exact forward and reversed solutions."""
    a = _check_parameters(alpha, omega)
    s = _solve(a, omega)
    p = _primed(s)
    return (
        s.A * p.A + s.D * p.D,
        s.B * p.B + s.C * p.C,
        s.A * p.B + p.C * s.D,
        p.A * s.B + s.C * p.D,
    )


def perturbative_limits(alpha: float, omega: float) -> Tuple[float, float, float, float]:
    """Small-omega values of the four coefficient combinations."""
    ab = alpha * (1 - alpha) * omega ** 2
    return (1 - 3 * ab, -ab, 2 * ab, 2 * ab)


def mu1_expansion_check(alpha: float, omega: float, j: int) -> float:
    """
    Relative remainder of mu1 against 2*pi*2^j*alpha*(1 + beta(beta-alpha)omega^2),
    scaled by omega^4. With alpha = 0 the absolute remainder is returned instead.
    """
    a = _check_parameters(alpha, omega)
    if j < 1:
        raise ParameterOutOfRange(f"Stage index must be >= 1, got {j}")
    b = 1.0 - a
    T = (2 ** j) * math.pi / omega
    mu1 = overlap_report(a, omega, T).mu1
    if a == 0:
        return abs(mu1)
    leading = 2 * math.pi * (2 ** j) * a
    expected = leading * (1 + b * (b - a) * omega ** 2)
    return abs(mu1 - expected) / (leading * omega ** 4)


def overlap_denominator(alpha: float, omega: float) -> float:
    """F = (E G)(E' G'), the common denominator of the primed-unprimed products."""
    a = _check_parameters(alpha, omega)
    E = math.sqrt((1 - omega) ** 2 + 4 * a * omega)
    Ep = math.sqrt((1 + omega) ** 2 - 4 * a * omega)
    return (
        ((1 - omega) ** 2 + 4 * a * omega + (1 - 2 * a - omega) * E)
        * ((1 + omega) ** 2 - 4 * a * omega + (1 - 2 * a + omega) * Ep)
    )


def denominator_expansion_residual(alpha: float, omega: float) -> float:
    """F/(4 beta^2) minus its small-omega form 1 - 2 beta (1 - 4 alpha) omega^2."""
    a = float(alpha)
    b = 1.0 - a
    return overlap_denominator(a, omega) / (4 * b * b) - (1 - 2 * b * (1 - 4 * a) * omega ** 2)


def schrodinger_residual(sol: ClosedFormSolution, t: float, h: float = 1e-5, reversed: bool = False) -> float:
    """|| i (phi(t+h) - phi(t-h)) / 2h - H(+-omega t) phi(t) || for the closed-form state."""
    if t < h:
        raise ParameterOutOfRange(f"Central differences need t >= h, got t={t}, h={h}")
    ahead = evolve_closed_form(sol, t + h, reversed).as_array()
    behind = evolve_closed_form(sol, t - h, reversed).as_array()
    here = evolve_closed_form(sol, t, reversed).as_array()
    theta = (-sol.omega if reversed else sol.omega) * t
    lhs = 1j * (ahead - behind) / (2 * h)
    return float(np.linalg.norm(lhs - hamiltonian_2x2(sol.alpha, theta) @ here))
