"""
Counting instances, the phase oracle and the invariant {|0^>, |1^>} subspace.
"""

import logging
from pathlib import Path
from typing import Iterable, Tuple

import numpy as np

from .exceptions import DegenerateSubspace, InstanceFormatError, LengthMismatch
from .models import MarkedDatabase, StateVector, SubspaceProjection, SubspaceState

logger = logging.getLogger(__name__)

# (-i)^k for k = 0..3, kept exact so psi_k and oracle powers compare bit-for-bit
_MINUS_I_POWERS = (1 + 0j, -1j, -1 + 0j, 1j)

_AUX_Y = np.array([1, 1j], dtype=complex) / np.sqrt(2)   # (|0> + i|1>)/sqrt(2)
_AUX_Z = np.array([1, -1], dtype=complex) / np.sqrt(2)   # (|0> - |1>)/sqrt(2)


def create_database(n: int, marked: Iterable[int] = ()) -> MarkedDatabase:
    """Build a counting instance over N = 2^n items with the given marked set."""
    db = MarkedDatabase(n=n, marked=tuple(marked))
    logger.debug(f"Created database N={db.size} M={db.marked_count} alpha={db.alpha}")
    return db


def _check_length(db: MarkedDatabase, v: StateVector) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (db.size,):
        raise LengthMismatch(f"Expected a vector of length {db.size}, got shape {v.shape}")
    return v


def zero_hat(db: MarkedDatabase) -> StateVector:
    """Uniform superposition of the unmarked items."""
    mask = ~db.marked_mask()
    v = np.zeros(db.size, dtype=complex)
    v[mask] = 1 / np.sqrt(db.size - db.marked_count)
    return v


def one_hat(db: MarkedDatabase) -> StateVector:
    """Uniform superposition of the marked items; the zero vector when nothing is marked."""
    v = np.zeros(db.size, dtype=complex)
    if db.marked_count:
        v[db.marked_mask()] = 1 / np.sqrt(db.marked_count)
    return v


def psi_k(db: MarkedDatabase, k: int) -> StateVector:
    v = np.full(db.size, 1 / np.sqrt(db.size), dtype=complex)
    v[db.marked_mask()] *= _MINUS_I_POWERS[k % 4]
    return v


def apply_phase_oracle(db: MarkedDatabase, v: StateVector) -> StateVector:
    """Multiply every marked amplitude by exp(-i*pi/2)."""
    out = _check_length(db, v).copy()
    out[db.marked_mask()] *= -1j
    return out


def equal_up_to_global_phase(a: StateVector, b: StateVector, tol: float = 1e-12) -> bool:
    """Compare two vectors after aligning their phases on the largest entry of b."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False

    k = int(np.argmax(np.abs(b)))
    if abs(b[k]) <= tol:
        return bool(np.max(np.abs(a), initial=0.0) <= tol)
    if abs(a[k]) <= tol:
        return False

    a_aligned = a * (abs(a[k]) / a[k])
    b_aligned = b * (abs(b[k]) / b[k])
    return bool(np.max(np.abs(a_aligned - b_aligned)) <= tol)


def _reversible_oracle(db: MarkedDatabase, register: np.ndarray) -> np.ndarray:
    """Apply |x>|y>|z> -> |x>|y xor f(x)>|z xor (y f(x))> to an (N, ..., 2, 2) tensor."""
    out = register.copy()
    mask = db.marked_mask()
    marked_part = register[mask]
    mapped = np.zeros_like(marked_part)
    for y in (0, 1):
        for z in (0, 1):
            mapped[..., y ^ 1, z ^ y] = marked_part[..., y, z]
    out[mask] = mapped
    return out


def _rows_equal_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    rows = np.arange(len(b))
    k = np.argmax(np.abs(b), axis=1)
    ak, bk = a[rows, k], b[rows, k]
    zero_b = np.abs(bk) <= tol
    usable = ~zero_b & (np.abs(ak) > tol)

    ak = np.where(usable, ak, 1)
    bk = np.where(usable, bk, 1)
    diff = a * (np.abs(ak) / ak)[:, None] - b * (np.abs(bk) / bk)[:, None]
    aligned = np.max(np.abs(diff), axis=1) <= tol
    zeros_match = np.max(np.abs(a), axis=1, initial=0.0) <= tol
    return np.where(zero_b, zeros_match, usable & aligned)


def kickback_equivalence_batch(db: MarkedDatabase, vectors: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """kickback_equivalence_check for every row of a (K, N) array."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim != 2 or vectors.shape[1] != db.size:
        raise LengthMismatch(f"Expected rows of length {db.size}, got shape {vectors.shape}")

    register = np.einsum('kx,y,z->xkyz', vectors, _AUX_Y, _AUX_Z)
    evolved = _reversible_oracle(db, register)

    residual = np.einsum('xkyz,y,z->kx', evolved, _AUX_Y.conj(), _AUX_Z.conj())
    rebuilt = np.einsum('kx,y,z->xkyz', residual, _AUX_Y, _AUX_Z)
    factored = np.max(np.abs(evolved - rebuilt), axis=(0, 2, 3)) <= tol
    if not factored.all():
        logger.warning("Auxiliary qubits did not factor off after the oracle")

    expected = vectors.copy()
    expected[:, db.marked_mask()] *= -1j
    return factored & _rows_equal_up_to_global_phase(residual, expected, tol)


def kickback_equivalence_check(db: MarkedDatabase, v: StateVector, tol: float = 1e-12) -> bool:
    """
    Run the three-register oracle on v with the two auxiliary qubits attached,
    factor the auxiliaries back off, and compare with the phase oracle.

    Returns False if the auxiliaries end up entangled with the register.
    """
    v = _check_length(db, v)
    return bool(kickback_equivalence_batch(db, v[None, :], tol)[0])


def project_to_subspace(db: MarkedDatabase, v: StateVector, strict: bool = False) -> SubspaceProjection:
    """
    Coordinates of v on {|0^>, |1^>} and the norm of whatever lies outside that span.

    With nothing marked |1^> is undefined: y is reported as 0, the result is
    flagged degenerate, and strict=True raises DegenerateSubspace instead.
    """
    v = _check_length(db, v)
    degenerate = db.marked_count == 0
    if degenerate:
        if strict:
            raise DegenerateSubspace("No marked items: |1^> is undefined")
        logger.debug("Projecting onto a degenerate subspace (M=0)")

    e0 = zero_hat(db)
    e1 = one_hat(db)
    x = np.vdot(e0, v)
    y = 0j if degenerate else np.vdot(e1, v)
    leakage = float(np.linalg.norm(v - x * e0 - y * e1))

    inside = np.sqrt(abs(x) ** 2 + abs(y) ** 2)
    if inside > 0:
        x, y = x / inside, y / inside

    return SubspaceProjection(
        state=SubspaceState(complex(x), complex(y)),
        leakage=leakage,
        degenerate=degenerate,
    )


def embed(db: MarkedDatabase, state: SubspaceState) -> StateVector:
    """Expand subspace coordinates over the N items."""
    return state.x * zero_hat(db) + state.y * one_hat(db)


def subspace_basis(db: MarkedDatabase) -> Tuple[StateVector, StateVector]:
    return zero_hat(db), one_hat(db)


def load_instance(file_path: str) -> MarkedDatabase:
    """
    Read an instance file with the lines `n=<int>` and `marked=<i,j,...>`.

    Raises:
        OSError: If the file cannot be read
        InstanceFormatError: If a line is missing or malformed
    """
    text = Path(file_path).read_text()
    fields = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if '=' not in line:
            raise InstanceFormatError(f"{file_path}:{line_no}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in ('n', 'marked'):
            raise InstanceFormatError(f"{file_path}:{line_no}: unknown field {key!r}")
        fields[key] = value

    if 'n' not in fields or 'marked' not in fields:
        raise InstanceFormatError(f"{file_path}: both n= and marked= lines are required")

    try:
        n = int(fields['n'])
        marked = [int(tok) for tok in fields['marked'].split(',') if tok.strip()]
    except ValueError as e:
        raise InstanceFormatError(f"{file_path}: {e}") from e

    db = create_database(n, marked)
    logger.info(f"Loaded instance {Path(file_path).name}: N={db.size}, M={db.marked_count}")
    return db
