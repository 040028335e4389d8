"""Small shared numerical routines."""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalError, ShapeError

# Power iteration gives up after this many steps; small matrices then fall
# back to a dense eigensolve.
POWER_ITERATION_MAX_ITER = 10_000
DENSE_FALLBACK_MAX_DIM = 64


def dominant_eigenpair(matrix, rel_tol: float = 1e-12,
                       max_iter: int = POWER_ITERATION_MAX_ITER):
    """Leading eigenvalue and positive eigenvector of a strictly positive matrix.

    Power iteration started from the all-ones vector (which has positive
    overlap with the Perron vector).  If the residual does not reach
    ``rel_tol`` within ``max_iter`` steps, matrices up to
    ``DENSE_FALLBACK_MAX_DIM`` fall back to a dense eigensolve; larger ones
    raise NumericalError.  Returns ``(value, vector)`` with the vector
    normalized to unit 2-norm.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    if dim == 1:
        return float(m[0, 0]), np.ones(1)

    v = np.ones(dim) / math.sqrt(dim)
    lam = 0.0
    for _ in range(max_iter):
        u = m @ v
        norm = float(np.linalg.norm(u))
        if norm == 0.0:
            break  # positive matrices never land here; fall through to fallback
        v = u / norm
        lam = float(v @ (m @ v))
        residual = float(np.max(np.abs(m @ v - lam * v)))
        if residual <= rel_tol * max(1.0, abs(lam)):
            return lam, v
    if dim <= DENSE_FALLBACK_MAX_DIM:
        return _dense_eigenpair(m, rel_tol)
    raise NumericalError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(dim {dim} too large for dense fallback)")


def _dense_eigenpair(m, rel_tol):
    values, vectors = np.linalg.eig(m)
    idx = int(np.argmax(values.real))
    lam = values[idx]
    if abs(lam.imag) > rel_tol * max(1.0, abs(lam.real)):
        raise NumericalError("leading eigenvalue has a non-negligible imaginary part")
    vec = vectors[:, idx].real
    # Perron vector of a positive matrix has a fixed sign; normalize to positive.
    if vec[int(np.argmax(np.abs(vec)))] < 0:
        vec = -vec
    if np.any(vec <= 0):
        raise NumericalError("dense fallback produced a non-positive leading eigenvector")
    return float(lam.real), vec / float(np.linalg.norm(vec))


def ceil_exact(x: float, guard: float = 1e-12) -> int:
    """Ceiling with a tiny multiplicative guard.

    Ratios and products that are mathematically integral can land a few ulp
    above the integer; the guard keeps the ceiling from overshooting while
    leaving genuinely fractional values untouched.
    """
    return int(math.ceil(x * (1.0 - guard)))
