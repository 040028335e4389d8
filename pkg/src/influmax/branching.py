"""Multi-type Poisson Galton-Watson machinery behind component-size predictions.

For an SBM the process runs on the S community types with kernel
M = K*diag(alpha): a type-ell individual spawns Poisson(M[ell, m]) children
of each type m.  For Chung-Lu the types are the vertices themselves and the
kernel is the rank-1 matrix w w^T / n, which every computation below reduces
to O(n) scalar forms instead of an n x n solve.

Expected total progeny solves the linear system x = e + kernel @ x
(subcritical only); survival probabilities are the maximal fixed point of
f -> 1 - exp(-kernel @ f), reached by monotone iteration from a small
multiple of the leading eigenvector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, RegimeError, ShapeError
from .graph_models import GraphModel, ModelKind, Regime
from .numerics import dominant_eigenpair

# Fixed-point iteration caps and tolerances for survival probabilities.
SURVIVAL_MAX_ITER = 1_000_000
SURVIVAL_STEP_TOL = 1e-12
SURVIVAL_RESIDUAL_TOL = 1e-10
PROGENY_RESIDUAL_TOL = 1e-10
CLOSED_FORM_TOL = 1e-9


class CapExceeded:
    """Marker returned when a simulated process outgrows its cap.

    Used as a survival proxy: true survival means infinite progeny, which a
    simulation can only witness as 'grew past the cap'.
    """

    __slots__ = ()

    def __repr__(self):
        return "CAP_EXCEEDED"


CAP_EXCEEDED = CapExceeded()


@dataclass(frozen=True)
class BranchingSolution:
    """Solved branching quantities for one model.

    ``b`` is the mean offspring per type (SBM) or per vertex (Chung-Lu);
    ``x`` the expected total progeny (finite only when subcritical, else
    None); ``rho`` the survival probabilities (the zero vector when
    subcritical, None in the critical band).
    """

    kind: ModelKind
    regime: Regime
    lambda_max: float
    b: np.ndarray
    x: np.ndarray | None
    rho: np.ndarray | None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "regime": self.regime.value,
            "lambda_max": self.lambda_max,
            "b": self.b.tolist(),
            "x": None if self.x is None else self.x.tolist(),
            "rho": None if self.rho is None else self.rho.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BranchingSolution":
        return cls(
            kind=ModelKind(data["kind"]),
            regime=Regime(data["regime"]),
            lambda_max=float(data["lambda_max"]),
            b=np.asarray(data["b"], dtype=float),
            x=None if data["x"] is None else np.asarray(data["x"], dtype=float),
            rho=None if data["rho"] is None else np.asarray(data["rho"], dtype=float),
        )


def phi(kernel, f) -> np.ndarray:
    """One application of the survival operator: 1 - exp(-(kernel @ f))."""
    kernel = np.asarray(kernel, dtype=float)
    f = np.asarray(f, dtype=float)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise ShapeError(f"kernel must be square, got shape {kernel.shape}")
    if f.shape != (kernel.shape[0],):
        raise ShapeError(
            f"vector of length {f.shape} does not match kernel {kernel.shape}")
    return 1.0 - np.exp(-(kernel @ f))


def mean_offspring(model: GraphModel) -> np.ndarray:
    """Mean number of children per individual: kernel row sums."""
    if model.kind is ModelKind.SBM:
        return model.reduced_kernel @ np.ones(model.reduced_kernel.shape[0])
    w = model.params.w
    return w * (float(w.sum()) / model.params.n)


def expected_total_progeny(model: GraphModel) -> np.ndarray:
    """Expected total progeny per type (SBM) or per vertex (Chung-Lu).

    Solves (I - kernel) x = e.  SBMs use direct elimination on the S x S
    reduced system; when all off-diagonal kernel entries coincide the result
    is cross-checked against the closed form
    x_m = (1 + k * alpha.x) / (1 - alpha_m * (K_mm - k)).  Chung-Lu reduces
    to the scalar s = sum(w) / (1 - lambda) with x_i = 1 + w_i * s / n.
    """
    if model.regime is not Regime.SUBCRITICAL:
        raise RegimeError(
            f"expected total progeny is finite only in the subcritical regime "
            f"(model is {model.regime.value})")
    if model.kind is ModelKind.SBM:
        reduced = model.reduced_kernel
        S = reduced.shape[0]
        system = np.eye(S) - reduced
        try:
            x = np.linalg.solve(system, np.ones(S))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"progeny system is singular: {exc}") from exc
        residual = float(np.max(np.abs(system @ x - 1.0)))
        if residual > PROGENY_RESIDUAL_TOL:
            raise NumericalError(
                f"progeny system residual {residual:.3e} exceeds "
                f"{PROGENY_RESIDUAL_TOL:.0e}")
        closed = _progeny_closed_form(model.params, x)
        if closed is not None:
            gap = float(np.max(np.abs(closed - x)))
            if gap > CLOSED_FORM_TOL:
                raise NumericalError(
                    f"elimination and closed form disagree by {gap:.3e}")
        return x
    w = model.params.w
    s = float(w.sum()) / (1.0 - model.lambda_max)
    return 1.0 + w * (s / model.params.n)


def _progeny_closed_form(params, x):
    """Closed-form progeny for equal off-diagonal kernels, evaluated at the
    solved x (the form is implicit through alpha.x).  None when the model
    does not have equal off-diagonals."""
    k = _common_off_diagonal(params.K)
    if k is None:
        return None
    gamma = np.diag(params.K) - k
    return (1.0 + k * float(params.alpha @ x)) / (1.0 - params.alpha * gamma)


def _common_off_diagonal(K):
    """The shared off-diagonal value, or None if entries differ.

    Single-community kernels have no off-diagonal entries; any split of
    K[0,0] into k + gamma is then consistent, and 0 is used.
    """
    S = K.shape[0]
    if S == 1:
        return 0.0
    off = K[~np.eye(S, dtype=bool)]
    if float(off.max() - off.min()) > 1e-12:
        return None
    return float(off[0])


def survival_probabilities(model: GraphModel) -> np.ndarray:
    """Survival probability per type (SBM) or per vertex (Chung-Lu).

    Iterates f -> 1 - exp(-kernel @ f) from eps * a, where a is the leading
    eigenvector and eps = (1 - 1/lambda) / max(a); the iteration is monotone
    increasing and converges to the maximal fixed point.
    """
    if model.regime is not Regime.SUPERCRITICAL:
        raise RegimeError(
            f"survival probabilities require a supercritical model "
            f"(model is {model.regime.value}); subcritical survival is 0")
    lam = model.lambda_max
    if model.kind is ModelKind.SBM:
        kernel = model.reduced_kernel
        _, vec = dominant_eigenpair(kernel)
        apply = lambda f: 1.0 - np.exp(-(kernel @ f))
    else:
        w = model.params.w
        n = model.params.n
        vec = w
        apply = lambda f: 1.0 - np.exp(-w * (float(w @ f) / n))
    eps = (1.0 - 1.0 / lam) / float(vec.max())
    seed = eps * vec
    f = seed
    for iteration in range(1, SURVIVAL_MAX_ITER + 1):
        nxt = apply(f)
        step = float(np.max(np.abs(nxt - f)))
        f = nxt
        if step < SURVIVAL_STEP_TOL:
            break
    else:
        raise NumericalError(
            f"survival fixed point did not converge within "
            f"{SURVIVAL_MAX_ITER} iterations (last step {step:.3e})")
    residual = float(np.max(np.abs(apply(f) - f)))
    if residual > SURVIVAL_RESIDUAL_TOL:
        raise NumericalError(
            f"survival fixed point residual {residual:.3e} exceeds "
            f"{SURVIVAL_RESIDUAL_TOL:.0e} after {iteration} iterations")
    if np.any(f < seed - 1e-12):
        raise NumericalError("survival iterate dropped below its seed")
    return f


def solve_branching(model: GraphModel) -> BranchingSolution:
    """Solve every branching quantity the model's regime admits."""
    b = mean_offspring(model)
    if model.regime is Regime.SUBCRITICAL:
        x = expected_total_progeny(model)
        rho = np.zeros_like(b)
    elif model.regime is Regime.SUPERCRITICAL:
        x = None
        rho = survival_probabilities(model)
    else:
        x = None
        rho = None
    return BranchingSolution(model.kind, model.regime, model.lambda_max, b, x, rho)


def simulate_total_progeny(model: GraphModel, start, cap: int,
                           rng: np.random.Generator):
    """Simulate one run of the branching process started from ``start``.

    ``start`` is a community index for SBMs and a vertex id for Chung-Lu.
    Returns the total number of individuals, or CAP_EXCEEDED once the running
    total passes ``cap``.  Whole generations are drawn at once: the children
    of z type-ell parents toward type m form a single Poisson(z * M[ell, m]).
    """
    if cap < 1:
        raise DomainError(f"cap must be >= 1, got {cap}")
    if model.kind is ModelKind.SBM:
        kernel = model.reduced_kernel
        S = kernel.shape[0]
        if not 0 <= start < S:
            raise IndexError(f"start type {start} out of range [0, {S})")
        generation = np.zeros(S, dtype=np.int64)
        generation[start] = 1
        total = 1
        while generation.any():
            generation = rng.poisson(generation @ kernel)
            total += int(generation.sum())
            if total > cap:
                return CAP_EXCEEDED
        return total

    params = model.params
    n = params.n
    if not 0 <= start < n:
        raise IndexError(f"start vertex {start} out of range [0, {n})")
    w = params.w
    rate = float(w.sum()) / n
    cum = model._cum_weight
    weights = np.array([w[start]])
    total = 1
    while weights.size:
        children = int(rng.poisson(weights * rate).sum())
        total += children
        if total > cap:
            return CAP_EXCEEDED
        if children == 0:
            break
        # Child types are size-biased: a child is vertex j with prob w_j/sum(w).
        draws = rng.random(children)
        idx = np.minimum(np.searchsorted(cum, draws, side="right"), n - 1)
        weights = w[idx]
    return total


def predicted_component_mean(model: GraphModel, solution: BranchingSolution,
                             index: int) -> float:
    """Predicted expected component size for a type (SBM) or vertex (Chung-Lu).

    Subcritical models use the expected total progeny directly.  Supercritical
    models use the asymptotic form rho_i * n * mean-survival, where the mean
    is alpha-weighted for SBMs and the plain vertex average for Chung-Lu;
    this is an asymptotic approximation, not an exact finite-n value.
    """
    if solution.regime is not model.regime:
        raise RegimeError(
            f"solution regime {solution.regime.value} does not match model "
            f"regime {model.regime.value}")
    if model.regime is Regime.SUBCRITICAL:
        return float(solution.x[index])
    if model.regime is Regime.SUPERCRITICAL:
        rho = solution.rho
        if model.kind is ModelKind.SBM:
            fraction = float(model.params.alpha @ rho)
        else:
            fraction = float(rho.mean())
        return float(rho[index]) * model.params.n * fraction
    raise RegimeError("no component-size prediction in the critical band")
