"""Sparse inhomogeneous random graphs: stochastic block models and Chung-Lu.

A model on ``n`` vertices includes each unordered pair ``{i, j}``
independently with probability ``kernel(i, j) / n``.  Two parametrisations
are supported:

* stochastic block model (SBM): vertices are partitioned into communities of
  prescribed proportions and the kernel depends only on the two communities
  through a symmetric positive matrix K;
* Chung-Lu: the kernel is the product ``w_i * w_j`` of per-vertex weights.

``classify_regime`` attaches the spectral metadata (largest eigenvalue of the
reduced kernel) that decides whether a model is subcritical, supercritical or
sits in the critical band.  Sampling of full realizations uses geometric
skip-sampling within homogeneous pair blocks so the expected cost is
O(n + edges) rather than O(n^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CapacityError, InvalidVertexPair
from .numerics import dominant_eigenpair

# Half-width of the lambda band classified as Critical.
EPS_CRIT = 1e-9
# Guard for sample_full_graph; lazy exploration has no such limit.
MAX_SAMPLE_VERTICES = 100_000


class ModelKind(str, Enum):
    SBM = "sbm"
    CHUNG_LU = "chung_lu"


class Regime(str, Enum):
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"
    CRITICAL = "critical"


@dataclass(frozen=True)
class SbmParams:
    """Stochastic block model parameters.

    Vertices are assigned to communities in contiguous blocks: the first
    ``alpha[0] * n`` vertices form community 0, the next block community 1,
    and so on.  Each ``alpha[m] * n`` must be an integer.
    """

    n: int
    alpha: np.ndarray
    K: np.ndarray
    community_sizes: np.ndarray = field(init=False, repr=False, compare=False)
    community_starts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError("n must be a positive integer")
        alpha = np.asarray(self.alpha, dtype=float)
        K = np.asarray(self.K, dtype=float)
        if alpha.ndim != 1 or alpha.size == 0:
            raise ValueError("alpha must be a non-empty 1-D vector")
        if np.any(alpha <= 0):
            raise ValueError("alpha entries must be strictly positive")
        if abs(float(alpha.sum()) - 1.0) > 1e-12:
            raise ValueError("alpha must sum to 1 within 1e-12")
        raw_sizes = alpha * self.n
        sizes = np.rint(raw_sizes)
        if np.any(np.abs(raw_sizes - sizes) > 1e-9):
            raise ValueError("every alpha[m] * n must be an integer")
        sizes = sizes.astype(np.int64)
        if int(sizes.sum()) != self.n:
            raise ValueError("community sizes do not add up to n")
        S = alpha.size
        if K.shape != (S, S):
            raise ValueError(f"K must be {S}x{S}, got {K.shape}")
        if np.any(np.abs(K - K.T) > 1e-12):
            raise ValueError("K must be symmetric within 1e-12")
        if np.any(K <= 0):
            raise ValueError("K entries must be strictly positive")
        if float(K.max()) / self.n > 1.0:
            raise ValueError("K entries must satisfy K/n <= 1 (valid probabilities)")
        for arr in (alpha, K, sizes):
            arr.setflags(write=False)
        starts = np.concatenate(([0], np.cumsum(sizes)))
        starts.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "community_sizes", sizes)
        object.__setattr__(self, "community_starts", starts)

    @property
    def num_communities(self) -> int:
        return self.alpha.size

    def community_of(self, i: int) -> int:
        """Community index of vertex ``i`` under the block assignment."""
        if not 0 <= i < self.n:
            raise IndexError(f"vertex {i} out of range [0, {self.n})")
        return int(np.searchsorted(self.community_starts[1:], i, side="right"))


@dataclass(frozen=True)
class ChungLuParams:
    """Chung-Lu (rank-1) model parameters: n positive per-vertex weights."""

    n: int
    w: np.ndarray

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError("n must be a positive integer")
        w = np.asarray(self.w, dtype=float)
        if w.shape != (self.n,):
            raise ValueError(f"w must have length n={self.n}, got shape {w.shape}")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        if float(w.max()) ** 2 / self.n > 1.0:
            raise ValueError("weights must satisfy w_i*w_j/n <= 1 for all pairs")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class GraphModel:
    """A classified random-graph model.

    ``reduced_kernel`` is K*diag(alpha) for SBMs and None for Chung-Lu, where
    the spectral data comes from the closed form lambda = sum(w^2)/n.  The
    regime uses a band of half-width EPS_CRIT around 1.  Instances are
    immutable and safe to share across workers; sampling always takes an
    explicit random stream.
    """

    kind: ModelKind
    params: SbmParams | ChungLuParams
    reduced_kernel: np.ndarray | None
    lambda_max: float
    regime: Regime
    # Chung-Lu sampling caches (vertices sorted by descending weight).
    _weight_order: np.ndarray | None = field(default=None, repr=False, compare=False)
    _sorted_weights: np.ndarray | None = field(default=None, repr=False, compare=False)
    _sorted_weights_tuple: tuple = field(default=(), repr=False, compare=False)
    _weight_position: np.ndarray | None = field(default=None, repr=False, compare=False)
    _cum_weight: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.params.n


def classify_regime(params: SbmParams | ChungLuParams) -> GraphModel:
    """Build a GraphModel: reduced kernel, largest eigenvalue, regime label.

    SBM eigenvalues come from power iteration on K*diag(alpha) at relative
    tolerance 1e-12 (dense fallback for up to 64 communities); Chung-Lu uses
    the closed form sum(w_i^2)/n.
    """
    if isinstance(params, SbmParams):
        reduced = params.K * params.alpha[np.newaxis, :]
        reduced.setflags(write=False)
        lam, _ = dominant_eigenpair(reduced)
        return GraphModel(ModelKind.SBM, params, reduced, lam, _label(lam))
    if isinstance(params, ChungLuParams):
        w = params.w
        lam = float(w @ w) / params.n
        order = np.lexsort((np.arange(params.n), -w))
        sorted_w = w[order]
        position = np.empty(params.n, dtype=np.int64)
        position[order] = np.arange(params.n)
        cum = np.cumsum(w) / float(w.sum())
        for arr in (order, sorted_w, position, cum):
            arr.setflags(write=False)
        return GraphModel(ModelKind.CHUNG_LU, params, None, lam, _label(lam),
                          _weight_order=order, _sorted_weights=sorted_w,
                          _sorted_weights_tuple=tuple(sorted_w.tolist()),
                          _weight_position=position, _cum_weight=cum)
    raise TypeError(f"unsupported parameter type {type(params)!r}")


def _label(lam: float) -> Regime:
    if lam < 1.0 - EPS_CRIT:
        return Regime.SUBCRITICAL
    if lam > 1.0 + EPS_CRIT:
        return Regime.SUPERCRITICAL
    return Regime.CRITICAL


def edge_probability(model: GraphModel, i: int, j: int) -> float:
    """Probability that the edge {i, j} is present in one realization."""
    n = model.params.n
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"vertex pair ({i}, {j}) out of range [0, {n})")
    if i == j:
        raise InvalidVertexPair(f"self-pair ({i}, {i}) has no edge probability")
    if model.kind is ModelKind.SBM:
        params = model.params
        return float(params.K[params.community_of(i), params.community_of(j)]) / n
    w = model.params.w
    return float(w[i]) * float(w[j]) / n


def mean_degree(model: GraphModel, i: int) -> float:
    """Expected degree of vertex ``i``: the sum of p_ij over all j != i."""
    n = model.params.n
    if not 0 <= i < n:
        raise IndexError(f"vertex {i} out of range [0, {n})")
    if model.kind is ModelKind.SBM:
        params = model.params
        m = params.community_of(i)
        row = params.K[m]
        return (float(params.community_sizes @ row) - float(row[m])) / n
    w = model.params.w
    return float(w[i]) * (float(w.sum()) - float(w[i])) / n


@dataclass(frozen=True)
class SampledGraph:
    """One realized undirected graph: per-vertex sorted neighbor lists."""

    n: int
    adjacency: tuple

    @classmethod
    def from_edges(cls, n: int, edges) -> "SampledGraph":
        adjacency = [[] for _ in range(n)]
        for u, v in edges:
            adjacency[u].append(v)
            adjacency[v].append(u)
        for neighbors in adjacency:
            neighbors.sort()
        return cls(n, tuple(adjacency))

    def edges(self):
        """Iterate undirected edges once each, as (u, v) with u < v."""
        for u, neighbors in enumerate(self.adjacency):
            for v in neighbors:
                if v > u:
                    yield u, v

    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def validate(self):
        """Check structural invariants (used by tests and fixture loading)."""
        for u, neighbors in enumerate(self.adjacency):
            if any(v == u for v in neighbors):
                raise ValueError(f"self-loop at vertex {u}")
            if any(not 0 <= v < self.n for v in neighbors):
                raise ValueError(f"neighbor out of range at vertex {u}")
            if list(neighbors) != sorted(set(neighbors)):
                raise ValueError(f"adjacency of {u} is not sorted and duplicate-free")
            for v in neighbors:
                if u not in self.adjacency[v]:
                    raise ValueError(f"edge ({u}, {v}) not stored symmetrically")


def sample_full_graph(model: GraphModel, rng: np.random.Generator,
                      max_vertices: int = MAX_SAMPLE_VERTICES) -> SampledGraph:
    """Draw one full realization of the model.

    Every unordered pair is included independently with its edge probability.
    Homogeneous pair blocks (community pairs for SBM, the weight-sorted order
    for Chung-Lu) are scanned with geometric jumps, which is distributionally
    identical to a per-pair Bernoulli sweep.
    """
    n = model.params.n
    if n > max_vertices:
        raise CapacityError(
            f"full sampling is guarded at n <= {max_vertices}, got n = {n}")
    if model.kind is ModelKind.SBM:
        edges = _sample_sbm_edges(model.params, rng)
    else:
        edges = _sample_chung_lu_edges(model, rng)
    return SampledGraph.from_edges(n, edges)


def _skip_scan_within(rng, size, p, base, out):
    """Bernoulli(p) over all pairs inside one block, via geometric jumps."""
    if size < 2 or p <= 0.0:
        return
    if p >= 1.0:
        for v in range(size):
            for u in range(v):
                out.append((base + u, base + v))
        return
    log_q = math.log1p(-p)
    v, u = 1, -1
    while v < size:
        r = rng.random()
        u += 1 + int(math.log1p(-r) / log_q)
        while u >= v and v < size:
            u -= v
            v += 1
        if v < size:
            out.append((base + u, base + v))


def _skip_scan_between(rng, size_a, size_b, p, base_a, base_b, out):
    """Bernoulli(p) over the size_a x size_b cross pairs of two blocks."""
    total = size_a * size_b
    if total == 0 or p <= 0.0:
        return
    if p >= 1.0:
        for k in range(total):
            out.append((base_a + k // size_b, base_b + k % size_b))
        return
    log_q = math.log1p(-p)
    k = -1
    while True:
        r = rng.random()
        k += 1 + int(math.log1p(-r) / log_q)
        if k >= total:
            return
        out.append((base_a + k // size_b, base_b + k % size_b))


def _sample_sbm_edges(params: SbmParams, rng):
    sizes = params.community_sizes
    starts = params.community_starts
    n = params.n
    edges = []
    for ell in range(params.num_communities):
        p_within = float(params.K[ell, ell]) / n
        _skip_scan_within(rng, int(sizes[ell]), p_within, int(starts[ell]), edges)
        for m in range(ell + 1, params.num_communities):
            p_between = float(params.K[ell, m]) / n
            _skip_scan_between(rng, int(sizes[ell]), int(sizes[m]), p_between,
                               int(starts[ell]), int(starts[m]), edges)
    return edges


def _sample_chung_lu_edges(model: GraphModel, rng):
    # Scan in descending-weight order: the running probability bound only
    # decreases along a row, so a geometric jump under the current bound plus
    # rejection at the landing point gives each pair its exact probability.
    params = model.params
    n = params.n
    order = model._weight_order
    ws = model._sorted_weights_tuple
    edges = []
    for ui in range(n - 1):
        wu = ws[ui]
        pos = ui + 1
        p = wu * ws[pos] / n
        if p > 1.0:
            p = 1.0
        while pos < n:
            if p < 1.0:
                r = rng.random()
                pos += int(math.log1p(-r) / math.log1p(-p))
            if pos >= n:
                break
            q = wu * ws[pos] / n
            if q > 1.0:
                q = 1.0
            if rng.random() < q / p:
                edges.append((int(order[ui]), int(order[pos])))
            p = q
            pos += 1
    return edges
