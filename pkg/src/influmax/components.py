"""Degrees and connected components, on realized graphs or straight from a model.

``lazy_explore`` draws the pair (degree, component size) of a single vertex
without materializing the whole graph: a breadth-first exploration reveals
edge indicators on demand, deciding every unordered pair at most once.  Its
output distribution is identical to sampling a full graph and measuring,
which ``exact_outcome_distribution`` can verify by exhaustive enumeration for
tiny models.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CapacityError
from .graph_models import GraphModel, ModelKind, SampledGraph

# Exhaustive enumeration is guarded at this many vertices (2^15 graphs at 6).
MAX_ENUMERATION_VERTICES = 6


class ExplorationOutcome(NamedTuple):
    """What one exploration reveals: the queried vertex, its degree in the
    realized graph, and the size of its connected component (including
    itself).  degree == 0 exactly when component_size == 1."""

    vertex: int
    degree: int
    component_size: int


def degree(graph: SampledGraph, v: int) -> int:
    if not 0 <= v < graph.n:
        raise IndexError(f"vertex {v} out of range [0, {graph.n})")
    return len(graph.adjacency[v])


def connected_component(graph: SampledGraph, v: int) -> set:
    """All vertices reachable from ``v``, computed by breadth-first search."""
    if not 0 <= v < graph.n:
        raise IndexError(f"vertex {v} out of range [0, {graph.n})")
    seen = {v}
    queue = deque((v,))
    adjacency = graph.adjacency
    while queue:
        u = queue.popleft()
        for nb in adjacency[u]:
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return seen


@dataclass(frozen=True)
class ComponentSizes:
    """Component sizes of a graph, largest first.  ``second_largest`` is 0
    when the graph is a single component."""

    sizes: tuple
    largest: int
    second_largest: int


def all_component_sizes(graph: SampledGraph) -> ComponentSizes:
    """Union-find pass (path compression + union by size) over all edges."""
    n = graph.n
    parent = list(range(n))
    size = [1] * n

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:  # path compression
            parent[x], x = root, parent[x]
        return root

    for u, v in graph.edges():
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        if size[ru] < size[rv]:
            ru, rv = rv, ru
        parent[rv] = ru
        size[ru] += size[rv]

    sizes = sorted((size[r] for r in range(n) if parent[r] == r), reverse=True)
    largest = sizes[0] if sizes else 0
    second = sizes[1] if len(sizes) > 1 else 0
    return ComponentSizes(tuple(sizes), largest, second)


def lazy_explore(model: GraphModel, v: int,
                 rng: np.random.Generator) -> ExplorationOutcome:
    """Sample (degree, component size) of vertex ``v`` from the model.

    The exploration decides all pairs incident to the queried vertex first,
    so the reported degree has exactly the Bernoulli-sum law of a full
    realization; afterwards it expands the frontier against the undiscovered
    pool until the component is exhausted.  Pairs between two already
    discovered vertices never affect the outcome and are not drawn.
    """
    n = model.params.n
    if not 0 <= v < n:
        raise IndexError(f"vertex {v} out of range [0, {n})")
    if model.kind is ModelKind.SBM:
        return _lazy_explore_sbm(model, v, rng)
    return _lazy_explore_chung_lu(model, v, rng)


def _lazy_explore_sbm(model, v, rng):
    # Undiscovered vertices of one community are exchangeable, so a frontier
    # of a vertices of type ell discovers each remaining pool vertex of type m
    # independently with probability 1 - (1 - K[ell,m]/n)^a.  This collapses
    # a whole breadth-first generation into S binomial draws per type.
    params = model.params
    n = params.n
    S = params.num_communities
    root_type = params.community_of(v)
    if S == 1:
        p = float(params.K[0, 0]) / n
        remaining = n - 1
        deg = int(rng.binomial(remaining, p))
        remaining -= deg
        active = deg
        size = 1 + deg
        while active > 0 and remaining > 0:
            found = int(rng.binomial(remaining, 1.0 - (1.0 - p) ** active))
            remaining -= found
            size += found
            active = found
        return ExplorationOutcome(v, deg, size)

    probs = params.K / n
    one_minus = 1.0 - probs
    remaining = params.community_sizes.copy()
    remaining[root_type] -= 1
    counts = rng.binomial(remaining, probs[root_type])
    remaining -= counts
    deg = int(counts.sum())
    size = 1 + deg
    active = counts
    while active.any():
        nxt = np.zeros(S, dtype=np.int64)
        for ell in range(S):
            a = int(active[ell])
            if a == 0:
                continue
            found = rng.binomial(remaining, 1.0 - one_minus[ell] ** a)
            remaining -= found
            nxt += found
        size += int(nxt.sum())
        active = nxt
    return ExplorationOutcome(v, deg, size)


def _lazy_explore_chung_lu(model, v, rng):
    # Weights differ per vertex, so the frontier is expanded one vertex at a
    # time with the same descending-weight jump-and-reject scan used by the
    # full sampler; positions already discovered are rejected outright.
    params = model.params
    n = params.n
    ws = model._sorted_weights_tuple
    discovered = bytearray(n)
    discovered[int(model._weight_position[v])] = 1
    queue = deque((float(params.w[v]),))
    root_degree = 0
    size = 1
    at_root = True
    log1p = math.log1p
    while queue:
        wu = queue.popleft()
        pos = 0
        p = wu * ws[0] / n
        if p > 1.0:
            p = 1.0
        while pos < n:
            if p < 1.0:
                r = rng.random()
                pos += int(log1p(-r) / log1p(-p))
            if pos >= n:
                break
            q = wu * ws[pos] / n
            if q > 1.0:
                q = 1.0
            if not discovered[pos] and rng.random() < q / p:
                discovered[pos] = 1
                queue.append(ws[pos])
                size += 1
                if at_root:
                    root_degree += 1
            p = q
            pos += 1
        at_root = False
    return ExplorationOutcome(v, root_degree, size)


def exact_outcome_distribution(model: GraphModel, v: int) -> dict:
    """Exact joint law of (degree, component size) of ``v``, by enumerating
    every graph on up to MAX_ENUMERATION_VERTICES vertices and summing the
    product probabilities of its edge indicators."""
    from .graph_models import edge_probability

    n = model.params.n
    if n > MAX_ENUMERATION_VERTICES:
        raise CapacityError(
            f"enumeration is guarded at n <= {MAX_ENUMERATION_VERTICES}, got {n}")
    if not 0 <= v < n:
        raise IndexError(f"vertex {v} out of range [0, {n})")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    probs = [edge_probability(model, i, j) for i, j in pairs]
    law: dict = {}
    for mask in range(1 << len(pairs)):
        weight = 1.0
        edges = []
        for bit, (pair, p) in enumerate(zip(pairs, probs)):
            if mask >> bit & 1:
                weight *= p
                edges.append(pair)
            else:
                weight *= 1.0 - p
        if weight == 0.0:
            continue
        graph = SampledGraph.from_edges(n, edges)
        key = (degree(graph, v), len(connected_component(graph, v)))
        law[key] = law.get(key, 0.0) + weight
    return law


def empirical_outcome_distribution(model: GraphModel, v: int, samples: int,
                                   rng: np.random.Generator) -> dict:
    """Empirical joint law of (degree, component size) from repeated
    lazy explorations."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    counts = Counter()
    for _ in range(samples):
        outcome = lazy_explore(model, v, rng)
        counts[(outcome.degree, outcome.component_size)] += 1
    return {key: value / samples for key, value in counts.items()}


def total_variation(law_a: dict, law_b: dict) -> float:
    keys = set(law_a) | set(law_b)
    return 0.5 * sum(abs(law_a.get(k, 0.0) - law_b.get(k, 0.0)) for k in keys)


def dump_edge_list(graph: SampledGraph, path):
    """Write one "u v" pair per line (0-based, u < v)."""
    with open(path, "w", encoding="ascii") as handle:
        for u, v in graph.edges():
            handle.write(f"{u} {v}\n")


def load_edge_list(path, n: int) -> SampledGraph:
    """Read an edge list written by :func:`dump_edge_list`.

    The vertex count is not stored in the file and must be supplied.
    """
    edges = []
    with open(path, "r", encoding="ascii") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            u, v = int(parts[0]), int(parts[1])
            if not (0 <= u < v < n):
                raise ValueError(f"{path}:{lineno}: invalid pair ({u}, {v}) for n={n}")
            edges.append((u, v))
    graph = SampledGraph.from_edges(n, edges)
    graph.validate()
    return graph
