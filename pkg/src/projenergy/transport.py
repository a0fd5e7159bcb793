"""Optimal transport distances d_p (p = 1, 2) and the bottleneck distance d_inf.

Equal-size uniform measures reduce to permutations, so d_p uses the
Hungarian method and d_inf a bipartite perfect-matching test.  Weighted
measures go through integer min-cost flow / max-flow on a 1e-12 mass grid.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .geometry import pairwise_projective_rho, pairwise_sphere_distance
from .measures import DiscreteMeasure, check_same_dim

MASS_GRID = 10**12
COST_GRID = 1e12
BRUTEFORCE_MAX = 8


class Metric(enum.Enum):
    SPHERE = "sphere"
    PROJECTIVE = "projective"

    @classmethod
    def parse(cls, value) -> "Metric":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def parse_p(p) -> float:
    if isinstance(p, str):
        p = math.inf if p.lower() in ("inf", "infinity") else float(p)
    p = float(p)
    if p not in (1.0, 2.0, math.inf):
        raise ValueError(f"p must be 1, 2 or inf, got {p}")
    return p


@dataclass(frozen=True)
class TransportPlan:
    mass: np.ndarray
    cost_exponent: float
    metric: Metric

    @property
    def rows(self) -> int:
        return self.mass.shape[0]

    @property
    def cols(self) -> int:
        return self.mass.shape[1]

    def support(self) -> list[tuple[int, int, float]]:
        i, j = np.nonzero(self.mass)
        return [(int(a), int(b), float(self.mass[a, b])) for a, b in zip(i, j)]


def distance_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure, metric=Metric.SPHERE) -> np.ndarray:
    check_same_dim(mu, nu)
    if Metric.parse(metric) is Metric.PROJECTIVE:
        return pairwise_projective_rho(mu.points, nu.points)
    return pairwise_sphere_distance(mu.points, nu.points)


def _uniform_pair(mu: DiscreteMeasure, nu: DiscreteMeasure) -> bool:
    return mu.size == nu.size and mu.is_uniform(1e-15) and nu.is_uniform(1e-15)


def integer_masses(w: np.ndarray, total: int = MASS_GRID) -> np.ndarray:
    """Round weights onto the integer grid so they sum to exactly ``total``."""
    a = np.rint(np.asarray(w) * total).astype(np.int64)
    a[int(np.argmax(a))] += total - int(a.sum())
    return a


def _min_cost_flow(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m, n = cost.shape
    G = nx.DiGraph()
    for i in range(m):
        G.add_node(("s", i), demand=-int(a[i]))
    for j in range(n):
        G.add_node(("t", j), demand=int(b[j]))
    icost = np.rint(cost * COST_GRID).astype(np.int64)
    for i in range(m):
        for j in range(n):
            G.add_edge(("s", i), ("t", j), weight=int(icost[i, j]))
    try:
        _, flow = nx.network_simplex(G)
    except nx.NetworkXUnfeasible as exc:  # cannot happen for equal totals
        raise RuntimeError("transport flow infeasible") from exc
    F = np.zeros((m, n))
    for i in range(m):
        for (_, j), f in flow[("s", i)].items():
            F[i, j] = f
    return F


def dp_distance(mu: DiscreteMeasure, nu: DiscreteMeasure, p=1, metric=Metric.SPHERE) -> tuple[float, TransportPlan]:
    """Exact L^p transport distance and an optimal coupling."""
    p = parse_p(p)
    if math.isinf(p):
        return dinf_distance(mu, nu, metric)
    metric = Metric.parse(metric)
    D = distance_matrix(mu, nu, metric)
    C = D**p
    if _uniform_pair(mu, nu):
        rows, cols = linear_sum_assignment(C)
        mass = np.zeros_like(C)
        mass[rows, cols] = 1.0 / mu.size
        total = math.fsum(C[rows, cols]) / mu.size
    else:
        a, b = integer_masses(mu.weights), integer_masses(nu.weights)
        mass = _min_cost_flow(C, a, b) / MASS_GRID
        total = float(np.sum(mass * C))
    return max(total, 0.0) ** (1.0 / p), TransportPlan(mass, p, metric)


def _perfect_matching(mask: np.ndarray) -> np.ndarray | None:
    match = maximum_bipartite_matching(csr_matrix(mask.astype(np.int8)), perm_type="column")
    return None if np.any(match < 0) else match


def _max_flow_plan(mask: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    m, n = mask.shape
    G = nx.DiGraph()
    for i in range(m):
        G.add_edge("src", ("s", i), capacity=int(a[i]))
    for j in range(n):
        G.add_edge(("t", j), "snk", capacity=int(b[j]))
    for i, j in zip(*np.nonzero(mask)):
        G.add_edge(("s", int(i)), ("t", int(j)))
    value, flow = nx.maximum_flow(G, "src", "snk")
    # each side was rounded onto the grid independently, so up to one unit
    # per atom may be unroutable even when an exact coupling exists
    if value < int(a.sum()) - (m + n):
        return None
    F = np.zeros((m, n))
    for i in range(m):
        for (_, j), f in flow[("s", i)].items():
            F[i, j] = f
    return F


def dinf_distance(mu: DiscreteMeasure, nu: DiscreteMeasure, metric=Metric.SPHERE) -> tuple[float, TransportPlan]:
    """Bottleneck distance: smallest threshold admitting a coupling on short edges.

    The returned value is always one of the entries of the distance matrix.
    """
    metric = Metric.parse(metric)
    D = distance_matrix(mu, nu, metric)
    levels = np.unique(D)
    uniform = _uniform_pair(mu, nu)
    if uniform:
        feasible = _perfect_matching
    else:
        a, b = integer_masses(mu.weights), integer_masses(nu.weights)

        def feasible(mask):
            return _max_flow_plan(mask, a, b)

    lo, hi = 0, len(levels) - 1
    best = feasible(D <= levels[hi])
    while lo < hi:
        mid = (lo + hi) // 2
        witness = feasible(D <= levels[mid])
        if witness is None:
            lo = mid + 1
        else:
            hi, best = mid, witness
    if best is None:
        raise RuntimeError("no feasible coupling at the largest distance")
    if uniform:
        mass = np.zeros_like(D)
        mass[np.arange(mu.size), best] = 1.0 / mu.size
    else:
        mass = best / MASS_GRID
    return float(levels[hi]), TransportPlan(mass, math.inf, metric)


def transport_distance(mu, nu, p=1, metric=Metric.SPHERE) -> tuple[float, TransportPlan]:
    p = parse_p(p)
    if math.isinf(p):
        return dinf_distance(mu, nu, metric)
    return dp_distance(mu, nu, p, metric)


def assignment_bruteforce(mu: DiscreteMeasure, nu: DiscreteMeasure, p=1, metric=Metric.SPHERE) -> float:
    """Exhaustive search over all permutations; test oracle for small uniform instances."""
    p = parse_p(p)
    if not _uniform_pair(mu, nu):
        raise ValueError("brute force needs two uniform measures with the same atom count")
    N = mu.size
    if N > BRUTEFORCE_MAX:
        raise ValueError(f"N={N} exceeds the brute-force guard {BRUTEFORCE_MAX}")
    D = distance_matrix(mu, nu, metric)
    rows = np.arange(N)
    best = math.inf
    for perm in itertools.permutations(range(N)):
        d = D[rows, perm]
        value = float(d.max()) if math.isinf(p) else math.fsum(d**p) / N
        best = min(best, value)
    return best if math.isinf(p) else best ** (1.0 / p)
