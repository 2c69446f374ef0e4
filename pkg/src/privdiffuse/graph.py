"""Networks, graph distances and privacy schedules."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DisconnectedGraphError, ParameterError, ParseError

UNREACHABLE = math.inf

# radius giving ~1256 expected edges for 150 uniform points on the unit square
SYNTHETIC_RADIUS = 0.2075
SYNTHETIC_NODES = 150
SYNTHETIC_EDGES = 1256


@dataclass(frozen=True)
class Network:
    """Undirected simple graph on nodes ``0 .. node_count - 1``.

    ``edges`` holds pairs ``(i, j)`` with ``i < j``. ``positions`` is set for
    generated networks only.
    """

    node_count: int
    edges: frozenset
    positions: np.ndarray | None = None

    def __post_init__(self):
        if self.node_count < 1:
            raise ParameterError("a network needs at least one node")
        norm = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ParameterError(f"self-loop at node {i}")
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise ParameterError(f"edge ({i}, {j}) references a node outside [0, {self.node_count})")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, node_count, edges, positions=None):
        return cls(node_count, frozenset(map(tuple, edges)), positions)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def neighbors(self) -> list[list[int]]:
        adj = [[] for _ in range(self.node_count)]
        for i, j in self.sorted_edges():
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def laplacian(self) -> np.ndarray:
        L = np.zeros((self.node_count, self.node_count))
        for i, j in self.edges:
            L[i, j] -= 1.0
            L[j, i] -= 1.0
            L[i, i] += 1.0
            L[j, j] += 1.0
        return L

    def to_edge_list(self) -> str:
        lines = [f"# nodes {self.node_count}"]
        lines += [f"{i} {j}" for i, j in self.sorted_edges()]
        return "\n".join(lines) + "\n"

    def positions_csv(self) -> str:
        if self.positions is None:
            raise ParameterError("network has no positions")
        rows = ["node,x,y"]
        rows += [f"{k},{x!r},{y!r}" for k, (x, y) in enumerate(self.positions.tolist())]
        return "\n".join(rows) + "\n"


def path_graph(n: int) -> Network:
    return Network.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves: int) -> Network:
    """Center 0 joined to nodes ``1 .. leaves``."""
    return Network.from_edges(leaves + 1, [(0, k) for k in range(1, leaves + 1)])


def complete_graph(n: int) -> Network:
    return Network.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


# --------------------------------------------------------------------------
# distances


def _check_source(network, source):
    if not (0 <= source < network.node_count) or int(source) != source:
        raise ParameterError(f"source {source} is not a node of the network")


def shortest_path_distances(network: Network, source: int) -> np.ndarray:
    """Hop counts from ``source`` by breadth-first search; ``inf`` if unreachable."""
    _check_source(network, source)
    adj = network.neighbors()
    dist = np.full(network.node_count, UNREACHABLE)
    dist[source] = 0
    queue = deque([source])
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if dist[j] == UNREACHABLE:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


def is_connected(network: Network) -> bool:
    return bool(np.all(np.isfinite(shortest_path_distances(network, 0))))


def resistance_distances(network: Network, source: int) -> np.ndarray:
    """Effective resistance from ``source`` to every node, unit resistor per edge.

    Grounds ``source`` and factors the reduced Laplacian once. Injecting unit
    current at ``j`` (drawn off at the grounded source) raises ``j`` to
    potential ``R(source, j)``, which is the ``j``-th diagonal entry of the
    inverse of the reduced Laplacian.
    """
    _check_source(network, source)
    if not is_connected(network):
        raise DisconnectedGraphError("network is disconnected; resistance distance undefined")
    N = network.node_count
    out = np.zeros(N)
    if N == 1:
        return out
    keep = np.array([k for k in range(N) if k != source])
    L = network.laplacian()[np.ix_(keep, keep)]
    factor = scipy.linalg.cho_factor(L)
    potentials = scipy.linalg.cho_solve(factor, np.eye(N - 1))
    out[keep] = np.diag(potentials)
    return out


def resistance_matrix_pinv(network: Network) -> np.ndarray:
    """All-pairs resistance as ``G_ii + G_jj - 2 G_ij`` with ``G = pinv(L)``.

    Dense pseudo-inverse; used as the reference formula.
    """
    if not is_connected(network):
        raise DisconnectedGraphError("network is disconnected; resistance distance undefined")
    G = np.linalg.pinv(network.laplacian(), hermitian=True)
    d = np.diag(G)
    return d[:, None] + d[None, :] - 2.0 * G


def distances(network: Network, source: int, metric: str) -> np.ndarray:
    if metric == "hops":
        return shortest_path_distances(network, source)
    if metric == "resistance":
        return resistance_distances(network, source)
    raise ParameterError(f"unknown metric {metric!r}; use 'hops' or 'resistance'")


# --------------------------------------------------------------------------
# privacy schedules


@dataclass(frozen=True)
class PrivacySchedule:
    """``eps(d) = exp(a d + b)`` with ``a < 0``.

    Unreachable nodes (``d = inf``) map to ``floor`` rather than zero.
    """

    a: float
    b: float
    floor: float = 1e-6
    family: str = "exponential"

    def __post_init__(self):
        if not self.a < 0:
            raise ParameterError(f"schedule slope must be negative, got {self.a}")
        if not self.floor > 0:
            raise ParameterError("floor must be positive")

    def __call__(self, d):
        return schedule_eval(self, d)


def schedule_eval(schedule: PrivacySchedule, d):
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ParameterError("distances must be non-negative")
    with np.errstate(over="ignore"):
        out = np.where(np.isinf(d), schedule.floor, np.exp(schedule.a * np.where(np.isinf(d), 0.0, d) + schedule.b))
    return float(out) if out.ndim == 0 else out


def fit_schedule(d_min: float, eps_max: float, d_max: float, eps_min: float) -> PrivacySchedule:
    """Exponential schedule through ``(d_min, eps_max)`` and ``(d_max, eps_min)``."""
    if not (d_min >= 0 and d_min < d_max):
        raise ParameterError(f"need 0 <= d_min < d_max, got {d_min}, {d_max}")
    if not (0 < eps_min < eps_max):
        raise ParameterError(f"need 0 < eps_min < eps_max, got {eps_min}, {eps_max}")
    a = math.log(eps_min / eps_max) / (d_max - d_min)
    b = math.log(eps_max) - a * d_min
    return PrivacySchedule(a, b)


SYNTHETIC_SCHEDULE = fit_schedule(1, 15.0, 9, 0.5)
FACEBOOK_SCHEDULE = PrivacySchedule(-3.3, 4.0)
SCHEDULES = {"synthetic": SYNTHETIC_SCHEDULE, "facebook": FACEBOOK_SCHEDULE}


# --------------------------------------------------------------------------
# construction


def generate_geometric_network(N: int, radius: float, stream: np.random.Generator) -> Network:
    """``N`` uniform points on the unit square; edge iff distance <= ``radius``."""
    if N < 1:
        raise ParameterError("N must be at least 1")
    if not (0 < radius <= math.sqrt(2)):
        raise ParameterError(f"radius must lie in (0, sqrt 2], got {radius}")
    pts = stream.random((N, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    close = np.einsum("ijk,ijk->ij", diff, diff) <= radius * radius
    i, j = np.nonzero(np.triu(close, k=1))
    return Network(N, frozenset(zip(i.tolist(), j.tolist())), pts)


def expected_geometric_edges(N: int, radius: float) -> float:
    """Mean edge count of the unit-square geometric graph (radius <= 1)."""
    r = radius
    p = math.pi * r * r - 8.0 / 3.0 * r**3 + 0.5 * r**4
    return N * (N - 1) / 2 * p


def load_edge_list(text: str) -> Network:
    """Parse whitespace-separated ``i j`` lines.

    ``#`` starts a comment. A ``# nodes N`` comment line fixes the node count;
    otherwise it is the largest id plus one. Duplicate edges collapse.
    """
    edges = set()
    declared = None
    max_id = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, _, comment = raw.partition("#")
        head = comment.split()
        if len(head) == 2 and head[0] == "nodes" and not line.strip():
            try:
                declared = int(head[1])
            except ValueError:
                raise ParseError(f"line {lineno}: bad node count {head[1]!r}", field=lineno)
            continue
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != 2:
            raise ParseError(f"line {lineno}: expected two node ids, got {len(tokens)} tokens", field=lineno)
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer node id in {line.strip()!r}", field=lineno)
        if i < 0 or j < 0:
            raise ParseError(f"line {lineno}: negative node id", field=lineno)
        if i == j:
            raise ParseError(f"line {lineno}: self-loop at node {i}", field=lineno)
        edges.add((min(i, j), max(i, j)))
        max_id = max(max_id, i, j)
    n = declared if declared is not None else max_id + 1
    if n < 1:
        raise ParseError("edge list defines no nodes")
    if max_id >= n:
        raise ParseError(f"node id {max_id} exceeds declared count {n}")
    return Network(n, frozenset(edges))
