"""Named metric spaces: graphs with their shortest-path metric, lattice grids,
and the snowflake / bounded metric transforms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import DisconnectedGraph, InvalidEpsilon, InvalidParameters, NonPositiveWeight
from .metric import FiniteMetricSpace, from_keys, parse_rational, to_fraction, validate_metric

KINDS = ("complete", "star", "cycle", "path", "grid", "tree", "from_edges")

# generators are metrics by construction; the O(n^3) triangle check is run
# up to this size and skipped beyond it
VALIDATE_MAX_N = 400


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    n: int | None = None
    depth: int | None = None
    branching: int | None = None
    dim: int = 2
    p: str = "inf"
    edges: tuple[str, ...] | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "FamilySpec":
        known = {"kind", "n", "depth", "branching", "dim", "p", "edges"}
        extra = set(data) - known
        if extra:
            raise InvalidParameters(f"unknown family fields: {sorted(extra)}")
        p = data.get("p", "inf")
        edges = data.get("edges")
        return cls(
            kind=data.get("kind", ""),
            n=data.get("n"),
            depth=data.get("depth"),
            branching=data.get("branching"),
            dim=data.get("dim", 2),
            p=str(p),
            edges=tuple(edges) if edges is not None else None,
        )


def _integer_space(labels, dist: np.ndarray) -> FiniteMetricSpace:
    return from_keys(labels, 2 * dist.astype(np.int64), exact=True, unit=2, validate=len(labels) <= VALIDATE_MAX_N)


def _need(value, name: str, minimum: int) -> int:
    if value is None or int(value) != value or value < minimum:
        raise InvalidParameters(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def complete(n: int) -> FiniteMetricSpace:
    n = _need(n, "n", 1)
    return _integer_space(range(n), 1 - np.eye(n, dtype=np.int64))


def star(n: int) -> FiniteMetricSpace:
    """Star with hub 0 and ``n - 1`` leaves."""
    n = _need(n, "n", 2)
    dist = 2 * (1 - np.eye(n, dtype=np.int64))
    dist[0, 1:] = dist[1:, 0] = 1
    return _integer_space(range(n), dist)


def path(n: int) -> FiniteMetricSpace:
    n = _need(n, "n", 1)
    idx = np.arange(n, dtype=np.int64)
    return _integer_space(range(n), np.abs(idx[:, None] - idx[None, :]))


def cycle(n: int) -> FiniteMetricSpace:
    n = _need(n, "n", 3)
    idx = np.arange(n, dtype=np.int64)
    gap = np.abs(idx[:, None] - idx[None, :])
    return _integer_space(range(n), np.minimum(gap, n - gap))


def grid(n: int, dim: int = 2, p: str = "inf") -> FiniteMetricSpace:
    """Lattice ``{0..n-1}^dim`` with the l1, l2 or l-infinity metric.

    l2 distances are irrational in general, so ``p = "2"`` yields a floating
    mode space.
    """
    n = _need(n, "n", 1)
    dim = _need(dim, "dim", 1)
    p = str(p).lower()
    coords = np.array(list(itertools.product(range(n), repeat=dim)), dtype=np.int64)
    labels = [",".join(map(str, c)) for c in coords]
    diff = np.abs(coords[:, None, :] - coords[None, :, :])
    if p == "1":
        return _integer_space(labels, diff.sum(axis=2))
    if p in ("inf", "infinity"):
        return _integer_space(labels, diff.max(axis=2))
    if p == "2":
        dist = np.sqrt((diff.astype(np.float64) ** 2).sum(axis=2))
        return from_keys(labels, dist, exact=False, validate=len(labels) <= VALIDATE_MAX_N)
    raise InvalidParameters(f"grid exponent p must be one of 1, 2, inf; got {p!r}")


def tree(branching: int, depth: int) -> FiniteMetricSpace:
    """Truncation of the homogeneous tree in which every vertex has degree ``branching``.

    The root has ``branching`` children, every other internal vertex has
    ``branching - 1``; leaves sit at ``depth``.  Vertex labels are the
    child-index paths from the root (``"r"``, ``"r.0"``, ``"r.0.1"``, ...).
    """
    k = _need(branching, "branching", 2)
    depth = _need(depth, "depth", 0)
    labels = ["r"]
    edges: list[tuple[int, int]] = []
    frontier = [0]
    for level in range(depth):
        children = k if level == 0 else k - 1
        nxt = []
        for parent in frontier:
            for c in range(children):
                labels.append(f"{labels[parent]}.{c}")
                child = len(labels) - 1
                edges.append((parent, child))
                nxt.append(child)
        frontier = nxt
    return _graph_space(labels, [(u, v, Fraction(1)) for u, v in edges])


def from_edge_list(lines: Iterable[str]) -> FiniteMetricSpace:
    """Shortest-path metric of a weighted edge list.

    Each non-blank line is ``"u v"`` (unit weight) or ``"u v w"`` with ``w``
    an integer, decimal or ``p/q`` rational; ``#`` starts a comment.  Vertex
    order is order of first appearance.  Parallel edges keep the lightest.
    """
    labels: list[str] = []
    index: dict[str, int] = {}
    edges: dict[tuple[int, int], Fraction] = {}

    def vid(name: str) -> int:
        if name not in index:
            index[name] = len(labels)
            labels.append(name)
        return index[name]

    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise InvalidParameters(f"line {lineno}: expected 'u v' or 'u v w', got {raw.strip()!r}")
        w = parse_rational(parts[2]) if len(parts) == 3 else Fraction(1)
        if w <= 0:
            raise NonPositiveWeight(f"line {lineno}: edge weight {w} must be positive")
        u, v = vid(parts[0]), vid(parts[1])
        if u == v:
            raise InvalidParameters(f"line {lineno}: self-loop at {parts[0]!r}")
        key = (min(u, v), max(u, v))
        edges[key] = min(w, edges.get(key, w))
    if not labels:
        raise InvalidParameters("edge list is empty")
    return _graph_space(labels, [(u, v, w) for (u, v), w in edges.items()])


def _graph_space(labels: list[str], edges: list[tuple[int, int, Fraction]]) -> FiniteMetricSpace:
    n = len(labels)
    if n == 1:
        return _integer_space(labels, np.zeros((1, 1), dtype=np.int64))
    den = 1
    for _, _, w in edges:
        den = math.lcm(den, w.denominator)
    scaled = [int(w * den) for _, _, w in edges]
    if sum(scaled) < 2**52:
        rows = [u for u, _, _ in edges]
        cols = [v for _, v, _ in edges]
        graph = coo_matrix((np.array(scaled, dtype=np.float64), (rows, cols)), shape=(n, n)).tocsr()
        dist = shortest_path(graph, method="D", directed=False)
        if not np.all(np.isfinite(dist)):
            raise DisconnectedGraph("edge list does not describe a connected graph")
        num = np.rint(dist).astype(np.int64)
        return from_keys(labels, 2 * num, exact=True, unit=2 * den, validate=n <= VALIDATE_MAX_N)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_weighted_edges_from(edges)
    if not nx.is_connected(g):
        raise DisconnectedGraph("edge list does not describe a connected graph")
    lengths = dict(nx.all_pairs_dijkstra_path_length(g))
    return validate_metric([[lengths[i][j] for j in range(n)] for i in range(n)], labels, exact=True)


def generate(spec: FamilySpec | dict) -> FiniteMetricSpace:
    if isinstance(spec, dict):
        spec = FamilySpec.from_dict(spec)
    kind = spec.kind
    if kind == "complete":
        return complete(spec.n)
    if kind == "star":
        return star(spec.n)
    if kind == "cycle":
        return cycle(spec.n)
    if kind == "path":
        return path(spec.n)
    if kind == "grid":
        return grid(spec.n, spec.dim, spec.p)
    if kind == "tree":
        return tree(spec.branching, spec.depth)
    if kind == "from_edges":
        if spec.edges is None:
            raise InvalidParameters("from_edges needs an 'edges' list of lines")
        return from_edge_list(spec.edges)
    raise InvalidParameters(f"unknown family kind {kind!r}; expected one of {', '.join(KINDS)}")


def snowflake(space: FiniteMetricSpace, epsilon) -> FiniteMetricSpace:
    """``d -> d ** epsilon``; a metric again because ``t -> t**eps`` is concave."""
    eps = float(to_fraction(epsilon))
    if not 0 < eps < 1:
        raise InvalidEpsilon(f"snowflake exponent must lie in (0, 1), got {epsilon}")
    return from_keys(space.points, _float_distances(space) ** eps, exact=False, validate=space.n <= VALIDATE_MAX_N)


def _float_distances(space: FiniteMetricSpace) -> np.ndarray:
    return space._key.astype(np.float64) / space._unit if space.exact else space._key


def bounded_transform(space: FiniteMetricSpace) -> FiniteMetricSpace:
    """``d -> d / (1 + d)``, exact when the input is exact."""
    if not space.exact:
        dist = space._key
        return from_keys(space.points, dist / (1 + dist), exact=False, validate=space.n <= VALIDATE_MAX_N)
    rows = [[d / (1 + d) for d in row] for row in space.distance_matrix()]
    return validate_metric(rows, space.points, exact=True)
