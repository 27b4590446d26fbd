"""Signed-graph data model, bad-triangle enumeration and objective evaluators.

A signed graph is a simple undirected graph whose edges carry a sign
(+1 or -1) and a nonnegative weight.  A *bad triangle* is a triangle with
exactly one negative edge; the covering, clustering and LP machinery in the
rest of the package is built on top of the types defined here.

Graphs are immutable after construction: every "mutating" operation
(``flip_edges``) returns a new value, so instances can be shared freely
across threads.

Weights are generic over the number kind: ``int``/``Fraction`` weights give
exact-rational behaviour (required by the exact LP solver and the charging
oracles), ``float`` weights trade exactness for speed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import CapacityError, InputError

POSITIVE = 1
NEGATIVE = -1

#: Largest node count for which complete graphs are materialised explicitly.
#: Beyond it, use :class:`ImplicitCompleteGraph`.
DEFAULT_COMPLETE_NODE_BOUND = 2000

GRAPH_SCHEMA = "btt.graph/1"
COVER_SCHEMA = "btt.cover/1"
CLUSTERING_SCHEMA = "btt.clustering/1"

Weight = int | float | Fraction


def _canon(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Edge:
    """One undirected edge with canonical ``u < v`` endpoint order."""

    u: int
    v: int
    sign: int
    weight: Weight = 1

    @property
    def pair(self) -> tuple[int, int]:
        return (self.u, self.v)


@dataclass(frozen=True)
class BadTriangle:
    """A node triple spanning exactly one negative and two positive edges."""

    nodes: tuple[int, int, int]
    edge_ids: tuple[int, int, int]
    negative_edge: int

    def __post_init__(self):
        if not (self.nodes[0] < self.nodes[1] < self.nodes[2]):
            raise InputError(f"triangle nodes must be ordered: {self.nodes}")
        if self.negative_edge not in self.edge_ids:
            raise InputError("negative edge must be one of the member edges")


class SignedGraph:
    """Immutable signed graph with dense integer edge ids.

    Edge ids are assigned in construction order, giving deterministic
    iteration and tie-breaking in every downstream algorithm.
    """

    __slots__ = ("n", "edges", "complete", "_pair_to_id", "_adjacency",
                 "_bad_triangles")

    def __init__(self, n: int, edges: Iterable[tuple], complete: bool = False):
        """Build a graph from ``(u, v, sign[, weight])`` tuples.

        Raises InputError on self-loops, duplicate pairs, bad signs,
        negative weights, out-of-range node ids, or a ``complete`` flag
        that does not match the edge count.
        """
        if n < 0:
            raise InputError(f"node count must be nonnegative, got {n}")
        canonical: list[Edge] = []
        pair_to_id: dict[tuple[int, int], int] = {}
        for item in edges:
            if len(item) == 3:
                u, v, sign = item
                weight: Weight = 1
            elif len(item) == 4:
                u, v, sign, weight = item
            else:
                raise InputError(f"edge tuple must have 3 or 4 fields: {item!r}")
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise InputError(f"self-loop at node {u}")
            if sign not in (POSITIVE, NEGATIVE):
                raise InputError(f"sign must be +1 or -1, got {sign!r}")
            if weight < 0:
                raise InputError(f"negative weight on edge ({u},{v}): {weight}")
            pair = _canon(u, v)
            if pair in pair_to_id:
                raise InputError(f"duplicate edge {pair}")
            pair_to_id[pair] = len(canonical)
            canonical.append(Edge(pair[0], pair[1], sign, weight))
        if complete and len(canonical) != n * (n - 1) // 2:
            raise InputError(
                f"complete graph on {n} nodes needs {n * (n - 1) // 2} edges, "
                f"got {len(canonical)}")
        self.n = n
        self.edges: tuple[Edge, ...] = tuple(canonical)
        self.complete = complete
        self._pair_to_id = pair_to_id
        adjacency: list[list[int]] = [[] for _ in range(n)]
        for eid, e in enumerate(self.edges):
            adjacency[e.u].append(eid)
            adjacency[e.v].append(eid)
        self._adjacency = tuple(tuple(ids) for ids in adjacency)
        self._bad_triangles: tuple[BadTriangle, ...] | None = None

    # -- basic accessors ------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self, node: int) -> tuple[int, ...]:
        """Ids of edges incident to ``node``."""
        return self._adjacency[node]

    def edge_id(self, u: int, v: int) -> int | None:
        """Dense id of edge {u, v}, or None when the pair is absent."""
        return self._pair_to_id.get(_canon(u, v))

    def sign_of(self, u: int, v: int) -> int | None:
        eid = self.edge_id(u, v)
        return None if eid is None else self.edges[eid].sign

    def positive_edge_ids(self) -> list[int]:
        return [i for i, e in enumerate(self.edges) if e.sign == POSITIVE]

    def negative_edge_ids(self) -> list[int]:
        return [i for i, e in enumerate(self.edges) if e.sign == NEGATIVE]

    def total_weight(self) -> Weight:
        return sum(e.weight for e in self.edges)

    def is_exact(self) -> bool:
        """True when every weight is an int or Fraction (rational mode)."""
        return all(isinstance(e.weight, (int, Fraction)) for e in self.edges)

    def check_edge_ids(self, edge_ids: Iterable[int]) -> None:
        for eid in edge_ids:
            if not (0 <= eid < self.m):
                raise InputError(f"invalid edge id {eid} (graph has {self.m} edges)")

    def __repr__(self) -> str:
        kind = "complete " if self.complete else ""
        return f"SignedGraph({kind}n={self.n}, m={self.m})"

    # -- bad triangles ----------------------------------------------------

    def bad_triangles(self) -> tuple[BadTriangle, ...]:
        """All bad triangles, cached, in lexicographic node-triple order."""
        if self._bad_triangles is None:
            self._bad_triangles = tuple(enumerate_bad_triangles(self))
        return self._bad_triangles


def enumerate_bad_triangles(g: SignedGraph) -> list[BadTriangle]:
    """Every node triple with exactly one negative edge, each exactly once.

    Iterates positive wedges (pairs of positive edges sharing a node) and
    tests the sign of the closing pair, so the work scales with the
    positive-wedge count rather than n^3 on sparse-positive graphs.  A bad
    triangle has a unique wedge center (the node on both positive edges),
    so no deduplication is needed.  Output is sorted lexicographically by
    node triple.
    """
    pos_neighbors: list[list[int]] = [[] for _ in range(g.n)]
    for e in g.edges:
        if e.sign == POSITIVE:
            pos_neighbors[e.u].append(e.v)
            pos_neighbors[e.v].append(e.u)
    found: list[BadTriangle] = []
    for center in range(g.n):
        nbrs = sorted(pos_neighbors[center])
        for a, b in combinations(nbrs, 2):
            eid = g.edge_id(a, b)
            if eid is None or g.edges[eid].sign != NEGATIVE:
                continue
            nodes = tuple(sorted((center, a, b)))
            ids = (g.edge_id(nodes[0], nodes[1]),
                   g.edge_id(nodes[0], nodes[2]),
                   g.edge_id(nodes[1], nodes[2]))
            found.append(BadTriangle(nodes, ids, eid))
    found.sort(key=lambda t: t.nodes)
    return found


@dataclass(frozen=True)
class EdgeCover:
    """An integral edge subset, normally one intersecting every bad triangle."""

    edge_ids: frozenset[int]
    cost: Weight

    @classmethod
    def from_ids(cls, g: SignedGraph, edge_ids: Iterable[int]) -> "EdgeCover":
        ids = frozenset(edge_ids)
        g.check_edge_ids(ids)
        return cls(ids, sum(g.edges[i].weight for i in sorted(ids)))

    @classmethod
    def from_pairs(cls, g: SignedGraph, pairs: Iterable[tuple[int, int]]) -> "EdgeCover":
        ids = []
        for u, v in pairs:
            eid = g.edge_id(u, v)
            if eid is None:
                raise InputError(f"no edge {_canon(u, v)} in graph")
            ids.append(eid)
        return cls.from_ids(g, ids)

    @property
    def size(self) -> int:
        return len(self.edge_ids)

    def pairs(self, g: SignedGraph) -> list[tuple[int, int]]:
        return sorted(g.edges[i].pair for i in self.edge_ids)


def is_feasible_cover(g: SignedGraph, cover: EdgeCover | Iterable[int]) -> bool:
    """True iff every bad triangle of ``g`` contains at least one cover edge."""
    ids = cover.edge_ids if isinstance(cover, EdgeCover) else frozenset(cover)
    g.check_edge_ids(ids)
    return all(any(eid in ids for eid in t.edge_ids) for t in g.bad_triangles())


@dataclass(frozen=True)
class Clustering:
    """A partition of the node set as per-node labels forming a dense range."""

    labels: tuple[int, ...]
    num_clusters: int = field(default=0)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Clustering":
        """Normalise arbitrary labels to 0..k-1 in order of first appearance."""
        remap: dict[int, int] = {}
        normal = []
        for lab in labels:
            if lab not in remap:
                remap[lab] = len(remap)
            normal.append(remap[lab])
        return cls(tuple(normal), len(remap))

    @classmethod
    def from_clusters(cls, n: int, clusters: Iterable[Iterable[int]]) -> "Clustering":
        labels = [-1] * n
        for k, cluster in enumerate(clusters):
            for node in cluster:
                if labels[node] != -1:
                    raise InputError(f"node {node} assigned to two clusters")
                labels[node] = k
        if any(lab == -1 for lab in labels):
            raise InputError("clustering must assign every node")
        return cls.from_labels(labels)

    def clusters(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_clusters)]
        for node, lab in enumerate(self.labels):
            out[lab].append(node)
        return out


def cc_cost(g: SignedGraph, clustering: Clustering) -> Weight:
    """Correlation-clustering disagreements of a partition.

    Sum of weights of positive edges crossing clusters plus negative edges
    inside clusters.  Absent pairs contribute nothing.
    """
    if len(clustering.labels) != g.n:
        raise InputError(
            f"clustering labels {len(clustering.labels)} != node count {g.n}")
    labels = clustering.labels
    total: Weight = 0
    for e in g.edges:
        same = labels[e.u] == labels[e.v]
        if (e.sign == POSITIVE and not same) or (e.sign == NEGATIVE and same):
            total += e.weight
    return total


def flip_edges(g: SignedGraph, edge_ids: Iterable[int]) -> SignedGraph:
    """New graph with the signs of ``edge_ids`` inverted; weights preserved."""
    ids = frozenset(edge_ids)
    g.check_edge_ids(ids)
    tuples = [(e.u, e.v, -e.sign if i in ids else e.sign, e.weight)
              for i, e in enumerate(g.edges)]
    return SignedGraph(g.n, tuples, complete=g.complete)


def complete_graph(n: int, sign_of_pair, weight_of_pair=None,
                   node_bound: int = DEFAULT_COMPLETE_NODE_BOUND) -> SignedGraph:
    """Materialise a complete signed graph from sign/weight callbacks.

    Refuses n beyond ``node_bound``; use ImplicitCompleteGraph there.
    """
    if n > node_bound:
        raise CapacityError(
            f"explicit complete graph capped at {node_bound} nodes (asked {n}); "
            "use ImplicitCompleteGraph for larger instances")
    tuples = []
    for u, v in combinations(range(n), 2):
        w = 1 if weight_of_pair is None else weight_of_pair(u, v)
        tuples.append((u, v, sign_of_pair(u, v), w))
    return SignedGraph(n, tuples, complete=True)


class ImplicitCompleteGraph:
    """Complete signed graph storing only positive pairs; missing pair = negative.

    Intended for large complete instances where materialising the
    quadratic negative edge set is wasteful.  Supports what the
    complete-graph algorithms actually touch: positive adjacency,
    bad-triangle enumeration, cover feasibility and clustering cost (all
    pair-based; implicit negative edges have weight ``negative_weight``).
    The LP and exact-search machinery requires :meth:`materialize`.
    """

    __slots__ = ("n", "positive", "_pos_weight", "negative_weight", "_pos_adj")

    def __init__(self, n: int, positive_pairs: Iterable[tuple], negative_weight: Weight = 1):
        self.n = n
        self._pos_weight: dict[tuple[int, int], Weight] = {}
        self.negative_weight = negative_weight
        for item in positive_pairs:
            u, v = item[0], item[1]
            w = item[2] if len(item) > 2 else 1
            if u == v:
                raise InputError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"pair ({u},{v}) out of range for n={n}")
            pair = _canon(u, v)
            if pair in self._pos_weight:
                raise InputError(f"duplicate positive pair {pair}")
            self._pos_weight[pair] = w
        self.positive = tuple(sorted(self._pos_weight))
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.positive:
            adj[u].append(v)
            adj[v].append(u)
        self._pos_adj = tuple(tuple(sorted(a)) for a in adj)

    def is_positive(self, u: int, v: int) -> bool:
        return _canon(u, v) in self._pos_weight

    def sign_of(self, u: int, v: int) -> int:
        return POSITIVE if self.is_positive(u, v) else NEGATIVE

    def weight_of(self, u: int, v: int) -> Weight:
        return self._pos_weight.get(_canon(u, v), self.negative_weight)

    def positive_neighbors(self, node: int) -> tuple[int, ...]:
        return self._pos_adj[node]

    def bad_triangle_pairs(self):
        """Yield bad triangles as (nodes, negative_pair), wedge-driven.

        Lexicographic in the node triple, matching the explicit enumerator.
        """
        found = []
        for center in range(self.n):
            for a, b in combinations(self._pos_adj[center], 2):
                if not self.is_positive(a, b):
                    found.append((tuple(sorted((center, a, b))), _canon(a, b)))
        found.sort()
        return found

    def is_feasible_cover_pairs(self, pairs: Iterable[tuple[int, int]]) -> bool:
        chosen = {_canon(u, v) for u, v in pairs}
        for nodes, _neg in self.bad_triangle_pairs():
            u, v, w = nodes
            if not ({(u, v), (u, w), (v, w)} & chosen):
                return False
        return True

    def cc_cost(self, clustering: Clustering) -> Weight:
        if len(clustering.labels) != self.n:
            raise InputError("clustering size mismatch")
        labels = clustering.labels
        total: Weight = 0
        # positive disagreements: cut positive pairs
        for u, v in self.positive:
            if labels[u] != labels[v]:
                total += self._pos_weight[(u, v)]
        # negative disagreements: intra-cluster pairs that are not positive
        for cluster in clustering.clusters():
            for u, v in combinations(sorted(cluster), 2):
                if not self.is_positive(u, v):
                    total += self.negative_weight
        return total

    def materialize(self, node_bound: int = DEFAULT_COMPLETE_NODE_BOUND) -> SignedGraph:
        return complete_graph(
            self.n,
            sign_of_pair=self.sign_of,
            weight_of_pair=self.weight_of,
            node_bound=node_bound)


# -- text edge-list format ---------------------------------------------------
#
#   # comment
#   n 6 complete
#   0 1 +1
#   1 2 -1 3/2


def _parse_weight(token: str) -> Weight:
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return Fraction(token)
    except ValueError as exc:
        raise InputError(f"cannot parse weight {token!r}") from exc


def _format_weight(w: Weight) -> str:
    if isinstance(w, (int, Fraction)):
        return str(w)
    return repr(w)


def parse_edge_list(text: str) -> SignedGraph:
    """Parse the line-oriented edge-list format.

    Header line ``n <count> [complete]``, then one ``u v s [w]`` line per
    edge with s in {+1, -1}; ``#`` starts a comment.  Weights parse as
    exact rationals (``3/2``, ``1.5`` and ``2`` are all exact).
    """
    n = None
    complete = False
    tuples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "n":
            if n is not None:
                raise InputError(f"line {lineno}: duplicate header")
            if len(fields) not in (2, 3):
                raise InputError(f"line {lineno}: header is 'n <count> [complete]'")
            try:
                n = int(fields[1])
            except ValueError as exc:
                raise InputError(f"line {lineno}: bad node count {fields[1]!r}") from exc
            if len(fields) == 3:
                if fields[2] != "complete":
                    raise InputError(f"line {lineno}: unknown header flag {fields[2]!r}")
                complete = True
            continue
        if n is None:
            raise InputError(f"line {lineno}: edge before 'n' header")
        if len(fields) not in (3, 4):
            raise InputError(f"line {lineno}: edge line is 'u v s [w]'")
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError as exc:
            raise InputError(f"line {lineno}: bad node id") from exc
        if fields[2] not in ("+1", "-1", "1"):
            raise InputError(f"line {lineno}: sign must be +1 or -1, got {fields[2]!r}")
        sign = POSITIVE if fields[2] in ("+1", "1") else NEGATIVE
        if len(fields) == 4:
            tuples.append((u, v, sign, _parse_weight(fields[3])))
        else:
            tuples.append((u, v, sign))
    if n is None:
        raise InputError("missing 'n <count>' header")
    return SignedGraph(n, tuples, complete=complete)


def format_edge_list(g: SignedGraph) -> str:
    lines = [f"n {g.n}" + (" complete" if g.complete else "")]
    for e in g.edges:
        sign = "+1" if e.sign == POSITIVE else "-1"
        if e.weight == 1:
            lines.append(f"{e.u} {e.v} {sign}")
        else:
            lines.append(f"{e.u} {e.v} {sign} {_format_weight(e.weight)}")
    return "\n".join(lines) + "\n"


def read_edge_list(path) -> SignedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def write_edge_list(g: SignedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(g))


# -- JSON export / import ------------------------------------------------


def _weight_to_json(w: Weight):
    if isinstance(w, Fraction):
        return str(w)
    return w


def _weight_from_json(w) -> Weight:
    if isinstance(w, str):
        return Fraction(w)
    return w


def graph_to_json(g: SignedGraph) -> dict:
    return {
        "schema": GRAPH_SCHEMA,
        "n": g.n,
        "complete": g.complete,
        "edges": [[e.u, e.v, e.sign, _weight_to_json(e.weight)] for e in g.edges],
    }


def graph_from_json(obj: dict) -> SignedGraph:
    if obj.get("schema") != GRAPH_SCHEMA:
        raise InputError(f"expected schema {GRAPH_SCHEMA!r}, got {obj.get('schema')!r}")
    tuples = [(u, v, s, _weight_from_json(w)) for u, v, s, w in obj["edges"]]
    return SignedGraph(obj["n"], tuples, complete=obj.get("complete", False))


def cover_to_json(g: SignedGraph, cover: EdgeCover) -> dict:
    return {
        "schema": COVER_SCHEMA,
        "edge_ids": sorted(cover.edge_ids),
        "pairs": [list(p) for p in cover.pairs(g)],
        "cost": _weight_to_json(cover.cost),
    }


def cover_from_json(g: SignedGraph, obj: dict) -> EdgeCover:
    if obj.get("schema") != COVER_SCHEMA:
        raise InputError(f"expected schema {COVER_SCHEMA!r}, got {obj.get('schema')!r}")
    return EdgeCover.from_ids(g, obj["edge_ids"])


def clustering_to_json(c: Clustering) -> dict:
    return {
        "schema": CLUSTERING_SCHEMA,
        "labels": list(c.labels),
        "num_clusters": c.num_clusters,
    }


def clustering_from_json(obj: dict) -> Clustering:
    if obj.get("schema") != CLUSTERING_SCHEMA:
        raise InputError(
            f"expected schema {CLUSTERING_SCHEMA!r}, got {obj.get('schema')!r}")
    return Clustering.from_labels(obj["labels"])


def dump_json(obj: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
