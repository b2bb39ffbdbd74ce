"""Signed directed graphs and the matrix-free signed transition operator.

A graph holds, per node, a list of weighted signed out-edges stored in flat
CSR-style arrays sorted by target id.  The signed transition matrix
P = D^-1 A (D = diagonal of total absolute out-weights) is never
materialized; `apply_p` and `apply_p_transpose` apply it edge by edge, which
keeps every product at O(|E|) regardless of n.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DanglingNode, DuplicateEdge, MalformedLine, ZeroWeightEdge


@dataclass(eq=False, repr=False)
class SignedDigraph:
    """Weighted signed digraph with per-node out-edge arrays.

    Node i's out-edges occupy slots indptr[i]:indptr[i+1] of `targets`,
    `weights` (strictly positive) and `signs` (+1/-1), sorted by target id
    with no duplicate (source, target) pairs.  `out_weight[i]` is the total
    absolute out-weight d_i and is always positive: every node must have at
    least one out-edge.  Instances are immutable after construction and safe
    to share across worker threads/processes.
    """

    n: int
    indptr: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    signs: np.ndarray
    out_weight: np.ndarray

    def __post_init__(self):
        for a in (self.indptr, self.targets, self.weights, self.signs, self.out_weight):
            a.setflags(write=False)

    @property
    def n_edges(self) -> int:
        return int(self.targets.shape[0])

    @property
    def n_negative(self) -> int:
        return int(np.count_nonzero(self.signs < 0))

    @cached_property
    def sources(self) -> np.ndarray:
        """Per-edge source node id (the CSR row expanded)."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        src.setflags(write=False)
        return src

    @cached_property
    def transition_coef(self) -> np.ndarray:
        """Per-edge entry of the signed transition matrix: sign * w / d[src]."""
        coef = self.signs * self.weights / self.out_weight[self.sources]
        coef.setflags(write=False)
        return coef

    @cached_property
    def ground(self) -> np.ndarray:
        """Weighted fraction of outgoing negative edges per node."""
        neg = np.where(self.signs < 0, self.weights, 0.0)
        g = np.bincount(self.sources, weights=neg, minlength=self.n) / self.out_weight
        g.setflags(write=False)
        return g

    def out_slice(self, i: int) -> slice:
        return slice(self.indptr[i], self.indptr[i + 1])

    def __repr__(self):
        return f"SignedDigraph(n={self.n}, edges={self.n_edges}, negative={self.n_negative})"

    def validate(self, rtol: float = 1e-12) -> None:
        """Recheck all structural invariants; raises GraphDataError on failure."""
        if np.any(self.weights <= 0):
            raise ZeroWeightEdge("non-positive edge weight present")
        if not np.all(np.abs(self.signs) == 1):
            raise MalformedLine("signs must be +1 or -1")
        deg = np.diff(self.indptr)
        if np.any(deg == 0):
            raise DanglingNode(f"nodes without out-edges: {np.nonzero(deg == 0)[0][:10]}")
        for i in range(self.n):
            t = self.targets[self.out_slice(i)]
            if np.any(np.diff(t) <= 0):
                raise DuplicateEdge(f"node {i} has unsorted or duplicate targets")
        d = np.bincount(self.sources, weights=self.weights, minlength=self.n)
        if np.any(np.abs(d - self.out_weight) > rtol * np.maximum(d, 1.0)):
            raise MalformedLine("out_weight inconsistent with edge weights")


def from_edge_list(edges, repair_dangling: bool = False) -> SignedDigraph:
    """Build a graph from (src, dst, signed_weight) triples.

    The sign of each edge is the sign of its weight; the stored weight is the
    absolute value.  Duplicate (src, dst) pairs and zero weights are
    rejected.  Nodes with no outgoing edge raise DanglingNode unless
    `repair_dangling` is set, in which case a positive unit self-loop is
    added (this changes the dynamics; off by default).
    """
    edges = list(edges)
    if not edges:
        raise MalformedLine("empty edge list")
    src = np.array([e[0] for e in edges], dtype=np.int64)
    dst = np.array([e[1] for e in edges], dtype=np.int64)
    w = np.array([e[2] for e in edges], dtype=np.float64)
    if np.any(src < 0) or np.any(dst < 0):
        raise MalformedLine("negative node id")
    zero = np.nonzero(w == 0)[0]
    if zero.size:
        i = int(zero[0])
        raise ZeroWeightEdge(f"edge ({src[i]}, {dst[i]}) has zero weight")
    n = int(max(src.max(), dst.max())) + 1

    if repair_dangling:
        deg = np.bincount(src, minlength=n)
        missing = np.nonzero(deg == 0)[0]
        if missing.size:
            src = np.concatenate([src, missing])
            dst = np.concatenate([dst, missing])
            w = np.concatenate([w, np.ones(missing.size)])

    order = np.lexsort((dst, src))
    src, dst, w = src[order], dst[order], w[order]
    dup = np.nonzero((np.diff(src) == 0) & (np.diff(dst) == 0))[0]
    if dup.size:
        i = int(dup[0])
        raise DuplicateEdge(f"duplicate edge ({src[i]}, {dst[i]})")

    deg = np.bincount(src, minlength=n)
    if np.any(deg == 0):
        bad = np.nonzero(deg == 0)[0]
        raise DanglingNode(
            f"{bad.size} node(s) without out-edges (first: {bad[:5].tolist()}); "
            "pass repair_dangling=True to add unit self-loops"
        )
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    signs = np.where(w > 0, 1, -1).astype(np.int8)
    weights = np.abs(w)
    out_weight = np.bincount(src, weights=weights, minlength=n)
    return SignedDigraph(n, indptr, dst, weights, signs, out_weight)


@dataclass
class ParsedSnap:
    """parse_snap result: the graph, the id remap, and edge counts.

    `node_ids[k]` is the original id of compacted node k (first-appearance
    order).  `file_edges` / `file_negative` count the raw edge lines;
    `parsed_edges` / `parsed_negative` count distinct (src, dst) pairs, i.e.
    what the graph holds before any dangling-node repair.
    """

    graph: SignedDigraph
    node_ids: np.ndarray
    file_edges: int
    file_negative: int
    parsed_edges: int
    parsed_negative: int


def parse_snap(text: str, repair_dangling: bool = False) -> ParsedSnap:
    """Parse a whitespace-separated `src dst sign` edge list.

    Lines starting with `#` are comments.  The sign field may be any nonzero
    integer and is taken as a signed unit weight.  Repeated (src, dst) lines
    keep the first occurrence, matching how public sign datasets carry the
    occasional duplicate vote.  Node ids are compacted to 0..n-1 preserving
    first-appearance order; an id set that is already exactly {0..n-1} is
    kept verbatim, so serialize round-trips exactly.
    """
    remap: dict[int, int] = {}
    src, dst, w = [], [], []
    seen: set = set()
    raw_edges = 0
    negative = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise MalformedLine(f"line {lineno}: expected 'src dst sign', got {raw!r}")
        try:
            u, v, s = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise MalformedLine(f"line {lineno}: non-integer field in {raw!r}") from None
        if s == 0:
            raise ZeroWeightEdge(f"line {lineno}: zero sign")
        raw_edges += 1
        if s < 0:
            negative += 1
        for node in (u, v):
            if node not in remap:
                remap[node] = len(remap)
        if (u, v) in seen:
            continue
        seen.add((u, v))
        src.append(u)
        dst.append(v)
        w.append(1 if s > 0 else -1)
    if not remap:
        raise MalformedLine("no edges in input")
    if min(remap) == 0 and max(remap) == len(remap) - 1:
        remap = {node: node for node in remap}
    node_ids = np.empty(len(remap), dtype=np.int64)
    for original, compact in remap.items():
        node_ids[compact] = original
    edges = ((remap[u], remap[v], s) for u, v, s in zip(src, dst, w))
    graph = from_edge_list(edges, repair_dangling=repair_dangling)
    return ParsedSnap(graph, node_ids, raw_edges, negative,
                      len(src), sum(1 for s in w if s < 0))


def serialize(G: SignedDigraph) -> str:
    """Render a unit-weight graph in the `src dst sign` edge-list format.

    The file format carries signs only, so graphs with non-unit weights are
    refused; round-tripping through parse_snap reproduces the graph exactly.
    """
    if not np.all(G.weights == 1.0):
        raise ValueError("edge-list format stores signs only; graph has non-unit weights")
    lines = ["# signed edge list: src dst sign"]
    src = G.sources
    for e in range(G.n_edges):
        lines.append(f"{src[e]} {G.targets[e]} {G.signs[e]}")
    return "\n".join(lines) + "\n"


def ground_vector(G: SignedDigraph) -> np.ndarray:
    """g(i) = (sum of node i's negative out-weights) / d_i, entries in [0, 1]."""
    return G.ground.copy()


def _check_input(G: SignedDigraph, v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != G.n:
        raise ValueError(f"vector of length {v.shape[0]} against graph with n={G.n}")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite entries")
    return v


def apply_p(G: SignedDigraph, v) -> np.ndarray:
    """Apply the signed transition matrix: (Pv)(i) = sum_j sign*w_ij/d_i * v(j).

    Accepts a vector of shape (n,) or a batch of columns of shape (n, k).
    """
    v = _check_input(G, v)
    coef = G.transition_coef if v.ndim == 1 else G.transition_coef[:, None]
    return np.add.reduceat(coef * v[G.targets], G.indptr[:-1], axis=0)


def apply_p_transpose(G: SignedDigraph, v) -> np.ndarray:
    """Apply the transpose of the signed transition matrix, edge by edge."""
    v = _check_input(G, v)
    if v.ndim == 1:
        return np.bincount(G.targets, weights=G.transition_coef * v[G.sources], minlength=G.n)
    cols = [
        np.bincount(G.targets, weights=G.transition_coef * v[G.sources, k], minlength=G.n)
        for k in range(v.shape[1])
    ]
    return np.stack(cols, axis=1)


def negate_signs(G: SignedDigraph) -> SignedDigraph:
    """Same topology and weights, every edge sign flipped (an involution)."""
    return SignedDigraph(
        G.n, G.indptr, G.targets, G.weights, (-G.signs).astype(np.int8), G.out_weight
    )


def graphs_equal(a: SignedDigraph, b: SignedDigraph) -> bool:
    return (
        a.n == b.n
        and np.array_equal(a.indptr, b.indptr)
        and np.array_equal(a.targets, b.targets)
        and np.array_equal(a.weights, b.weights)
        and np.array_equal(a.signs, b.signs)
        and np.array_equal(a.out_weight, b.out_weight)
    )


def indicator(n: int, seeds) -> np.ndarray:
    """White-probability vector that is 1 on `seeds` and 0 elsewhere."""
    x = np.zeros(n)
    seeds = np.asarray(list(seeds), dtype=np.int64)
    if seeds.size:
        if seeds.min() < 0 or seeds.max() >= n:
            raise ValueError("seed id out of range")
        x[seeds] = 1.0
    return x
