"""Condensation into SCCs, sink detection, balance classification, stationary law."""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import NoConvergence, NotStronglyConnected
from .graph import SignedDigraph


class BalanceKind(Enum):
    BALANCED = "balanced"
    ANTI_BALANCED = "anti_balanced"
    STRICTLY_UNBALANCED = "strictly_unbalanced"


@dataclass
class BalanceClass:
    """Balance verdict for one ergodic component.

    `nodes` are the component's node ids in ascending order; `in_s` marks the
    partition side S aligned with `nodes` (None for strictly unbalanced).
    S is canonical: the smallest node id of the component lies in S.
    """

    kind: BalanceKind
    nodes: np.ndarray
    in_s: np.ndarray | None

    @property
    def size_s(self) -> int:
        return int(self.in_s.sum()) if self.in_s is not None else 0

    @property
    def size_sbar(self) -> int:
        return len(self.nodes) - self.size_s if self.in_s is not None else 0


class Block:
    """Matrix-free view of one block of the signed transition matrix.

    Rows/cols are local indices; coef holds sign*w/d[src] per edge.  Never
    materialized except through dense(), used only by small direct solves.
    """

    def __init__(self, rows, cols, coef, nrows, ncols):
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.coef = np.asarray(coef, dtype=np.float64)
        self.nrows = nrows
        self.ncols = ncols

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.ndim == 1:
            return np.bincount(self.rows, weights=self.coef * v[self.cols], minlength=self.nrows)
        cols = [
            np.bincount(self.rows, weights=self.coef * v[self.cols, k], minlength=self.nrows)
            for k in range(v.shape[1])
        ]
        return np.stack(cols, axis=1)

    def apply_t(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        return np.bincount(self.cols, weights=self.coef * v[self.rows], minlength=self.ncols)

    def dense(self) -> np.ndarray:
        m = np.zeros((self.nrows, self.ncols))
        m[self.rows, self.cols] = self.coef
        return m


@dataclass
class Decomposition:
    """Condensation of a graph into SCCs with sink bookkeeping.

    Components are numbered by their smallest contained node id; each
    component array is sorted ascending.  Sinks are components with no
    outgoing condensation edge; `non_sink` is everything else, sorted.
    Block views restrict the signed transition matrix to non-sink rows
    (px), non-sink-to-sink couplings (py) and each sink (pz).
    """

    graph: SignedDigraph
    scc_id: np.ndarray
    components: list
    sink_index: list
    non_sink: np.ndarray
    _blocks: dict = field(default_factory=dict, repr=False)

    @property
    def sinks(self) -> list:
        return [self.components[i] for i in self.sink_index]

    @property
    def n_components(self) -> int:
        return len(self.components)

    def is_sink(self, comp: int) -> bool:
        return comp in set(self.sink_index)

    def px(self) -> Block:
        return self._block(("x",))

    def py(self, sink: int) -> Block:
        return self._block(("y", sink))

    def pz(self, sink: int) -> Block:
        return self._block(("z", sink))

    def _local_index(self, nodes: np.ndarray) -> np.ndarray:
        loc = np.full(self.graph.n, -1, dtype=np.int64)
        loc[nodes] = np.arange(nodes.size)
        return loc

    def _block(self, key) -> Block:
        if key in self._blocks:
            return self._blocks[key]
        G = self.graph
        x = self.non_sink
        if key[0] == "x":
            loc = self._local_index(x)
            mask = (loc[G.sources] >= 0) & (loc[G.targets] >= 0)
            blk = Block(
                loc[G.sources[mask]], loc[G.targets[mask]],
                G.transition_coef[mask], x.size, x.size,
            )
        elif key[0] == "y":
            z = self.sinks[key[1]]
            locx, locz = self._local_index(x), self._local_index(z)
            mask = (locx[G.sources] >= 0) & (locz[G.targets] >= 0)
            blk = Block(
                locx[G.sources[mask]], locz[G.targets[mask]],
                G.transition_coef[mask], x.size, z.size,
            )
        else:
            z = self.sinks[key[1]]
            loc = self._local_index(z)
            mask = loc[G.sources] >= 0  # sink rows have no outgoing edges
            blk = Block(
                loc[G.sources[mask]], loc[G.targets[mask]],
                G.transition_coef[mask], z.size, z.size,
            )
        self._blocks[key] = blk
        return blk


def decompose(G: SignedDigraph) -> Decomposition:
    """Tarjan condensation with deterministic component numbering."""
    n = G.n
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    comp_of = np.full(n, -1, dtype=np.int64)
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, G.indptr[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, ptr = work[-1]
            if ptr < G.indptr[v + 1]:
                work[-1] = (v, ptr + 1)
                w = int(G.targets[ptr])
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, G.indptr[w]))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp_of[w] = len(components)
                        comp.append(w)
                        if w == v:
                            break
                    components.append(comp)

    order = sorted(range(len(components)), key=lambda c: min(components[c]))
    renumber = np.empty(len(components), dtype=np.int64)
    renumber[order] = np.arange(len(components))
    scc_id = renumber[comp_of]
    comps = [np.sort(np.array(components[c], dtype=np.int64)) for c in order]

    has_out = np.zeros(len(comps), dtype=bool)
    cross = scc_id[G.sources] != scc_id[G.targets]
    has_out[scc_id[G.sources[cross]]] = True
    sink_index = [i for i in range(len(comps)) if not has_out[i]]
    sink_set = set(sink_index)
    non_sink = np.sort(
        np.concatenate([comps[i] for i in range(len(comps)) if i not in sink_set] or
                       [np.array([], dtype=np.int64)])
    )
    return Decomposition(G, scc_id, comps, sink_index, non_sink)


def _component_edges(G: SignedDigraph, nodes: np.ndarray):
    """Local (src, dst, sign) arrays for edges with both ends in `nodes`."""
    nodes = np.sort(np.asarray(nodes, dtype=np.int64))
    loc = np.full(G.n, -1, dtype=np.int64)
    loc[nodes] = np.arange(nodes.size)
    mask = (loc[G.sources] >= 0) & (loc[G.targets] >= 0)
    return nodes, loc[G.sources[mask]], loc[G.targets[mask]], G.signs[mask], mask


def _check_scc(k: int, src, dst, what: str) -> list:
    """BFS both ways from local node 0; raises unless the set is one SCC.

    Returns the forward adjacency lists, reused by callers.
    """
    fwd = [[] for _ in range(k)]
    rev = [[] for _ in range(k)]
    for s, t in zip(src, dst):
        fwd[s].append(t)
        rev[t].append(s)
    for adj in (fwd, rev):
        seen = np.zeros(k, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        nxt.append(v)
            frontier = nxt
        if not seen.all():
            raise NotStronglyConnected(f"{what}: node set is not a single SCC")
    return fwd


def is_aperiodic(nodes, G: SignedDigraph) -> bool:
    """True iff the SCC's cycle-length gcd is 1, via BFS level labeling."""
    nodes, src, dst, _, _ = _component_edges(G, nodes)
    k = nodes.size
    fwd = _check_scc(k, src, dst, "is_aperiodic")
    level = np.full(k, -1, dtype=np.int64)
    level[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in fwd[u]:
                if level[v] == -1:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    g = 0
    for s, t in zip(src, dst):
        g = math.gcd(g, abs(int(level[s]) + 1 - int(level[t])))
        if g == 1:
            return True
    return g == 1


def _two_color(k: int, src, dst, want_same) -> np.ndarray | None:
    """2-color the undirected sign skeleton; None when inconsistent.

    want_same[e] is True when edge e constrains its endpoints to equal
    colors.  The component is connected, so one BFS from node 0 suffices;
    a final full edge scan is the verdict.
    """
    adj = [[] for _ in range(k)]
    for s, t, same in zip(src, dst, want_same):
        adj[s].append((t, same))
        adj[t].append((s, same))
    color = np.full(k, -1, dtype=np.int8)
    color[0] = 1
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v, same in adj[u]:
                want = color[u] if same else 1 - color[u]
                if color[v] == -1:
                    color[v] = want
                    nxt.append(v)
        frontier = nxt
    same_ok = color[src] == color[dst]
    if np.array_equal(same_ok, np.asarray(want_same)):
        return color.astype(bool)
    return None


def classify_balance(nodes, G: SignedDigraph) -> BalanceClass:
    """Classify an ergodic component as balanced, anti-balanced, or neither.

    Balanced means a node partition exists with positive edges inside the
    parts and negative edges across; anti-balanced is the same after
    negating every sign.  Both checks are single 2-colorings of the
    undirected sign skeleton.
    """
    nodes, src, dst, signs, _ = _component_edges(G, nodes)
    k = nodes.size
    _check_scc(k, src, dst, "classify_balance")
    positive = signs > 0
    in_s = _two_color(k, src, dst, positive)
    if in_s is not None:
        kind = BalanceKind.BALANCED
    else:
        in_s = _two_color(k, src, dst, ~positive)
        if in_s is not None:
            kind = BalanceKind.ANTI_BALANCED
        else:
            return BalanceClass(BalanceKind.STRICTLY_UNBALANCED, nodes, None)
    if not in_s[0]:  # canonical: smallest node id sits in S
        in_s = ~in_s
    return BalanceClass(kind, nodes, in_s)


def _power_iteration_cap(k: int) -> int:
    return max(100, int(10 * k * math.log(k + 1)))


def stationary(nodes, G: SignedDigraph, tol: float = 1e-12, residual_tol: float = 1e-10) -> np.ndarray:
    """Stationary distribution of the unsigned chain on a closed component.

    Power iteration on the transpose of the unsigned transition matrix with
    a per-entry change threshold; falls back to a direct solve of
    (Pbar^T - I) pi = 0, sum(pi) = 1 for components of at most 2000 nodes
    when the iteration cap is hit.  The result is checked against
    ||pi^T Pbar - pi^T||_inf <= residual_tol.
    """
    nodes, src, dst, _, mask = _component_edges(G, nodes)
    k = nodes.size
    _check_scc(k, src, dst, "stationary")
    deg_inside = np.bincount(src, minlength=k)
    deg_total = np.diff(G.indptr)[nodes]
    if np.any(deg_inside != deg_total):
        raise NotStronglyConnected("stationary: component has edges leaving the set")
    coef = G.weights[mask] / G.out_weight[G.sources[mask]]
    blk = Block(src, dst, coef, k, k)

    pi = np.full(k, 1.0 / k)
    for _ in range(_power_iteration_cap(k)):
        nxt = blk.apply_t(pi)
        nxt /= nxt.sum()
        delta = np.abs(nxt - pi).max()
        pi = nxt
        if delta <= tol:
            break
    residual = np.abs(blk.apply_t(pi) - pi).max()
    if residual > residual_tol:
        # cap hit, or a small spectral gap stalled the per-entry change
        # before the iterate was accurate: direct solve for small components
        if k > 2000:
            raise NoConvergence(
                f"stationary: residual {residual:.3e} on component of {k} nodes"
            )
        a = np.vstack([blk.dense().T - np.eye(k), np.ones((1, k))])
        b = np.zeros(k + 1)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(a, b, rcond=None)
        pi = np.maximum(pi, 0.0)
        pi /= pi.sum()
        residual = np.abs(blk.apply_t(pi) - pi).max()
    if residual > residual_tol:
        raise NoConvergence(f"stationary: residual {residual:.3e} above {residual_tol:.1e}")
    return pi
