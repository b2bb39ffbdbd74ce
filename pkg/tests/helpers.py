"""Shared test utilities: independent dense oracles and random instance builders.

The dense routines rebuild matrices straight from the raw storage arrays and
never call the matrix-free kernels they are used to check.
"""

import numpy as np

import signedvoter as sv
from signedvoter.errors import GenerationFailed
from signedvoter.structure import BalanceKind

DENSE_GATE = 50


def dense_p(G):
    """Dense signed transition matrix, reconstructed from raw edge storage."""
    assert G.n <= DENSE_GATE, "dense reference path is gated to small graphs"
    P = np.zeros((G.n, G.n))
    for i in range(G.n):
        sl = slice(int(G.indptr[i]), int(G.indptr[i + 1]))
        d = G.weights[sl].sum()
        P[i, G.targets[sl]] = G.signs[sl] * G.weights[sl] / d
    return P


def dense_ground(G):
    assert G.n <= DENSE_GATE
    g = np.zeros(G.n)
    for i in range(G.n):
        sl = slice(int(G.indptr[i]), int(G.indptr[i + 1]))
        neg = G.weights[sl][G.signs[sl] < 0].sum()
        g[i] = neg / G.weights[sl].sum()
    return g


def dense_trajectory(P, g, x0, t):
    """Iterate x <- P x + g with dense arithmetic; returns steps 0..t."""
    out = [np.asarray(x0, dtype=float)]
    for _ in range(t):
        out.append(P @ out[-1] + g)
    return np.stack(out)


def random_edges(rng, n, n_edges, neg_prob=0.4, allow_self=False):
    """Random distinct directed edges on a guaranteed-covering cycle."""
    n_edges = min(n_edges, n * (n - 1) + (n if allow_self else 0))
    perm = rng.permutation(n)
    taken = set()
    edges = []
    for i in range(n):
        key = (int(perm[i]), int(perm[(i + 1) % n]))
        taken.add(key)
        edges.append(key)
    while len(edges) < n_edges:
        s, t = int(rng.integers(n)), int(rng.integers(n))
        if (s == t and not allow_self) or (s, t) in taken:
            continue
        taken.add((s, t))
        edges.append((s, t))
    return [(s, t, -1 if rng.random() < neg_prob else 1) for s, t in edges]


def random_graph(rng, n, n_edges=None, neg_prob=0.4):
    """Generic random signed digraph (strongly connected, mixed signs)."""
    if n_edges is None:
        n_edges = 3 * n
    return sv.from_edge_list(random_edges(rng, n, n_edges, neg_prob))


def small_family(rng, family, scale=1):
    """One small instance of a generator family with a fresh random seed."""
    seed = int(rng.integers(2**31))
    sizes = {
        "balanced": [5 * scale, 8 * scale],
        "anti_balanced": [5 * scale, 8 * scale],
        "strictly_unbalanced": [5 * scale, 8 * scale],
        "weakly_connected": [5, 4, 5, 4, 6],
        "disconnected": [5, 4, 5, 4, 6],
        "disconnected_with_wcc": [5, 6, 5, 4, 5, 4, 6],
    }[family]
    cfg = sv.GeneratorConfig(family, sizes=sizes, edges_per_node=3, seed=seed)
    return sv.generate(cfg)


def _part(rng, nodes, taken, epn=2):
    """Edges making `nodes` strongly connected: size-1 gets a self-loop."""
    if nodes.size == 1:
        key = (int(nodes[0]), int(nodes[0]))
        taken.add(key)
        return [key]
    perm = rng.permutation(nodes)
    edges = [(int(perm[i]), int(perm[(i + 1) % perm.size])) for i in range(perm.size)]
    taken.update(edges)
    want = epn * nodes.size
    guard = 0
    while len(edges) < want:
        guard += 1
        if guard > 50 * want:
            break
        s, t = int(nodes[rng.integers(nodes.size)]), int(nodes[rng.integers(nodes.size)])
        if s == t or (s, t) in taken:
            continue
        taken.add((s, t))
        edges.append((s, t))
    return edges


def _cross(rng, a, b, count, taken):
    pairs = []
    guard = 0
    while len(pairs) < count and guard < 100 * count + 100:
        guard += 1
        s, t = int(a[rng.integers(a.size)]), int(b[rng.integers(b.size)])
        if (s, t) in taken:
            continue
        taken.add((s, t))
        pairs.append((s, t))
    return pairs


def _sink_edges(rng, kind, parts, taken):
    if kind == "strictly_unbalanced":
        assert len(parts) == 1
        plain = _part(rng, parts[0], taken)
        return [(s, t, int(rng.integers(0, 2) * 2 - 1)) for s, t in plain]
    a, b = parts
    edges = [(s, t, 1) for s, t in _part(rng, a, taken)]
    edges += [(s, t, 1) for s, t in _part(rng, b, taken)]
    cross = max(2, min(a.size, b.size) * 2)
    half = cross // 2
    edges += [(s, t, -1) for s, t in _cross(rng, a, b, half, taken)]
    edges += [(s, t, -1) for s, t in _cross(rng, b, a, cross - half, taken)]
    if kind == "anti_balanced":
        edges = [(s, t, -x) for s, t, x in edges]
    return edges


def build_shape(rng, x_size, sink_specs, links_per_x=3, retries=60):
    """Graph with an optional non-sink part feeding sinks of chosen classes.

    sink_specs is a list of (kind, sizes) with kind one of 'balanced',
    'anti_balanced', 'strictly_unbalanced'; balanced kinds take two part
    sizes (1s allowed), strictly unbalanced takes one size >= 3.  x_size = 0
    yields a disconnected union of ergodic components.  The decomposition
    and every classification are re-verified, retrying on bad luck.
    """
    for _ in range(retries):
        taken = set()
        edges = []
        offset = 0
        if x_size:
            x_nodes = np.arange(x_size)
            plain = _part(rng, x_nodes, taken)
            edges += [(s, t, int(rng.integers(0, 2) * 2 - 1)) for s, t in plain]
            offset = x_size
        sink_nodes = []
        for kind, sizes in sink_specs:
            parts = []
            for size in sizes:
                parts.append(np.arange(offset, offset + size))
                offset += size
            edges += _sink_edges(rng, kind, parts, taken)
            sink_nodes.append(np.concatenate(parts))
        if x_size:
            pool = np.concatenate(sink_nodes)
            for s, t in _cross(rng, np.arange(x_size), pool, links_per_x * x_size, taken):
                edges.append((s, t, int(rng.integers(0, 2) * 2 - 1)))
        G = sv.from_edge_list(edges)
        decomp = sv.decompose(G)
        got = sorted(sorted(z.tolist()) for z in decomp.sinks)
        want = sorted(sorted(z.tolist()) for z in sink_nodes)
        if got != want or decomp.non_sink.size != x_size:
            continue
        ok = True
        for z in decomp.sinks:
            if not sv.is_aperiodic(z, G):
                ok = False
                break
        if not ok:
            continue
        kinds = {tuple(z.tolist()): sv.classify_balance(z, G).kind.value for z in decomp.sinks}
        for z, (kind, _) in zip(sink_nodes, sink_specs):
            if kinds[tuple(sorted(z.tolist()))] != kind:
                ok = False
        if ok:
            return G
    raise GenerationFailed("build_shape: retries exhausted")


def balance_partition(G, nodes=None):
    """Convenience: classify the (single-component) graph and return its class."""
    if nodes is None:
        nodes = np.arange(G.n)
    return sv.classify_balance(nodes, G)
