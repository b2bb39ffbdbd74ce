"""Synthetic signed digraph families with verified structure.

Families mirror the standard benchmark shapes: single ergodic graphs that
are balanced, anti-balanced or strictly unbalanced; a weakly connected
graph whose first part feeds two balanced sinks; disconnected unions; and
the two-lobe slow-mixing construction whose random walk needs exponentially
many steps to cross between lobes.  Generation is deterministic for a fixed
seed, and every structural claim (ergodicity, balance class, sink layout)
is re-checked with the structure module, regenerating up to a retry budget.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationFailed, InvalidConfig
from .graph import SignedDigraph, from_edge_list
from .structure import BalanceKind, classify_balance, decompose, is_aperiodic

FAMILIES = (
    "balanced",
    "anti_balanced",
    "strictly_unbalanced",
    "weakly_connected",
    "disconnected",
    "disconnected_with_wcc",
    "slow_mixing",
)


@dataclass
class GeneratorConfig:
    """Declarative recipe for one synthetic graph.

    sizes lists component node counts (for slow_mixing, sizes = [m] gives
    the 2m-node construction).  edges_per_node applies within each part;
    cross_edges overrides the number of edges between the two parts of a
    balanced pair (default: 8x the smaller part, mirroring edges_per_node);
    link_edges overrides the number of one-way edges from the non-sink part
    of a weakly connected graph into its sinks (default: 6x its size).
    """

    family: str
    sizes: list = field(default_factory=list)
    edges_per_node: int = 8
    cross_edges: int | None = None
    link_edges: int | None = None
    seed: int = 0
    retries: int = 20

    def validate(self):
        if self.family not in FAMILIES:
            raise InvalidConfig(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise InvalidConfig("sizes must be a non-empty list of positive ints")
        if self.family == "slow_mixing":
            if len(self.sizes) != 1 or self.sizes[0] < 3:
                raise InvalidConfig("slow_mixing takes sizes=[m] with m >= 3")
        elif self.edges_per_node < 2:
            raise InvalidConfig("edges_per_node must be >= 2")
        expected = {
            "balanced": 2, "anti_balanced": 2, "strictly_unbalanced": 2,
            "weakly_connected": 5, "disconnected": 5, "disconnected_with_wcc": 7,
        }
        if self.family in expected and len(self.sizes) != expected[self.family]:
            raise InvalidConfig(
                f"family {self.family!r} needs {expected[self.family]} sizes, got {len(self.sizes)}"
            )
        for s in self.sizes if self.family != "slow_mixing" else []:
            if self.edges_per_node >= s:
                raise InvalidConfig("edges_per_node must be smaller than each part size")


def parse_generator_config(text: str) -> GeneratorConfig:
    """Parse `key = value` lines (# comments allowed) into a config."""
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "family":
            fields[key] = value
        elif key == "sizes":
            try:
                fields[key] = [int(v) for v in value.replace(",", " ").split()]
            except ValueError:
                raise InvalidConfig(f"line {lineno}: bad sizes {value!r}") from None
        elif key in ("edges_per_node", "cross_edges", "link_edges", "seed", "retries"):
            try:
                fields[key] = int(value)
            except ValueError:
                raise InvalidConfig(f"line {lineno}: {key} must be an integer") from None
        else:
            raise InvalidConfig(f"line {lineno}: unknown key {key!r}")
    if "family" not in fields:
        raise InvalidConfig("config is missing 'family'")
    cfg = GeneratorConfig(**fields)
    cfg.validate()
    return cfg


def _random_distinct_pairs(rng, src_pool, dst_pool, count, taken, forbid_self=True):
    """Draw `count` distinct directed pairs not already in `taken`."""
    pairs = []
    guard = 0
    while len(pairs) < count:
        guard += 1
        if guard > 200:
            raise GenerationFailed("edge sampling stalled; graph too dense for request")
        need = count - len(pairs)
        s = src_pool[rng.integers(0, src_pool.size, size=2 * need + 8)]
        t = dst_pool[rng.integers(0, dst_pool.size, size=2 * need + 8)]
        for a, b in zip(s, t):
            if forbid_self and a == b:
                continue
            key = (int(a), int(b))
            if key in taken:
                continue
            taken.add(key)
            pairs.append(key)
            if len(pairs) == count:
                break
    return pairs


def _ergodic_part(rng, nodes: np.ndarray, edges_per_node: int, taken) -> list:
    """Random cycle through all nodes plus random extras: strongly connected
    by construction; aperiodicity is verified by the caller."""
    perm = rng.permutation(nodes)
    edges = []
    for i in range(perm.size):
        key = (int(perm[i]), int(perm[(i + 1) % perm.size]))
        taken.add(key)
        edges.append(key)
    extra = edges_per_node * nodes.size - len(edges)
    edges.extend(_random_distinct_pairs(rng, nodes, nodes, extra, taken))
    return edges


def _signed(edges, sign):
    return [(a, b, sign) for a, b in edges]


def _random_signs(rng, edges):
    signs = rng.integers(0, 2, size=len(edges)) * 2 - 1
    return [(a, b, int(s)) for (a, b), s in zip(edges, signs)]


def _balanced_pair(rng, part_a, part_b, epn, cross, taken):
    """Two ergodic parts, positive inside, negative across (both directions)."""
    edges = _signed(_ergodic_part(rng, part_a, epn, taken), +1)
    edges += _signed(_ergodic_part(rng, part_b, epn, taken), +1)
    flip = rng.integers(0, 2, size=cross).astype(bool)
    n_ab = int(flip.sum())
    edges += _signed(_random_distinct_pairs(rng, part_a, part_b, n_ab, taken), -1)
    edges += _signed(_random_distinct_pairs(rng, part_b, part_a, cross - n_ab, taken), -1)
    return edges


def _check(cond, msg):
    if not cond:
        raise GenerationFailed(msg)


def _build_once(cfg: GeneratorConfig, rng) -> SignedDigraph:
    sizes = cfg.sizes
    epn = cfg.edges_per_node
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    parts = [np.arange(offsets[i], offsets[i + 1], dtype=np.int64) for i in range(len(sizes))]
    taken: set = set()

    if cfg.family in ("balanced", "anti_balanced", "strictly_unbalanced"):
        cross = cfg.cross_edges if cfg.cross_edges is not None else min(sizes) * epn
        edges = _balanced_pair(rng, parts[0], parts[1], epn, cross, taken)
        if cfg.family == "anti_balanced":
            edges = [(a, b, -s) for a, b, s in edges]
        elif cfg.family == "strictly_unbalanced":
            edges = _random_signs(rng, [(a, b) for a, b, _ in edges])
        G = from_edge_list(edges)
        d = decompose(G)
        _check(d.n_components == 1, "graph is not strongly connected")
        _check(is_aperiodic(d.components[0], G), "graph is periodic")
        want = BalanceKind[cfg.family.upper()]
        _check(classify_balance(d.components[0], G).kind is want,
               f"classification is not {cfg.family}")
        return G

    if cfg.family in ("weakly_connected", "disconnected", "disconnected_with_wcc"):
        if cfg.family == "disconnected_with_wcc":
            big, rest = sizes[:2], sizes[2:]
        else:
            big, rest = None, sizes
        edges = []
        if big is not None:
            cross = cfg.cross_edges if cfg.cross_edges is not None else min(big) * epn
            edges += _balanced_pair(rng, parts[0], parts[1], epn, cross, taken)
        shift = 0 if big is None else 2
        p1, p2, p3, p4, p5 = parts[shift:shift + 5]
        edges += _random_signs(rng, _ergodic_part(rng, p1, epn, taken))
        cross23 = cfg.cross_edges if cfg.cross_edges is not None else min(p2.size, p3.size) * epn
        cross45 = cfg.cross_edges if cfg.cross_edges is not None else min(p4.size, p5.size) * epn
        edges += _balanced_pair(rng, p2, p3, epn, cross23, taken)
        edges += _balanced_pair(rng, p4, p5, epn, cross45, taken)
        if cfg.family != "disconnected":
            links = cfg.link_edges if cfg.link_edges is not None else 6 * p1.size
            sinks_pool = np.concatenate([p2, p3, p4, p5])
            edges += _random_signs(
                rng, _random_distinct_pairs(rng, p1, sinks_pool, links, taken)
            )
        G = from_edge_list(edges)
        d = decompose(G)
        z23 = np.concatenate([p2, p3])
        z45 = np.concatenate([p4, p5])
        if cfg.family == "weakly_connected":
            expected_sinks = [z23, z45]
        elif cfg.family == "disconnected":
            expected_sinks = [p1, z23, z45]
        else:
            expected_sinks = [np.concatenate([parts[0], parts[1]]), z23, z45]
        got = sorted(sorted(s.tolist()) for s in d.sinks)
        _check(got == sorted(sorted(s.tolist()) for s in expected_sinks),
               "sink layout differs from the requested family")
        for z in d.sinks:
            _check(is_aperiodic(z, G), "a sink component is periodic")
        kinds = {tuple(sorted(z.tolist())): classify_balance(z, G).kind for z in d.sinks}
        _check(kinds[tuple(sorted(z23.tolist()))] is BalanceKind.BALANCED, "pair-23 not balanced")
        _check(kinds[tuple(sorted(z45.tolist()))] is BalanceKind.BALANCED, "pair-45 not balanced")
        if cfg.family == "disconnected":
            _check(kinds[tuple(p1.tolist())] is BalanceKind.STRICTLY_UNBALANCED,
                   "part-1 not strictly unbalanced")
            _check(d.non_sink.size == 0, "disconnected family must have no non-sink nodes")
        else:
            _check(np.array_equal(d.non_sink, p1), "non-sink set is not part 1")
            _check(is_aperiodic(p1, G), "part 1 is periodic")
            _check(classify_balance(p1, G).kind is BalanceKind.STRICTLY_UNBALANCED,
                   "part 1 not strictly unbalanced")
        if big is not None:
            _check(kinds[tuple(sorted(np.concatenate([parts[0], parts[1]]).tolist()))]
                   is BalanceKind.BALANCED, "big component not balanced")
        return G

    raise InvalidConfig(f"unhandled family {cfg.family!r}")


def slow_mixing(m: int) -> SignedDigraph:
    """Two mirrored lobes of m nodes each, all edges positive unit weight.

    Each lobe is a chain 1 -> 2 -> ... -> m with every non-hub node wired
    back to the hub (node 1 of the lobe); the chain tails cross over to the
    opposite hub.  Aperiodic via 2- and 3-cycles, yet a walk needs about
    2^m steps to move mass across, so it is the canonical slow-mixing case.
    Left lobe nodes are 0..m-1 (hub 0), right lobe m..2m-1 (hub m).
    """
    if m < 3:
        raise InvalidConfig("slow_mixing needs m >= 3")
    edges = []
    for base in (0, m):
        for i in range(m - 1):
            edges.append((base + i, base + i + 1, +1))
        for i in range(1, m):
            edges.append((base + i, base, +1))
    edges.append((m - 1, m, +1))      # left tail -> right hub
    edges.append((2 * m - 1, 0, +1))  # right tail -> left hub
    return from_edge_list(edges)


def generate(config: GeneratorConfig) -> SignedDigraph:
    """Build the configured family; retries fresh seeds on verification failure."""
    config.validate()
    if config.family == "slow_mixing":
        return slow_mixing(config.sizes[0])
    last = None
    for attempt in range(config.retries):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, attempt]))
        try:
            return _build_once(config, rng)
        except GenerationFailed as exc:
            last = exc
    raise GenerationFailed(f"retries exhausted: {last}")
