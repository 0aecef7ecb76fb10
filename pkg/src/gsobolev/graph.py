"""Shared metric graph, rooted shortest-path structure, and edge preprocessing.

Everything downstream starts from three immutable objects.  A :class:`Graph`
is a validated, connected, positively weighted simple graph whose edge ids are
stable file/constructor order.  A :class:`RootedStructure` records the
shortest-path tree grown from a chosen root, with deterministic handling of
equal-length path ties.  An :class:`EdgePrep` carries, for every edge, the
total length of the region of the graph whose root paths traverse that edge
(the downstream length), which is the only graph-dependent quantity the
closed-form distances need.

All arrays are frozen after construction, so the objects are safe to share
across threads; the per-object caches guard insertion with a lock.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .errors import (
    Disconnected,
    DuplicateEdge,
    NonPositiveWeight,
    ParseError,
)

# Two root-path lengths within this relative tolerance count as tied.
TIE_RTOL = 1e-12


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected connected graph with positive edge lengths.

    Edge ``i`` joins ``edge_u[i]`` and ``edge_v[i]`` with length ``edge_w[i]``.
    Edge ids are construction order and never change, so they are stable cache
    keys.  Self-loops and repeated unordered pairs are rejected (both violate
    the simple-graph invariant and raise :class:`DuplicateEdge`).

    ``node_coords`` is optional embedding information (one row per node) kept
    for synthetic instances; no distance computation reads it.
    """

    node_count: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray
    node_coords: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = self.node_count
        if n < 1:
            raise ValueError("graph needs at least one node")
        u = np.asarray(self.edge_u, dtype=np.int64).reshape(-1)
        v = np.asarray(self.edge_v, dtype=np.int64).reshape(-1)
        w = np.asarray(self.edge_w, dtype=np.float64).reshape(-1)
        if not (u.size == v.size == w.size):
            raise ValueError("edge arrays must share one length")
        if u.size and (u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n):
            raise ValueError("edge endpoint outside [0, node_count)")
        bad = ~(np.isfinite(w) & (w > 0.0))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise NonPositiveWeight(
                f"edge {i} ({u[i]}-{v[i]}) has non-positive length {w[i]!r}"
            )
        loops = u == v
        if loops.any():
            i = int(np.flatnonzero(loops)[0])
            raise DuplicateEdge(f"edge {i} is a self-loop at node {u[i]}")
        key = np.minimum(u, v) * n + np.maximum(u, v)
        uniq, counts = np.unique(key, return_counts=True)
        if (counts > 1).any():
            k = int(uniq[counts > 1][0])
            raise DuplicateEdge(f"node pair ({k // n}, {k % n}) appears more than once")
        object.__setattr__(self, "edge_u", _freeze(u))
        object.__setattr__(self, "edge_v", _freeze(v))
        object.__setattr__(self, "edge_w", _freeze(w))
        if self.node_coords is not None:
            coords = np.asarray(self.node_coords, dtype=np.float64)
            if coords.shape[0] != n:
                raise ValueError("node_coords must have one row per node")
            object.__setattr__(self, "node_coords", _freeze(coords))
        # Symmetric CSR adjacency; reused by every shortest-path call.
        rows = np.concatenate([u, v])
        cols = np.concatenate([v, u])
        data = np.concatenate([w, w])
        csr = csr_matrix((data, (rows, cols)), shape=(n, n))
        object.__setattr__(self, "_csr", csr)
        if n > 1:
            n_comp, _ = connected_components(csr, directed=False)
            if n_comp != 1:
                raise Disconnected(f"graph has {n_comp} components, expected 1")

    @property
    def edge_count(self) -> int:
        return int(self.edge_w.size)

    @property
    def total_length(self) -> float:
        """Sum of all edge lengths."""
        return float(self.edge_w.sum())

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: Iterable[tuple[int, int, float]],
        node_coords: np.ndarray | None = None,
    ) -> "Graph":
        """Build a graph from ``(u, v, length)`` triples, validating everything."""
        triples = list(edges)
        u = np.array([e[0] for e in triples], dtype=np.int64)
        v = np.array([e[1] for e in triples], dtype=np.int64)
        w = np.array([e[2] for e in triples], dtype=np.float64)
        return cls(node_count, u, v, w, node_coords)

    def edge_id(self, a: int, b: int) -> int:
        """Id of the edge joining ``a`` and ``b`` (order-insensitive)."""
        hit = ((self.edge_u == a) & (self.edge_v == b)) | (
            (self.edge_u == b) & (self.edge_v == a)
        )
        ids = np.flatnonzero(hit)
        if ids.size != 1:
            raise KeyError(f"no edge joins nodes {a} and {b}")
        return int(ids[0])


def load_graph(path: str) -> Graph:
    """Parse a graph file.

    Format: first significant line ``n m``, then ``m`` lines ``u v w`` with
    0-based node ids and positive lengths.  Lines starting with ``#`` and
    blank lines are ignored.
    """
    rows: list[tuple[int, list[str]]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            rows.append((lineno, text.split()))
    if not rows:
        raise ParseError(f"{path}: no data lines")
    lineno, header = rows[0]
    if len(header) != 2:
        raise ParseError(f"{path}:{lineno}: header must be 'n m'")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: header must hold two integers") from exc
    if n < 1 or m < 0:
        raise ParseError(f"{path}:{lineno}: need n >= 1 and m >= 0")
    body = rows[1:]
    if len(body) != m:
        raise ParseError(f"{path}: header promises {m} edges, found {len(body)}")
    u = np.empty(m, dtype=np.int64)
    v = np.empty(m, dtype=np.int64)
    w = np.empty(m, dtype=np.float64)
    for i, (lineno, tok) in enumerate(body):
        if len(tok) != 3:
            raise ParseError(f"{path}:{lineno}: edge line must be 'u v w'")
        try:
            u[i], v[i] = int(tok[0]), int(tok[1])
            w[i] = float(tok[2])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: cannot parse edge line") from exc
        if not (0 <= u[i] < n and 0 <= v[i] < n):
            raise ParseError(f"{path}:{lineno}: node id outside [0, {n})")
    return Graph(n, u, v, w)


def save_graph(g: Graph, path: str) -> None:
    """Write a graph in the format :func:`load_graph` reads."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.node_count} {g.edge_count}\n")
        for u, v, w in zip(g.edge_u, g.edge_v, g.edge_w):
            fh.write(f"{int(u)} {int(v)} {w:.17g}\n")


@dataclass(frozen=True, eq=False)
class RootedStructure:
    """Shortest-path tree of a graph grown from one root.

    ``dist`` holds exact Dijkstra distances.  ``parent``/``parent_edge`` give,
    for every non-root node, the tree predecessor; when several predecessors
    produce equal-length root paths (within ``TIE_RTOL`` relative tolerance)
    the smallest node id wins and the tie is recorded in ``warnings``.
    ``topo_order`` lists nodes by increasing distance with every parent placed
    before its children, so subtree accumulations can run as one linear scan.
    """

    graph: Graph
    root: int
    dist: np.ndarray
    parent: np.ndarray
    parent_edge: np.ndarray
    tree_edge_mask: np.ndarray
    topo_order: np.ndarray
    warnings: tuple[str, ...]
    _gamma_cache: dict = field(default_factory=dict, repr=False)
    _gamma_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def tree_edges(self) -> frozenset[int]:
        """Ids of the edges that belong to the shortest-path tree."""
        return frozenset(int(e) for e in np.flatnonzero(self.tree_edge_mask))


def shortest_path_tree(g: Graph, root: int) -> RootedStructure:
    """Grow the shortest-path tree of ``g`` from ``root``.

    Distances come from Dijkstra's algorithm.  Parents are then derived in a
    deterministic pass: node ``u`` is a candidate parent of ``v`` when
    ``dist[u] < dist[v]`` and ``dist[u] + w_uv`` matches ``dist[v]`` within
    ``TIE_RTOL * max(1, dist[v])``; the smallest candidate id is kept and any
    multiplicity is reported as a tie warning.  This makes the recorded tree a
    pure function of the graph and the root, independent of heap order.
    """
    n = g.node_count
    if not 0 <= root < n:
        raise ValueError(f"root {root} outside [0, {n})")
    dist = np.asarray(
        _sp_dijkstra(g._csr, directed=True, indices=root), dtype=np.float64
    ).reshape(-1)
    # Connectivity is a Graph invariant, so every distance is finite.
    tol = TIE_RTOL * np.maximum(1.0, dist)
    eu, ev, w = g.edge_u, g.edge_v, g.edge_w
    du, dv = dist[eu], dist[ev]
    fwd = (du < dv) & (np.abs(du + w - dv) <= tol[ev])  # u parents v
    bwd = (dv < du) & (np.abs(dv + w - du) <= tol[eu])  # v parents u
    child = np.concatenate([ev[fwd], eu[bwd]])
    cand = np.concatenate([eu[fwd], ev[bwd]])
    cedge = np.concatenate([np.flatnonzero(fwd), np.flatnonzero(bwd)])
    order = np.lexsort((cand, child))
    child, cand, cedge = child[order], cand[order], cedge[order]
    kids, first, counts = np.unique(child, return_index=True, return_counts=True)

    parent = np.full(n, -1, dtype=np.int64)
    parent_edge = np.full(n, -1, dtype=np.int64)
    parent[kids] = cand[first]
    parent_edge[kids] = cedge[first]
    if n > 1 and kids.size != n - 1:
        raise AssertionError("some node has no shortest-path predecessor")

    tie_notes = []
    for v in kids[counts > 1]:
        k = int(counts[kids == v][0])
        tie_notes.append(
            f"node {int(v)}: {k} equal-length root paths within tolerance; "
            f"kept parent {int(parent[v])} (smallest id)"
        )

    tree_edge_mask = np.zeros(g.edge_count, dtype=bool)
    tree_edge_mask[parent_edge[parent_edge >= 0]] = True

    # Depth breaks the (pathological) case of a parent at equal float
    # distance, keeping parents strictly before children in topo_order.
    depth = np.full(n, -1, dtype=np.int64)
    depth[root] = 0
    for start in range(n):
        if depth[start] >= 0:
            continue
        chain = []
        x = start
        while depth[x] < 0:
            chain.append(x)
            x = int(parent[x])
        d = int(depth[x])
        while chain:
            d += 1
            depth[chain.pop()] = d
    topo_order = np.lexsort((np.arange(n), depth, dist))

    return RootedStructure(
        graph=g,
        root=root,
        dist=_freeze(dist),
        parent=_freeze(parent),
        parent_edge=_freeze(parent_edge),
        tree_edge_mask=_freeze(tree_edge_mask),
        topo_order=_freeze(topo_order.astype(np.int64)),
        warnings=tuple(tie_notes),
    )


def root_path_edges(rs: RootedStructure, x: int) -> list[int]:
    """Edge ids of the recorded root path to ``x``, ordered root first."""
    if not 0 <= x < rs.graph.node_count:
        raise ValueError(f"node {x} outside [0, {rs.graph.node_count})")
    out: list[int] = []
    v = x
    while v != rs.root:
        out.append(int(rs.parent_edge[v]))
        v = int(rs.parent[v])
    out.reverse()
    return out


@dataclass(frozen=True, eq=False)
class EdgePrep:
    """Per-edge preprocessing for closed-form distances under one root.

    ``lambda_gamma[e]`` is the downstream length of edge ``e``: the total
    length of everything reached from the root through ``e`` (full lengths of
    tree edges strictly below it plus the breakpoint shares of every other
    edge hanging off that subtree).  Edges outside the shortest-path tree are
    inert in the closed forms (no root path crosses them), so their entry is
    kept at zero.  ``beta_cache`` maps each requested order ``p`` to the
    frozen per-edge weight vector; insertion is lock-guarded.
    """

    root: int
    lambda_gamma: np.ndarray
    total_length: float
    edge_lengths: np.ndarray
    beta_cache: dict = field(default_factory=dict, repr=False)
    _beta_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def lambda_gamma(g: Graph, rs: RootedStructure) -> EdgePrep:
    """Compute every edge's downstream length in ``O(|E| + |V|)``.

    Each edge's interior splits at the point equidistant from the root via
    either endpoint; the share reached through endpoint ``u`` of edge
    ``(u, v)`` has length ``w * clamp((dist[v] - dist[u] + w) / (2w), 0, 1)``.
    Summing the shares attached to each node and accumulating them up the
    tree (children before parents) yields, at node ``x``, the downstream
    length of the tree edge entering ``x``.
    """
    if rs.graph is not g:
        raise ValueError("rooted structure was built for a different graph")
    n, m = g.node_count, g.edge_count
    eu, ev, w = g.edge_u, g.edge_v, g.edge_w
    du, dv = rs.dist[eu], rs.dist[ev]
    share_u = np.clip((dv - du + w) / (2.0 * w), 0.0, 1.0) * w
    share_v = np.clip((du - dv + w) / (2.0 * w), 0.0, 1.0) * w
    portion = np.zeros(n, dtype=np.float64)
    np.add.at(portion, eu, share_u)
    np.add.at(portion, ev, share_v)

    sub = portion.copy()
    parent = rs.parent
    for x in rs.topo_order[::-1]:
        if x != rs.root:
            sub[parent[x]] += sub[x]

    lam = np.zeros(m, dtype=np.float64)
    below = rs.parent_edge >= 0
    lam[rs.parent_edge[below]] = sub[below]
    return EdgePrep(
        root=rs.root,
        lambda_gamma=_freeze(lam),
        total_length=float(w.sum()),
        edge_lengths=g.edge_w,
    )


def find_shortcuts(g: Graph) -> list[tuple[int, float, float]]:
    """Optional validation pass: edges longer than the shortest path between
    their endpoints.

    Returns ``(edge_id, edge_length, endpoint_distance)`` triples.  Such edges
    are legal (they never join any shortest-path tree) but usually indicate
    malformed input, so callers may want to warn.  Costs one Dijkstra sweep
    per edge endpoint; intended for small graphs.
    """
    out: list[tuple[int, float, float]] = []
    sources = np.unique(g.edge_u)
    dist = _sp_dijkstra(g._csr, directed=True, indices=sources)
    row = {int(s): i for i, s in enumerate(sources)}
    for e in range(g.edge_count):
        u, v, w = int(g.edge_u[e]), int(g.edge_v[e]), float(g.edge_w[e])
        d = float(dist[row[u], v])
        if d < w * (1.0 - 1e-12):
            out.append((e, w, d))
    return out
