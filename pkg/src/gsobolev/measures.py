"""Node-supported probability measures and their cumulative edge vectors.

A :class:`DiscreteMeasure` is a probability measure supported on graph nodes.
For a fixed root, each measure collapses to a sparse vector indexed by edge
id: the entry at edge ``e`` is the total mass whose recorded root path
crosses ``e``.  Distances only ever read these vectors, so they are cached on
the rooted structure, keyed by the (hashable) measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    MassNotNormalized,
    NegativeMass,
    NodeOutOfRange,
    ParseError,
)
from .graph import Graph, RootedStructure, root_path_edges

# Tolerance on |total mass - 1| accepted without renormalizing.
MASS_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure on graph nodes: distinct ids, nonnegative masses
    summing to one within ``MASS_TOL``.

    Hashable, so it can key per-root caches.
    """

    nodes: tuple[int, ...]
    masses: tuple[float, ...]

    def __post_init__(self) -> None:
        nodes = tuple(int(x) for x in self.nodes)
        masses = tuple(float(m) for m in self.masses)
        if len(nodes) != len(masses):
            raise ValueError("nodes and masses must pair up")
        if not nodes:
            raise ValueError("measure needs at least one support point")
        if len(set(nodes)) != len(nodes):
            raise ValueError("support nodes must be distinct")
        if min(nodes) < 0:
            raise NodeOutOfRange(f"negative node id {min(nodes)}")
        for node, m in zip(nodes, masses):
            if not math.isfinite(m) or m < 0.0:
                raise NegativeMass(f"node {node} carries invalid mass {m!r}")
        total = math.fsum(masses)
        if abs(total - 1.0) > MASS_TOL:
            raise MassNotNormalized(f"masses sum to {total!r}, expected 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def normalized(cls, entries: Iterable[tuple[int, float]]) -> "DiscreteMeasure":
        """Build a measure from ``(node, weight)`` pairs, rescaling to total one."""
        pairs = list(entries)
        total = math.fsum(m for _, m in pairs)
        if not math.isfinite(total) or total <= 0.0:
            raise MassNotNormalized(f"cannot normalize total mass {total!r}")
        return cls(
            tuple(n for n, _ in pairs),
            tuple(m / total for _, m in pairs),
        )

    @classmethod
    def dirac(cls, node: int) -> "DiscreteMeasure":
        return cls((node,), (1.0,))

    @property
    def support_size(self) -> int:
        return len(self.nodes)

    def max_node(self) -> int:
        return max(self.nodes)


@dataclass(frozen=True, eq=False)
class SparseEdgeVector:
    """Cumulative mass per touched edge, under one root.

    ``edge_ids`` is sorted and holds only edges lying on the root path of at
    least one support point; ``values[k]`` is the mass flowing through
    ``edge_ids[k]``.
    """

    root: int
    edge_ids: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        ids = np.asarray(self.edge_ids, dtype=np.int64).reshape(-1)
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if ids.size != vals.size:
            raise ValueError("edge_ids and values must pair up")
        ids.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "edge_ids", ids)
        object.__setattr__(self, "values", vals)

    @property
    def pairs(self) -> list[tuple[int, float]]:
        return [(int(e), float(x)) for e, x in zip(self.edge_ids, self.values)]


def gamma_mass(rs: RootedStructure, mu: DiscreteMeasure) -> SparseEdgeVector:
    """Cumulative edge vector of ``mu`` under the root of ``rs``.

    Walks each support point's recorded root path once, accumulating the
    point's mass on every edge crossed.  Results are cached on ``rs`` per
    measure; concurrent reads are free and insertion takes the cache lock.
    """
    cached = rs._gamma_cache.get(mu)
    if cached is not None:
        return cached
    n = rs.graph.node_count
    if mu.max_node() >= n:
        raise NodeOutOfRange(f"support node {mu.max_node()} outside [0, {n})")
    acc: dict[int, float] = {}
    for node, mass in zip(mu.nodes, mu.masses):
        for e in root_path_edges(rs, node):
            acc[e] = acc.get(e, 0.0) + mass
    ids = np.fromiter(sorted(acc), dtype=np.int64, count=len(acc))
    vals = np.array([acc[int(e)] for e in ids], dtype=np.float64)
    vec = SparseEdgeVector(rs.root, ids, vals)
    with rs._gamma_lock:
        return rs._gamma_cache.setdefault(mu, vec)


def save_measures(measures: Sequence[DiscreteMeasure], path: str) -> None:
    """Write measures in the format :func:`load_measures` reads."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, mu in enumerate(measures):
            cells = [f"m{i}"]
            for node, mass in zip(mu.nodes, mu.masses):
                cells.append(str(node))
                cells.append(f"{mass:.17g}")
            fh.write("\t".join(cells) + "\n")


def load_measures(path: str, g: Graph, normalize: bool = False) -> list[DiscreteMeasure]:
    """Parse a measure file against graph ``g``.

    One measure per significant line: an id token followed by alternating
    ``node mass`` tokens (tab- or space-separated).  Lines starting with
    ``#`` and blank lines are ignored.  With ``normalize`` the masses are
    rescaled to total one; otherwise a total off by more than ``MASS_TOL``
    raises :class:`MassNotNormalized`.
    """
    out: list[DiscreteMeasure] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            tok = text.split()
            if len(tok) < 3 or len(tok) % 2 == 0:
                raise ParseError(
                    f"{path}:{lineno}: expected 'id node mass [node mass ...]'"
                )
            label = tok[0]
            try:
                nodes = [int(x) for x in tok[1::2]]
                masses = [float(x) for x in tok[2::2]]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: cannot parse measure {label!r}") from exc
            if len(set(nodes)) != len(nodes):
                raise ParseError(f"{path}:{lineno}: measure {label!r} repeats a node")
            for node in nodes:
                if not 0 <= node < g.node_count:
                    raise NodeOutOfRange(
                        f"{path}:{lineno}: node {node} outside [0, {g.node_count})"
                    )
            for node, m in zip(nodes, masses):
                if not math.isfinite(m) or m < 0.0:
                    raise NegativeMass(
                        f"{path}:{lineno}: node {node} carries invalid mass {m!r}"
                    )
            if normalize:
                out.append(DiscreteMeasure.normalized(zip(nodes, masses)))
            else:
                total = math.fsum(masses)
                if abs(total - 1.0) > MASS_TOL:
                    raise MassNotNormalized(
                        f"{path}:{lineno}: measure {label!r} sums to {total!r}"
                    )
                out.append(DiscreteMeasure(tuple(nodes), tuple(masses)))
    return out
