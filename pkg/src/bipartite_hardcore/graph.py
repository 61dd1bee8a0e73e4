"""Bipartite graphs with a degree bound on the left side.

Vertices are indexed from 0 on each side separately and an edge is a
``(left, right)`` pair.  The text format is a plain edge list::

    # comment lines start with '#'
    nL nR m
    u v
    ...
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class GraphParseError(ValueError):
    """Base class for edge-list parse failures; carries the 1-based line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class HeaderError(GraphParseError):
    pass


class IndexRangeError(GraphParseError):
    pass


class DuplicateEdgeError(GraphParseError):
    pass


@dataclass(frozen=True)
class BipartiteGraph:
    n_left: int
    n_right: int
    adj_left: tuple[tuple[int, ...], ...]
    adj_right: tuple[tuple[int, ...], ...]
    max_deg_left: int = field(init=False)

    def __post_init__(self):
        if len(self.adj_left) != self.n_left or len(self.adj_right) != self.n_right:
            raise ValueError("adjacency length does not match vertex counts")
        for u, nbrs in enumerate(self.adj_left):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"adj_left[{u}] must be sorted without duplicates")
            for v in nbrs:
                if not 0 <= v < self.n_right:
                    raise ValueError(f"right index {v} out of range")
                if u not in self.adj_right[v]:
                    raise ValueError(f"asymmetric adjacency at edge ({u}, {v})")
        for v, nbrs in enumerate(self.adj_right):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"adj_right[{v}] must be sorted without duplicates")
            for u in nbrs:
                if not 0 <= u < self.n_left:
                    raise ValueError(f"left index {u} out of range")
                if v not in self.adj_left[u]:
                    raise ValueError(f"asymmetric adjacency at edge ({u}, {v})")
        deg = max((len(a) for a in self.adj_left), default=0)
        object.__setattr__(self, "max_deg_left", deg)

    @classmethod
    def from_edges(cls, n_left: int, n_right: int,
                   edges: Iterable[tuple[int, int]]) -> "BipartiteGraph":
        left: list[set[int]] = [set() for _ in range(n_left)]
        right: list[set[int]] = [set() for _ in range(n_right)]
        for u, v in edges:
            if not (0 <= u < n_left and 0 <= v < n_right):
                raise ValueError(f"edge ({u}, {v}) out of range")
            if v in left[u]:
                raise ValueError(f"duplicate edge ({u}, {v})")
            left[u].add(v)
            right[v].add(u)
        return cls(n_left, n_right,
                   tuple(tuple(sorted(s)) for s in left),
                   tuple(tuple(sorted(s)) for s in right))

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nbrs in enumerate(self.adj_left) for v in nbrs]

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adj_left)

    def right_masks(self) -> np.ndarray:
        """Bitmask over L of each right vertex's neighbourhood."""
        masks = np.zeros(self.n_right, dtype=np.int64)
        for v, nbrs in enumerate(self.adj_right):
            for u in nbrs:
                masks[v] |= 1 << u
        return masks

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Flat ``(left_ptr, left_idx, right_ptr, right_idx)`` arrays."""
        lp = np.zeros(self.n_left + 1, dtype=np.int64)
        lp[1:] = np.cumsum([len(a) for a in self.adj_left])
        li = np.array([v for a in self.adj_left for v in a], dtype=np.int64)
        rp = np.zeros(self.n_right + 1, dtype=np.int64)
        rp[1:] = np.cumsum([len(a) for a in self.adj_right])
        ri = np.array([u for a in self.adj_right for u in a], dtype=np.int64)
        return lp, li, rp, ri

    def is_connected(self) -> bool:
        n = self.n_left + self.n_right
        if n == 0:
            return True
        seen = {("L", 0) if self.n_left else ("R", 0)}
        stack = list(seen)
        while stack:
            side, i = stack.pop()
            nbrs = (("R", v) for v in self.adj_left[i]) if side == "L" \
                else (("L", u) for u in self.adj_right[i])
            for node in nbrs:
                if node not in seen:
                    seen.add(node)
                    stack.append(node)
        return len(seen) == n


def parse_graph(text: str) -> BipartiteGraph:
    """Parse the edge-list format; errors name the offending line."""
    header = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            try:
                n_left, n_right, m = (int(p) for p in parts)
            except ValueError:
                raise HeaderError(f"expected 'nL nR m', got {line!r}", lineno) from None
            if min(n_left, n_right, m) < 0:
                raise HeaderError("counts must be nonnegative", lineno)
            header = (n_left, n_right, m)
            continue
        if len(edges) == header[2]:
            raise GraphParseError(f"more than {header[2]} edge lines", lineno)
        try:
            u, v = (int(p) for p in parts)
        except ValueError:
            raise GraphParseError(f"expected 'u v', got {line!r}", lineno) from None
        if not (0 <= u < header[0] and 0 <= v < header[1]):
            raise IndexRangeError(f"edge ({u}, {v}) out of range", lineno)
        if (u, v) in seen:
            raise DuplicateEdgeError(f"duplicate edge ({u}, {v})", lineno)
        seen.add((u, v))
        edges.append((u, v))
    if header is None:
        raise HeaderError("missing header line")
    if len(edges) != header[2]:
        raise GraphParseError(f"expected {header[2]} edges, found {len(edges)}")
    return BipartiteGraph.from_edges(header[0], header[1], edges)


def serialize_graph(g: BipartiteGraph) -> str:
    lines = [f"{g.n_left} {g.n_right} {g.n_edges}"]
    lines += [f"{u} {v}" for u, v in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def load_graph(path) -> BipartiteGraph:
    with open(path) as fh:
        return parse_graph(fh.read())


def random_left_regular(n_left: int, n_right: int, deg: int, seed: int) -> BipartiteGraph:
    """Each left vertex gets ``deg`` distinct right neighbours chosen uniformly."""
    if deg > n_right:
        raise ValueError(f"deg={deg} exceeds n_right={n_right}")
    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n_left):
        for v in rng.choice(n_right, size=deg, replace=False):
            edges.append((u, int(v)))
    return BipartiteGraph.from_edges(n_left, n_right, edges)


def star(deg: int) -> BipartiteGraph:
    """One left vertex joined to ``deg`` right vertices."""
    return BipartiteGraph.from_edges(1, deg, [(0, v) for v in range(deg)])


def connected_graphs(n_left: int, max_deg: int) -> list[BipartiteGraph]:
    """Every connected bipartite graph with ``n_left`` left vertices and all
    degrees at most ``max_deg``, one per isomorphism class.

    A right vertex is identified with its neighbourhood, a nonempty subset of
    L, so a graph is a multiset of such subsets.  Two multisets are
    isomorphic iff some relabelling of L maps one onto the other.
    """
    if n_left < 1 or max_deg < 1:
        raise ValueError("need n_left >= 1 and max_deg >= 1")
    full = (1 << n_left) - 1
    subsets = [s for s in range(1, full + 1) if s.bit_count() <= max_deg]
    relabel = [{s: sum(1 << p[i] for i in range(n_left) if s >> i & 1) for s in subsets}
               for p in itertools.permutations(range(n_left))]

    def connected(masks: list[int]) -> bool:
        reach, grew = masks[0], True
        while grew:
            grew = False
            for m in masks:
                if m & reach and m | reach != reach:
                    reach |= m
                    grew = True
        return reach == full

    seen: set[tuple[int, ...]] = set()

    def extend(start: int, masks: list[int], deg: tuple[int, ...]) -> None:
        if masks and connected(masks):
            seen.add(min(tuple(sorted(r[m] for m in masks)) for r in relabel))
        for i in range(start, len(subsets)):
            s = subsets[i]
            nd = tuple(deg[u] + (s >> u & 1) for u in range(n_left))
            if max(nd) <= max_deg:
                masks.append(s)
                extend(i, masks, nd)
                masks.pop()

    extend(0, [], (0,) * n_left)
    return [BipartiteGraph.from_edges(
        n_left, len(key), [(u, v) for v, m in enumerate(key) for u in range(n_left) if m >> u & 1])
        for key in sorted(seen)]
