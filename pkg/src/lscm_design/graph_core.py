"""Directed-graph primitives.

Adjacency follows the row semantics of ``x = W x + e``: ``adj[i, j] == 1``
means ``j -> i`` (``x_j`` is a parent of ``x_i``), so a graph's adjacency
matrix and its weight matrix share indexing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ORACLE_LIMIT = 8


class GraphError(ValueError):
    pass


class DirectedGraph:
    """Immutable directed graph without self-loops on vertices ``0..n-1``."""

    __slots__ = ("_adj", "_key")

    def __init__(self, adj):
        a = np.array(adj, dtype=np.uint8, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise GraphError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        if np.any(a > 1):
            raise GraphError("adjacency entries must be 0 or 1")
        if np.any(np.diag(a)):
            raise GraphError("self-loops are not allowed")
        a.setflags(write=False)
        self._adj = a
        self._key = (a.shape[0], a.tobytes())

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DirectedGraph":
        """Build from ``(src, dst)`` pairs."""
        a = np.zeros((n, n), dtype=np.uint8)
        for src, dst in edges:
            a[dst, src] = 1
        return cls(a)

    @classmethod
    def empty(cls, n: int) -> "DirectedGraph":
        return cls(np.zeros((n, n), dtype=np.uint8))

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def adj(self) -> np.ndarray:
        return self._adj

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(src, dst)`` pairs, sorted."""
        dst, src = np.nonzero(self._adj)
        return sorted(zip(src.tolist(), dst.tolist()))

    def has_edge(self, src: int, dst: int) -> bool:
        return bool(self._adj[dst, src])

    def parents(self, i: int) -> list[int]:
        return np.flatnonzero(self._adj[i]).tolist()

    def children(self, j: int) -> list[int]:
        return np.flatnonzero(self._adj[:, j]).tolist()

    def reversed(self) -> "DirectedGraph":
        return DirectedGraph(self._adj.T)

    def with_identity(self) -> np.ndarray:
        """``I + B`` as an int array."""
        return self._adj.astype(np.int64) + np.eye(self.n, dtype=np.int64)

    def to_text(self) -> str:
        return format_matrix(self._adj)

    @classmethod
    def from_text(cls, text: str) -> "DirectedGraph":
        return cls(parse_matrix(text).astype(np.uint8))

    def __eq__(self, other):
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"DirectedGraph(n={self.n}, edges={self.edges()})"


def format_matrix(m) -> str:
    """Row-major text: one row per line, entries space-separated."""
    m = np.asarray(m)
    if m.dtype.kind in "biu":
        rows = [" ".join(str(int(v)) for v in row) for row in m]
    else:
        rows = [" ".join(repr(float(v)) for v in row) for row in m]
    return "\n".join(rows) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise GraphError("empty matrix text")
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise GraphError("ragged matrix text")
    vals = np.array([[float(v) for v in r] for r in rows])
    if np.all(vals == np.round(vals)):
        return vals.astype(np.int64)
    return vals


@dataclass(frozen=True)
class SccPartition:
    component_of: tuple[int, ...]
    components: tuple[frozenset, ...]
    condensation: DirectedGraph

    def as_partition(self) -> frozenset:
        return frozenset(self.components)


@dataclass(frozen=True)
class Cycle:
    """Directed cycle ``v[0] -> v[1] -> ... -> v[-1] -> v[0]``."""

    vertices: tuple[int, ...]

    def __init__(self, vertices: Sequence[int]):
        vs = tuple(int(v) for v in vertices)
        if len(vs) < 2:
            raise GraphError("a cycle needs at least two vertices")
        if len(set(vs)) != len(vs):
            raise GraphError(f"cycle vertices must be distinct: {vs}")
        object.__setattr__(self, "vertices", vs)

    def __len__(self):
        return len(self.vertices)

    def successor(self, k: int) -> int:
        return self.vertices[(k + 1) % len(self.vertices)]

    def is_in(self, g: DirectedGraph) -> bool:
        if max(self.vertices) >= g.n:
            return False
        return all(g.has_edge(v, self.successor(k)) for k, v in enumerate(self.vertices))

    def canonical(self) -> "Cycle":
        k = self.vertices.index(min(self.vertices))
        return Cycle(self.vertices[k:] + self.vertices[:k])

    def reversed(self) -> "Cycle":
        return Cycle((self.vertices[0],) + tuple(reversed(self.vertices[1:])))


def _successors(adj: np.ndarray) -> list[list[int]]:
    # out-neighbours of j are the rows with a 1 in column j
    return [np.flatnonzero(adj[:, j]).tolist() for j in range(adj.shape[0])]


def _tarjan(succ: list[list[int]]) -> list[list[int]]:
    """Iterative Tarjan; components in reverse topological order."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def scc(g: DirectedGraph) -> SccPartition:
    """Strongly connected components, ordered by smallest member vertex."""
    comps = sorted((sorted(c) for c in _tarjan(_successors(g.adj))), key=lambda c: c[0])
    comp_of = [0] * g.n
    for cid, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = cid
    cond = np.zeros((len(comps), len(comps)), dtype=np.uint8)
    for src, dst in g.edges():
        a, b = comp_of[src], comp_of[dst]
        if a != b:
            cond[b, a] = 1
    return SccPartition(
        component_of=tuple(comp_of),
        components=tuple(frozenset(c) for c in comps),
        condensation=DirectedGraph(cond),
    )


def reverse_cycle(g: DirectedGraph, c: Cycle) -> DirectedGraph:
    """Cycle reversion: each cycle member takes over its successor's row of ``I + B``.

    The cycle ends up reversed and every edge entering a cycle vertex from
    outside is redirected to that vertex's predecessor on the original cycle.
    """
    if not c.is_in(g):
        raise GraphError(f"{c.vertices} is not a directed cycle of the graph")
    m = g.with_identity()
    out = m.copy()
    for k, v in enumerate(c.vertices):
        out[v] = m[c.successor(k)]
    # successor rows always carry a 1 at the member's column, so the diagonal survives
    assert np.all(np.diag(out) == 1)
    return DirectedGraph(out - np.eye(g.n, dtype=np.int64))


def _bipartite_perfect(allowed: list[list[int]], n: int) -> bool:
    match_of_col = [-1] * n

    def augment(r, seen):
        for col in allowed[r]:
            if seen[col]:
                continue
            seen[col] = True
            if match_of_col[col] == -1 or augment(match_of_col[col], seen):
                match_of_col[col] = r
                return True
        return False

    return all(augment(r, [False] * n) for r in range(n))


def equivalent(g1: DirectedGraph, g2: DirectedGraph) -> bool:
    """True iff ``I + B2 = P (I + B1)`` for some permutation matrix ``P``."""
    if g1.n != g2.n:
        raise GraphError(f"vertex counts differ: {g1.n} vs {g2.n}")
    n = g1.n
    m1, m2 = g1.with_identity(), g2.with_identity()
    # row r of m1 may land at position j only if it equals row j of m2 (which
    # has a 1 at column j by construction)
    allowed = [[j for j in range(n) if np.array_equal(m1[r], m2[j])] for r in range(n)]
    return _bipartite_perfect(allowed, n)


def enumerate_equivalence_class(g: DirectedGraph, limit: int = ORACLE_LIMIT) -> set[DirectedGraph]:
    """Brute-force equivalence class via row permutations of ``I + B``.

    Walks all row permutations, pruning any prefix that already places a
    zero on the diagonal. Intended as a test oracle only.
    """
    n = g.n
    if n > limit:
        raise GraphError(f"n={n} exceeds the enumeration oracle limit {limit}")
    m = g.with_identity()
    eye = np.eye(n, dtype=np.int64)
    found: set[DirectedGraph] = set()
    perm = [0] * n
    used = [False] * n

    def place(j):
        if j == n:
            found.add(DirectedGraph(m[perm] - eye))
            return
        for r in range(n):
            if not used[r] and m[r, j]:
                used[r] = True
                perm[j] = r
                place(j + 1)
                used[r] = False

    place(0)
    return found


def find_cycles(g: DirectedGraph, max_length: int | None = None) -> list[Cycle]:
    """All simple directed cycles, each canonicalised to start at its minimum vertex."""
    succ = _successors(g.adj)
    n = g.n
    cycles = []
    for start in range(n):
        path = [start]
        on_path = [False] * n
        on_path[start] = True

        def dfs(v):
            for w in succ[v]:
                if w == start and len(path) >= 2:
                    cycles.append(Cycle(path))
                elif w > start and not on_path[w]:
                    if max_length is not None and len(path) >= max_length:
                        continue
                    on_path[w] = True
                    path.append(w)
                    dfs(w)
                    path.pop()
                    on_path[w] = False

        dfs(start)
    return cycles


def cycle_reversion_closure(g: DirectedGraph) -> set[DirectedGraph]:
    """Every graph reachable from ``g`` by repeated cycle reversions."""
    seen = {g}
    frontier = [g]
    while frontier:
        nxt = []
        for h in frontier:
            for c in find_cycles(h):
                h2 = reverse_cycle(h, c)
                if h2 not in seen:
                    seen.add(h2)
                    nxt.append(h2)
        frontier = nxt
    return seen
