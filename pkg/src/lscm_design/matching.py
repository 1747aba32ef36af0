"""Bipartite representation of the equivalence class.

Left vertices are the rows of the observational ICA output, right vertices
are variables. Each perfect matching fixes which row is which variable's
equation, i.e. one candidate graph. Interventions pin matching edges and
shrink the active part of the graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph_core import DirectedGraph, format_matrix, parse_matrix

ENUMERATION_LIMIT = 10**6
MAX_RESTARTS = 100
FALLBACK_LIMIT = 12


class NoPerfectMatchingError(ValueError):
    pass


class SamplerError(RuntimeError):
    """Greedy sampler kept dead-ending and the instance is too large to enumerate."""


class BipartiteGraph:
    """Immutable bipartite graph ``rows x cols`` with active subsets.

    ``edges[r, c]`` is 1 iff row ``r`` may be variable ``c``'s equation.
    Resolved rows and columns are inactive and carry no edges.
    """

    __slots__ = ("_edges", "_active_rows", "_active_cols")

    def __init__(self, edges, active_rows=None, active_cols=None):
        e = np.array(edges, dtype=np.uint8, copy=True)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"edge matrix must be square, got {e.shape}")
        n = e.shape[0]
        rows = tuple(range(n)) if active_rows is None else tuple(sorted(set(active_rows)))
        cols = tuple(range(n)) if active_cols is None else tuple(sorted(set(active_cols)))
        if len(rows) != len(cols):
            raise ValueError("active rows and columns must be equally many")
        mask = np.zeros((n, n), dtype=bool)
        mask[np.ix_(rows, cols)] = True
        e[~mask] = 0
        e.setflags(write=False)
        self._edges = e
        self._active_rows = rows
        self._active_cols = cols

    @classmethod
    def from_support(cls, support) -> "BipartiteGraph":
        s = (np.asarray(support) != 0).astype(np.uint8)
        if np.any(s.sum(axis=1) == 0) or np.any(s.sum(axis=0) == 0):
            raise ValueError("support has an empty row or column")
        return cls(s)

    @property
    def n(self) -> int:
        return self._edges.shape[0]

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    @property
    def active_rows(self) -> tuple[int, ...]:
        return self._active_rows

    @property
    def active_cols(self) -> tuple[int, ...]:
        return self._active_cols

    @property
    def size(self) -> int:
        return len(self._active_cols)

    def has_edge(self, row: int, col: int) -> bool:
        return bool(self._edges[row, col])

    def compact(self) -> np.ndarray:
        """Active submatrix, rows and columns in ascending index order."""
        return np.ascontiguousarray(self._edges[np.ix_(self._active_rows, self._active_cols)])

    def col_degrees(self) -> dict[int, int]:
        deg = self._edges.sum(axis=0)
        return {c: int(deg[c]) for c in self._active_cols}

    def has_isolated(self) -> bool:
        sub = self.compact()
        return bool(sub.size) and (np.any(sub.sum(axis=0) == 0) or np.any(sub.sum(axis=1) == 0))

    def to_text(self) -> str:
        return format_matrix(self._edges)

    @classmethod
    def from_text(cls, text: str) -> "BipartiteGraph":
        return cls.from_support(parse_matrix(text))

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (
            self._active_rows == other._active_rows
            and self._active_cols == other._active_cols
            and np.array_equal(self._edges, other._edges)
        )

    def __hash__(self):
        return hash((self._edges.tobytes(), self._active_rows, self._active_cols))

    def __repr__(self):
        return f"BipartiteGraph(n={self.n}, active={self.size}, edges={int(self._edges.sum())})"


@dataclass(frozen=True)
class Matching:
    """Perfect matching of the active part: ``assignment[col] = row``."""

    assignment: tuple[tuple[int, int], ...]

    @classmethod
    def from_mapping(cls, mapping: dict) -> "Matching":
        return cls(tuple(sorted((int(c), int(r)) for c, r in mapping.items())))

    def as_dict(self) -> dict[int, int]:
        return dict(self.assignment)

    def row_of(self, col: int) -> int:
        return self.as_dict()[col]

    def contains(self, row: int, col: int) -> bool:
        return (col, row) in self.assignment

    def is_valid_for(self, bg: BipartiteGraph) -> bool:
        cols = [c for c, _ in self.assignment]
        rows = [r for _, r in self.assignment]
        return (
            tuple(cols) == bg.active_cols
            and sorted(rows) == list(bg.active_rows)
            and all(bg.has_edge(r, c) for c, r in self.assignment)
        )


class MatchingList(list):
    """List of matchings that remembers whether enumeration was cut short."""

    truncated = False


def from_ica(obs) -> BipartiteGraph:
    """Bipartite graph whose edges are the nonzero pattern of an ICA output."""
    return BipartiteGraph.from_support(obs.support)


def _rows_to_matchings(bg: BipartiteGraph, rows: np.ndarray) -> list[Matching]:
    cols = bg.active_cols
    act = np.asarray(bg.active_rows, dtype=np.int64)
    full = act[rows] if rows.size else rows.astype(np.int64)
    return [Matching(tuple(zip(cols, map(int, r)))) for r in full]


def enumerate_matchings(bg: BipartiteGraph, limit: int = ENUMERATION_LIMIT) -> MatchingList:
    """All perfect matchings of the active subgraph in column-then-row lexicographic order."""
    rows, truncated = kernels.enumerate_matchings(bg.compact(), limit)
    out = MatchingList(_rows_to_matchings(bg, rows))
    out.truncated = truncated
    return out


def matching_table(bg: BipartiteGraph, limit: int = ENUMERATION_LIMIT) -> np.ndarray:
    """Enumeration as an array ``(N, n)`` of row indices per column (-1 for inactive columns).

    Raises ``OverflowError`` if there are more than ``limit`` matchings.
    """
    rows, truncated = kernels.enumerate_matchings(bg.compact(), limit)
    if truncated:
        raise OverflowError(f"more than {limit} perfect matchings")
    table = np.full((rows.shape[0], bg.n), -1, dtype=np.int64)
    if bg.size:
        act = np.asarray(bg.active_rows, dtype=np.int64)
        table[:, list(bg.active_cols)] = act[rows]
    return table


def count_matchings(bg: BipartiteGraph, limit: int = ENUMERATION_LIMIT) -> int:
    total, _ = kernels.count_marginals(bg.compact(), limit)
    return total


def marginal_counts(bg: BipartiteGraph, limit: int = ENUMERATION_LIMIT) -> tuple[int, np.ndarray]:
    """``(N, counts)`` with ``counts[col, row]`` = matchings using edge ``(row, col)``; full-size indices."""
    total, sub = kernels.count_marginals(bg.compact(), limit)
    counts = np.zeros((bg.n, bg.n), dtype=np.int64)
    if bg.size:
        counts[np.ix_(bg.active_cols, bg.active_rows)] = sub
    return total, counts


def find_matching(bg: BipartiteGraph) -> Matching | None:
    """Some perfect matching of the active part (augmenting paths), or None."""
    adj = {c: np.flatnonzero(bg.edges[:, c]).tolist() for c in bg.active_cols}
    row_match: dict[int, int] = {}

    def augment(c, seen):
        for r in adj[c]:
            if r in seen:
                continue
            seen.add(r)
            if r not in row_match or augment(row_match[r], seen):
                row_match[r] = c
                return True
        return False

    for c in bg.active_cols:
        if not augment(c, set()):
            return None
    return Matching.from_mapping({c: r for r, c in row_match.items()})


def is_unique(bg: BipartiteGraph) -> bool:
    """Whether the active part has exactly one perfect matching.

    Takes one matching and looks for an alternating cycle: orient matched
    edges row -> col and unmatched edges col -> row; a second matching
    exists iff that digraph has a cycle.
    """
    m = find_matching(bg)
    if m is None:
        raise NoPerfectMatchingError("bipartite graph has no perfect matching")
    n = bg.n
    matched_col_of_row = {r: c for c, r in m.assignment}
    # vertices: rows 0..n-1, cols n..2n-1
    succ: dict[int, list[int]] = {}
    for r in bg.active_rows:
        succ[r] = [n + matched_col_of_row[r]]
    for c in bg.active_cols:
        succ[n + c] = [int(r) for r in np.flatnonzero(bg.edges[:, c]) if matched_col_of_row[int(r)] != c]
    color = dict.fromkeys(succ, 0)
    for root in succ:
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                if color[w] == 1:
                    return False
                if color[w] == 0:
                    color[w] = 1
                    stack.append((w, iter(succ[w])))
                    break
            else:
                color[v] = 2
                stack.pop()
    return True


def _rng(seed):
    return np.random.default_rng(seed)


def sample_rows(
    bg: BipartiteGraph,
    m: int,
    rng_seed=None,
    *,
    sampler: str = "greedy",
    max_restarts: int = MAX_RESTARTS,
    fallback_limit: int = FALLBACK_LIMIT,
) -> np.ndarray:
    """Batch of ``m`` matchings as an ``(m, n)`` array of row per column (-1 if inactive).

    ``sampler="greedy"`` is the min-degree heuristic (not uniform);
    ``sampler="uniform"`` enumerates and draws uniformly.
    """
    rng = _rng(rng_seed)
    k = bg.size
    table = np.full((m, bg.n), -1, dtype=np.int64)
    if k == 0 or m == 0:
        return table
    act_rows = np.asarray(bg.active_rows, dtype=np.int64)
    act_cols = list(bg.active_cols)
    sub = bg.compact()
    if sampler == "uniform":
        rows, _ = kernels.enumerate_matchings(sub, ENUMERATION_LIMIT + 1)
        if rows.shape[0] == 0:
            raise NoPerfectMatchingError("bipartite graph has no perfect matching")
        if rows.shape[0] > ENUMERATION_LIMIT:
            raise OverflowError("too many matchings for uniform sampling by enumeration")
        pick = rng.integers(0, rows.shape[0], size=m)
        table[:, act_cols] = act_rows[rows[pick]]
        return table
    if sampler != "greedy":
        raise ValueError(f"unknown sampler {sampler!r}")

    out, ok = kernels.greedy_sample_batch(sub, rng.random((m, k)))
    out = out.astype(np.int64)
    ok = ok.astype(bool)
    for _ in range(max_restarts):
        bad = np.flatnonzero(~ok)
        if bad.size == 0:
            break
        redo, redo_ok = kernels.greedy_sample_batch(sub, rng.random((bad.size, k)))
        out[bad] = redo
        ok[bad] = redo_ok.astype(bool)
    bad = np.flatnonzero(~ok)
    if bad.size:
        if k > fallback_limit:
            raise SamplerError(
                f"greedy sampler dead-ended {max_restarts + 1} times on a {k}x{k} instance"
            )
        rows, _ = kernels.enumerate_matchings(sub, ENUMERATION_LIMIT)
        if rows.shape[0] == 0:
            raise NoPerfectMatchingError("bipartite graph has no perfect matching")
        out[bad] = rows[rng.integers(0, rows.shape[0], size=bad.size)]
    table[:, act_cols] = act_rows[out]
    return table


def sample_matching(bg: BipartiteGraph, rng_seed=None, **kwargs) -> Matching:
    """One perfect matching from the greedy min-degree sampler."""
    rows = sample_rows(bg, 1, rng_seed, **kwargs)[0]
    return Matching(tuple((c, int(rows[c])) for c in bg.active_cols))


def apply_revealed_edge(bg: BipartiteGraph, row: int, col: int) -> BipartiteGraph:
    """Pin edge ``(row, col)``: both endpoints leave the active graph."""
    if row not in bg.active_rows or col not in bg.active_cols:
        raise ValueError(f"row {row} / column {col} is not active")
    if not bg.has_edge(row, col):
        raise ValueError(f"({row}, {col}) is not an edge")
    rows = [r for r in bg.active_rows if r != row]
    cols = [c for c in bg.active_cols if c != col]
    return BipartiteGraph(bg.edges, rows, cols)


def marginals_from_rows(table: np.ndarray, col: int) -> list[tuple[int, float]]:
    rows, counts = np.unique(table[:, col], return_counts=True)
    total = counts.sum()
    return [(int(r), float(c) / total) for r, c in zip(rows, counts)]


def edge_marginals(
    bg: BipartiteGraph,
    col: int,
    mode: str = "exact",
    m_samples: int = 1000,
    rng_seed=None,
    **sampler_kwargs,
) -> list[tuple[int, float]]:
    """Probability that ``col`` is matched to each row, over the class or a sample batch."""
    if col not in bg.active_cols:
        raise ValueError(f"column {col} is not active")
    if mode == "exact":
        total, counts = marginal_counts(bg)
        if total == 0:
            raise NoPerfectMatchingError("bipartite graph has no perfect matching")
        return [(int(r), counts[col, r] / total) for r in np.flatnonzero(counts[col])]
    if mode in ("sampled", "sample"):
        if find_matching(bg) is None:
            raise NoPerfectMatchingError("bipartite graph has no perfect matching")
        table = sample_rows(bg, m_samples, rng_seed, **sampler_kwargs)
        return marginals_from_rows(table, col)
    raise ValueError(f"unknown mode {mode!r}")


def induced_graph(obs_m: np.ndarray, assignment: dict[int, int]) -> DirectedGraph:
    """Graph obtained by placing ICA row ``assignment[j]`` at position ``j``."""
    n = obs_m.shape[0]
    perm = [assignment[j] for j in range(n)]
    supp = (np.asarray(obs_m)[perm] != 0).astype(np.uint8)
    np.fill_diagonal(supp, 0)
    return DirectedGraph(supp)
