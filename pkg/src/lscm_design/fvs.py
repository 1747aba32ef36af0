"""Exact minimum feedback vertex set.

Vertices off every cycle are dropped, each nontrivial SCC is solved on its
own, and within an SCC the size is found by iterative deepening with
branching on the vertices of a shortest remaining cycle. The witness is
the lexicographically smallest minimum set.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .graph_core import DirectedGraph, scc

DEFAULT_TIME_LIMIT = 60.0
DEFAULT_MAX_N = 40


class FvsTimeout(RuntimeError):
    pass


@dataclass(frozen=True)
class FvsResult:
    size: int
    witness: tuple[int, ...]


def is_acyclic(g: DirectedGraph) -> bool:
    """True iff every SCC is a single vertex (self-loops are excluded by construction)."""
    return len(scc(g).components) == g.n


class _Search:
    def __init__(self, succ: dict[int, list[int]], deadline: float):
        self.succ = succ
        self.deadline = deadline
        self.nodes = 0

    def _tick(self):
        self.nodes += 1
        if self.nodes % 256 == 0 and time.monotonic() > self.deadline:
            raise FvsTimeout("feedback vertex set search exceeded its time limit")

    def shortest_cycle(self, removed: set) -> list[int] | None:
        best = None
        for s in self.succ:
            if s in removed:
                continue
            parent = {s: None}
            q = deque([s])
            found = None
            while q and found is None:
                v = q.popleft()
                for w in self.succ[v]:
                    if w in removed:
                        continue
                    if w == s:
                        found = v
                        break
                    if w not in parent:
                        parent[w] = v
                        q.append(w)
            if found is not None:
                path = []
                v = found
                while v is not None:
                    path.append(v)
                    v = parent[v]
                if best is None or len(path) < len(best):
                    best = path[::-1]
                    if len(best) == 2:
                        return best
        return best

    def feasible(self, k: int, removed: set, forbidden: frozenset) -> bool:
        """Can at most ``k`` more vertices (none forbidden) break every cycle?"""
        self._tick()
        cyc = self.shortest_cycle(removed)
        if cyc is None:
            return True
        if k == 0:
            return False
        for v in sorted(cyc):
            if v in forbidden:
                continue
            removed.add(v)
            ok = self.feasible(k - 1, removed, forbidden)
            removed.discard(v)
            if ok:
                return True
        return False


def _solve_component(succ: dict[int, list[int]], deadline: float) -> tuple[int, ...]:
    search = _Search(succ, deadline)
    k = 0
    while not search.feasible(k, set(), frozenset()):
        k += 1
    # fix vertices in increasing order, keeping each one that still admits a size-k solution
    chosen: list[int] = []
    excluded: set = set()
    for v in sorted(succ):
        if len(chosen) == k:
            break
        trial = set(chosen) | {v}
        if search.feasible(k - len(trial), trial, frozenset(excluded)):
            chosen.append(v)
        else:
            excluded.add(v)
    assert search.shortest_cycle(set(chosen)) is None
    return tuple(chosen)


def min_fvs(g: DirectedGraph, time_limit: float = DEFAULT_TIME_LIMIT, max_n: int = DEFAULT_MAX_N) -> FvsResult:
    """Exact minimum feedback vertex set of ``g``."""
    if g.n > max_n:
        raise ValueError(f"n={g.n} exceeds the FVS size limit {max_n}")
    deadline = time.monotonic() + time_limit
    part = scc(g)
    witness: list[int] = []
    for comp in part.components:
        if len(comp) < 2:
            continue
        succ = {v: [w for w in g.children(v) if w in comp] for v in sorted(comp)}
        witness.extend(_solve_component(succ, deadline))
    return FvsResult(size=len(witness), witness=tuple(sorted(witness)))
