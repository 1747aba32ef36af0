"""Adaptive intervention selection.

The reward of an intervention set is the number of candidate graphs it
eliminates. Intervening on ``v`` reveals which row ``v`` is matched to, so
with ``n_i`` of the ``N`` surviving matchings using row ``z_i`` the
expected number eliminated is ``sum_i p_i (N - n_i) = N * L(p)`` with
``L(p) = sum_i p_i (1 - p_i)`` and ``p_i = n_i / N``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import matching as mt
from .lscm import IcaOutput, WeightMatrix, ica_oracle, intervene, recover_row
from .matching import BipartiteGraph

DEFAULT_SAMPLES = 1000
SUBMODULARITY_MAX_N = 6


class PolicyKind(enum.Enum):
    ADAPTIVE = "adaptive"
    RANDOM = "random"
    MAX_DEGREE = "max_degree"

    @classmethod
    def parse(cls, text: str) -> "PolicyKind":
        key = text.strip().lower().replace("-", "_")
        if key == "maxdegree":
            key = "max_degree"
        return cls(key)


@dataclass(frozen=True)
class PartialRealization:
    """Intervention history: ``(target, revealed ICA row)`` pairs in order."""

    observations: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        targets = [t for t, _ in self.observations]
        if len(set(targets)) != len(targets):
            raise ValueError("intervention targets must be distinct")

    @property
    def dom(self) -> frozenset:
        return frozenset(t for t, _ in self.observations)

    def extend(self, target: int, row: int) -> "PartialRealization":
        return PartialRealization(self.observations + ((int(target), int(row)),))

    def __len__(self):
        return len(self.observations)


@dataclass(frozen=True)
class BenefitEstimate:
    variable: int
    normalized_benefit: float
    mode: str
    scale: int | None = None
    m_samples: int = 0
    delta: Fraction | None = None
    # exact-mode Fraction of L(p), used for tie-exact comparisons
    exact_l: Fraction | None = field(default=None, repr=False)


def normalized_benefit(p) -> float:
    """``sum_i p_i (1 - p_i)`` for a probability vector ``p``."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p must be a non-empty vector")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"p must be a probability vector, got sum {p.sum()!r}")
    return float(np.sum(p * (1.0 - p)))


def l_from_counts(counts) -> float:
    """``L`` of the empirical distribution given category counts."""
    c = np.asarray(counts, dtype=np.float64)
    m = c.sum(axis=-1, keepdims=True)
    ph = c / m
    return np.sum(ph * (1.0 - ph), axis=-1)


def _exact_from_counts(v: int, total: int, col_counts: np.ndarray) -> BenefitEstimate:
    n_i = [int(x) for x in col_counts if x]
    numer = sum(k * (total - k) for k in n_i)
    delta = Fraction(numer, total)
    exact_l = Fraction(numer, total * total)
    return BenefitEstimate(
        variable=v,
        normalized_benefit=float(exact_l),
        mode="exact",
        scale=total,
        delta=delta,
        exact_l=exact_l,
    )


def _candidates(bg: BipartiteGraph, psi: PartialRealization) -> list[int]:
    dom = psi.dom
    return [c for c in bg.active_cols if c not in dom]


def marginal_benefit_exact(
    bg: BipartiteGraph, psi: PartialRealization, v: int, limit: int = mt.ENUMERATION_LIMIT
) -> BenefitEstimate:
    """``Delta(v | psi)`` by counting matchings; ``bg`` must already be reduced by ``psi``."""
    if v in psi.dom:
        raise ValueError(f"variable {v} was already intervened on")
    if v not in bg.active_cols:
        return BenefitEstimate(variable=v, normalized_benefit=0.0, mode="exact",
                               scale=mt.count_matchings(bg, limit), delta=Fraction(0), exact_l=Fraction(0))
    total, counts = mt.marginal_counts(bg, limit)
    if total == 0:
        raise mt.NoPerfectMatchingError("bipartite graph has no perfect matching")
    return _exact_from_counts(v, total, counts[v])


def benefits_exact(bg: BipartiteGraph, psi: PartialRealization, limit: int = mt.ENUMERATION_LIMIT) -> list[BenefitEstimate]:
    """Exact benefit of every candidate from a single counting pass."""
    total, counts = mt.marginal_counts(bg, limit)
    if total == 0:
        raise mt.NoPerfectMatchingError("bipartite graph has no perfect matching")
    return [_exact_from_counts(v, total, counts[v]) for v in _candidates(bg, psi)]


def marginal_benefit_sampled(
    bg: BipartiteGraph,
    psi: PartialRealization,
    m_samples: int = DEFAULT_SAMPLES,
    rng_seed=None,
    *,
    sampler: str = "greedy",
) -> list[BenefitEstimate]:
    """``L(p_hat)`` for every candidate, all from one batch of sampled matchings."""
    if m_samples < 1:
        raise ValueError("m_samples must be at least 1")
    table = mt.sample_rows(bg, m_samples, rng_seed, sampler=sampler)
    out = []
    for v in _candidates(bg, psi):
        _, counts = np.unique(table[:, v], return_counts=True)
        out.append(BenefitEstimate(
            variable=v,
            normalized_benefit=float(l_from_counts(counts)),
            mode="sampled",
            m_samples=m_samples,
        ))
    return out


def select_next(
    bg: BipartiteGraph,
    psi: PartialRealization,
    mode: str = "exact",
    m_samples: int = DEFAULT_SAMPLES,
    rng_seed=None,
    *,
    sampler: str = "greedy",
) -> int:
    """Candidate with the largest benefit; ties go to the lowest index."""
    if mode == "exact":
        ests = benefits_exact(bg, psi)
        key = lambda e: e.exact_l  # noqa: E731
    elif mode in ("sampled", "sample"):
        ests = marginal_benefit_sampled(bg, psi, m_samples, rng_seed, sampler=sampler)
        key = lambda e: e.normalized_benefit  # noqa: E731
    else:
        raise ValueError(f"unknown mode {mode!r}")
    assert ests, "no candidates left although the class is not a singleton"
    deg = bg.col_degrees()
    # forced columns (degree 1) carry no information; prefer the rest on ties
    best = max(ests, key=lambda e: (key(e), deg[e.variable] > 1, -e.variable))
    return best.variable


def _max_degree(bg: BipartiteGraph) -> int:
    deg = bg.col_degrees()
    return max(deg, key=lambda c: (deg[c], -c))


@dataclass
class IdentificationResult:
    kind: PolicyKind
    budget: int
    targets: list[int]
    revealed: list[tuple[int, int]]
    identified: bool
    class_size_trace: list[int] | None = None
    recovered_rows: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def interventions_used(self) -> int:
        return len(self.targets)


def run_identification(
    w: WeightMatrix,
    kind: PolicyKind | str = PolicyKind.ADAPTIVE,
    budget: int | None = None,
    mode: str = "exact",
    m_samples: int = DEFAULT_SAMPLES,
    rng_seed=None,
    *,
    obs: IcaOutput | None = None,
    random_pool: str = "unresolved",
    sampler: str = "greedy",
    trace: bool | None = None,
) -> IdentificationResult:
    """Intervene until the bipartite graph has a unique perfect matching or the budget runs out.

    ``budget`` defaults to ``n``. ``obs`` lets several strategies share one
    observational ICA output. ``random_pool="all"`` makes the random
    baseline draw from every not-yet-intervened variable instead of only
    the unresolved ones.
    """
    if isinstance(kind, str):
        kind = PolicyKind.parse(kind)
    budget = w.n if budget is None else int(budget)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if random_pool not in ("unresolved", "all"):
        raise ValueError(f"unknown random_pool {random_pool!r}")
    obs_seed, choice_seed, interv_seed = np.random.SeedSequence(rng_seed).spawn(3)
    if obs is None:
        obs = ica_oracle(w, obs_seed)
    choice_rng = np.random.default_rng(choice_seed)
    interv_rng = np.random.default_rng(interv_seed)
    if trace is None:
        trace = mode == "exact"

    bg = mt.from_ica(obs)
    psi = PartialRealization()
    targets: list[int] = []
    revealed: list[tuple[int, int]] = []
    recovered: dict[int, np.ndarray] = {}
    sizes = [mt.count_matchings(bg)] if trace else None

    for _ in range(budget):
        if mt.is_unique(bg):
            break
        if kind is PolicyKind.ADAPTIVE:
            v = select_next(bg, psi, mode, m_samples, choice_rng, sampler=sampler)
        elif kind is PolicyKind.MAX_DEGREE:
            v = _max_degree(bg)
        else:
            if random_pool == "unresolved":
                deg = bg.col_degrees()
                pool = [c for c in bg.active_cols if deg[c] >= 2]
            else:
                pool = [c for c in range(w.n) if c not in psi.dom]
            v = int(pool[choice_rng.integers(len(pool))])
        interv = intervene(w, v, interv_rng)
        res = recover_row(obs, interv, v)
        row = res.revealed_ica_row_index
        targets.append(v)
        recovered[v] = res.revealed_row
        psi = psi.extend(v, row)
        if v in bg.active_cols:
            revealed.append((row, v))
            bg = mt.apply_revealed_edge(bg, row, v)
        if trace:
            sizes.append(mt.count_matchings(bg))

    return IdentificationResult(
        kind=kind,
        budget=budget,
        targets=targets,
        revealed=revealed,
        identified=mt.is_unique(bg),
        class_size_trace=sizes,
        recovered_rows=recovered,
    )


# ---------------------------------------------------------------------------
# exhaustive checks over small instances


def _active_table(bg: BipartiteGraph, limit: int) -> np.ndarray:
    table = mt.matching_table(bg, limit)
    return table[:, list(bg.active_cols)]


def _delta_numden(rows_at_v: np.ndarray) -> tuple[int, int]:
    total = rows_at_v.shape[0]
    _, counts = np.unique(rows_at_v, return_counts=True)
    return int(sum(int(k) * (total - int(k)) for k in counts)), total


def check_adaptive_submodularity(
    bg: BipartiteGraph, max_n: int = SUBMODULARITY_MAX_N, tol: float = 1e-9
) -> bool:
    """Exhaustively verify ``Delta(v|psi) >= Delta(v|psi') >= 0`` for ``psi`` inside ``psi'``.

    Every realization is a perfect matching (uniform prior); every partial
    realization is a matching restricted to a column subset. Because ``>=``
    chains, comparing each ``psi'`` against its one-element-smaller
    restrictions covers all nested pairs.
    """
    if bg.size > max_n:
        raise ValueError(f"{bg.size} active columns exceeds the exhaustive limit {max_n}")
    table = _active_table(bg, mt.ENUMERATION_LIMIT)
    if table.shape[0] == 0:
        raise mt.NoPerfectMatchingError("bipartite graph has no perfect matching")
    k = table.shape[1]
    memo: dict = {}

    def delta(cols: tuple, vals: tuple, v: int) -> Fraction:
        key = (cols, vals, v)
        if key not in memo:
            mask = np.all(table[:, list(cols)] == np.asarray(vals, dtype=np.int64), axis=1) if cols else slice(None)
            memo[key] = Fraction(*_delta_numden(table[mask, v]))
        return memo[key]

    eps = Fraction(tol)
    for size in range(k + 1):
        for cols in itertools.combinations(range(k), size):
            rest = [v for v in range(k) if v not in cols]
            seen = {tuple(r) for r in table[:, list(cols)].tolist()} if cols else {()}
            for vals in seen:
                for v in rest:
                    d = delta(cols, vals, v)
                    if d < -eps:
                        return False
                    for drop in range(size):
                        sub_cols = cols[:drop] + cols[drop + 1:]
                        sub_vals = vals[:drop] + vals[drop + 1:]
                        if delta(sub_cols, sub_vals, v) < d - eps:
                            return False
    return True


def expected_final_size(bg: BipartiteGraph, budget: int, policy: str = "greedy") -> Fraction:
    """Expected surviving class size after ``budget`` interventions under a uniform prior.

    ``policy="greedy"`` follows the max-``Delta`` rule (lowest index on
    ties); ``policy="optimal"`` searches the full policy tree.
    """
    if policy not in ("greedy", "optimal"):
        raise ValueError(f"unknown policy {policy!r}")
    table = _active_table(bg, mt.ENUMERATION_LIMIT)
    k = table.shape[1]
    memo: dict = {}

    def outcomes(idx: np.ndarray, v: int):
        vals = table[idx, v]
        return [idx[vals == r] for r in np.unique(vals)]

    def value(idx: np.ndarray, b: int) -> Fraction:
        total = idx.size
        if b == 0 or total <= 1:
            return Fraction(total)
        key = (idx.tobytes(), b)
        if key in memo:
            return memo[key]
        if policy == "greedy":
            best_v, best_num = 0, -1
            for v in range(k):
                num, _ = _delta_numden(table[idx, v])
                if num > best_num:
                    best_v, best_num = v, num
            choices = [best_v]
        else:
            choices = range(k)
        best = None
        for v in choices:
            acc = Fraction(0)
            for part in outcomes(idx, v):
                acc += Fraction(part.size, total) * value(part, b - 1)
            if best is None or acc < best:
                best = acc
        memo[key] = best
        return best

    return value(np.arange(table.shape[0]), budget)


def expected_reward(bg: BipartiteGraph, budget: int, policy: str = "greedy") -> Fraction:
    """Expected number of eliminated graphs, ``|Omega| - E|Omega_final|``."""
    total = mt.count_matchings(bg)
    return total - expected_final_size(bg, budget, policy)


def check_greedy_ratio(bg: BipartiteGraph, max_n: int = 5) -> bool:
    """Greedy expected reward is at least ``(1 - 1/e)`` of optimal for every budget ``1..n``."""
    if bg.size > max_n:
        raise ValueError(f"{bg.size} active columns exceeds the policy-tree limit {max_n}")
    ratio = 1.0 - 1.0 / math.e
    for b in range(1, bg.size + 1):
        g = expected_reward(bg, b, "greedy")
        o = expected_reward(bg, b, "optimal")
        if float(g) < ratio * float(o) - 1e-12:
            return False
    return True
