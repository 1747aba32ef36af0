import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lscm_design import matching as mt
from lscm_design.graph_core import enumerate_equivalence_class
from lscm_design.lscm import generate_er_model, ica_oracle
from lscm_design.matching import BipartiteGraph, Matching

from conftest import (
    CROSS_MATCHING,
    CROSS_PATTERN,
    FOUR_BY_FOUR,
    brute_matchings,
    random_cyclic_models,
    ryser_permanent,
)

K = lambda n: BipartiteGraph(np.ones((n, n), dtype=np.uint8))  # noqa: E731
ID = lambda n: BipartiteGraph(np.eye(n, dtype=np.uint8))  # noqa: E731


@st.composite
def supports(draw, n_max=7, with_diagonal=True):
    n = draw(st.integers(1, n_max))
    bits = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    a = np.array(bits, dtype=np.uint8).reshape(n, n)
    if with_diagonal:
        np.fill_diagonal(a, 1)
    return a


class TestConstruction:
    def test_identity_support(self):
        bg = mt.from_ica(ica_oracle(generate_er_model(4, 0.0, rng_seed=0), rng_seed=1))
        assert bg.edges.sum() == 4
        assert mt.enumerate_matchings(bg) == mt.enumerate_matchings(bg)[:1]

    def test_cross_pattern_edges(self):
        bg = BipartiteGraph.from_support(CROSS_PATTERN)
        assert bg.edges.sum() == 15
        assert np.array_equal(bg.edges, CROSS_PATTERN)

    def test_complete(self):
        bg = K(4)
        assert bg.edges.sum() == 16 and bg.active_rows == bg.active_cols == (0, 1, 2, 3)

    def test_empty_row_rejected(self):
        with pytest.raises(ValueError):
            BipartiteGraph.from_support([[1, 0], [0, 0]])

    def test_text_round_trip(self):
        bg = BipartiteGraph.from_support(CROSS_PATTERN)
        assert BipartiteGraph.from_text(bg.to_text()) == bg


class TestEnumerate:
    def test_identity(self):
        out = mt.enumerate_matchings(ID(5))
        assert len(out) == 1 and out[0].as_dict() == {c: c for c in range(5)}

    def test_k33(self):
        out = mt.enumerate_matchings(K(3))
        assert len(out) == 6
        # lexicographic by column then row
        rows = [tuple(r for _, r in m.assignment) for m in out]
        assert rows == sorted(rows)

    def test_cross_count_is_permanent(self):
        bg = BipartiteGraph.from_support(CROSS_PATTERN)
        out = mt.enumerate_matchings(bg)
        assert len(out) == ryser_permanent(CROSS_PATTERN)
        assert Matching(tuple(enumerate(CROSS_MATCHING))) in out

    def test_truncation_flag(self):
        out = mt.enumerate_matchings(K(4), limit=5)
        assert len(out) == 5 and out.truncated
        assert not mt.enumerate_matchings(K(4)).truncated

    def test_no_matching(self):
        bg = BipartiteGraph([[1, 1], [0, 0]])
        assert len(mt.enumerate_matchings(bg)) == 0

    @settings(max_examples=120, deadline=None)
    @given(supports(with_diagonal=False))
    def test_matches_permutation_scan(self, a):
        bg = BipartiteGraph(a)
        got = [tuple(r for _, r in m.assignment) for m in mt.enumerate_matchings(bg)]
        assert got == brute_matchings(a)
        assert mt.count_matchings(bg) == ryser_permanent(a)


class TestIsUnique:
    def test_identity(self):
        assert mt.is_unique(ID(6))

    def test_k22(self):
        assert not mt.is_unique(K(2))

    def test_requires_a_matching(self):
        with pytest.raises(mt.NoPerfectMatchingError):
            mt.is_unique(BipartiteGraph([[1, 1], [0, 0]]))

    def test_random_7x7_against_enumeration(self):
        rng = np.random.default_rng(5)
        checked = 0
        while checked < 500:
            a = (rng.random((7, 7)) < rng.uniform(0.1, 0.4)).astype(np.uint8)
            a[np.arange(7), rng.permutation(7)] = 1
            bg = BipartiteGraph(a)
            assert mt.is_unique(bg) == (len(mt.enumerate_matchings(bg, 2)) == 1)
            checked += 1


class TestSampler:
    def test_identity_always(self):
        for seed in range(20):
            assert mt.sample_matching(ID(4), seed).as_dict() == {c: c for c in range(4)}

    def test_k22_balanced(self):
        rows = mt.sample_rows(K(2), 10_000, rng_seed=123)
        frac = float(np.mean(rows[:, 0] == 0))
        sigma = math.sqrt(0.25 / 10_000)
        assert abs(frac - 0.5) <= 3 * sigma

    def test_cross_samples_are_members(self):
        bg = BipartiteGraph.from_support(CROSS_PATTERN)
        members = set(mt.enumerate_matchings(bg))
        for seed in range(200):
            m = mt.sample_matching(bg, seed)
            assert m.is_valid_for(bg) and m in members

    def test_deterministic(self):
        bg = BipartiteGraph.from_support(CROSS_PATTERN)
        assert np.array_equal(mt.sample_rows(bg, 50, 9), mt.sample_rows(bg, 50, 9))

    def test_valid_on_many_instances(self):
        rng = np.random.default_rng(77)
        for _ in range(10_000):
            n = int(rng.integers(1, 13))
            a = (rng.random((n, n)) < rng.uniform(0.05, 0.5)).astype(np.uint8)
            a[np.arange(n), rng.permutation(n)] = 1
            bg = BipartiteGraph(a)
            m = mt.sample_matching(bg, rng)
            assert m.is_valid_for(bg)

    @staticmethod
    def _trap():
        # column 0 may take row 1 or 2; taking row 1 leaves columns 1 and 2
        # competing for row 0 alone
        a = np.zeros((4, 4), dtype=np.uint8)
        for c, rows in enumerate([(1, 2), (0, 1), (0, 1), (2, 3)]):
            a[list(rows), c] = 1
        return a

    def test_kernel_reports_dead_end(self):
        a = self._trap()
        _, ok = mt.kernels.greedy_sample_batch(a, np.zeros((1, 4)))
        assert not ok[0]
        _, ok = mt.kernels.greedy_sample_batch(a, np.full((1, 4), 0.99))
        assert ok[0]

    def test_restarts_and_fallback_give_members(self):
        bg = BipartiteGraph(self._trap())
        members = set(mt.enumerate_matchings(bg))
        for restarts in (0, 100):
            rows = mt.sample_rows(bg, 200, 1, max_restarts=restarts)
            for r in rows:
                assert Matching(tuple(enumerate(map(int, r)))) in members

    def test_dead_end_without_fallback_raises(self):
        bg = BipartiteGraph(self._trap())
        with pytest.raises(mt.SamplerError):
            mt.sample_rows(bg, 50, 1, max_restarts=0, fallback_limit=2)

    def test_uniform_sampler_frequencies(self):
        bg = BipartiteGraph(FOUR_BY_FOUR)
        rows = mt.sample_rows(bg, 20_000, 3, sampler="uniform")
        frac = float(np.mean(rows[:, 1] == 0))
        assert abs(frac - 0.5) <= 3 * math.sqrt(0.25 / 20_000)


class TestRevealEdge:
    def test_identity(self):
        out = mt.apply_revealed_edge(ID(4), 0, 0)
        assert out.size == 3 and mt.count_matchings(out) == 1

    def test_k33(self):
        for r in range(3):
            for c in range(3):
                out = mt.apply_revealed_edge(K(3), r, c)
                assert mt.count_matchings(out) == 2

    def test_cross_filter(self):
        bg = BipartiteGraph.from_support(CROSS_PATTERN)
        before = mt.enumerate_matchings(bg)
        # row 1, column 3
        out = mt.apply_revealed_edge(bg, 1, 3)
        assert len(mt.enumerate_matchings(out)) == sum(m.contains(1, 3) for m in before)

    def test_errors(self):
        with pytest.raises(ValueError):
            mt.apply_revealed_edge(ID(3), 0, 1)
        out = mt.apply_revealed_edge(ID(3), 0, 0)
        with pytest.raises(ValueError):
            mt.apply_revealed_edge(out, 0, 0)

    @settings(max_examples=80, deadline=None)
    @given(supports(n_max=6), st.data())
    def test_count_equals_marginal_numerator(self, a, data):
        bg = BipartiteGraph(a)
        total, counts = mt.marginal_counts(bg)
        edges = list(zip(*np.nonzero(a)))
        r, c = data.draw(st.sampled_from(edges))
        out = mt.apply_revealed_edge(bg, int(r), int(c))
        assert mt.count_matchings(out) == counts[c, r] <= total


class TestMarginals:
    def test_identity(self):
        assert mt.edge_marginals(ID(3), 1) == [(1, 1.0)]

    def test_k22(self):
        assert mt.edge_marginals(K(2), 0) == [(0, 0.5), (1, 0.5)]

    def test_four_by_four(self):
        bg = BipartiteGraph(FOUR_BY_FOUR)
        ms = brute_matchings(FOUR_BY_FOUR)
        assert len(ms) == 4
        oracle = sorted({r: sum(m[0] == r for m in ms) / 4 for r in range(4) if any(m[0] == r for m in ms)}.items())
        assert mt.edge_marginals(bg, 0) == oracle == [(0, 0.25), (1, 0.25), (2, 0.5)]

    def test_sampled_sums_to_one(self):
        bg = BipartiteGraph.from_support(CROSS_PATTERN)
        for c in range(5):
            got = mt.edge_marginals(bg, c, "sampled", 500, 4)
            assert abs(sum(p for _, p in got) - 1.0) < 1e-12
            assert all(bg.has_edge(r, c) for r, _ in got)

    def test_no_matching(self):
        with pytest.raises(mt.NoPerfectMatchingError):
            mt.edge_marginals(BipartiteGraph([[1, 1], [0, 0]]), 0)


def test_matchings_induce_equivalence_class(rng):
    for w in random_cyclic_models(rng, 25, n_max=7):
        obs = ica_oracle(w, rng)
        induced = {mt.induced_graph(obs.m, m.as_dict()) for m in mt.enumerate_matchings(mt.from_ica(obs))}
        assert induced == enumerate_equivalence_class(w.graph)


def test_acyclic_models_unique(rng):
    for seed in range(40):
        w = generate_er_model(int(rng.integers(2, 12)), 0.5, rng_seed=seed, acyclic=True)
        assert mt.is_unique(mt.from_ica(ica_oracle(w, rng)))
