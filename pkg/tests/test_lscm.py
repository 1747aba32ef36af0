import math

import numpy as np
import pytest

from lscm_design import matching as mt
from lscm_design.graph_core import DirectedGraph
from lscm_design.lscm import (
    RecoveryError,
    SingularModelError,
    WeightMatrix,
    generate_er_model,
    ica_oracle,
    intervene,
    recover_row,
    same_up_to_scale,
)

from conftest import CROSS_MATCHING, CROSS_PATTERN, random_cyclic_models


def row_support_multiset(m):
    return sorted(tuple((np.asarray(r) != 0).astype(int)) for r in m)


class TestGenerate:
    def test_no_edges(self):
        w = generate_er_model(3, 0.0, rng_seed=1)
        assert np.array_equal(w.w, np.zeros((3, 3)))
        assert np.array_equal(w.i_minus_w(), np.eye(3))

    def test_complete_support(self):
        w = generate_er_model(5, 1.0, rng_seed=7)
        off = ~np.eye(5, dtype=bool)
        assert np.all(w.w[off] != 0)
        assert np.all(np.diag(w.w) == 0)

    def test_weights_in_range_with_both_signs(self):
        w = generate_er_model(12, 0.5, rng_seed=3)
        nz = w.w[w.w != 0]
        assert np.all((np.abs(nz) >= 0.5) & (np.abs(nz) <= 2.0))
        assert (nz > 0).any() and (nz < 0).any()

    def test_edge_count_binomial_window(self):
        # Binomial(90, 0.25): mass outside [10, 35] is below 1%
        p, trials = 0.25, 90
        pmf = [math.comb(trials, k) * p**k * (1 - p) ** (trials - k) for k in range(trials + 1)]
        assert sum(pmf[:10]) + sum(pmf[36:]) < 0.01
        for seed in [42, *range(20)]:
            w = generate_er_model(10, 2.5 / 10, rng_seed=seed)
            assert 10 <= int(np.count_nonzero(w.w)) <= 35

    def test_deterministic(self):
        a = generate_er_model(8, 0.3, rng_seed=11)
        b = generate_er_model(8, 0.3, rng_seed=11)
        assert a.w.tobytes() == b.w.tobytes()

    def test_acyclic_flag_gives_dag(self):
        from lscm_design.fvs import is_acyclic

        for seed in range(20):
            assert is_acyclic(generate_er_model(9, 0.5, rng_seed=seed, acyclic=True).graph)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            generate_er_model(3, 1.5)
        with pytest.raises(ValueError):
            generate_er_model(3, 0.5, weight_range=(0.0, 1.0))

    def test_singular_rejected(self):
        with pytest.raises(SingularModelError):
            WeightMatrix([[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(ValueError):
            WeightMatrix([[1.0, 0.0], [0.0, 0.0]])

    def test_text_round_trip(self):
        w = generate_er_model(4, 0.5, rng_seed=2)
        assert np.array_equal(WeightMatrix.from_text(w.to_text()).w, w.w)


class TestIcaOracle:
    def test_identity_hook(self):
        w = WeightMatrix(np.zeros((4, 4)))
        out = ica_oracle(w, perm=range(4), scale=np.ones(4))
        assert np.array_equal(out.m, np.eye(4))

    def test_structure(self):
        w = generate_er_model(6, 0.4, rng_seed=5)
        out = ica_oracle(w, rng_seed=9)
        perm, scale = out.hidden()
        assert np.allclose(out.m, scale[:, None] * w.i_minus_w()[perm])
        assert np.all(scale != 0)

    def test_support_is_permutation_invariant(self):
        w = generate_er_model(7, 0.4, rng_seed=5)
        a, b = ica_oracle(w, rng_seed=1), ica_oracle(w, rng_seed=2)
        assert row_support_multiset(a.m) == row_support_multiset(b.m)
        assert row_support_multiset(a.m) == row_support_multiset(w.i_minus_w())

    def test_cross_pattern_placement(self):
        m = CROSS_PATTERN[list(CROSS_MATCHING)]
        rng = np.random.default_rng(0)
        w = np.where(m - np.eye(5) != 0, rng.uniform(0.5, 2.0, (5, 5)), 0.0)
        model = WeightMatrix(-w)
        # ICA row k must be the variable whose equation is printed as row k
        perm = np.argsort(CROSS_MATCHING)
        out = ica_oracle(model, rng_seed=3, perm=perm)
        assert np.array_equal(out.support, CROSS_PATTERN)
        free = ica_oracle(model, rng_seed=4)
        assert row_support_multiset(free.m) == row_support_multiset(CROSS_PATTERN)

    def test_perturbation_knob_keeps_support(self):
        w = generate_er_model(6, 0.4, rng_seed=5)
        out = ica_oracle(w, rng_seed=1, perturbation=1e-3)
        clean = ica_oracle(w, rng_seed=1)
        assert np.array_equal(out.support, clean.support)
        assert not np.array_equal(out.m, clean.m)


class TestIntervene:
    def test_zero_model(self):
        w = WeightMatrix(np.zeros((4, 4)))
        for i in range(4):
            out = intervene(w, i, rng_seed=i)
            assert row_support_multiset(out.m) == row_support_multiset(np.eye(4))

    def test_two_cycle(self):
        w = WeightMatrix([[0.0, 0.7], [-1.3, 0.0]])
        out = intervene(w, 0, rng_seed=0, perm=[0, 1], scale=[1.0, 1.0])
        # I - W^(0): row 0 becomes e_0, row 1 unchanged -> lower triangular, unit diagonal
        assert np.allclose(out.m, [[1.0, 0.0], [1.3, 1.0]])
        assert row_support_multiset(out.m) == [(1, 0), (1, 1)]

    def test_other_rows_untouched(self):
        w = generate_er_model(7, 0.4, rng_seed=8)
        base = w.i_minus_w()
        for i in range(7):
            out = intervene(w, i, rng_seed=i)
            keep = [r for k, r in enumerate(base) if k != i]
            got = out.m
            matched = same_up_to_scale(np.array(keep), got).any(axis=1)
            assert matched.all()

    def test_out_of_range(self):
        w = WeightMatrix(np.zeros((2, 2)))
        with pytest.raises(IndexError):
            intervene(w, 2)

    def test_singular_intervention(self):
        # x1 = x0 + x2, x2 = x1: det(I - W) = -1, but cutting x0 leaves the
        # unit-gain 2-cycle between x1 and x2
        w = WeightMatrix([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        with pytest.raises(SingularModelError):
            intervene(w, 0)


class TestRecoverRow:
    def _example(self):
        w = WeightMatrix(
            [
                [0.0, 0.0, 0.0, 1.2, 0.0],
                [0.9, 0.0, 0.0, 0.0, 0.0],
                [0.0, -1.1, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.8, 0.0, -0.6],
                [0.0, 0.0, 0.0, 1.5, 0.0],
            ]
        )
        # observational ICA rows 0..4 hold variables 0, 3, 1, 2, 4
        obs = ica_oracle(w, rng_seed=1, perm=[0, 3, 1, 2, 4])
        # after intervening on variable 3 the rows hold variables 1, 4, 0, 3, 2
        interv = intervene(w, 3, rng_seed=2, perm=[1, 4, 0, 3, 2])
        return w, obs, interv

    def test_reveals_second_row_for_variable_3(self):
        w, obs, interv = self._example()
        assert np.count_nonzero(interv.m[3]) == 1 and interv.m[3, 3] != 0
        res = recover_row(obs, interv, 3)
        assert res.revealed_ica_row_index == 1
        assert np.allclose(res.revealed_row, w.w[3], atol=1e-12)
        assert res.revealed_row[3] == 0

    def test_zero_model(self):
        w = WeightMatrix(np.zeros((4, 4)))
        obs = ica_oracle(w, rng_seed=1)
        for i in range(4):
            res = recover_row(obs, intervene(w, i, rng_seed=10 + i), i)
            assert np.array_equal(res.revealed_row, np.zeros(4))
            assert res.revealed_ica_row_index == obs.row_of_variable(i)

    def test_random_cyclic_round_trip(self, rng):
        for w in random_cyclic_models(rng, 30, n_min=6, n_max=6):
            obs = ica_oracle(w, rng)
            for i in range(w.n):
                try:
                    interv = intervene(w, i, rng)
                except SingularModelError:
                    continue
                res = recover_row(obs, interv, i)
                assert np.allclose(res.revealed_row, w.w[i], rtol=0, atol=1e-9)
                assert res.revealed_ica_row_index == obs.row_of_variable(i)

    def test_mismatched_inputs(self):
        w, obs, interv = self._example()
        with pytest.raises(RecoveryError):
            # the do(x_4) output carries no information about x_1
            recover_row(obs, interv, 0)

    def test_deterministic(self):
        w = generate_er_model(6, 0.4, rng_seed=5)
        a = intervene(w, 2, rng_seed=4)
        b = intervene(w, 2, rng_seed=4)
        assert a.m.tobytes() == b.m.tobytes()


def test_dag_has_unique_matching():
    for seed in range(30):
        w = generate_er_model(8, 0.4, rng_seed=seed, acyclic=True)
        assert mt.is_unique(mt.from_ica(ica_oracle(w, rng_seed=seed)))


def test_graph_of_weight_matrix():
    w = WeightMatrix([[0.0, 0.5], [0.0, 0.0]])
    assert w.graph == DirectedGraph.from_edges(2, [(1, 0)])
