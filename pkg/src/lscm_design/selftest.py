"""Quick property checks runnable from an installed package (``lscm-design selftest``)."""

from __future__ import annotations

import numpy as np

from . import matching as mt
from .fvs import min_fvs
from .graph_core import enumerate_equivalence_class, scc
from .lscm import SingularModelError, generate_er_model, ica_oracle, intervene, recover_row
from .policy import check_adaptive_submodularity, run_identification


def _cyclic_models(rng, count, n_max):
    out = []
    while len(out) < count:
        n = int(rng.integers(3, n_max + 1))
        try:
            w = generate_er_model(n, float(rng.uniform(0.2, 0.5)), rng_seed=rng)
        except SingularModelError:
            continue
        if len(scc(w.graph).components) < n:
            out.append(w)
    return out


def check_class_bijection(rng, count):
    for w in _cyclic_models(rng, count, 7):
        obs = ica_oracle(w, rng)
        induced = {mt.induced_graph(obs.m, m.as_dict()) for m in mt.enumerate_matchings(mt.from_ica(obs))}
        if induced != enumerate_equivalence_class(w.graph):
            return False
    return True


def check_scc_invariance(rng, count):
    for w in _cyclic_models(rng, count, 7):
        ref = scc(w.graph)
        for h in enumerate_equivalence_class(w.graph):
            other = scc(h)
            if other.components != ref.components or other.condensation != ref.condensation:
                return False
    return True


def check_row_recovery(rng, count):
    done = 0
    while done < count:
        n = int(rng.integers(2, 13))
        w = generate_er_model(n, float(rng.uniform(0.1, 0.5)), rng_seed=rng)
        i = int(rng.integers(n))
        obs = ica_oracle(w, rng)
        try:
            res = recover_row(obs, intervene(w, i, rng), i)
        except SingularModelError:
            continue
        if not np.allclose(res.revealed_row, w.w[i], rtol=0, atol=1e-9):
            return False
        if res.revealed_ica_row_index != obs.row_of_variable(i):
            return False
        done += 1
    return True


def check_submodularity(rng, count):
    done = 0
    while done < count:
        k = int(rng.integers(3, 6))
        supp = (rng.random((k, k)) < 0.5).astype(np.uint8)
        np.fill_diagonal(supp, 1)
        bg = mt.BipartiteGraph(supp)
        if not check_adaptive_submodularity(bg):
            return False
        done += 1
    return True


def check_fvs_lower_bound(rng, count):
    for w in _cyclic_models(rng, count, 10):
        res = run_identification(w, "adaptive", rng_seed=int(rng.integers(2**31)))
        if res.identified and res.interventions_used < min_fvs(w.graph).size:
            return False
    return True


CHECKS = [
    ("matchings induce the equivalence class", check_class_bijection),
    ("SCCs invariant across the class", check_scc_invariance),
    ("intervention recovers the row of W", check_row_recovery),
    ("adaptive monotone and submodular", check_submodularity),
    ("interventions >= minimum FVS", check_fvs_lower_bound),
]


def run_selftest(seed: int = 0, quick: bool = True, out=print) -> bool:
    count = 10 if quick else 100
    rng = np.random.default_rng(seed)
    ok_all = True
    for name, fn in CHECKS:
        ok = fn(rng, count)
        ok_all &= ok
        out(f"{'PASS' if ok else 'FAIL'}  {name}")
    return ok_all
