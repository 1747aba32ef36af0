"""Command-line entry point: ``sweep``, ``single``, ``fvs`` and ``selftest``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import harness, kernels
from . import matching as mt
from .fvs import min_fvs
from .graph_core import DirectedGraph, parse_matrix
from .lscm import WeightMatrix, generate_er_model, ica_oracle
from .policy import PolicyKind, run_identification

# sweep settings and their defaults; config-file keys use the same names
_SWEEP_DEFAULTS = {
    "nodes": "4,6,8,10,12",
    "trials": "60",
    "mode": "exact",
    "samples": "1000",
    "strategies": "adaptive,random,maxdegree",
    "edge": "sparse:c=2.0",
    "budget": "n",
    "seed": "0",
    "fvs": "on",
    "out": None,
    "summary": None,
    "sampler": "greedy",
    "random_pool": "unresolved",
    "timing": "off",
    "workers": "1",
    "acyclic": "off",
}


def read_config_file(path: str) -> dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment. Keys mirror the long flags."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = line.split("=", 1)
            key = key.strip().lstrip("-").replace("-", "_")
            if key not in _SWEEP_DEFAULTS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = val.strip()
    return out


def parse_edge(text: str) -> tuple[str, float]:
    """``sparse:c=2.0`` or ``dense:p=0.2``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind not in ("sparse", "dense"):
        raise ValueError(f"edge mode must be sparse:c=<x> or dense:p=<x>, got {text!r}")
    key, _, val = rest.partition("=")
    expected = "c" if kind == "sparse" else "p"
    if key.strip() != expected or not val:
        raise ValueError(f"edge mode {kind} needs {expected}=<value>, got {text!r}")
    return kind, float(val)


def _flag(text: str) -> bool:
    val = text.strip().lower()
    if val in ("on", "1", "true", "yes"):
        return True
    if val in ("off", "0", "false", "no"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def build_config(values: dict[str, str | None]) -> harness.ExperimentConfig:
    budget = values["budget"].strip()
    return harness.ExperimentConfig(
        node_counts=tuple(int(x) for x in values["nodes"].split(",") if x.strip()),
        trials_per_size=int(values["trials"]),
        budget_rule="n" if budget == "n" else int(budget),
        edge_mode=parse_edge(values["edge"]),
        strategies=tuple(PolicyKind.parse(s) for s in values["strategies"].split(",") if s.strip()),
        mode="sampled" if values["mode"] in ("sample", "sampled") else values["mode"],
        m_samples=int(values["samples"]),
        master_seed=int(values["seed"]),
        fvs_enabled=_flag(values["fvs"]),
        output_path=values["out"],
        sampler=values["sampler"],
        random_pool=values["random_pool"],
        timing=_flag(values["timing"]),
        workers=int(values["workers"]),
        acyclic=_flag(values["acyclic"]),
    )


def resolve_sweep_values(args: argparse.Namespace) -> dict[str, str | None]:
    values = dict(_SWEEP_DEFAULTS)
    if args.config:
        values.update(read_config_file(args.config))
    for key in _SWEEP_DEFAULTS:
        given = getattr(args, key, None)
        if given is not None:
            values[key] = given
    return values


def cmd_sweep(args) -> int:
    cfg = build_config(resolve_sweep_values(args))
    records = harness.run_sweep(cfg)
    text = harness.records_csv(records)
    if cfg.output_path:
        harness.write_text(cfg.output_path, text)
    else:
        sys.stdout.write(text)
    summary = harness.summary_csv(harness.aggregate(records))
    if args.summary:
        harness.write_text(args.summary, summary)
    elif cfg.output_path:
        sys.stdout.write(summary)
    return 0


def _load_model(args, rng_seed) -> WeightMatrix:
    if args.graph:
        with open(args.graph, encoding="utf-8") as fh:
            m = parse_matrix(fh.read())
        if np.issubdtype(m.dtype, np.integer) and set(np.unique(m)) <= {0, 1}:
            # 0/1 support: draw weights on it
            rng = np.random.default_rng(rng_seed)
            for _ in range(50):
                w = np.where(m != 0, rng.uniform(0.5, 2.0, m.shape) * rng.choice((-1.0, 1.0), m.shape), 0.0)
                try:
                    return WeightMatrix(w)
                except ValueError:
                    continue
            raise SystemExit("could not draw an invertible weight matrix on the given support")
        return WeightMatrix(m.astype(np.float64))
    kind, val = parse_edge(args.edge)
    p = val / args.nodes if kind == "sparse" else val
    return generate_er_model(args.nodes, p, rng_seed=rng_seed)


def cmd_single(args) -> int:
    seed = int(args.seed)
    w = _load_model(args, harness.derive_seed(seed, 0))
    obs = ica_oracle(w, harness.derive_seed(seed, 1))
    g = w.graph
    print(f"n={w.n} edges={len(g.edges())} backend={kernels.BACKEND}")
    print("graph:", g.edges())
    bg = mt.from_ica(obs)
    print(f"equivalence class size: {mt.count_matchings(bg)}")
    if _flag(args.fvs):
        res = min_fvs(g)
        print(f"fvs: size={res.size} witness={list(res.witness)}")
    mode = "sampled" if args.mode in ("sample", "sampled") else args.mode
    budget = None if args.budget == "n" else int(args.budget)
    for s_idx, name in enumerate(args.strategies.split(",")):
        kind = PolicyKind.parse(name)
        res = run_identification(w, kind, budget, mode, int(args.samples), harness.derive_seed(seed, 2, s_idx),
                                 obs=obs, trace=True)
        print(f"[{kind.value}] interventions={res.interventions_used} identified={res.identified}")
        sizes = res.class_size_trace
        for t, (v, edge) in enumerate(zip(res.targets, res.revealed), 1):
            print(f"  round {t}: do(x_{v}) -> ICA row {edge[0]}; class size {sizes[t - 1]} -> {sizes[t]}")
    return 0


def cmd_fvs(args) -> int:
    with open(args.graph, encoding="utf-8") as fh:
        m = parse_matrix(fh.read())
    g = DirectedGraph((m != 0).astype(np.uint8))
    res = min_fvs(g, time_limit=args.time_limit)
    print(f"size={res.size}")
    print("witness=" + ",".join(map(str, res.witness)))
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return 0 if run_selftest(seed=int(args.seed), quick=not args.full) else 1


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lscm-design", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run the full strategy comparison and write CSV")
    sw.add_argument("--config", help="key=value file; flags override it")
    sw.add_argument("--nodes")
    sw.add_argument("--trials")
    sw.add_argument("--mode", choices=["exact", "sample", "sampled"])
    sw.add_argument("--samples")
    sw.add_argument("--strategies")
    sw.add_argument("--edge")
    sw.add_argument("--budget")
    sw.add_argument("--seed")
    sw.add_argument("--fvs", choices=["on", "off"])
    sw.add_argument("--out")
    sw.add_argument("--summary", help="also write the per-(n, strategy) summary CSV here")
    sw.add_argument("--sampler", choices=["greedy", "uniform"])
    sw.add_argument("--random-pool", dest="random_pool", choices=["unresolved", "all"])
    sw.add_argument("--timing", choices=["on", "off"], help="fill wall_ms (breaks byte-identical reruns)")
    sw.add_argument("--workers")
    sw.add_argument("--acyclic", choices=["on", "off"])
    sw.set_defaults(func=cmd_sweep)

    si = sub.add_parser("single", help="one instance with a per-round trace")
    si.add_argument("--nodes", type=int, default=8)
    si.add_argument("--edge", default="sparse:c=2.0")
    si.add_argument("--graph", help="0/1 support or real weight matrix, one row per line")
    si.add_argument("--mode", default="exact", choices=["exact", "sample", "sampled"])
    si.add_argument("--samples", default="1000")
    si.add_argument("--strategies", default="adaptive,random,maxdegree")
    si.add_argument("--budget", default="n")
    si.add_argument("--seed", default="0")
    si.add_argument("--fvs", default="on", choices=["on", "off"])
    si.set_defaults(func=cmd_single)

    fv = sub.add_parser("fvs", help="minimum feedback vertex set of a graph file")
    fv.add_argument("--graph", required=True)
    fv.add_argument("--time-limit", dest="time_limit", type=float, default=60.0)
    fv.set_defaults(func=cmd_fvs)

    st = sub.add_parser("selftest", help="run the built-in property checks")
    st.add_argument("--seed", default="0")
    st.add_argument("--full", action="store_true", help="larger instance counts")
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
