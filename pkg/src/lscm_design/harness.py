"""Experiment sweeps: paired trials over random graphs, FVS baseline, CSV output."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fvs import min_fvs
from .lscm import RecoveryError, SingularModelError, generate_er_model, ica_oracle
from .policy import DEFAULT_SAMPLES, PolicyKind, run_identification

log = logging.getLogger(__name__)

RECORD_FIELDS = ["n", "trial", "strategy", "seed", "interventions", "identified", "fvs", "wall_ms"]
SUMMARY_FIELDS = ["n", "strategy", "mean", "std", "min", "max", "fvs_mean", "ratio_to_fvs"]
MAX_REGENERATIONS = 20


@dataclass(frozen=True)
class ExperimentConfig:
    node_counts: tuple[int, ...]
    trials_per_size: int = 60
    budget_rule: str | int = "n"
    edge_mode: tuple[str, float] = ("sparse", 2.0)
    strategies: tuple[PolicyKind, ...] = (PolicyKind.ADAPTIVE, PolicyKind.RANDOM, PolicyKind.MAX_DEGREE)
    mode: str = "exact"
    m_samples: int = DEFAULT_SAMPLES
    master_seed: int = 0
    fvs_enabled: bool = True
    output_path: str | None = None
    sampler: str = "greedy"
    random_pool: str = "unresolved"
    acyclic: bool = False
    timing: bool = False
    workers: int = 1

    def __post_init__(self):
        if not self.node_counts:
            raise ValueError("node_counts must be non-empty")
        if self.trials_per_size < 1:
            raise ValueError("trials_per_size must be at least 1")
        kind, val = self.edge_mode
        if kind == "sparse":
            for n in self.node_counts:
                if not 0 <= val / n <= 1:
                    raise ValueError(f"sparse edge probability c/n={val}/{n} outside [0, 1]")
        elif kind == "dense":
            if not 0 <= val <= 1:
                raise ValueError(f"dense edge probability {val} outside [0, 1]")
        else:
            raise ValueError(f"unknown edge mode {kind!r}")
        if self.mode not in ("exact", "sampled", "sample"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def edge_prob(self, n: int) -> float:
        kind, val = self.edge_mode
        return val / n if kind == "sparse" else val

    def budget(self, n: int) -> int:
        return n if self.budget_rule == "n" else int(self.budget_rule)


@dataclass
class TrialRecord:
    n: int
    trial_index: int
    strategy: str
    seed: int
    interventions_used: int
    identified: bool
    budget: int
    fvs_size: int | None = None
    class_size_trace: list[int] | None = None
    wall_time: float | None = None
    targets: list[int] = field(default_factory=list)

    def csv_row(self) -> list[str]:
        return [
            str(self.n),
            str(self.trial_index),
            self.strategy,
            str(self.seed),
            str(self.interventions_used),
            "1" if self.identified else "0",
            "" if self.fvs_size is None else str(self.fvs_size),
            "" if self.wall_time is None else f"{self.wall_time * 1000:.3f}",
        ]


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from integer parts."""
    words = [int(p) & 0xFFFFFFFFFFFFFFFF for p in parts]
    state = np.random.SeedSequence(words).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 31 | int(state[1]) >> 1


def run_trial(cfg: ExperimentConfig, n: int, trial: int) -> list[TrialRecord]:
    """Every enabled strategy on the same model and the same observational ICA output."""
    budget = cfg.budget(n)
    for attempt in range(MAX_REGENERATIONS):
        seed = derive_seed(cfg.master_seed, n, trial, attempt)
        try:
            w = generate_er_model(n, cfg.edge_prob(n), rng_seed=seed, acyclic=cfg.acyclic)
            obs = ica_oracle(w, derive_seed(seed, 1))
            results = []
            for s_idx, kind in enumerate(cfg.strategies):
                t0 = time.perf_counter()
                res = run_identification(
                    w, kind, budget, cfg.mode, cfg.m_samples, derive_seed(seed, 2, s_idx),
                    obs=obs, random_pool=cfg.random_pool, sampler=cfg.sampler,
                )
                results.append((kind, res, time.perf_counter() - t0))
        except (SingularModelError, RecoveryError) as exc:
            log.warning("n=%d trial=%d attempt=%d regenerated: %s", n, trial, attempt, exc)
            continue
        fvs_size = min_fvs(w.graph).size if cfg.fvs_enabled else None
        return [
            TrialRecord(
                n=n,
                trial_index=trial,
                strategy=kind.value,
                seed=seed,
                interventions_used=res.interventions_used,
                identified=res.identified,
                budget=budget,
                fvs_size=fvs_size,
                class_size_trace=res.class_size_trace,
                wall_time=elapsed if cfg.timing else None,
                targets=list(res.targets),
            )
            for kind, res, elapsed in results
        ]
    raise RuntimeError(f"n={n} trial={trial}: no usable instance after {MAX_REGENERATIONS} attempts")


def _run_task(args):
    return run_trial(*args)


def run_sweep(cfg: ExperimentConfig) -> list[TrialRecord]:
    """All trials for all node counts, in (n, trial, strategy) order."""
    tasks = [(cfg, n, t) for n in cfg.node_counts for t in range(cfg.trials_per_size)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_task, tasks, chunksize=4))
    else:
        chunks = [_run_task(t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


@dataclass(frozen=True)
class SummaryRow:
    n: int
    strategy: str
    mean: float
    std: float
    min: int
    max: int
    fvs_mean: float | None
    ratio_to_fvs: float | None

    def csv_row(self) -> list[str]:
        fmt = lambda x: "" if x is None else f"{x:.6f}"  # noqa: E731
        return [str(self.n), self.strategy, fmt(self.mean), fmt(self.std), str(self.min), str(self.max),
                fmt(self.fvs_mean), fmt(self.ratio_to_fvs)]


def aggregate(records: list[TrialRecord]) -> list[SummaryRow]:
    """Mean, population std, min and max of interventions per (n, strategy).

    ``ratio_to_fvs`` is ``mean / fvs_mean`` when FVS sizes are present and
    their mean is positive.
    """
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple[int, str], list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.n, r.strategy), []).append(r)
    rows = []
    for (n, strategy), recs in groups.items():
        vals = np.array([r.interventions_used for r in recs], dtype=np.float64)
        fvs = [r.fvs_size for r in recs if r.fvs_size is not None]
        fvs_mean = float(np.mean(fvs)) if fvs else None
        mean = float(vals.mean())
        ratio = mean / fvs_mean if fvs_mean else None
        rows.append(SummaryRow(n, strategy, mean, float(vals.std()), int(vals.min()), int(vals.max()),
                               fvs_mean, ratio))
    return rows


def _write(fields, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    writer.writerows(rows)
    return buf.getvalue()


def records_csv(records: list[TrialRecord]) -> str:
    return _write(RECORD_FIELDS, (r.csv_row() for r in records))


def summary_csv(rows: list[SummaryRow]) -> str:
    return _write(SUMMARY_FIELDS, (r.csv_row() for r in rows))


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def adaptive_fvs_ratio(records: list[TrialRecord]) -> float:
    """``mean(fvs) / mean(adaptive interventions)`` over all adaptive records."""
    adaptive = [r for r in records if r.strategy == PolicyKind.ADAPTIVE.value and r.fvs_size is not None]
    used = sum(r.interventions_used for r in adaptive)
    if used == 0:
        return math.inf
    return sum(r.fvs_size for r in adaptive) / used


