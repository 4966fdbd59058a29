"""Algorithm-centered evaluation harness.

A simulated analyst replaces the human: each iteration it picks a few
labeled samples per class, drops them at class anchors on a circle in
the viewport, and feeds that batch to the pipeline under test. Layout
quality is scored by leave-one-out kNN accuracy in 2-D; accuracy per
iteration forms the learning curve. A separate benchmark times one full
update+refresh cycle across dataset sizes and attributes time to stages.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .corpus import Corpus
from .pipelines import (
    InteractionBatch,
    Move,
    PipelineConfig,
    Projection,
    forward,
    init_state,
    update,
)

ANCHOR_RADIUS = 0.8


@dataclass
class SimConfig:
    per_class: int = 3
    iterations: int = 200
    anchor_layout: str = "circle"
    jitter: float = 0.02
    knn_k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.per_class < 1:
            raise ValueError(f"per_class must be >= 1, got {self.per_class}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.anchor_layout != "circle":
            raise ValueError(f"unknown anchor_layout {self.anchor_layout!r}")
        if self.jitter < 0:
            raise ValueError(f"jitter must be >= 0, got {self.jitter}")
        if self.knn_k < 1:
            raise ValueError(f"knn_k must be >= 1, got {self.knn_k}")


@dataclass
class LearningCurve:
    accuracies: list[float]  # index 0 = pre-interaction layout
    pipeline: str
    seed: int


@dataclass
class TimingRow:
    pipeline: str
    n: int
    mean_seconds: float
    std_seconds: float
    repeats: int
    stage_seconds: dict[str, float] = field(default_factory=dict)  # mean per stage


@dataclass
class TimingTable:
    rows: list[TimingRow]


def class_anchors(k: int) -> np.ndarray:
    """Evenly spaced circle anchors of radius 0.8, one per class."""
    angles = 2.0 * math.pi * np.arange(k) / k
    return ANCHOR_RADIUS * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def simulate_batch(
    corpus: Corpus, cfg: SimConfig, rng: np.random.Generator
) -> InteractionBatch:
    """One round of simulated drag feedback: per_class docs of each class
    dropped at that class's anchor, plus Gaussian jitter.

    A class with fewer than per_class docs is sampled with replacement;
    duplicate picks collapse (batch ids must stay distinct) and the batch
    is flagged short_sampled.
    """
    labels = corpus.labels_array()
    k = corpus.label_count
    if k < 2:
        raise ValueError("simulation needs a labeled corpus with >= 2 classes")
    anchors = class_anchors(k)
    moves: list[Move] = []
    short = False
    for c in range(k):
        rows = np.flatnonzero(labels == c)
        if rows.size >= cfg.per_class:
            picks = rng.choice(rows, size=cfg.per_class, replace=False)
        else:
            short = True
            picks = rng.choice(rows, size=cfg.per_class, replace=True)
            picks = list(dict.fromkeys(int(p) for p in picks))
        for row in picks:
            pos = anchors[c] + cfg.jitter * rng.standard_normal(2)
            pos = np.clip(pos, -1.0, 1.0)
            moves.append(Move(corpus.docs[int(row)].id, float(pos[0]), float(pos[1])))
    return InteractionBatch(moves=moves, short_sampled=short)


def knn_accuracy(projection: Projection | np.ndarray, labels: Sequence[int], k: int) -> float:
    """Leave-one-out kNN accuracy of the 2-D layout against the labels.

    Each point is classified by the majority label of its k nearest
    Euclidean neighbors (self excluded); vote ties fall back to the
    nearest neighbor's label. Distance ties resolve to the lower row
    index (stable sort).
    """
    positions = getattr(projection, "positions", projection)
    positions = np.asarray(positions, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = positions.shape[0]
    if labels.shape[0] != n:
        raise ValueError(f"{n} points but {labels.shape[0]} labels")
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < N, got k={k}, N={n}")
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    np.fill_diagonal(dist, np.inf)
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    n_classes = int(labels.max()) + 1
    correct = 0
    for i in range(n):
        votes = np.bincount(labels[order[i]], minlength=n_classes)
        top = votes.max()
        if np.count_nonzero(votes == top) == 1:
            pred = int(np.argmax(votes))
        else:
            pred = int(labels[order[i, 0]])
        correct += pred == labels[i]
    return float(correct / n)


def run_learning_curve(
    pipeline: str,
    corpus: Corpus,
    sim_cfg: SimConfig,
    pipe_cfg: PipelineConfig,
) -> LearningCurve:
    """Simulated co-learning session: score, then iterate feedback/update/score.

    Deterministic given the corpus, sim_cfg.seed, and pipe_cfg.
    """
    labels = corpus.labels_array()
    state = init_state(corpus, pipeline, pipe_cfg)
    rng = np.random.default_rng(sim_cfg.seed)
    accuracies = [knn_accuracy(forward(state, corpus), labels, sim_cfg.knn_k)]
    for _ in range(sim_cfg.iterations):
        batch = simulate_batch(corpus, sim_cfg, rng)
        update(state, batch, pipe_cfg)
        proj = forward(state, corpus)
        accuracies.append(knn_accuracy(proj, labels, sim_cfg.knn_k))
    return LearningCurve(accuracies=accuracies, pipeline=pipeline, seed=sim_cfg.seed)


def run_timing_benchmark(
    pipelines: Sequence[str],
    corpus_family: Callable[[int], Corpus],
    sizes: Sequence[int] = (100, 200, 500, 1000),
    repeats: int = 20,
    sim_cfg: SimConfig | None = None,
    pipe_cfg: PipelineConfig | None = None,
) -> TimingTable:
    """Wall-clock seconds for one update+refresh cycle per pipeline and size.

    Each model is warm-started (one untimed cycle) before measurement, so
    the numbers reflect steady-state interactive latency. Runs strictly
    sequentially.
    """
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    if any(n < 1 for n in sizes):
        raise ValueError(f"sizes must be positive, got {list(sizes)}")
    sim_cfg = sim_cfg or SimConfig()
    pipe_cfg = pipe_cfg or PipelineConfig()
    rows = []
    for pipeline in pipelines:
        for n in sizes:
            corpus = corpus_family(int(n))
            state = init_state(corpus, pipeline, pipe_cfg)
            rng = np.random.default_rng(sim_cfg.seed)
            forward(state, corpus)
            batch = simulate_batch(corpus, sim_cfg, rng)  # warm-up cycle
            update(state, batch, pipe_cfg)
            forward(state, corpus)
            cycle = np.zeros(repeats)
            stage_totals: dict[str, float] = {}
            for r in range(repeats):
                batch = simulate_batch(corpus, sim_cfg, rng)
                t0 = time.perf_counter()
                update(state, batch, pipe_cfg)
                t1 = time.perf_counter()
                timers: dict[str, float] = {}
                forward(state, corpus, timers)
                t2 = time.perf_counter()
                cycle[r] = t2 - t0
                stage_totals["update"] = stage_totals.get("update", 0.0) + (t1 - t0)
                for stage, secs in timers.items():
                    stage_totals[stage] = stage_totals.get(stage, 0.0) + secs
            rows.append(
                TimingRow(
                    pipeline=pipeline,
                    n=int(n),
                    mean_seconds=float(cycle.mean()),
                    std_seconds=float(cycle.std()),
                    repeats=repeats,
                    stage_seconds={k: v / repeats for k, v in stage_totals.items()},
                )
            )
    return TimingTable(rows=rows)


def complexity_exponent(table: TimingTable, pipeline: str) -> float:
    """Slope of log(mean seconds) against log(n) for one pipeline's rows."""
    rows = sorted((r for r in table.rows if r.pipeline == pipeline), key=lambda r: r.n)
    if len(rows) < 2:
        raise ValueError(f"need >= 2 sizes for pipeline {pipeline!r}")
    log_n = np.log([r.n for r in rows])
    log_t = np.log([r.mean_seconds for r in rows])
    slope, _ = np.polyfit(log_n, log_t, 1)
    return float(slope)


def export_results(
    result: LearningCurve | TimingTable, path: str | Path, fmt: str = "csv"
) -> None:
    """Write a curve or timing table losslessly as CSV or JSON."""
    path = Path(path)
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown export format {fmt!r}")
    if isinstance(result, LearningCurve):
        if fmt == "csv":
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["iteration", "accuracy"])
                for i, acc in enumerate(result.accuracies):
                    writer.writerow([i, repr(acc)])
        else:
            payload = {
                "pipeline": result.pipeline,
                "seed": result.seed,
                "accuracies": result.accuracies,
            }
            path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    elif isinstance(result, TimingTable):
        if fmt == "csv":
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["pipeline", "n", "mean_s", "std_s", "repeats"])
                for row in result.rows:
                    writer.writerow(
                        [row.pipeline, row.n, repr(row.mean_seconds), repr(row.std_seconds), row.repeats]
                    )
        else:
            payload = [
                {
                    "pipeline": r.pipeline,
                    "n": r.n,
                    "mean_s": r.mean_seconds,
                    "std_s": r.std_seconds,
                    "repeats": r.repeats,
                    "stage_seconds": r.stage_seconds,
                }
                for r in result.rows
            ]
            path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    else:
        raise TypeError(f"cannot export {type(result).__name__}")


def export_stage_timers(table: TimingTable, path: str | Path) -> None:
    """Stage-timer breakdown as JSON: {"pipeline/n": {stage: seconds}}."""
    payload = {f"{r.pipeline}/{r.n}": r.stage_seconds for r in table.rows}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
