"""The two complete semantic-interaction pipelines.

deepsi: fine-tunable backbone + nonparametric MDS. Every layout refresh
re-solves the 2-D embedding from scratch; drag feedback tunes only the
backbone so that representation distances of the moved points track
their viewport distances.

neuralsi: backbone + linear projection head as one end-to-end network.
A layout refresh is a single forward pass; drag feedback tunes head and
backbone together against the pairwise distances of the moved points.

Both updates minimize the same quadratic pairwise-distance stress. The
viewport square and the representation space have incompatible scales,
so before each update the target distances and the model-side distances
are each divided by their mean, with both means held constant during
the update (the stationary point is then a layout proportional to the
dropped positions).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import Corpus
from .mds import MdsConfig, mds_project
from .nn import (
    AdamState,
    BackboneParams,
    HeadParams,
    adam_init,
    adam_step,
    apply_tensors,
    backbone_forward,
    backbone_init,
    backbone_tensors,
    backprop_through_model,
    model_forward,
    model_tensors,
)

PIPELINES = ("deepsi", "neuralsi")


class InteractionError(ValueError):
    """An interaction batch violates its invariants."""


@dataclass(frozen=True)
class Move:
    doc_id: str
    x: float
    y: float


@dataclass
class InteractionBatch:
    """Moved points: document ids with their dropped viewport positions."""

    moves: list[Move]
    short_sampled: bool = False  # a class had fewer docs than requested


def validate_batch(batch: InteractionBatch, corpus: Corpus) -> None:
    if len(batch.moves) < 2:
        raise InteractionError("need at least 2 moved points (pairwise loss)")
    seen: set[str] = set()
    for m in batch.moves:
        if m.doc_id in seen:
            raise InteractionError(f"duplicate doc id {m.doc_id!r} in batch")
        seen.add(m.doc_id)
        if m.doc_id not in corpus.ids:
            raise InteractionError(f"unknown doc id {m.doc_id!r}")
        if not (np.isfinite(m.x) and np.isfinite(m.y)):
            raise InteractionError(f"non-finite position for {m.doc_id!r}")
        if abs(m.x) > 1.0 or abs(m.y) > 1.0:
            raise InteractionError(
                f"position ({m.x}, {m.y}) for {m.doc_id!r} outside the viewport square"
            )


@dataclass
class Projection:
    """2-D positions of all documents, one row per corpus doc in order."""

    positions: np.ndarray  # (N, 2) inside [-1, 1]^2
    iteration: int
    pipeline: str
    degenerate: bool = False


@dataclass
class PipelineConfig:
    lr: float = 1e-3
    epochs_per_update: int = 50
    mds: MdsConfig = field(default_factory=MdsConfig)
    head_init: str = "mds_based"  # "mds_based" or "random"
    ridge_lambda: float = 1e-3
    seed: int = 0
    distance_scale_mode: str = "mean_normalized"
    hidden: int = 64
    warm_start_mds: bool = False  # reuse the previous layout as the SMACOF start
    reset_adam_per_update: bool = False

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.epochs_per_update < 1:
            raise ValueError(f"epochs_per_update must be >= 1, got {self.epochs_per_update}")
        if self.ridge_lambda < 0:
            raise ValueError(f"ridge_lambda must be >= 0, got {self.ridge_lambda}")
        if self.head_init not in ("mds_based", "random"):
            raise ValueError(f"head_init must be 'mds_based' or 'random', got {self.head_init!r}")
        if self.distance_scale_mode != "mean_normalized":
            raise ValueError(f"unknown distance_scale_mode {self.distance_scale_mode!r}")
        if self.hidden < 1:
            raise ValueError(f"hidden must be >= 1, got {self.hidden}")


@dataclass
class ModelState:
    """Everything one interactive session owns: weights, optimizer, counters."""

    pipeline: str
    corpus: Corpus
    config: PipelineConfig
    backbone: BackboneParams
    head: HeadParams | None
    adam: AdamState
    iteration: int = 0  # layout refreshes performed
    mds_cache: np.ndarray | None = None  # last raw MDS layout, for warm starts

    def clone(self) -> "ModelState":
        """Snapshot copy safe for concurrent read-only evaluation."""
        return ModelState(
            pipeline=self.pipeline,
            corpus=self.corpus,  # immutable once constructed
            config=replace(self.config, mds=replace(self.config.mds)),
            backbone=self.backbone.copy(),
            head=None if self.head is None else self.head.copy(),
            adam=self.adam.copy(),
            iteration=self.iteration,
            mds_cache=None if self.mds_cache is None else self.mds_cache.copy(),
        )


def init_state(corpus: Corpus, pipeline: str, cfg: PipelineConfig) -> ModelState:
    """Fresh model for a corpus: identity backbone, head per cfg.head_init."""
    if pipeline not in PIPELINES:
        raise ValueError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    if not corpus.is_vectorized:
        raise ValueError("corpus must be vectorized before model initialization")
    backbone = backbone_init(corpus.dim, cfg.hidden, cfg.seed)
    state = ModelState(
        pipeline=pipeline,
        corpus=corpus,
        config=cfg,
        backbone=backbone,
        head=None,
        adam=adam_init(backbone_tensors(backbone), lr=cfg.lr),
    )
    if pipeline == "neuralsi":
        if cfg.head_init == "mds_based":
            state.head = head_init_mds(state, corpus, cfg)
        else:
            state.head = head_init_random(corpus.dim, cfg.seed)
        state.adam = adam_init(model_tensors(state.backbone, state.head), lr=cfg.lr)
    return state


def normalize_viewport(z_raw: np.ndarray) -> np.ndarray:
    """Per-axis min-max map onto [-1, 1]; a constant axis maps to 0.

    Display-only: never applied inside a training loss.
    """
    z = np.asarray(z_raw, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != 2 or z.shape[0] < 1:
        raise ValueError(f"expected an (N >= 1, 2) layout, got shape {z.shape}")
    lo = z.min(axis=0)
    span = z.max(axis=0) - lo
    safe = np.where(span > 0.0, span, 1.0)
    out = 2.0 * (z - lo) / safe - 1.0
    out[:, span == 0.0] = 0.0
    return out


def _check_corpus(state: ModelState, corpus: Corpus) -> Corpus:
    if corpus is not state.corpus and corpus.ids != state.corpus.ids:
        raise ValueError("corpus does not match the one this model was initialized on")
    return corpus


def deepsi_forward(
    state: ModelState, corpus: Corpus, timers: dict[str, float] | None = None
) -> Projection:
    """Backbone forward, full MDS re-solve, viewport normalization."""
    if state.pipeline != "deepsi":
        raise ValueError(f"state is for pipeline {state.pipeline!r}")
    corpus = _check_corpus(state, corpus)
    cfg = state.config
    t0 = time.perf_counter()
    h = backbone_forward(state.backbone, corpus.matrix())
    t1 = time.perf_counter()
    warm = state.mds_cache if cfg.warm_start_mds else None
    result = mds_project(h, cfg.mds, warm_start=warm)
    t2 = time.perf_counter()
    state.mds_cache = result.positions
    positions = normalize_viewport(result.positions)
    t3 = time.perf_counter()
    if timers is not None:
        timers["backbone"] = timers.get("backbone", 0.0) + (t1 - t0)
        timers["mds"] = timers.get("mds", 0.0) + (t2 - t1)
        timers["normalize"] = timers.get("normalize", 0.0) + (t3 - t2)
    proj = Projection(
        positions=positions,
        iteration=state.iteration,
        pipeline="deepsi",
        degenerate=result.degenerate,
    )
    state.iteration += 1
    return proj


def neuralsi_forward(
    state: ModelState, corpus: Corpus, timers: dict[str, float] | None = None
) -> Projection:
    """One end-to-end forward pass; no per-call optimization."""
    if state.pipeline != "neuralsi":
        raise ValueError(f"state is for pipeline {state.pipeline!r}")
    if state.head is None:
        raise ValueError("neuralsi state has no projection head")
    corpus = _check_corpus(state, corpus)
    t0 = time.perf_counter()
    z_raw = model_forward(state.backbone, state.head, corpus.matrix())
    t1 = time.perf_counter()
    positions = normalize_viewport(z_raw)
    t2 = time.perf_counter()
    if timers is not None:
        timers["forward"] = timers.get("forward", 0.0) + (t1 - t0)
        timers["normalize"] = timers.get("normalize", 0.0) + (t2 - t1)
    proj = Projection(positions=positions, iteration=state.iteration, pipeline="neuralsi")
    state.iteration += 1
    return proj


def forward(
    state: ModelState, corpus: Corpus, timers: dict[str, float] | None = None
) -> Projection:
    if state.pipeline == "deepsi":
        return deepsi_forward(state, corpus, timers)
    return neuralsi_forward(state, corpus, timers)


def _batch_arrays(
    state: ModelState, batch: InteractionBatch
) -> tuple[np.ndarray, np.ndarray]:
    rows = [state.corpus.index_of(m.doc_id) for m in batch.moves]
    x = state.corpus.matrix()[rows]
    targets = np.array([[m.x, m.y] for m in batch.moves])
    return x, targets


def _pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def _pair_dists(points: np.ndarray, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    diff = points[ii] - points[jj]
    return np.sqrt(np.sum(diff * diff, axis=1))


def _mean_scale(d: np.ndarray) -> float:
    m = float(d.mean())
    return m if m > 0.0 else 1.0


def _grad_at_points(
    points: np.ndarray,
    ii: np.ndarray,
    jj: np.ndarray,
    d: np.ndarray,
    coeff: np.ndarray,
) -> np.ndarray:
    """Accumulate per-pair distance-gradient contributions onto point rows."""
    grad = np.zeros_like(points)
    safe = np.where(d > 0.0, d, 1.0)
    per_pair = (coeff / safe)[:, None] * (points[ii] - points[jj])
    per_pair[d == 0.0] = 0.0
    np.add.at(grad, ii, per_pair)
    np.subtract.at(grad, jj, per_pair)
    return grad


def deepsi_update(
    state: ModelState, batch: InteractionBatch, cfg: PipelineConfig | None = None
) -> list[float]:
    """Tune the backbone so moved-point representation distances track
    the dropped viewport distances. Returns the per-epoch loss trace."""
    cfg = cfg or state.config
    if state.pipeline != "deepsi":
        raise ValueError(f"state is for pipeline {state.pipeline!r}")
    validate_batch(batch, state.corpus)
    x, targets = _batch_arrays(state, batch)
    ii, jj = _pair_index(len(batch.moves))
    t_hat = _pair_dists(targets, ii, jj)
    t_hat = t_hat / _mean_scale(t_hat)
    d_scale = _mean_scale(_pair_dists(backbone_forward(state.backbone, x), ii, jj))

    params = backbone_tensors(state.backbone)
    adam = adam_init(params, lr=cfg.lr) if cfg.reset_adam_per_update else state.adam
    trace = []
    for _ in range(cfg.epochs_per_update):
        backbone, _ = apply_tensors(state.backbone, None, params)
        h = backbone_forward(backbone, x)
        d = _pair_dists(h, ii, jj)
        resid = t_hat - d / d_scale
        trace.append(float(resid @ resid))
        coeff = -2.0 * resid / d_scale  # dL/dd per pair
        grad_h = _grad_at_points(h, ii, jj, d, coeff)
        grads = backprop_through_model(backbone, None, x, grad_h)
        params, adam = adam_step(adam, params, grads)
    state.backbone, _ = apply_tensors(state.backbone, None, params)
    state.adam = adam
    return trace


def neuralsi_update(
    state: ModelState, batch: InteractionBatch, cfg: PipelineConfig | None = None
) -> list[float]:
    """Tune head and backbone end-to-end against the moved points' pairwise
    distances (head first, then backbone, per the chain rule). Returns the
    per-epoch loss trace."""
    cfg = cfg or state.config
    if state.pipeline != "neuralsi":
        raise ValueError(f"state is for pipeline {state.pipeline!r}")
    if state.head is None:
        raise ValueError("neuralsi state has no projection head")
    validate_batch(batch, state.corpus)
    x, targets = _batch_arrays(state, batch)
    ii, jj = _pair_index(len(batch.moves))
    t_hat = _pair_dists(targets, ii, jj)
    t_hat = t_hat / _mean_scale(t_hat)
    z0 = model_forward(state.backbone, state.head, x)
    d_scale = _mean_scale(_pair_dists(z0, ii, jj))

    params = model_tensors(state.backbone, state.head)
    adam = adam_init(params, lr=cfg.lr) if cfg.reset_adam_per_update else state.adam
    trace = []
    for _ in range(cfg.epochs_per_update):
        backbone, head = apply_tensors(state.backbone, state.head, params)
        z = model_forward(backbone, head, x)
        d = _pair_dists(z, ii, jj)
        resid = t_hat - d / d_scale
        trace.append(float(resid @ resid))
        coeff = -2.0 * resid / d_scale
        grad_z = _grad_at_points(z, ii, jj, d, coeff)
        grads = backprop_through_model(backbone, head, x, grad_z)
        params, adam = adam_step(adam, params, grads)
    state.backbone, state.head = apply_tensors(state.backbone, state.head, params)
    state.adam = adam
    return trace


def update(
    state: ModelState, batch: InteractionBatch, cfg: PipelineConfig | None = None
) -> list[float]:
    if state.pipeline == "deepsi":
        return deepsi_update(state, batch, cfg)
    return neuralsi_update(state, batch, cfg)


def head_init_mds(state: ModelState, corpus: Corpus, cfg: PipelineConfig) -> HeadParams:
    """Fit the head by ridge least squares to an MDS teacher layout of the
    current representations. Closed form, deterministic."""
    if not corpus.is_vectorized:
        raise ValueError("corpus must be vectorized")
    h = backbone_forward(state.backbone, corpus.matrix())
    teacher = mds_project(h, cfg.mds).positions
    dim = h.shape[1]
    normal = h.T @ h
    if cfg.ridge_lambda == 0.0 and np.linalg.matrix_rank(normal) < dim:
        raise ValueError(
            "normal matrix is singular with ridge_lambda=0; set ridge_lambda > 0"
        )
    w_t = np.linalg.solve(normal + cfg.ridge_lambda * np.eye(dim), h.T @ teacher)
    return HeadParams(w=w_t.T)


def head_init_random(dim: int, seed: int) -> HeadParams:
    """He-distributed head entries (variance 2/dim), deterministic from seed."""
    rng = np.random.default_rng(seed)
    return HeadParams(w=rng.normal(0.0, np.sqrt(2.0 / dim), size=(2, dim)))
