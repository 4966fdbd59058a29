"""Nonparametric 2-D projection by metric stress majorization.

Minimizes the raw stress sum over unordered pairs of
(||z_i - z_j|| - ||h_i - h_j||)^2 with SMACOF (Guttman transform,
uniform weights), which guarantees a non-increasing stress sequence.
Initialization is the PCA projection of the input, so a run is fully
deterministic; a warm start from a previous layout can be supplied
instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MdsConfig:
    max_iters: int = 300
    tol: float = 1e-6  # relative stress-change stopping threshold
    init: str = "pca"  # "pca" or "given"
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tol <= 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.init not in ("pca", "given"):
            raise ValueError(f"init must be 'pca' or 'given', got {self.init!r}")


@dataclass
class MdsResult:
    positions: np.ndarray  # (N, 2)
    stress: float
    stress_history: np.ndarray  # stress at init and after every iteration
    n_iters: int
    degenerate: bool = False


def pairwise_distances(x: np.ndarray) -> np.ndarray:
    """Full Euclidean distance matrix via the squared-norm expansion."""
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    np.fill_diagonal(d, 0.0)
    return d


def _positions_distances(z: np.ndarray) -> np.ndarray:
    # Exact broadcast form; 2-D layouts stay small enough for N^2 x 2.
    diff = z[:, None, :] - z[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _stress(delta: np.ndarray, d: np.ndarray) -> float:
    iu = np.triu_indices(delta.shape[0], k=1)
    resid = delta[iu] - d[iu]
    return float(resid @ resid)


def stress(z: np.ndarray, h: np.ndarray) -> float:
    """Raw stress of layout z against the pairwise distances of h."""
    z = np.asarray(z, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if z.shape[0] != h.shape[0]:
        raise ValueError(f"row mismatch: layout {z.shape[0]} vs data {h.shape[0]}")
    return _stress(pairwise_distances(h), _positions_distances(z))


def pca_init(h: np.ndarray) -> np.ndarray:
    centered = h - h.mean(axis=0)
    u, s, _ = np.linalg.svd(centered, full_matrices=False)
    k = min(2, s.shape[0])
    z = np.zeros((h.shape[0], 2))
    z[:, :k] = u[:, :k] * s[:k]
    return z


def mds_project(
    h: np.ndarray, cfg: MdsConfig | None = None, warm_start: np.ndarray | None = None
) -> MdsResult:
    """Embed rows of h into 2-D by SMACOF stress majorization.

    Deterministic given cfg and warm_start. All-identical rows are a
    degenerate input: the result is the all-zero layout with stress 0
    and the degenerate flag set.
    """
    cfg = cfg or MdsConfig()
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] < 2:
        raise ValueError(f"need an (N >= 2, D) matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("input contains non-finite values")

    n = h.shape[0]
    delta = pairwise_distances(h)
    if float(delta.max()) == 0.0:
        return MdsResult(
            positions=np.zeros((n, 2)),
            stress=0.0,
            stress_history=np.zeros(1),
            n_iters=0,
            degenerate=True,
        )

    if warm_start is not None:
        z = np.array(warm_start, dtype=np.float64)
        if z.shape != (n, 2):
            raise ValueError(f"warm_start shape {z.shape} != ({n}, 2)")
    elif cfg.init == "pca":
        z = pca_init(h)
    else:
        raise ValueError("init='given' requires a warm_start layout")

    history = [_stress(delta, _positions_distances(z))]
    iters = 0
    for _ in range(cfg.max_iters):
        d = _positions_distances(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0.0, delta / d, 0.0)
        np.fill_diagonal(ratio, 0.0)
        b = -ratio
        np.fill_diagonal(b, ratio.sum(axis=1))
        z = (b @ z) / n
        iters += 1
        history.append(_stress(delta, _positions_distances(z)))
        prev, cur = history[-2], history[-1]
        if prev - cur <= cfg.tol * max(prev, 1e-300):
            break

    return MdsResult(
        positions=z,
        stress=history[-1],
        stress_history=np.asarray(history),
        n_iters=iters,
        degenerate=False,
    )


def procrustes_residual(a: np.ndarray, b: np.ndarray) -> float:
    """RMS point distance between two layouts after optimal rigid alignment.

    b is rotated/reflected and translated onto a; no scaling is applied,
    so the residual is in the coordinate units of a.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"layout shapes differ: {a.shape} vs {b.shape}")
    ac = a - a.mean(axis=0)
    bc = b - b.mean(axis=0)
    u, _, vt = np.linalg.svd(bc.T @ ac)
    rot = u @ vt
    resid = ac - bc @ rot
    return float(np.sqrt(np.mean(np.sum(resid * resid, axis=1))))
