"""Dense numerical kernel for both pipelines.

Holds the fine-tunable residual-MLP backbone, the linear 2-D projection
head, He initialization, hand-derived analytic gradients, a functional
Adam optimizer, and a central finite-difference gradient oracle used to
cross-check every gradient path.

The backbone computes h = x + W2 relu(W1 x + b1) + b2 with W2 = b2 = 0
at initialization, so a fresh backbone is exactly the identity map and
the initial layout reflects the raw input representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

PairTargets = Sequence[tuple[int, int, float]]


@dataclass
class BackboneParams:
    """Residual MLP weights: h = x + w2 @ relu(w1 @ x + b1) + b2."""

    w1: np.ndarray  # (H, D)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (D, H)
    b2: np.ndarray  # (D,)

    def copy(self) -> "BackboneParams":
        return BackboneParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


@dataclass
class HeadParams:
    """Linear projection head, no bias: z = w @ h."""

    w: np.ndarray  # (2, D)

    def copy(self) -> "HeadParams":
        return HeadParams(self.w.copy())


def backbone_init(dim: int, hidden: int, seed: int) -> BackboneParams:
    """He-initialized hidden layer, zeroed output branch (identity at init)."""
    if dim < 2 or hidden < 1:
        raise ValueError(f"need dim >= 2 and hidden >= 1, got dim={dim}, hidden={hidden}")
    rng = np.random.default_rng(seed)
    std = math.sqrt(2.0 / dim)
    return BackboneParams(
        w1=rng.normal(0.0, std, size=(hidden, dim)),
        b1=rng.normal(0.0, std, size=hidden),
        w2=np.zeros((dim, hidden)),
        b2=np.zeros(dim),
    )


def backbone_forward(p: BackboneParams, x: np.ndarray) -> np.ndarray:
    """Row-wise residual MLP; returns an array of the same shape as x."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != p.w1.shape[1]:
        raise ValueError(f"expected (N, {p.w1.shape[1]}) input, got {x.shape}")
    hidden = np.maximum(x @ p.w1.T + p.b1, 0.0)
    return x + hidden @ p.w2.T + p.b2


def head_forward(p: HeadParams, h: np.ndarray) -> np.ndarray:
    """Linear map of representations to raw 2-D positions."""
    h = np.asarray(h, dtype=np.float64)
    if h.ndim != 2 or h.shape[1] != p.w.shape[1]:
        raise ValueError(f"expected (N, {p.w.shape[1]}) input, got {h.shape}")
    return h @ p.w.T


def model_forward(
    backbone: BackboneParams, head: HeadParams | None, x: np.ndarray
) -> np.ndarray:
    """Full forward pass: backbone, then head when present."""
    h = backbone_forward(backbone, x)
    return h if head is None else head_forward(head, h)


def pairwise_stress(points: np.ndarray, targets: PairTargets) -> float:
    """Sum over pairs of (target_distance − ||p_i − p_j||)^2."""
    points = np.asarray(points, dtype=np.float64)
    total = 0.0
    for i, j, target in targets:
        d = float(np.linalg.norm(points[i] - points[j]))
        total += (target - d) ** 2
    return total


def grad_pairwise_stress(points: np.ndarray, targets: PairTargets) -> np.ndarray:
    """Gradient of :func:`pairwise_stress` w.r.t. the point coordinates.

    Coincident pairs contribute zero (subgradient choice at the distance
    singularity).
    """
    points = np.asarray(points, dtype=np.float64)
    grad = np.zeros_like(points)
    for i, j, target in targets:
        if i == j:
            raise ValueError(f"pair ({i}, {j}) is degenerate")
        diff = points[i] - points[j]
        d = float(np.linalg.norm(diff))
        if d == 0.0:
            continue
        g = -2.0 * (target - d) / d * diff
        grad[i] += g
        grad[j] -= g
    return grad


def backprop_through_model(
    backbone: BackboneParams,
    head: HeadParams | None,
    x: np.ndarray,
    grad_out: np.ndarray,
) -> dict[str, np.ndarray]:
    """Exact analytic parameter gradients via the chain rule.

    grad_out holds dL/d(output): (N, 2) with a head, (N, D) without.
    Returned keys: w1, b1, w2, b2, and head_w when a head is present.
    """
    x = np.asarray(x, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    pre = x @ backbone.w1.T + backbone.b1
    hidden = np.maximum(pre, 0.0)
    if head is not None:
        h = x + hidden @ backbone.w2.T + backbone.b2
        if grad_out.shape != (x.shape[0], head.w.shape[0]):
            raise ValueError(f"grad_out shape {grad_out.shape} does not match head output")
        grad_head = grad_out.T @ h
        grad_h = grad_out @ head.w
    else:
        if grad_out.shape != x.shape:
            raise ValueError(f"grad_out shape {grad_out.shape} does not match output {x.shape}")
        grad_h = grad_out
    grad_w2 = grad_h.T @ hidden
    grad_b2 = grad_h.sum(axis=0)
    grad_hidden = (grad_h @ backbone.w2) * (pre > 0.0)
    grads = {
        "w1": grad_hidden.T @ x,
        "b1": grad_hidden.sum(axis=0),
        "w2": grad_w2,
        "b2": grad_b2,
    }
    if head is not None:
        grads["head_w"] = grad_head
    return grads


@dataclass
class AdamState:
    """Adam moment accumulators plus hyperparameters, one entry per tensor."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def copy(self) -> "AdamState":
        return AdamState(
            lr=self.lr,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.eps,
            step=self.step,
            m={k: a.copy() for k, a in self.m.items()},
            v={k: a.copy() for k, a in self.v.items()},
        )


def adam_init(params: dict[str, np.ndarray], lr: float, **hyper) -> AdamState:
    state = AdamState(lr=lr, **hyper)
    state.m = {k: np.zeros_like(p) for k, p in params.items()}
    state.v = {k: np.zeros_like(p) for k, p in params.items()}
    return state


def adam_step(
    state: AdamState, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update. Functional: inputs are not mutated."""
    new = state.copy()
    new.step += 1
    t = new.step
    out = {}
    for key, p in params.items():
        g = grads[key]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != param shape {p.shape} for {key!r}")
        new.m[key] = state.beta1 * new.m[key] + (1.0 - state.beta1) * g
        new.v[key] = state.beta2 * new.v[key] + (1.0 - state.beta2) * g * g
        if not (np.any(new.m[key]) or np.any(new.v[key])):
            # Exact stationary tensor: reuse the array unchanged so repeated
            # forward passes stay bit-identical (a recomputed p - 0.0 can
            # land at a different alignment and wobble BLAS rounding, which
            # Adam's normalization would then amplify to lr-scale steps).
            out[key] = p
            continue
        m_hat = new.m[key] / (1.0 - state.beta1**t)
        v_hat = new.v[key] / (1.0 - state.beta2**t)
        out[key] = p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return out, new


def backbone_tensors(p: BackboneParams) -> dict[str, np.ndarray]:
    return {"w1": p.w1, "b1": p.b1, "w2": p.w2, "b2": p.b2}


def model_tensors(backbone: BackboneParams, head: HeadParams | None) -> dict[str, np.ndarray]:
    tensors = backbone_tensors(backbone)
    if head is not None:
        tensors["head_w"] = head.w
    return tensors


def apply_tensors(
    backbone: BackboneParams, head: HeadParams | None, tensors: dict[str, np.ndarray]
) -> tuple[BackboneParams, HeadParams | None]:
    """Rebuild parameter structs from a tensor dict (inverse of model_tensors)."""
    new_backbone = BackboneParams(
        w1=tensors["w1"], b1=tensors["b1"], w2=tensors["w2"], b2=tensors["b2"]
    )
    new_head = None if head is None else HeadParams(w=tensors["head_w"])
    return new_backbone, new_head


LossFn = Callable[[np.ndarray], tuple[float, np.ndarray]]


def finite_diff_check(
    backbone: BackboneParams,
    head: HeadParams | None,
    x: np.ndarray,
    loss_fn: LossFn,
    epsilon: float = 1e-5,
    analytic: dict[str, np.ndarray] | None = None,
) -> float:
    """Worst disagreement between analytic and numeric gradients, relative
    to the largest gradient magnitude across all tensors.

    loss_fn maps the model output to (value, dL/d_output). Every entry of
    every parameter tensor is perturbed by ±epsilon (central differences).
    Normalizing by the global gradient scale keeps finite-difference noise
    on genuinely zero entries (the loss is translation invariant, so b2's
    gradient vanishes) from registering as disagreement. A model where
    both sides vanish everywhere (loss identically 0) scores 0. Pass
    `analytic` to check externally supplied gradients instead of the
    built-in ones.
    """
    x = np.asarray(x, dtype=np.float64)
    _, grad_out = loss_fn(model_forward(backbone, head, x))
    if analytic is None:
        analytic = backprop_through_model(backbone, head, x, grad_out)

    worst_diff = 0.0
    scale = 0.0
    tensors = model_tensors(backbone.copy(), None if head is None else head.copy())
    for key, tensor in tensors.items():
        numeric = np.zeros_like(tensor)
        flat = tensor.reshape(-1)
        num_flat = numeric.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + epsilon
            b, hd = apply_tensors(backbone, head, tensors)
            plus, _ = loss_fn(model_forward(b, hd, x))
            flat[idx] = orig - epsilon
            b, hd = apply_tensors(backbone, head, tensors)
            minus, _ = loss_fn(model_forward(b, hd, x))
            flat[idx] = orig
            num_flat[idx] = (plus - minus) / (2.0 * epsilon)
        worst_diff = max(worst_diff, float(np.max(np.abs(analytic[key] - numeric))))
        scale = max(scale, np.max(np.abs(analytic[key])), np.max(np.abs(numeric)))
    if scale < 1e-12:
        return 0.0
    return worst_diff / scale
