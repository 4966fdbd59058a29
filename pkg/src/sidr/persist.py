"""Bit-exact JSON serialization of parameters, optimizer state, and sessions.

Tensors are dumped as base64 of their raw little-endian bytes plus a
shape/dtype header, so a save/load round-trip reproduces every float
exactly and a resumed session continues identically to an uninterrupted
one. Snapshots carry a format version; mismatches are rejected.
"""

from __future__ import annotations

import base64
from dataclasses import asdict
from typing import Any

import numpy as np

from .corpus import Corpus, DocRecord
from .mds import MdsConfig
from .nn import AdamState, BackboneParams, HeadParams
from .pipelines import InteractionBatch, ModelState, Move, PipelineConfig

SNAPSHOT_VERSION = 1


class SnapshotError(ValueError):
    """A snapshot is malformed or has an unsupported version."""


def tensor_to_obj(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a)
    return {
        "shape": list(a.shape),
        "dtype": str(a.dtype),
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def tensor_from_obj(obj: dict) -> np.ndarray:
    try:
        raw = base64.b64decode(obj["data"])
        a = np.frombuffer(raw, dtype=np.dtype(obj["dtype"]))
        return a.reshape(obj["shape"]).copy()
    except (KeyError, ValueError, TypeError) as exc:
        raise SnapshotError(f"malformed tensor object: {exc}") from exc


def _opt_tensor_to_obj(a: np.ndarray | None) -> dict | None:
    return None if a is None else tensor_to_obj(a)


def _opt_tensor_from_obj(obj: dict | None) -> np.ndarray | None:
    return None if obj is None else tensor_from_obj(obj)


def corpus_to_obj(corpus: Corpus) -> dict:
    vectors = None
    if corpus.is_vectorized:
        vectors = tensor_to_obj(corpus.matrix())
    return {
        "ids": corpus.ids,
        "texts": [d.text for d in corpus.docs],
        "labels": [d.label for d in corpus.docs],
        "vectors": vectors,
    }


def corpus_from_obj(obj: dict) -> Corpus:
    vectors = _opt_tensor_from_obj(obj.get("vectors"))
    docs = []
    for i, doc_id in enumerate(obj["ids"]):
        docs.append(
            DocRecord(
                id=doc_id,
                text=obj["texts"][i],
                label=obj["labels"][i],
                vector=None if vectors is None else vectors[i],
            )
        )
    return Corpus(docs)


def adam_to_obj(state: AdamState) -> dict:
    return {
        "lr": state.lr,
        "beta1": state.beta1,
        "beta2": state.beta2,
        "eps": state.eps,
        "step": state.step,
        "m": {k: tensor_to_obj(v) for k, v in state.m.items()},
        "v": {k: tensor_to_obj(v) for k, v in state.v.items()},
    }


def adam_from_obj(obj: dict) -> AdamState:
    return AdamState(
        lr=obj["lr"],
        beta1=obj["beta1"],
        beta2=obj["beta2"],
        eps=obj["eps"],
        step=obj["step"],
        m={k: tensor_from_obj(v) for k, v in obj["m"].items()},
        v={k: tensor_from_obj(v) for k, v in obj["v"].items()},
    )


def config_to_obj(cfg: PipelineConfig) -> dict:
    return asdict(cfg)


def config_from_obj(obj: dict) -> PipelineConfig:
    fields = dict(obj)
    fields["mds"] = MdsConfig(**fields["mds"])
    return PipelineConfig(**fields)


def model_state_to_obj(state: ModelState) -> dict:
    return {
        "pipeline": state.pipeline,
        "corpus": corpus_to_obj(state.corpus),
        "config": config_to_obj(state.config),
        "backbone": {
            "w1": tensor_to_obj(state.backbone.w1),
            "b1": tensor_to_obj(state.backbone.b1),
            "w2": tensor_to_obj(state.backbone.w2),
            "b2": tensor_to_obj(state.backbone.b2),
        },
        "head": None if state.head is None else tensor_to_obj(state.head.w),
        "adam": adam_to_obj(state.adam),
        "iteration": state.iteration,
        "mds_cache": _opt_tensor_to_obj(state.mds_cache),
    }


def model_state_from_obj(obj: dict) -> ModelState:
    backbone = BackboneParams(
        w1=tensor_from_obj(obj["backbone"]["w1"]),
        b1=tensor_from_obj(obj["backbone"]["b1"]),
        w2=tensor_from_obj(obj["backbone"]["w2"]),
        b2=tensor_from_obj(obj["backbone"]["b2"]),
    )
    head = None if obj["head"] is None else HeadParams(w=tensor_from_obj(obj["head"]))
    return ModelState(
        pipeline=obj["pipeline"],
        corpus=corpus_from_obj(obj["corpus"]),
        config=config_from_obj(obj["config"]),
        backbone=backbone,
        head=head,
        adam=adam_from_obj(obj["adam"]),
        iteration=obj["iteration"],
        mds_cache=_opt_tensor_from_obj(obj.get("mds_cache")),
    )


def batch_to_obj(batch: InteractionBatch) -> dict:
    return {
        "moves": [{"id": m.doc_id, "x": m.x, "y": m.y} for m in batch.moves],
        "short_sampled": batch.short_sampled,
    }


def batch_from_obj(obj: dict) -> InteractionBatch:
    moves = [Move(m["id"], m["x"], m["y"]) for m in obj["moves"]]
    return InteractionBatch(moves=moves, short_sampled=obj.get("short_sampled", False))


def check_version(obj: Any) -> None:
    if not isinstance(obj, dict) or "version" not in obj:
        raise SnapshotError("snapshot has no version header")
    if obj["version"] != SNAPSHOT_VERSION:
        raise SnapshotError(
            f"snapshot version {obj['version']} unsupported (expected {SNAPSHOT_VERSION})"
        )
