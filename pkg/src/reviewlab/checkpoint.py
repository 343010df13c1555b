"""Deterministic model checkpoints.

A checkpoint is a single binary file: a magic line, one JSON metadata
line (task, class names, sizes, vocabulary fingerprint, block shapes),
then the parameter blocks as raw little-endian float64 bytes in the
order the metadata declares. The format contains no timestamps, so
saving the same bundle twice produces byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .nn import BiLstmClassifier, BiLstmLayer, DenseParams, LstmParams
from .tensor import Tensor, tensor
from .textprep import EmbeddingMatrix

__all__ = ["MAGIC", "ModelBundle", "load_checkpoint", "save_checkpoint"]

MAGIC = b"reviewlab-checkpoint-v1\n"

TASKS = ("recommendation", "sentiment")


@dataclass(frozen=True)
class ModelBundle:
    """Everything inference needs: model, embeddings, and their pedigree."""

    task: str
    class_names: tuple
    seq_len: int
    vocab_fingerprint: str
    model: BiLstmClassifier
    embeddings: EmbeddingMatrix

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}, expected one of {TASKS}")
        if len(self.class_names) != self.model.head.n_classes:
            raise ValueError(
                f"{len(self.class_names)} class names for a "
                f"{self.model.head.n_classes}-class head"
            )
        if self.seq_len < 1:
            raise ValueError(f"seq_len must be >= 1, got {self.seq_len}")
        if self.embeddings.dim != self.model.layer.forward_params.input_size:
            raise ValueError(
                f"embedding dim {self.embeddings.dim} does not match model "
                f"input size {self.model.layer.forward_params.input_size}"
            )

    @property
    def cell_size(self) -> int:
        return self.model.layer.cell_size

    @property
    def embedding_dim(self) -> int:
        return self.embeddings.dim

    @property
    def n_classes(self) -> int:
        return self.model.head.n_classes


def _named_blocks(bundle: ModelBundle) -> list[tuple[str, Tensor]]:
    return [("embeddings", bundle.embeddings.table), *bundle.model.param_blocks()]


def save_checkpoint(bundle: ModelBundle, path) -> None:
    """Write the bundle to `path`; identical bundles give identical bytes."""
    blocks = _named_blocks(bundle)
    meta = {
        "format": 1,
        "task": bundle.task,
        "class_names": list(bundle.class_names),
        "seq_len": bundle.seq_len,
        "cell_size": bundle.cell_size,
        "embedding_dim": bundle.embedding_dim,
        "vocab_size": bundle.embeddings.vocab_size,
        "vocab_fingerprint": bundle.vocab_fingerprint,
        "blocks": [[name, t.rows, t.cols] for name, t in blocks],
    }
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(meta, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for _, t in blocks:
            fh.write(np.ascontiguousarray(t.a).astype("<f8", copy=False).tobytes())


_GATE_KEYS = ("W_f", "W_i", "W_C", "W_o", "b_f", "b_i", "b_C", "b_o")


def load_checkpoint(path, vocab=None) -> ModelBundle:
    """Read a checkpoint; with a vocab given, verify its fingerprint matches."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if not raw.startswith(MAGIC):
        raise InputError(f"{path}: not a checkpoint file (bad magic)")
    header_end = raw.find(b"\n", len(MAGIC))
    if header_end < 0:
        raise InputError(f"{path}: truncated checkpoint header")
    try:
        meta = json.loads(raw[len(MAGIC):header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: unreadable checkpoint metadata: {exc}") from exc
    if meta.get("format") != 1:
        raise InputError(f"{path}: unsupported checkpoint format {meta.get('format')!r}")

    tensors = {}
    offset = header_end + 1
    for name, rows, cols in meta["blocks"]:
        if name in tensors:
            raise InputError(f"{path}: duplicate block {name!r}")
        nbytes = 8 * rows * cols
        chunk = raw[offset:offset + nbytes]
        if len(chunk) != nbytes:
            raise InputError(f"{path}: truncated checkpoint in block {name!r}")
        tensors[name] = tensor(np.frombuffer(chunk, dtype="<f8").reshape(rows, cols))
        offset += nbytes
    if offset != len(raw):
        raise InputError(f"{path}: {len(raw) - offset} trailing bytes after last block")

    expected = {"embeddings", *(f"fwd.{k}" for k in _GATE_KEYS),
                *(f"bwd.{k}" for k in _GATE_KEYS), "head.W", "head.b"}
    if set(tensors) != expected:
        missing = sorted(expected - set(tensors))
        extra = sorted(set(tensors) - expected)
        raise InputError(f"{path}: unexpected block layout (missing {missing}, extra {extra})")

    try:
        model = BiLstmClassifier(
            layer=BiLstmLayer(
                forward_params=LstmParams(*(tensors[f"fwd.{k}"] for k in _GATE_KEYS)),
                backward_params=LstmParams(*(tensors[f"bwd.{k}"] for k in _GATE_KEYS)),
            ),
            head=DenseParams(W=tensors["head.W"], b=tensors["head.b"]),
        )
        bundle = ModelBundle(
            task=meta["task"],
            class_names=tuple(meta["class_names"]),
            seq_len=meta["seq_len"],
            vocab_fingerprint=meta["vocab_fingerprint"],
            model=model,
            embeddings=EmbeddingMatrix(tensors["embeddings"]),
        )
    except (KeyError, ValueError) as exc:
        raise InputError(f"{path}: inconsistent checkpoint contents: {exc}") from exc

    for field in ("cell_size", "embedding_dim"):
        if meta[field] != getattr(bundle, field):
            raise InputError(
                f"{path}: metadata says {field}={meta[field]} but blocks give "
                f"{getattr(bundle, field)}"
            )
    if meta["vocab_size"] != bundle.embeddings.vocab_size:
        raise InputError(
            f"{path}: metadata says vocab_size={meta['vocab_size']} but the "
            f"embedding table has {bundle.embeddings.vocab_size} rows"
        )
    if vocab is not None and vocab.fingerprint() != bundle.vocab_fingerprint:
        raise InputError(
            "vocabulary fingerprint mismatch: checkpoint was trained with a "
            "different vocabulary than the one supplied"
        )
    return bundle
