"""Training loop, evaluation pass, and inference entry points.

One seeded RNG drives everything in a fixed order: parameter
initialization first, then per-epoch shuffles interleaved with
per-batch dropout masks. Single-threaded runs with the same config,
data, and seed therefore reproduce losses bit-for-bit. The embedding
table is fine-tuned alongside the recurrent weights; its padding row
receives no gradient and stays zero.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .checkpoint import ModelBundle
from .dataset import filter_for_classification, split_60_20_20
from .errors import InputError
from .metrics import MetricsReport, build_report, confusion_matrix
from .nn import (
    PROB_FLOOR,
    AdamState,
    BiLstmClassifier,
    adam_step,
    backward,
    batch_cross_entropy,
    batch_cross_entropy_grad,
    clip_by_global_norm,
    forward,
)
from .sentiment import BUILTIN_LEXICON, SENTIMENT_CLASSES, auto_label_dataset
from .tensor import SeededRng, tensor
from .textprep import (
    PAD_INDEX,
    EmbeddingMatrix,
    Vocab,
    build_vocab,
    clean_text,
    embed_batch,
    encode_pad,
    tokenize,
)

__all__ = [
    "RECOMMENDATION_CLASSES",
    "EpochStats",
    "LabeledSplit",
    "PreparedData",
    "Prediction",
    "TrainConfig",
    "TrainData",
    "TrainResult",
    "build_training_data",
    "evaluate",
    "predict",
    "predict_probabilities",
    "task_labels",
    "train",
    "write_history_csv",
]

RECOMMENDATION_CLASSES = ("not_recommended", "recommended")

_TASKS = ("recommendation", "sentiment")


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters; the defaults are the full-scale reference setting."""

    batch_size: int = 256
    cell_size: int = 256
    dropout_rate: float = 0.50
    epochs: int = 32
    learning_rate: float = 1e-3
    seq_len: int = 120
    vocab_size: int = 20_000
    min_freq: int = 2
    embedding_dim: int = 50
    seed: int = 0
    task: str = "recommendation"
    grad_clip: float = 5.0

    def __post_init__(self):
        for field in ("batch_size", "cell_size", "seq_len", "embedding_dim", "min_freq"):
            if getattr(self, field) < 1:
                raise ValueError(f"{field} must be >= 1, got {getattr(self, field)}")
        if self.vocab_size < 2:
            raise ValueError(f"vocab_size must be >= 2, got {self.vocab_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")
        if self.grad_clip <= 0:
            raise ValueError(f"grad_clip must be positive, got {self.grad_clip}")
        if self.task not in _TASKS:
            raise ValueError(f"unknown task {self.task!r}, expected one of {_TASKS}")

    @property
    def n_classes(self) -> int:
        return 2 if self.task == "recommendation" else 3

    @property
    def class_names(self) -> tuple:
        return RECOMMENDATION_CLASSES if self.task == "recommendation" else SENTIMENT_CLASSES

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LabeledSplit:
    """Encoded sequences (equal-length index tuples) with class labels."""

    sequences: tuple
    labels: tuple

    def __post_init__(self):
        if len(self.sequences) != len(self.labels):
            raise ValueError(
                f"{len(self.sequences)} sequences but {len(self.labels)} labels"
            )
        lengths = {len(s) for s in self.sequences}
        if len(lengths) > 1:
            raise ValueError(f"sequences must share one length, got lengths {sorted(lengths)}")

    def __len__(self) -> int:
        return len(self.sequences)


@dataclass(frozen=True)
class TrainData:
    """Train and validation splits plus the label space they use."""

    train: LabeledSplit
    validation: LabeledSplit
    n_classes: int
    class_names: tuple

    def __post_init__(self):
        if len(self.class_names) != self.n_classes:
            raise ValueError(
                f"{len(self.class_names)} class names for {self.n_classes} classes"
            )
        for split in (self.train, self.validation):
            for label in split.labels:
                if not 0 <= label < self.n_classes:
                    raise ValueError(f"label {label} outside [0, {self.n_classes})")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    val_acc: float


@dataclass(frozen=True)
class TrainResult:
    model: BiLstmClassifier
    embeddings: EmbeddingMatrix
    history: tuple
    config: TrainConfig


@dataclass(frozen=True)
class Prediction:
    label: str
    label_index: int
    probabilities: dict
    empty_input: bool


def task_labels(records, task: str, lexicon=BUILTIN_LEXICON):
    """Class index per record: recommendation flag, or lexicon sentiment."""
    if task == "recommendation":
        return [int(r.recommended) for r in records], RECOMMENDATION_CLASSES
    if task == "sentiment":
        labels, _ = auto_label_dataset(records, lexicon)
        return [SENTIMENT_CLASSES.index(lab) for lab in labels], SENTIMENT_CLASSES
    raise ValueError(f"unknown task {task!r}, expected one of {_TASKS}")


@dataclass(frozen=True)
class PreparedData:
    """Everything train/evaluate need, derived from raw records."""

    data: TrainData
    test: LabeledSplit
    vocab: Vocab
    dropped: int


def build_training_data(records, config: TrainConfig, lexicon=BUILTIN_LEXICON) -> PreparedData:
    """Filter, split 60/20/20, build the vocabulary, and encode.

    The vocabulary is built from the training split only, so validation
    and test tokens unseen in training map to the out-of-vocabulary index.
    """
    kept, dropped = filter_for_classification(records)
    split = split_60_20_20(kept, config.seed)
    token_lists = [tokenize(clean_text(r.review_text)) for r in kept]
    train_corpus = [token_lists[i] for i in split.train]
    vocab = build_vocab(train_corpus, min_freq=config.min_freq, max_size=config.vocab_size)
    labels, class_names = task_labels(kept, config.task, lexicon)

    def encode(index_group):
        sequences = tuple(
            encode_pad(token_lists[i], vocab, config.seq_len).indices for i in index_group
        )
        return LabeledSplit(sequences=sequences, labels=tuple(labels[i] for i in index_group))

    data = TrainData(
        train=encode(split.train),
        validation=encode(split.validation),
        n_classes=config.n_classes,
        class_names=class_names,
    )
    return PreparedData(data=data, test=encode(split.test), vocab=vocab, dropped=dropped)


def _probability_rows(model, emb_table, sequences, batch_size):
    """Eval-mode softmax outputs, one tuple of class probabilities per sequence."""
    emb = EmbeddingMatrix(emb_table)
    idx_all = np.asarray([list(s) for s in sequences], dtype=np.int64)
    rows = []
    for start in range(0, len(sequences), batch_size):
        idx = idx_all[start:start + batch_size]
        probs, _ = forward(model, embed_batch(idx, emb))
        rows.extend(tuple(float(v) for v in probs.a[:, b]) for b in range(probs.cols))
    return rows


def _loss_and_accuracy(rows, labels):
    loss = 0.0
    correct = 0
    for row, label in zip(rows, labels):
        loss -= math.log(max(row[label], PROB_FLOOR))
        if int(np.argmax(row)) == label:
            correct += 1
    return loss / len(rows), correct / len(rows)


def train(config: TrainConfig, data: TrainData, embeddings: EmbeddingMatrix) -> TrainResult:
    """Mini-batch training with Adam and global-norm gradient clipping.

    Returns the final-epoch model (no early stopping) plus one
    EpochStats row per epoch. Raises on a non-finite loss rather than
    letting a diverged run continue silently.
    """
    if len(data.train) == 0:
        raise InputError("training split is empty")
    if len(data.validation) == 0:
        raise InputError("validation split is empty")
    if data.n_classes != config.n_classes:
        raise ValueError(
            f"data has {data.n_classes} classes but task {config.task!r} "
            f"expects {config.n_classes}"
        )
    if embeddings.dim != config.embedding_dim:
        raise ValueError(
            f"embedding dim {embeddings.dim} does not match config "
            f"embedding_dim {config.embedding_dim}"
        )

    rng = SeededRng(config.seed)
    model = BiLstmClassifier.build(
        config.cell_size, config.embedding_dim, config.n_classes, rng
    )
    params = [t for _, t in model.param_blocks()] + [embeddings.table]
    adam = AdamState.for_params(params)
    idx_all = np.asarray([list(s) for s in data.train.sequences], dtype=np.int64)
    n = len(data.train)

    history = []
    for epoch in range(1, config.epochs + 1):
        order = list(range(n))
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            idx = idx_all[batch]
            targets = [data.train.labels[i] for i in batch]
            emb = EmbeddingMatrix(params[-1])
            xs = embed_batch(idx, emb)
            probs, cache = forward(
                model, xs, dropout_rate=config.dropout_rate, rng=rng, training=True
            )
            loss = batch_cross_entropy(probs, targets)
            if not math.isfinite(loss):
                raise ArithmeticError(
                    f"non-finite training loss {loss!r} at epoch {epoch}, "
                    f"batch starting at {start}"
                )
            grads = backward(model, cache, batch_cross_entropy_grad(probs, targets))
            dE = np.zeros((emb.vocab_size, emb.dim))
            for t, dx in enumerate(grads.dxs):
                np.add.at(dE, idx[:, t], dx.a.T)
            dE[PAD_INDEX] = 0.0
            clipped, _ = clip_by_global_norm(
                grads.blocks() + [tensor(dE)], config.grad_clip
            )
            params, adam = adam_step(params, clipped, adam, config.learning_rate)
            model = model.with_blocks(params[:-1])
            epoch_loss += loss * len(batch)
        val_rows = _probability_rows(
            model, params[-1], data.validation.sequences, config.batch_size
        )
        val_loss, val_acc = _loss_and_accuracy(val_rows, data.validation.labels)
        history.append(
            EpochStats(
                epoch=epoch,
                train_loss=epoch_loss / n,
                val_loss=val_loss,
                val_acc=val_acc,
            )
        )

    return TrainResult(
        model=model,
        embeddings=EmbeddingMatrix(params[-1]),
        history=tuple(history),
        config=config,
    )


def predict_probabilities(model, embeddings: EmbeddingMatrix, sequences, batch_size):
    """Class-probability tuples for each encoded sequence, in input order."""
    if not sequences:
        return []
    return _probability_rows(model, embeddings.table, sequences, batch_size)


def evaluate(model, embeddings: EmbeddingMatrix, split: LabeledSplit,
             batch_size: int, class_names) -> MetricsReport:
    """Argmax predictions over a split, summarized as a MetricsReport."""
    if len(split) == 0:
        raise InputError("evaluation split is empty")
    rows = _probability_rows(model, embeddings.table, split.sequences, batch_size)
    mean_loss, _ = _loss_and_accuracy(rows, split.labels)
    preds = [int(np.argmax(row)) for row in rows]
    confusion = confusion_matrix(split.labels, preds, len(class_names))
    return build_report(confusion, class_names, mean_loss)


def predict(bundle: ModelBundle, vocab: Vocab, text: str) -> Prediction:
    """Label one raw text with the bundle's model.

    The vocabulary must carry the fingerprint the checkpoint was trained
    with. Text that cleans down to nothing is still scored (an all-padding
    sequence) but flagged as empty input.
    """
    if vocab.fingerprint() != bundle.vocab_fingerprint:
        raise InputError(
            "vocabulary fingerprint mismatch: this vocabulary is not the one "
            "the model was trained with"
        )
    tokens = tokenize(clean_text(text))
    encoded = encode_pad(tokens, vocab, bundle.seq_len)
    rows = _probability_rows(
        bundle.model, bundle.embeddings.table, [encoded.indices], batch_size=1
    )
    label_index = int(np.argmax(rows[0]))
    return Prediction(
        label=bundle.class_names[label_index],
        label_index=label_index,
        probabilities={
            name: rows[0][i] for i, name in enumerate(bundle.class_names)
        },
        empty_input=not tokens,
    )


def write_history_csv(history, path) -> None:
    """Write per-epoch stats as `epoch,train_loss,val_loss,val_acc` rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch,train_loss,val_loss,val_acc\n")
        for row in history:
            fh.write(f"{row.epoch},{row.train_loss!r},{row.val_loss!r},{row.val_acc!r}\n")
