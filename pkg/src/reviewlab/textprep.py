"""Text cleaning, tokenization, vocabulary, and embedding lookup.

The cleaning rule is deliberately blunt: delimiters and punctuation become
spaces, everything is lowercased, and only [a-z0-9' ] survives.
Apostrophes are kept so contractions like "don't" reach the sentiment
lexicon as single tokens.

Index 0 of every vocabulary is the padding token and index 1 is the
out-of-vocabulary token.  The embedding row for padding is all-zero and is
kept out of gradient updates, so padded positions contribute nothing.
"""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .tensor import SeededRng, Tensor, col, init_uniform, tensor

PAD_INDEX = 0
OOV_INDEX = 1
PAD_TOKEN = "<pad>"
OOV_TOKEN = "<oov>"

_NON_ALPHANUM = re.compile(r"[^a-z0-9' ]")
_MULTI_SPACE = re.compile(r" {2,}")


def clean_text(raw: str) -> str:
    """Lowercase; CR/LF and punctuation to spaces; collapse; trim."""
    s = raw.replace("\r", " ").replace("\n", " ").lower()
    s = _NON_ALPHANUM.sub(" ", s)
    s = _MULTI_SPACE.sub(" ", s)
    return s.strip()


def tokenize(clean: str) -> list[str]:
    """Whitespace split; empty input gives an empty list."""
    return clean.split()


class Vocab:
    """Dense token -> index map with reserved padding and OOV slots."""

    __slots__ = ("_index", "_tokens", "_frozen")

    def __init__(self):
        self._index: dict[str, int] = {PAD_TOKEN: PAD_INDEX, OOV_TOKEN: OOV_INDEX}
        self._tokens: list[str] = [PAD_TOKEN, OOV_TOKEN]
        self._frozen = False

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "Vocab":
        self._frozen = True
        return self

    def add(self, token: str) -> int:
        """Insert a token (idempotent); frozen vocabularies reject inserts."""
        if token in self._index:
            return self._index[token]
        if self._frozen:
            raise ValueError(f"cannot add {token!r} to a frozen vocabulary")
        idx = len(self._tokens)
        self._index[token] = idx
        self._tokens.append(token)
        return idx

    def index_of(self, token: str) -> int:
        """Index for a token; unknown tokens map to the OOV slot."""
        return self._index.get(token, OOV_INDEX)

    def token_of(self, index: int) -> str:
        return self._tokens[index]

    def tokens(self) -> list[str]:
        return list(self._tokens)

    def fingerprint(self) -> str:
        """sha256 over the ordered token list; identifies the vocabulary."""
        joined = "\n".join(self._tokens).encode("utf-8")
        return hashlib.sha256(joined).hexdigest()


def build_vocab(corpus, min_freq: int, max_size: int) -> Vocab:
    """Rank tokens by (frequency desc, token asc); keep at most max_size - 2.

    Tokens below min_freq are dropped.  The result is frozen.
    """
    if min_freq < 1:
        raise ValueError(f"min_freq must be >= 1, got {min_freq}")
    if max_size < 2:
        raise ValueError(f"max_size must leave room for pad/oov, got {max_size}")
    counts = Counter(token for tokens in corpus for token in tokens)
    eligible = [t for t, c in counts.items() if c >= min_freq]
    ranked = sorted(eligible, key=lambda t: (-counts[t], t))
    vocab = Vocab()
    for token in ranked[: max_size - 2]:
        vocab.add(token)
    return vocab.freeze()


@dataclass(frozen=True)
class EncodedReview:
    """Fixed-length index sequence plus the pre-truncation token count."""

    indices: tuple
    original_length: int


def encode_pad(tokens, vocab: Vocab, L: int) -> EncodedReview:
    """Map tokens to indices, keep the first L, post-pad with the PAD index."""
    if L < 1:
        raise ValueError(f"sequence length must be >= 1, got {L}")
    idx = [vocab.index_of(t) for t in tokens[:L]]
    idx.extend([PAD_INDEX] * (L - len(idx)))
    return EncodedReview(indices=tuple(idx), original_length=len(tokens))


@dataclass(frozen=True)
class EmbeddingMatrix:
    """(vocab_size, dim) table; row 0 is the all-zero padding row."""

    table: Tensor
    trainable: bool = True

    def __post_init__(self):
        if not np.all(np.isfinite(self.table.a)):
            raise ValueError("embedding table contains non-finite entries")
        if np.any(self.table.a[PAD_INDEX] != 0.0):
            raise ValueError("padding row of the embedding table must stay zero")

    @property
    def vocab_size(self) -> int:
        return self.table.rows

    @property
    def dim(self) -> int:
        return self.table.cols


def random_embeddings(vocab_size: int, dim: int, rng: SeededRng,
                      scale: float = 0.25) -> EmbeddingMatrix:
    """Uniform random table with the padding row zeroed."""
    base = init_uniform(vocab_size, dim, rng, scale).a.copy()
    base[PAD_INDEX] = 0.0
    return EmbeddingMatrix(table=tensor(base))


def load_glove(path, vocab: Vocab, rng: SeededRng) -> EmbeddingMatrix:
    """Read a GloVe text file: one `token v1 ... vd` entry per line.

    Rows for in-vocabulary tokens come from the file.  Tokens the file
    lacks, and the OOV row, are drawn uniform with scale 0.25 from rng;
    the padding row is zero.  The dimensionality is inferred from the
    first line and enforced on every later line.  Later duplicate tokens
    overwrite earlier ones.
    """
    dim = None
    found: dict[int, list[float]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped.strip():
                raise InputError(f"{path}: line {line_num}: empty line")
            parts = stripped.split(" ")
            token, raw_vals = parts[0], parts[1:]
            if dim is None:
                if not raw_vals:
                    raise InputError(f"{path}: line 1: no vector components")
                dim = len(raw_vals)
            if len(raw_vals) != dim:
                raise InputError(
                    f"{path}: line {line_num}: expected {dim} components, got {len(raw_vals)}"
                )
            try:
                vec = [float(v) for v in raw_vals]
            except ValueError:
                raise InputError(f"{path}: line {line_num}: non-numeric component") from None
            if token in vocab:
                idx = vocab.index_of(token)
                if idx > OOV_INDEX:
                    found[idx] = vec
    if dim is None:
        raise InputError(f"{path}: empty embeddings file")
    # One table-sized draw keeps the rows for absent tokens independent of
    # which tokens happen to be present in the file.
    base = init_uniform(len(vocab), dim, rng, 0.25).a.copy()
    base[PAD_INDEX] = 0.0
    for idx, vec in found.items():
        base[idx] = vec
    return EmbeddingMatrix(table=tensor(base))


def embed(encoded: EncodedReview, emb: EmbeddingMatrix) -> list[Tensor]:
    """One (dim, 1) column per position; padding positions are zero."""
    out = []
    for i in encoded.indices:
        if not 0 <= i < emb.vocab_size:
            raise ValueError(f"token index {i} out of range for vocab size {emb.vocab_size}")
        out.append(col(emb.table.a[i]))
    return out


def embed_batch(index_matrix, emb: EmbeddingMatrix) -> list[Tensor]:
    """Batch lookup: (B, T) indices -> T tensors of shape (dim, B)."""
    idx = np.asarray(index_matrix, dtype=np.int64)
    if idx.ndim != 2:
        raise ValueError(f"index matrix must be 2-D, got {idx.ndim}-D")
    if idx.size and (idx.min() < 0 or idx.max() >= emb.vocab_size):
        raise ValueError(
            f"token index out of range for vocab size {emb.vocab_size}"
        )
    return [tensor(emb.table.a[idx[:, t]].T) for t in range(idx.shape[1])]


def save_vocab(vocab: Vocab, path) -> None:
    """Write `token<TAB>index` lines in index order."""
    with open(path, "w", encoding="utf-8") as fh:
        for idx, token in enumerate(vocab.tokens()):
            fh.write(f"{token}\t{idx}\n")


def load_vocab(path) -> Vocab:
    """Read a vocabulary exported by save_vocab; validates the layout."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped:
                continue
            parts = stripped.split("\t")
            if len(parts) != 2:
                raise InputError(f"{path}: line {line_num}: expected token<TAB>index")
            token, raw_idx = parts
            try:
                idx = int(raw_idx)
            except ValueError:
                raise InputError(f"{path}: line {line_num}: bad index {raw_idx!r}") from None
            rows.append((line_num, token, idx))
    if len(rows) < 2 or rows[0][1:] != (PAD_TOKEN, PAD_INDEX) or rows[1][1:] != (OOV_TOKEN, OOV_INDEX):
        raise InputError(f"{path}: vocabulary must start with the pad and oov rows")
    vocab = Vocab()
    for line_num, token, idx in rows[2:]:
        got = vocab.add(token)
        if got != idx:
            raise InputError(
                f"{path}: line {line_num}: index {idx} out of order, expected {got}"
            )
    return vocab.freeze()
