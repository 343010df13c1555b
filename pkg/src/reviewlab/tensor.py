"""Dense 2-D float64 matrices and a deterministic, seedable RNG.

Everything downstream (the LSTM, the embedding table, the analytics
correlations) runs on these primitives.  Tensors are immutable: the backing
array is marked read-only at construction and every operation returns a
fresh instance, so identical inputs always produce bit-identical outputs.

The RNG is splitmix64, a counter-based 64-bit generator.  Because each
output depends only on ``(seed, counter)``, the stream is reproducible
across platforms and the bulk-fill path can be vectorized without changing
the values a scalar walk would produce.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


class Tensor:
    """A ``rows x cols`` matrix of float64, stored row-major."""

    __slots__ = ("a",)

    def __init__(self, values):
        a = np.array(values, dtype=np.float64, order="C")
        if a.ndim != 2:
            raise ValueError(f"tensor values must be 2-D, got {a.ndim}-D input")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    @property
    def data(self) -> np.ndarray:
        """Flat row-major view of the entries (read-only)."""
        return self.a.reshape(-1)

    def copy(self) -> "Tensor":
        return _wrap(self.a.copy())

    def to_lists(self) -> list[list[float]]:
        return self.a.tolist()

    def transpose(self) -> "Tensor":
        return _wrap(np.ascontiguousarray(self.a.T))

    def __repr__(self) -> str:
        return f"Tensor({self.rows}x{self.cols})"

    def __add__(self, other):
        if isinstance(other, Tensor):
            _check_broadcast("add", self, other)
            return _wrap(self.a + other.a)
        return _wrap(self.a + float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Tensor):
            _check_broadcast("sub", self, other)
            return _wrap(self.a - other.a)
        return _wrap(self.a - float(other))

    def __rsub__(self, other):
        return _wrap(float(other) - self.a)

    def __mul__(self, other):
        """Hadamard product for tensors, scaling for scalars."""
        if isinstance(other, Tensor):
            _check_broadcast("hadamard", self, other)
            return _wrap(self.a * other.a)
        return _wrap(self.a * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            _check_broadcast("divide", self, other)
            return _wrap(self.a / other.a)
        return _wrap(self.a / float(other))

    def __neg__(self):
        return _wrap(-self.a)

    def __matmul__(self, other):
        return matmul(self, other)


def _wrap(a: np.ndarray) -> Tensor:
    """Take ownership of a float64 2-D array without copying."""
    t = object.__new__(Tensor)
    if not (a.dtype == np.float64 and a.ndim == 2 and a.flags.c_contiguous):
        a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    object.__setattr__(t, "a", a)
    return t


def _check_broadcast(op: str, a: Tensor, b: Tensor) -> None:
    # Exact shape match, or a single-column operand broadcast across columns
    # (used for bias terms when several examples share one weight set).
    if a.shape == b.shape:
        return
    if a.rows == b.rows and (a.cols == 1 or b.cols == 1):
        return
    raise ValueError(f"{op} shape mismatch: {a.shape} vs {b.shape}")


def tensor(values) -> Tensor:
    return Tensor(values)


def zeros(rows: int, cols: int) -> Tensor:
    return _wrap(np.zeros((rows, cols)))


def full(rows: int, cols: int, value: float) -> Tensor:
    return _wrap(np.full((rows, cols), float(value)))


def row(values) -> Tensor:
    """A 1 x n tensor from a flat sequence."""
    return _wrap(np.array(values, dtype=np.float64).reshape(1, -1))


def col(values) -> Tensor:
    """An n x 1 tensor from a flat sequence."""
    return _wrap(np.array(values, dtype=np.float64).reshape(-1, 1))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.cols != b.rows:
        raise ValueError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return _wrap(a.a @ b.a)


def add(a: Tensor, b: Tensor) -> Tensor:
    return a + b


def sub(a: Tensor, b: Tensor) -> Tensor:
    return a - b


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    return a * b


def sigmoid(x: Tensor) -> Tensor:
    """Elementwise 1 / (1 + exp(-x)).

    Computed piecewise so large magnitudes saturate cleanly to 0.0 / 1.0
    instead of overflowing the exponential.
    """
    a = x.a
    out = np.empty_like(a)
    pos = a >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
    e = np.exp(a[~pos])
    out[~pos] = e / (1.0 + e)
    return _wrap(out)


def tanh_act(x: Tensor) -> Tensor:
    return _wrap(np.tanh(x.a))


def sqrt_elem(x: Tensor) -> Tensor:
    """Elementwise square root; entries must be nonnegative."""
    if np.any(x.a < 0):
        raise ValueError("sqrt_elem requires nonnegative entries")
    return _wrap(np.sqrt(x.a))


def softmax_rows(x: Tensor) -> Tensor:
    """Per-row softmax in max-subtracted form; each row sums to 1."""
    shifted = x.a - x.a.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return _wrap(e / e.sum(axis=1, keepdims=True))


def softmax_cols(x: Tensor) -> Tensor:
    """Per-column softmax; columns are class-score vectors."""
    shifted = x.a - x.a.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return _wrap(e / e.sum(axis=0, keepdims=True))


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    """Stack side by side: (r, c1) + (r, c2) -> (r, c1+c2)."""
    if a.rows != b.rows:
        raise ValueError(f"concat_cols row mismatch: {a.shape} vs {b.shape}")
    return _wrap(np.hstack([a.a, b.a]))


def concat_rows(a: Tensor, b: Tensor) -> Tensor:
    """Stack on top of each other: (r1, c) + (r2, c) -> (r1+r2, c).

    This is how a previous hidden state and the current input are joined
    into the single column the gate weight matrices act on.
    """
    if a.cols != b.cols:
        raise ValueError(f"concat_rows column mismatch: {a.shape} vs {b.shape}")
    return _wrap(np.vstack([a.a, b.a]))


def sum_cols(x: Tensor) -> Tensor:
    """Row sums as an (rows, 1) tensor."""
    return _wrap(x.a.sum(axis=1, keepdims=True))


def slice_rows(x: Tensor, start: int, stop: int) -> Tensor:
    return _wrap(x.a[start:stop].copy())


class SeededRng:
    """splitmix64 stream: output i is a pure function of (seed, i).

    ``fill`` produces exactly the values ``next_u64``/``uniform`` would,
    in the same order, so vectorized and scalar consumers interleave freely.
    """

    __slots__ = ("seed", "_i")

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._i = 0

    def next_u64(self) -> int:
        self._i += 1
        z = (self.seed + self._i * _GOLDEN) & _MASK64
        z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Next double in [0, 1), using the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def fill(self, n: int) -> np.ndarray:
        """n uniforms in [0, 1) as a float64 array, advancing the stream."""
        if n < 0:
            raise ValueError("fill size must be >= 0")
        idx = np.arange(self._i + 1, self._i + n + 1, dtype=np.uint64)
        self._i += n
        with np.errstate(over="ignore"):
            z = (np.uint64(self.seed) + idx * np.uint64(_GOLDEN))
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
            z = z ^ (z >> np.uint64(31))
        return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def randrange(self, n: int) -> int:
        """Integer in [0, n).  Plain modulo; bias is negligible for n << 2^64."""
        if n <= 0:
            raise ValueError("randrange bound must be positive")
        return self.next_u64() % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]


def init_uniform(rows: int, cols: int, rng: SeededRng, scale: float) -> Tensor:
    """i.i.d. uniform entries on [-scale, +scale], deterministic per seed."""
    if scale < 0:
        raise ValueError(f"scale must be >= 0, got {scale}")
    u = rng.fill(rows * cols)
    return _wrap((scale * (2.0 * u - 1.0)).reshape(rows, cols))
