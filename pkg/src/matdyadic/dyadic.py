"""Finite dyadic tree over [0, 1): indexing, Haar analysis and synthesis.

Nodes are stored in binary-heap order: the interval ``[k 2^-j, (k+1) 2^-j)``
lives at index ``2^j - 1 + k``, its left half ``I-`` at ``2i + 1`` and its
right half ``I+`` at ``2i + 2``. A tree of depth ``N`` has ``2^(N+1) - 1``
nodes, of which the first ``2^N - 1`` are internal.

The array helpers work on values with arbitrary trailing shape, so the same
code aggregates vectors ``(2^N, d)``, matrices ``(2^N, d, d)`` and batches
``(2^N, d, m)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import InvalidInputError


class _Interval(NamedTuple):
    level: int
    position: int


class DyadicIndex(_Interval):
    """``[k 2^-j, (k+1) 2^-j)`` for level ``j`` and position ``k``."""

    __slots__ = ()

    def __new__(cls, level: int, position: int):
        if level < 0 or not 0 <= position < (1 << level):
            raise InvalidInputError(f"no dyadic interval at level {level}, position {position}")
        return super().__new__(cls, level, position)

    @property
    def index(self) -> int:
        return (1 << self.level) - 1 + self.position

    @property
    def length(self) -> float:
        return 2.0 ** -self.level

    @property
    def left(self) -> "DyadicIndex":
        return DyadicIndex(self.level + 1, 2 * self.position)

    @property
    def right(self) -> "DyadicIndex":
        return DyadicIndex(self.level + 1, 2 * self.position + 1)

    @property
    def parent(self) -> "DyadicIndex":
        if self.level == 0:
            raise InvalidInputError("the root interval has no parent")
        return DyadicIndex(self.level - 1, self.position // 2)

    def contains(self, other: "DyadicIndex") -> bool:
        if other.level < self.level:
            return False
        return other.position >> (other.level - self.level) == self.position

    def leaf_slice(self, depth: int) -> slice:
        """Slice of the level-``depth`` leaves lying inside this interval."""
        span = 1 << (depth - self.level)
        return slice(self.position * span, (self.position + 1) * span)

    @classmethod
    def from_index(cls, i: int) -> "DyadicIndex":
        level = (i + 1).bit_length() - 1
        return cls(level, i - (1 << level) + 1)


def node_count(depth: int) -> int:
    return (1 << (depth + 1)) - 1


def internal_count(depth: int) -> int:
    return (1 << depth) - 1


def level_slice(level: int) -> slice:
    return slice((1 << level) - 1, (1 << (level + 1)) - 1)


def intervals(max_level: int) -> Iterator[DyadicIndex]:
    """All intervals with level < ``max_level``, in heap order."""
    for j in range(max_level):
        for k in range(1 << j):
            yield DyadicIndex(j, k)


def node_lengths(n_nodes: int) -> np.ndarray:
    """``|I|`` for heap nodes ``0 .. n_nodes-1``."""
    levels = np.floor(np.log2(np.arange(1, n_nodes + 1))).astype(int)
    return 2.0 ** -levels


def depth_of(n_leaves: int) -> int:
    depth = n_leaves.bit_length() - 1
    if n_leaves < 1 or (1 << depth) != n_leaves:
        raise InvalidInputError(f"leaf count {n_leaves} is not a power of two")
    return depth


# -- raw array kernels -------------------------------------------------------

def tree_averages(leaves: np.ndarray) -> np.ndarray:
    """Bottom-up averages over every node, heap layout, shape ``(nodes, ...)``."""
    leaves = np.asarray(leaves, dtype=float)
    depth = depth_of(leaves.shape[0])
    out = np.empty((node_count(depth),) + leaves.shape[1:])
    out[level_slice(depth)] = leaves
    for j in range(depth - 1, -1, -1):
        child = out[level_slice(j + 1)]
        out[level_slice(j)] = 0.5 * (child[0::2] + child[1::2])
    return out


def haar_from_averages(avg: np.ndarray, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean and Haar coefficients ``(1/2)|I|^(1/2) (<f>_{I+} - <f>_{I-})``."""
    n_int = internal_count(depth)
    idx = np.arange(n_int)
    scale = 0.5 * np.sqrt(node_lengths(n_int))
    scale = scale.reshape((-1,) + (1,) * (avg.ndim - 1))
    coeffs = scale * (avg[2 * idx + 2] - avg[2 * idx + 1])
    return avg[0].copy(), coeffs


def analyze_array(leaves: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    leaves = np.asarray(leaves, dtype=float)
    return haar_from_averages(tree_averages(leaves), depth_of(leaves.shape[0]))


def synthesize_array(mean: np.ndarray, coeffs: np.ndarray, depth: int) -> np.ndarray:
    """Leaf values of ``mean + sum_I c_I h_I`` at the given depth."""
    n_coef = coeffs.shape[0]
    if n_coef > internal_count(depth):
        raise InvalidInputError(
            f"depth {depth} cannot resolve {n_coef} Haar coefficients"
        )
    cur = np.asarray(mean, dtype=float)[None, ...]
    for j in range(depth):
        sl = level_slice(j)
        if sl.start < n_coef:
            c = coeffs[sl] * 2.0 ** (j / 2.0)
        else:
            c = np.zeros_like(cur)
        nxt = np.empty((2 * cur.shape[0],) + cur.shape[1:])
        nxt[0::2] = cur - c
        nxt[1::2] = cur + c
        cur = nxt
    return cur


# -- value types -------------------------------------------------------------

@dataclass(frozen=True)
class VectorField:
    """Piecewise-constant R^d valued function, one vector per level-N leaf."""

    values: np.ndarray  # (2^N, d)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise InvalidInputError(f"vector field values must be 2-D, got {v.shape}")
        depth_of(v.shape[0])
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("vector field has non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def depth(self) -> int:
        return depth_of(self.values.shape[0])

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def norm_sq(self) -> float:
        """Unweighted ``||f||^2_{L^2}`` by exact leaf quadrature."""
        return float(np.sum(self.values ** 2)) / self.values.shape[0]


@dataclass(frozen=True)
class HaarSpectrum:
    """Mean vector plus Haar coefficients for levels ``0 .. levels-1``."""

    mean: np.ndarray  # (d,)
    coeffs: np.ndarray  # (2^levels - 1, d), heap order

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim == 1:
            coeffs = coeffs[:, None]
        if coeffs.shape[1] != mean.shape[0]:
            raise InvalidInputError("mean and coefficients disagree on dimension")
        depth_of(coeffs.shape[0] + 1)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def levels(self) -> int:
        return depth_of(self.coeffs.shape[0] + 1)

    def __getitem__(self, interval: DyadicIndex) -> np.ndarray:
        if interval.level >= self.levels:
            return np.zeros(self.dim)
        return self.coeffs[interval.index]

    def norm_sq(self) -> float:
        return float(self.mean @ self.mean + np.sum(self.coeffs ** 2))

    def zero_mean(self) -> "HaarSpectrum":
        return HaarSpectrum(np.zeros(self.dim), self.coeffs)

    @classmethod
    def zeros(cls, dim: int, levels: int) -> "HaarSpectrum":
        return cls(np.zeros(dim), np.zeros((internal_count(levels), dim)))

    @classmethod
    def single(cls, interval: DyadicIndex, vector, levels: int | None = None) -> "HaarSpectrum":
        """The function ``h_I v``."""
        v = np.atleast_1d(np.asarray(vector, dtype=float))
        levels = interval.level + 1 if levels is None else levels
        s = cls.zeros(v.shape[0], levels)
        s.coeffs[interval.index] = v
        return s


def analyze(f: VectorField) -> HaarSpectrum:
    mean, coeffs = analyze_array(f.values)
    return HaarSpectrum(mean, coeffs)


def synthesize(s: HaarSpectrum, depth: int | None = None) -> VectorField:
    depth = s.levels if depth is None else depth
    if depth < s.levels:
        raise InvalidInputError(
            f"depth {depth} too small for a spectrum with {s.levels} Haar levels"
        )
    return VectorField(synthesize_array(s.mean, s.coeffs, depth))


def averages(f: VectorField) -> np.ndarray:
    """``<f>_I`` for every node of the tree, heap order, shape ``(nodes, d)``."""
    return tree_averages(f.values)


def haar_function(interval: DyadicIndex, depth: int) -> np.ndarray:
    """Leaf values of the scalar Haar function ``h_I``."""
    if interval.level >= depth:
        raise InvalidInputError(f"{interval} is not resolvable at depth {depth}")
    out = np.zeros(1 << depth)
    sl = interval.leaf_slice(depth)
    half = (sl.stop - sl.start) // 2
    amp = interval.length ** -0.5
    out[sl.start:sl.start + half] = -amp
    out[sl.start + half:sl.stop] = amp
    return out


def indicator_average(interval: DyadicIndex, depth: int) -> np.ndarray:
    """Leaf values of ``h^1_I = 1_I / |I|``."""
    out = np.zeros(1 << depth)
    out[interval.leaf_slice(depth)] = 1.0 / interval.length
    return out
