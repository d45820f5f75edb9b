"""Dyadic model operators acting on Haar spectra.

The shift and the Haar multipliers only see Haar modes: both return spectra
with zero mean. The weighted square function likewise sums over Haar modes
only unless ``include_mean`` is requested.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from . import matlin
from .dyadic import (
    DyadicIndex,
    HaarSpectrum,
    depth_of,
    haar_function,
    indicator_average,
    internal_count,
    synthesize,
    synthesize_array,
)
from .errors import InvalidInputError, NumericalError
from .weights import AveragesTree, WeightField, averages_tree, l2w_norm_sq

SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class MultiplierSymbol:
    """Matrices ``σ_I`` for the internal nodes of a tree (heap order)."""

    matrices: np.ndarray  # (2^levels - 1, d, d)

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=float)
        if m.ndim == 1:
            m = m[:, None, None]
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise InvalidInputError(f"symbol must have shape (nodes, d, d), got {m.shape}")
        depth_of(m.shape[0] + 1)
        if not np.all(np.isfinite(m)):
            raise InvalidInputError("symbol has non-finite entries")
        object.__setattr__(self, "matrices", m)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def levels(self) -> int:
        return depth_of(self.matrices.shape[0] + 1)

    def __getitem__(self, interval: DyadicIndex) -> np.ndarray:
        if interval.level >= self.levels:
            return np.zeros((self.dim, self.dim))
        return self.matrices[interval.index]

    def padded(self, levels: int) -> np.ndarray:
        """Matrices for ``levels`` levels; missing nodes are zero."""
        n = internal_count(levels)
        out = np.zeros((n, self.dim, self.dim))
        k = min(n, self.matrices.shape[0])
        out[:k] = self.matrices[:k]
        return out

    @classmethod
    def from_entries(cls, dim: int, levels: int,
                     entries: Mapping[DyadicIndex, np.ndarray]) -> "MultiplierSymbol":
        m = np.zeros((internal_count(levels), dim, dim))
        for interval, mat in entries.items():
            if interval.level >= levels:
                raise InvalidInputError(f"{interval} outside a {levels}-level symbol")
            m[interval.index] = np.asarray(mat, dtype=float).reshape(dim, dim)
        return cls(m)

    @classmethod
    def constant(cls, matrix, levels: int) -> "MultiplierSymbol":
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(np.broadcast_to(m, (internal_count(levels),) + m.shape).copy())

    @classmethod
    def random_signs(cls, rng: np.random.Generator, dim: int, levels: int) -> "MultiplierSymbol":
        """``σ_I = ±Id`` with independent fair signs: a martingale transform."""
        signs = rng.choice([-1.0, 1.0], size=internal_count(levels))
        return cls(signs[:, None, None] * np.eye(dim))


def apply_shift(s: HaarSpectrum) -> HaarSpectrum:
    """``Ш f = 2^(-1/2) sum_I f^(I) (h_{I-} - h_{I+})``, one level finer."""
    n = s.coeffs.shape[0]
    out = np.zeros((2 * n + 1, s.dim))
    idx = np.arange(n)
    out[2 * idx + 1] = SQRT_HALF * s.coeffs
    out[2 * idx + 2] = -SQRT_HALF * s.coeffs
    return HaarSpectrum(np.zeros(s.dim), out)


def apply_multiplier(sigma: MultiplierSymbol, s: HaarSpectrum) -> HaarSpectrum:
    if sigma.dim != s.dim:
        raise InvalidInputError(f"symbol dim {sigma.dim} != function dim {s.dim}")
    mats = sigma.padded(s.levels)
    return HaarSpectrum(np.zeros(s.dim), np.einsum("iab,ib->ia", mats, s.coeffs))


def _conjugated_symbol(sigma: MultiplierSymbol, t: AveragesTree) -> np.ndarray:
    n = sigma.matrices.shape[0]
    if n > t.mean.shape[0]:
        raise InvalidInputError("symbol has more levels than the weight tree")
    if sigma.dim != t.dim:
        raise InvalidInputError(f"symbol dim {sigma.dim} != weight dim {t.dim}")
    return t.sqrt[:n] @ sigma.matrices @ t.invsqrt[:n]


def sigma_norm(sigma: MultiplierSymbol, t: AveragesTree, check: bool = True) -> float:
    """``||σ||_∞ = sup_I ||<W>_I^(1/2) σ_I <W>_I^(-1/2)||``.

    With ``check`` the infimum form, ``λ_max(<W>^(-1/2) σ^T <W> σ <W>^(-1/2))``,
    is evaluated independently and must equal the square to 1e-9.
    """
    norms = matlin.op_norm(_conjugated_symbol(sigma, t))
    value = float(np.max(norms))
    if check:
        n = sigma.matrices.shape[0]
        inner = (t.invsqrt[:n] @ np.swapaxes(sigma.matrices, -1, -2) @ t.mean[:n]
                 @ sigma.matrices @ t.invsqrt[:n])
        alt = float(np.max(matlin.eig_sym(inner).values[:, -1]))
        if abs(alt - value ** 2) > 1e-9 * max(1.0, value ** 2):
            raise NumericalError(
                f"symbol norm definitions disagree: {value ** 2!r} vs {alt!r}"
            )
    return value


def square_norm_sq(s: HaarSpectrum, t: AveragesTree, include_mean: bool = False) -> float:
    """``||S_W f||^2 = sum_I <<W>_I f^(I), f^(I)>``."""
    n = s.coeffs.shape[0]
    if n > t.mean.shape[0]:
        raise InvalidInputError(
            f"spectrum with {s.levels} levels needs a weight tree of depth >= {s.levels - 1}"
        )
    if s.dim != t.dim:
        raise InvalidInputError(f"function dim {s.dim} != weight dim {t.dim}")
    total = float(np.einsum("ia,iab,ib->", s.coeffs, t.mean[:n], s.coeffs))
    if include_mean:
        total += float(s.mean @ t.mean[0] @ s.mean)
    return total


class MonteCarloEstimate(NamedTuple):
    value: float
    stderr: float
    trials: int


def square_norm_mc(s: HaarSpectrum, w: WeightField, trials: int, seed: int = 0,
                   batch: int = 512) -> MonteCarloEstimate:
    """Average of ``||W^(1/2) T_ε f||^2_{L^2}`` over random sign sequences ``ε``."""
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    if s.levels > w.depth:
        raise InvalidInputError("spectrum is finer than the weight")
    rng = np.random.default_rng(seed)
    n = s.coeffs.shape[0]
    samples = np.empty(trials)
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        eps = rng.choice([-1.0, 1.0], size=(n, 1, b))
        vals = synthesize_array(np.zeros((s.dim, b)), s.coeffs[:, :, None] * eps, w.depth)
        samples[done:done + b] = np.einsum("iab,iak,ibk->k", w.values, vals, vals) / vals.shape[0]
        done += b
    stderr = float(np.std(samples, ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return MonteCarloEstimate(float(np.mean(samples)), stderr, trials)


@dataclass(frozen=True)
class DisbalancedBasis:
    """Disbalanced Haar functions ``g^k = w^k h_I e^k + h^1_I A(W,I) e^k`` on one interval."""

    interval: DyadicIndex
    vectors: np.ndarray  # columns e^k, ascending eigenvalues of <W>_I
    weights: np.ndarray  # w^k
    a: np.ndarray  # A(W, I)

    @property
    def etilde(self) -> np.ndarray:
        return self.a @ self.vectors

    def leaf_values(self, depth: int) -> np.ndarray:
        """Leaf values of every ``g^k``, shape ``(d, 2^depth, d)``."""
        h = haar_function(self.interval, depth)
        h1 = indicator_average(self.interval, depth)
        haar_part = (self.weights[:, None] * self.vectors.T)[:, None, :] * h[None, :, None]
        flat_part = self.etilde.T[:, None, :] * h1[None, :, None]
        return haar_part + flat_part


def disbalance_matrix(t: AveragesTree, interval: DyadicIndex) -> np.ndarray:
    """``A(W,I) = (1/2)|I|^(1/2) <W>_I^-1 (<W>_{I-} - <W>_{I+}) <W>_I^(-1/2)``."""
    i = interval.index
    diff = t.at(interval.left) - t.at(interval.right)
    return 0.5 * math.sqrt(interval.length) * t.mean_inv[i] @ diff @ t.invsqrt[i]


def disbalanced_basis(t: AveragesTree, interval: DyadicIndex) -> DisbalancedBasis:
    if interval.level >= t.depth:
        raise InvalidInputError(f"{interval} is a leaf of a depth-{t.depth} tree")
    i = interval.index
    vecs = t.eig.vectors[i]
    w = 1.0 / np.linalg.norm(t.sqrt[i] @ vecs, axis=0)
    return DisbalancedBasis(interval, vecs, w, disbalance_matrix(t, interval))


def reconstruct_check(t: AveragesTree, interval: DyadicIndex, k: int) -> float:
    """Max leaf residual of ``h_I e^k = (w^k)^-1 g^k - (w^k)^-1 A h^1_I e^k``."""
    basis = disbalanced_basis(t, interval)
    depth = t.depth
    g = basis.leaf_values(depth)[k]
    e = basis.vectors[:, k]
    wk = basis.weights[k]
    lhs = haar_function(interval, depth)[:, None] * e
    rhs = g / wk - indicator_average(interval, depth)[:, None] * (basis.a @ e) / wk
    return float(np.max(np.abs(lhs - rhs)))


def necessity_function(t: AveragesTree, interval: DyadicIndex, e) -> HaarSpectrum:
    """``f = <W>_I^(-1/2) h_I e``, the test function showing ``||σ||_∞`` is necessary."""
    v = t.invsqrt[interval.index] @ np.asarray(e, dtype=float)
    return HaarSpectrum.single(interval, v, levels=t.depth)


class QuadraticForms(NamedTuple):
    dw: float  # sum_I <<W>_I f^(I), f^(I)>
    mw: float  # ||f - <f>||^2_{L^2(W)}
    dw_inv: float  # sum_I <<W>_I^-1 f^(I), f^(I)>
    mw_inv: float  # ||f - <f>||^2_{L^2(W^-1)}
    mw_full: float  # ||f||^2_{L^2(W)}
    mw_inv_full: float  # ||f||^2_{L^2(W^-1)}


def quadratic_forms(s: HaarSpectrum, w: WeightField,
                    tree: AveragesTree | None = None) -> QuadraticForms:
    t = averages_tree(w) if tree is None else tree
    if s.levels > w.depth:
        raise InvalidInputError("spectrum is finer than the weight")
    n = s.coeffs.shape[0]
    winv = WeightField(w.inverse_values())
    f0 = synthesize(s.zero_mean(), w.depth)
    f = synthesize(s, w.depth)
    return QuadraticForms(
        dw=square_norm_sq(s, t),
        mw=l2w_norm_sq(f0, w),
        dw_inv=float(np.einsum("ia,iab,ib->", s.coeffs, t.mean_inv[:n], s.coeffs)),
        mw_inv=l2w_norm_sq(f0, winv),
        mw_full=l2w_norm_sq(f, w),
        mw_inv_full=l2w_norm_sq(f, winv),
    )
