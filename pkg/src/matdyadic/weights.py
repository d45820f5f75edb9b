"""Matrix weights on the dyadic tree.

A :class:`WeightField` holds one positive definite matrix per leaf. The
:class:`AveragesTree` built from it caches, for every node ``I``, the averages
``<W>_I`` and ``<W^-1>_I`` together with the spectral data everything
downstream needs (eigenpairs, square roots, inverses).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import matlin
from .dyadic import (
    DyadicIndex,
    VectorField,
    depth_of,
    internal_count,
    node_lengths,
    tree_averages,
)
from .errors import InvalidInputError, NumericalError

log = logging.getLogger(__name__)

FAMILIES = ("constant", "two_value", "rotation", "random_martingale")


@dataclass(frozen=True)
class WeightField:
    values: np.ndarray  # (2^N, d, d), each PD
    eig: matlin.EigenDecomp = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None, None]
        if v.ndim != 3:
            raise InvalidInputError(f"weight values must have shape (2^N, d, d), got {v.shape}")
        depth_of(v.shape[0])
        v = matlin.as_sym(v)
        e = matlin.eig_sym(v)
        matlin.check_pd(e, "weight leaf")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "eig", e)

    @property
    def depth(self) -> int:
        return depth_of(self.values.shape[0])

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def inverse_values(self) -> np.ndarray:
        return matlin.spectral_apply(self.eig, lambda lam: 1.0 / lam)

    def sqrt_values(self) -> np.ndarray:
        return matlin.spectral_apply(self.eig, np.sqrt)

    def invsqrt_values(self) -> np.ndarray:
        return matlin.spectral_apply(self.eig, lambda lam: 1.0 / np.sqrt(lam))

    def inverse(self) -> "WeightField":
        return WeightField(self.inverse_values())

    def scaled(self, c: float) -> "WeightField":
        return WeightField(c * self.values)

    def conjugated(self, q: np.ndarray) -> "WeightField":
        """``x -> Q^T W(x) Q``."""
        q = np.asarray(q, dtype=float)
        return WeightField(q.T @ self.values @ q)

    def refine(self, levels: int = 1) -> "WeightField":
        """Same weight with every leaf split into ``2^levels`` equal pieces."""
        return WeightField(np.repeat(self.values, 1 << levels, axis=0))


def l2w_norm_sq(f: VectorField | np.ndarray, w: WeightField) -> float:
    """``||f||^2_{L^2(W)} = int <W f, f>`` by exact leaf quadrature."""
    vals = f.values if isinstance(f, VectorField) else np.asarray(f, dtype=float)
    if vals.shape[0] != w.values.shape[0]:
        raise InvalidInputError("function and weight live at different depths")
    return float(np.einsum("ia,iab,ib->", vals, w.values, vals)) / vals.shape[0]


@dataclass(frozen=True)
class AveragesTree:
    """Per-node averages of ``W`` and ``W^-1`` with cached spectral data.

    Arrays are in heap order over all ``2^(N+1) - 1`` nodes.
    """

    weight: WeightField
    mean: np.ndarray  # <W>_I
    inv_mean: np.ndarray  # <W^-1>_I
    eig: matlin.EigenDecomp  # of <W>_I
    sqrt: np.ndarray  # <W>_I^{1/2}
    invsqrt: np.ndarray  # <W>_I^{-1/2}
    mean_inv: np.ndarray  # <W>_I^{-1}
    inv_mean_sqrt: np.ndarray  # <W^-1>_I^{1/2}

    @property
    def depth(self) -> int:
        return self.weight.depth

    @property
    def dim(self) -> int:
        return self.weight.dim

    @property
    def n_internal(self) -> int:
        return internal_count(self.depth)

    def at(self, interval: DyadicIndex) -> np.ndarray:
        return self.mean[interval.index]


def averages_tree(w: WeightField) -> AveragesTree:
    mean = matlin.as_sym(tree_averages(w.values))
    inv_mean = matlin.as_sym(tree_averages(w.inverse_values()))
    e = matlin.eig_sym(mean)
    matlin.check_pd(e, "<W>_I")
    e_inv = matlin.eig_sym(inv_mean)
    matlin.check_pd(e_inv, "<W^-1>_I")
    return AveragesTree(
        weight=w,
        mean=mean,
        inv_mean=inv_mean,
        eig=e,
        sqrt=matlin.spectral_apply(e, np.sqrt),
        invsqrt=matlin.spectral_apply(e, lambda lam: 1.0 / np.sqrt(lam)),
        mean_inv=matlin.spectral_apply(e, lambda lam: 1.0 / lam),
        inv_mean_sqrt=matlin.spectral_apply(e_inv, np.sqrt),
    )


def weight_haar_coeff(t: AveragesTree, interval: DyadicIndex) -> np.ndarray:
    """``W^(I) = (1/2)|I|^(1/2) (<W>_{I+} - <W>_{I-})``."""
    if interval.level >= t.depth:
        raise InvalidInputError(f"{interval} is a leaf of a depth-{t.depth} tree")
    return 0.5 * math.sqrt(interval.length) * (t.at(interval.right) - t.at(interval.left))


def weight_haar_coeffs(t: AveragesTree) -> np.ndarray:
    """``W^(I)`` for every internal node, heap order."""
    n = t.n_internal
    idx = np.arange(n)
    scale = 0.5 * np.sqrt(node_lengths(n))[:, None, None]
    return scale * (t.mean[2 * idx + 2] - t.mean[2 * idx + 1])


def a2_profile(t: AveragesTree) -> np.ndarray:
    """``||<W>_I^(1/2) <W^-1>_I^(1/2)||^2`` for every node."""
    return matlin.op_norm(t.sqrt @ t.inv_mean_sqrt) ** 2


def a2_characteristic(t: AveragesTree) -> float:
    return float(np.max(a2_profile(t)))


# -- eigenvalue truncation ---------------------------------------------------

def _truncation_projectors(w: WeightField, n: float):
    if not n > 1:
        raise InvalidInputError(f"truncation level must exceed 1, got {n}")
    lam = w.eig.values
    q = w.eig.vectors
    low = (lam <= 1.0 / n).astype(float)
    high = (lam >= n).astype(float)
    mid = 1.0 - low - high

    def proj(mask):
        return (q * mask[:, None, :]) @ np.swapaxes(q, -1, -2)

    return proj(low), proj(mid), proj(high)


def truncate(w: WeightField, n: float) -> WeightField:
    """``W_n = (1/n) P_1 + P_2 W P_2 + n P_3`` with ``P_k`` the spectral projectors
    of ``W(x)`` onto eigenvalues ``<= 1/n``, in ``(1/n, n)`` and ``>= n``."""
    p1, p2, p3 = _truncation_projectors(w, n)
    return WeightField(p1 / n + p2 @ w.values @ p2 + n * p3)


def truncation_inverse(w: WeightField, n: float) -> np.ndarray:
    """Closed form ``n P_1 + P_2 W^-1 P_2 + (1/n) P_3`` of ``W_n^-1``."""
    p1, p2, p3 = _truncation_projectors(w, n)
    return n * p1 + p2 @ w.inverse_values() @ p2 + p3 / n


# -- maximal function ----------------------------------------------------------

def dyadic_maximal(f: VectorField, w: WeightField) -> np.ndarray:
    """Dyadic Christ-Goldberg maximal function (p = 2) at each leaf.

    ``sup_{I ∋ x} (1/|I|) int_I ||W(x)^(1/2) W(y)^(-1/2) f(y)|| dy`` with the
    supremum over tree intervals containing the leaf.
    """
    if f.values.shape[0] != w.values.shape[0] or f.dim != w.dim:
        raise InvalidInputError("function and weight shapes disagree")
    depth = w.depth
    g = np.einsum("iab,ib->ia", w.invsqrt_values(), f.values)
    root_half = w.sqrt_values()
    out = np.empty(1 << depth)
    for x in range(1 << depth):
        norms = np.linalg.norm(g @ root_half[x].T, axis=1)
        best = 0.0
        for j in range(depth + 1):
            span = 1 << (depth - j)
            start = (x // span) * span
            best = max(best, float(np.mean(norms[start:start + span])))
        out[x] = best
    return out


# -- weight families -------------------------------------------------------------

def constant_weight(m, depth: int) -> WeightField:
    m = matlin.as_sym(np.atleast_2d(m))
    return WeightField(np.broadcast_to(m, (1 << depth,) + m.shape).copy())


def two_value(t: float, depth: int, dim: int = 1) -> WeightField:
    """``t`` on ``[0, 1/2)`` and ``1/t`` on ``[1/2, 1)``, times the identity."""
    if not t > 0:
        raise InvalidInputError(f"two_value needs t > 0, got {t}")
    if depth < 1:
        raise InvalidInputError("two_value needs depth >= 1")
    half = 1 << (depth - 1)
    scal = np.concatenate([np.full(half, float(t)), np.full(half, 1.0 / t)])
    return WeightField(scal[:, None, None] * np.eye(dim))


def rotation(t: float, depth: int) -> WeightField:
    """``R(θ_j) diag(t, 1/t) R(θ_j)^T`` with ``θ_j = π j / 2^depth`` on leaf ``j``."""
    if not t > 0:
        raise InvalidInputError(f"rotation needs t > 0, got {t}")
    if depth < 1:
        raise InvalidInputError("rotation needs depth >= 1")
    theta = np.pi * np.arange(1 << depth) / (1 << depth)
    c, s = np.cos(theta), np.sin(theta)
    r = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    return WeightField(r @ np.diag([t, 1.0 / t]) @ np.swapaxes(r, -1, -2))


def _sym_increment(rng: np.random.Generator, dim: int, step: float, count: int) -> np.ndarray:
    g = rng.standard_normal((count, dim, dim))
    g = 0.5 * (g + np.swapaxes(g, -1, -2))
    norms = np.sqrt(np.sum(g * g, axis=(-1, -2)))[:, None, None]
    return step * g / norms


def random_martingale(seed: int, depth: int, step: float, dim: int = 2,
                      max_redraws: int = 100) -> WeightField:
    """``exp`` of a symmetric random walk run down the tree.

    Each child adds to its parent's log-matrix an independent symmetric
    Gaussian increment rescaled to Frobenius norm ``step``. Leaves that land
    below the PD floor get their last increment redrawn.
    """
    if depth < 1:
        raise InvalidInputError("random_martingale needs depth >= 1")
    if not step >= 0:
        raise InvalidInputError(f"step must be nonnegative, got {step}")
    rng = np.random.default_rng(seed)
    logs = np.zeros((1, dim, dim))
    for _ in range(depth - 1):
        logs = np.repeat(logs, 2, axis=0) + _sym_increment(rng, dim, step, 2 * logs.shape[0])
    parents = np.repeat(logs, 2, axis=0)
    leaves = parents + _sym_increment(rng, dim, step, parents.shape[0])
    for _ in range(max_redraws + 1):
        e = matlin.eig_sym(leaves)
        lam = np.exp(e.values)
        bad = ~(lam[:, 0] > matlin.PD_FLOOR * lam[:, -1])
        if not np.any(bad):
            vals = matlin.spectral_apply(matlin.EigenDecomp(lam, e.vectors), lambda x: x)
            return WeightField(vals)
        log.info("random_martingale: redrawing %d leaves below the PD floor", int(bad.sum()))
        leaves[bad] = parents[bad] + _sym_increment(rng, dim, step, int(bad.sum()))
    raise NumericalError(f"random_martingale: leaves still degenerate after {max_redraws} redraws")


def random_spd(rng: np.random.Generator, dim: int, spread: float = 1.0) -> np.ndarray:
    """A random SPD matrix ``exp(S)`` with ``||S||_F = spread``."""
    s = _sym_increment(rng, dim, spread, 1)[0]
    return matlin.spectral_apply(matlin.eig_sym(s), np.exp)


def generate(family: str, param: float, depth: int, dim: int = 1, seed: int = 0) -> WeightField:
    """Build one member of a named weight family.

    ``param`` is the family's scalar knob: the scale of a fixed random SPD
    matrix (constant), ``t`` (two_value, rotation) or the walk step
    (random_martingale).
    """
    if depth < 1:
        raise InvalidInputError(f"depth must be >= 1, got {depth}")
    if dim < 1:
        raise InvalidInputError(f"dim must be >= 1, got {dim}")
    if family == "constant":
        if not param > 0:
            raise InvalidInputError(f"constant family needs param > 0, got {param}")
        m = random_spd(np.random.default_rng(seed), dim)
        return constant_weight(param * m, depth)
    if family == "two_value":
        return two_value(param, depth, dim)
    if family == "rotation":
        if dim != 2:
            raise InvalidInputError("rotation family is defined for dim = 2 only")
        return rotation(param, depth)
    if family == "random_martingale":
        return random_martingale(seed, depth, param, dim)
    raise InvalidInputError(f"unknown family {family!r}; expected one of {FAMILIES}")
