"""Finite-scale values of the constants bounded for matrix A2 weights.

Most quantities here are extreme generalized eigenvalues of a pair of
quadratic forms on a finite-dimensional space. Two routes are provided for
each: a dense solve (``scipy.linalg.eigh`` on assembled matrices) and a
matrix-free power iteration that only applies the forms leaf-wise. ``auto``
picks dense while the state dimension is at most ``DENSE_LIMIT``.

State vectors for the square-function pencils are Haar coefficient arrays of
shape ``(nodes, d)`` (flattened row-major); the ``D_W`` form is block diagonal
there and the ``M_W`` form is ``int <W f, f>`` of the synthesized function.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from . import matlin
from .dyadic import (
    DyadicIndex,
    VectorField,
    analyze_array,
    depth_of,
    internal_count,
    level_slice,
    node_lengths,
    synthesize,
    synthesize_array,
    tree_averages,
)
from .errors import InvalidInputError, NumericalError
from .operators import MultiplierSymbol, apply_multiplier, necessity_function, sigma_norm
from .weights import (
    AveragesTree,
    WeightField,
    a2_characteristic,
    averages_tree,
    l2w_norm_sq,
    weight_haar_coeffs,
)

DENSE_LIMIT = 4096
POWER_TOL = 1e-10
POWER_STABLE = 3
POWER_RESID_TOL = 1e-8
POWER_MAX_ITER = 10_000
POWER_SEED = 20_160_101

Apply = Callable[[np.ndarray], np.ndarray]


def log_floor(x: float) -> float:
    return max(1.0, math.log(x))


# -- extreme eigenvalue solvers ------------------------------------------------

class PowerResult(NamedTuple):
    value: float
    iterations: int
    residual: float


def power_iteration(apply_a: Apply, apply_b: Apply, solve_b: Apply, n: int, *,
                    seed: int = POWER_SEED, tol: float = POWER_TOL,
                    stable: int = POWER_STABLE, resid_tol: float = POWER_RESID_TOL,
                    max_iter: int = POWER_MAX_ITER) -> PowerResult:
    """Largest eigenvalue of the pencil ``A x = λ B x`` (A PSD, B PD).

    Iterates ``x <- B^-1 A x`` with B-normalization. Stops once the Rayleigh
    quotient's relative increment stays below ``tol`` for ``stable``
    consecutive steps and the relative residual ``||Ax - λBx|| / ||Ax||`` is
    below ``resid_tol``.
    """
    x = np.random.default_rng(seed).standard_normal(n)
    lam_prev = None
    calm = 0
    resid = math.inf
    for it in range(1, max_iter + 1):
        bx = apply_b(x)
        scale = math.sqrt(float(x @ bx))
        x = x / scale
        bx = bx / scale
        ax = apply_a(x)
        lam = float(x @ ax)
        ax_norm = float(np.linalg.norm(ax))
        if ax_norm == 0.0:
            return PowerResult(0.0, it, 0.0)
        resid = float(np.linalg.norm(ax - lam * bx)) / ax_norm
        if lam_prev is not None and abs(lam - lam_prev) <= tol * abs(lam):
            calm += 1
        else:
            calm = 0
        if calm >= stable and resid <= resid_tol:
            return PowerResult(lam, it, resid)
        lam_prev = lam
        x = solve_b(ax)
    raise NumericalError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(last λ={lam_prev!r}, relative residual {resid:.3e}, stable steps {calm})"
    )


def dense_matrix(apply: Apply, n: int) -> np.ndarray:
    """Assemble the matrix of a linear map given on flat vectors (batched columns)."""
    m = apply(np.eye(n))
    return 0.5 * (m + m.T)


def dense_pencil_eigvals(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.eigh(a, b, eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"dense generalized eigensolver failed: {exc}") from exc


# -- Haar coefficient space ----------------------------------------------------

class CoefficientSpace:
    """Haar coefficient coordinates for functions at the weight's depth.

    Without ``include_mean`` the space is the zero-mean subspace (Haar modes
    only). With it, slot 0 carries the mean vector and the ``D_W`` form gives
    it the weight ``<W>_[0,1)``.
    """

    def __init__(self, tree: AveragesTree, include_mean: bool = False):
        self.tree = tree
        self.w = tree.weight
        self.depth = tree.depth
        self.d = tree.dim
        self.include_mean = include_mean
        self.n_modes = internal_count(self.depth)
        self.k = self.n_modes + (1 if include_mean else 0)
        self.size = self.k * self.d
        self._winv = self.w.inverse_values()
        if include_mean:
            self._dmats = np.concatenate([tree.mean[:1], tree.mean[:self.n_modes]])
            self._dinv = np.concatenate([tree.mean_inv[:1], tree.mean_inv[:self.n_modes]])
        else:
            self._dmats = tree.mean[:self.n_modes]
            self._dinv = tree.mean_inv[:self.n_modes]
        self._root_inv_mean_inv = matlin.inv_spd(tree.inv_mean[0])

    def _unflat(self, x: np.ndarray) -> np.ndarray:
        return x.reshape((self.k, self.d) + x.shape[1:])

    def _flat(self, c: np.ndarray) -> np.ndarray:
        return c.reshape((self.size,) + c.shape[2:])

    def split(self, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.include_mean:
            return c[0], c[1:]
        return np.zeros(c.shape[1:]), c

    def join(self, mean: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
        if self.include_mean:
            return np.concatenate([mean[None], coeffs])
        return coeffs

    def synth(self, x: np.ndarray) -> np.ndarray:
        mean, coeffs = self.split(self._unflat(x))
        return synthesize_array(mean, coeffs, self.depth)

    def analyze(self, leaves: np.ndarray) -> np.ndarray:
        mean, coeffs = analyze_array(leaves)
        return self._flat(self.join(mean, coeffs))

    def d_apply(self, x: np.ndarray) -> np.ndarray:
        c = self._unflat(x)
        return self._flat(np.einsum("iab,ib...->ia...", self._dmats, c))

    def d_solve(self, x: np.ndarray) -> np.ndarray:
        c = self._unflat(x)
        return self._flat(np.einsum("iab,ib...->ia...", self._dinv, c))

    def m_apply(self, x: np.ndarray) -> np.ndarray:
        f = self.synth(x)
        return self.analyze(np.einsum("iab,ib...->ia...", self.w.values, f))

    def m_solve(self, x: np.ndarray) -> np.ndarray:
        """Inverse of the compressed ``M_W`` form.

        On the zero-mean subspace, ``W f = β + sum_I b_I h_I`` with a constant
        ``β`` fixed by requiring ``<f>_[0,1) = 0``.
        """
        mean, coeffs = self.split(self._unflat(x))
        u = synthesize_array(mean, coeffs, self.depth)
        f = np.einsum("iab,ib...->ia...", self._winv, u)
        if not self.include_mean:
            beta = -np.einsum("ab,b...->a...", self._root_inv_mean_inv, f.mean(axis=0))
            f = f + np.einsum("iab,b...->ia...", self._winv, beta)
        return self.analyze(f)


# -- square-function constants ----------------------------------------------------

class SquareConstants(NamedTuple):
    c_up: float  # sup <D_W f, f> / <M_W f, f>
    c_low: float  # sup <M_W f, f> / <D_W f, f>


def _pick(method: str, size: int) -> str:
    if method not in ("auto", "dense", "power"):
        raise InvalidInputError(f"unknown method {method!r}")
    if method == "auto":
        return "dense" if size <= DENSE_LIMIT else "power"
    return method


def square_constants(w: WeightField, include_mean: bool = False, method: str = "auto",
                     tree: AveragesTree | None = None) -> SquareConstants:
    t = averages_tree(w) if tree is None else tree
    space = CoefficientSpace(t, include_mean)
    n = space.size
    if _pick(method, n) == "dense":
        vals = dense_pencil_eigvals(dense_matrix(space.d_apply, n), dense_matrix(space.m_apply, n))
        return SquareConstants(float(vals[-1]), float(1.0 / vals[0]))
    up = power_iteration(space.d_apply, space.m_apply, space.m_solve, n)
    low = power_iteration(space.m_apply, space.d_apply, space.d_solve, n)
    return SquareConstants(up.value, low.value)


class InverseEquivalence(NamedTuple):
    direct: float  # sup <M_W f, f> / <D_W f, f>
    inverse: float  # sup <D_W^-1 g, g> / <M_W^-1 g, g>
    residual: float


def inverse_equivalence_check(w: WeightField, tree: AveragesTree | None = None) -> InverseEquivalence:
    """Evaluate the lower square constant in its direct and inverted forms.

    The inverted form uses ``D_W^-1`` (blocks ``<W>_I^-1``) and the inverse of
    the compressed ``M_W`` form, assembled without ever inverting a dense
    matrix; the two values must agree.
    """
    t = averages_tree(w) if tree is None else tree
    space = CoefficientSpace(t)
    n = space.size
    direct = 1.0 / dense_pencil_eigvals(
        dense_matrix(space.d_apply, n), dense_matrix(space.m_apply, n))[0]
    inverse = dense_pencil_eigvals(
        dense_matrix(space.d_solve, n), dense_matrix(space.m_solve, n))[-1]
    return InverseEquivalence(float(direct), float(inverse),
                              abs(direct - inverse) / abs(inverse))


def dw_dominance_gap(t: AveragesTree) -> float:
    """``max_I λ_max(<W^-1>_I^(1/2) <W>_I <W^-1>_I^(1/2)) / [W]_A2`` over internal I."""
    n = t.n_internal
    r = t.inv_mean_sqrt[:n]
    lam = matlin.eig_sym(r @ t.mean[:n] @ r).values[:, -1]
    return float(np.max(lam)) / a2_characteristic(t)


# -- embedding sums ----------------------------------------------------------------

class TVEmbedding(NamedTuple):
    lhs: float
    ratio: float


def tv_embedding_ratio(w: WeightField, f: VectorField,
                       tree: AveragesTree | None = None) -> TVEmbedding:
    """Treil-Volberg embedding sum and its ratio to ``[W] log[W] ||f||^2``."""
    t = averages_tree(w) if tree is None else tree
    if f.values.shape[0] != w.values.shape[0] or f.dim != w.dim:
        raise InvalidInputError("function and weight shapes disagree")
    n = t.n_internal
    idx = np.arange(n)
    lengths = node_lengths(n)
    wf = np.einsum("iab,ib->ia", w.sqrt_values(), f.values)
    avg = tree_averages(wf)[:n]
    r = t.invsqrt[:n]
    jump = r @ (t.mean[2 * idx + 1] - t.mean[2 * idx + 2]) @ r
    jump_sq = matlin.op_norm(jump) ** 2
    vec = np.einsum("iab,ib->ia", r, avg)
    lhs = float(np.sum(lengths * jump_sq * np.sum(vec * vec, axis=1)))
    a2 = a2_characteristic(t)
    denom = a2 * log_floor(a2) * f.norm_sq()
    return TVEmbedding(lhs, lhs / denom if denom > 0 else 0.0)


class S123(NamedTuple):
    s1: float
    s2_bound: float
    s3: float  # inner-product form with A(W, I) h^1_I e^k
    s3_averaged: float  # averaged form with <W>^-1/2 W^(I) <W>^-1/2
    total: float  # sum_I sum_k (w_I^k)^2 |<f, h_I e_I^k>|^2


def s123_decomposition(w: WeightField, f: VectorField,
                       tree: AveragesTree | None = None) -> S123:
    """Split ``<D_W^-1 f, f>`` through the disbalanced Haar functions."""
    t = averages_tree(w) if tree is None else tree
    if f.values.shape[0] != w.values.shape[0] or f.dim != w.dim:
        raise InvalidInputError("function and weight shapes disagree")
    depth = t.depth
    n = t.n_internal
    n_leaves = 1 << depth
    idx = np.arange(n)
    lengths = node_lengths(n)
    vecs = t.eig.vectors[:n]  # columns e_I^k
    wk = 1.0 / np.linalg.norm(t.sqrt[:n] @ vecs, axis=1)  # norms of columns
    _, fhat = analyze_array(f.values)
    proj = np.einsum("iak,ia->ik", vecs, fhat)  # <f, h_I e^k>
    total = float(np.sum(wk ** 2 * proj ** 2))

    a = (0.5 * np.sqrt(lengths)[:, None, None] * t.mean_inv[:n]
         @ (t.mean[2 * idx + 1] - t.mean[2 * idx + 2]) @ t.invsqrt[:n])
    ae = a @ vecs  # columns A(W, I) e^k
    # <f, h^1_I v> = (1/|I|) int_I <f, v>, by leaf quadrature
    leaf_sums = np.empty((n, f.dim))
    for i in range(n):
        j = int(math.log2(i + 1))
        span = n_leaves >> j
        pos = i - ((1 << j) - 1)
        leaf_sums[i] = f.values[pos * span:(pos + 1) * span].sum(axis=0) / n_leaves
    flat_ip = np.einsum("ia,iak->ik", leaf_sums / lengths[:, None], ae)
    s1 = float(np.sum((wk * proj + flat_ip) ** 2))
    s3 = float(np.sum(flat_ip ** 2))

    favg = tree_averages(f.values)[:n]
    what = weight_haar_coeffs(t)
    r = t.invsqrt[:n]
    left = np.einsum("iab,ib->ia", r, favg)
    right = r @ what @ r @ vecs
    s3_avg = float(np.sum(np.einsum("ia,iak->ik", left, right) ** 2))
    return S123(s1, 2.0 * math.sqrt(s1 * s3), s3, s3_avg, total)


# -- weighted operator norms ------------------------------------------------------

class OpNorm(NamedTuple):
    value: float
    method: str


def _shift_coeffs(c: np.ndarray) -> np.ndarray:
    n = c.shape[0]
    out = np.zeros((2 * n + 1,) + c.shape[1:])
    idx = np.arange(n)
    out[2 * idx + 1] = c / math.sqrt(2.0)
    out[2 * idx + 2] = -c / math.sqrt(2.0)
    return out


def _shift_adjoint(c: np.ndarray) -> np.ndarray:
    n = (c.shape[0] - 1) // 2
    idx = np.arange(n)
    return (c[2 * idx + 1] - c[2 * idx + 2]) / math.sqrt(2.0)


def weighted_op_norm(op: str | MultiplierSymbol, w: WeightField, method: str = "auto",
                     tree: AveragesTree | None = None) -> OpNorm:
    """``||op||_{L^2(W) -> L^2(W)}`` on zero-mean functions at the weight's depth.

    ``op`` is ``"shift"`` or a :class:`MultiplierSymbol`. The shift's output
    lives one level finer and is measured against the refined weight. With
    ``method="both"`` the dense and power routes are cross-checked to 1e-6.
    """
    t = averages_tree(w) if tree is None else tree
    src = CoefficientSpace(t)
    d = t.dim
    if isinstance(op, str):
        if op != "shift":
            raise InvalidInputError(f"unknown operator {op!r}")
        dst = CoefficientSpace(averages_tree(w.refine(1)))
        fwd, adj = _shift_coeffs, _shift_adjoint
    elif isinstance(op, MultiplierSymbol):
        if op.dim != d:
            raise InvalidInputError(f"symbol dim {op.dim} != weight dim {d}")
        mats = op.padded(t.depth)
        dst = src
        fwd = lambda c: np.einsum("iab,ib...->ia...", mats, c)  # noqa: E731
        adj = lambda c: np.einsum("iba,ib...->ia...", mats, c)  # noqa: E731
    else:
        raise InvalidInputError(f"unsupported operator {op!r}")

    def apply_a(x):
        c = src._unflat(x)
        y = dst._flat(fwd(c))
        return src._flat(adj(dst._unflat(dst.m_apply(y))))

    n = src.size
    chosen = "both" if method == "both" else _pick(method, max(n, dst.size))
    dense_val = power_val = None
    if chosen in ("dense", "both"):
        dense_val = math.sqrt(max(0.0, float(dense_pencil_eigvals(
            dense_matrix(apply_a, n), dense_matrix(src.m_apply, n))[-1])))
    if chosen in ("power", "both"):
        res = power_iteration(apply_a, src.m_apply, src.m_solve, n)
        power_val = math.sqrt(max(0.0, res.value))
    if chosen == "both":
        if abs(dense_val - power_val) > 1e-6 * max(dense_val, 1e-300):
            raise NumericalError(f"dense {dense_val!r} and power {power_val!r} norms disagree")
        return OpNorm(dense_val, "both")
    return OpNorm(dense_val if chosen == "dense" else power_val, chosen)


def necessity_lower_bound(sigma: MultiplierSymbol, w: WeightField,
                          tree: AveragesTree | None = None) -> float:
    """``max ||T_σ f||_W / ||f||_W`` over ``f = <W>_I^(-1/2) h_I e``.

    For each internal ``I`` the vector ``e`` is the top eigenvector of
    ``<W>_I^(-1/2) σ_I^T <W>_I σ_I <W>_I^(-1/2)``; both norms are evaluated
    by synthesizing the functions on the leaves.
    """
    t = averages_tree(w) if tree is None else tree
    n = min(t.n_internal, sigma.matrices.shape[0])
    best = 0.0
    for i in range(n):
        interval = DyadicIndex.from_index(i)
        s = sigma.matrices[i]
        r = t.invsqrt[i]
        e = matlin.eig_sym(r @ s.T @ t.mean[i] @ s @ r).vectors[:, -1]
        f = necessity_function(t, interval, e)
        num = l2w_norm_sq(synthesize(apply_multiplier(sigma, f), t.depth), w)
        den = l2w_norm_sq(synthesize(f, t.depth), w)
        best = max(best, math.sqrt(num / den))
    return best


# -- Carleson embedding and testing -------------------------------------------------

@dataclass(frozen=True)
class CarlesonSequence:
    """PSD matrices ``A_I`` on the internal nodes of a tree (heap order)."""

    matrices: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=float)
        if m.ndim == 1:
            m = m[:, None, None]
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise InvalidInputError(f"sequence must have shape (nodes, d, d), got {m.shape}")
        depth_of(m.shape[0] + 1)
        m = matlin.as_sym(m)
        lam = matlin.eig_sym(m).values
        if np.any(lam[:, 0] < -1e-12 * np.maximum(np.abs(lam[:, -1]), 1e-300)):
            raise InvalidInputError("Carleson sequence entries must be PSD")
        object.__setattr__(self, "matrices", m)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def levels(self) -> int:
        return depth_of(self.matrices.shape[0] + 1)

    def padded(self, levels: int) -> np.ndarray:
        n = internal_count(levels)
        out = np.zeros((n, self.dim, self.dim))
        k = min(n, self.matrices.shape[0])
        out[:k] = self.matrices[:k]
        return out


class CarlesonConstants(NamedTuple):
    c_embed: float
    c_test: float

    @property
    def ratio(self) -> float:
        return self.c_embed / self.c_test if self.c_test > 0 else 0.0


def _subtree_sums(x: np.ndarray, depth: int) -> np.ndarray:
    """``sum_{I ⊆ J} x_I`` for every internal ``J``; ``x`` lives on internal nodes."""
    out = x.copy()
    for j in range(depth - 2, -1, -1):
        sl = level_slice(j)
        idx = np.arange(sl.start, sl.stop)
        out[idx] += out[2 * idx + 1] + out[2 * idx + 2]
    return out


def _testing_sup(t: AveragesTree, x: np.ndarray) -> float:
    n = t.n_internal
    if n == 0:
        return 0.0
    sums = _subtree_sums(x, t.depth) / node_lengths(n)[:, None, None]
    r = t.invsqrt[:n]
    return float(np.max(matlin.eig_sym(r @ sums @ r).values[:, -1]))


def carleson_constants(seq: CarlesonSequence, w: WeightField, method: str = "auto",
                       tree: AveragesTree | None = None) -> CarlesonConstants:
    """Best embedding constant ``sup sum_I <A_I <f>_I, <f>_I> / ||f||^2_{L^2(W^-1)}``
    over all leaf functions, and the matrix testing supremum."""
    t = averages_tree(w) if tree is None else tree
    if seq.dim != t.dim:
        raise InvalidInputError(f"sequence dim {seq.dim} != weight dim {t.dim}")
    depth, d = t.depth, t.dim
    n_int = t.n_internal
    a = seq.padded(depth)
    n_leaves = 1 << depth
    counts = n_leaves * node_lengths(n_int)  # leaves per interval
    winv = w.inverse_values()
    size = n_leaves * d

    def shape(x):
        return x.reshape((n_leaves, d) + x.shape[1:])

    def apply_p(x):
        f = shape(x)
        avg = tree_averages(f)[:n_int]
        v = np.einsum("iab,ib...->ia...", a, avg) / counts.reshape((-1,) + (1,) * (avg.ndim - 1))
        acc = v.copy()
        for j in range(1, depth):
            sl = level_slice(j)
            idx = np.arange(sl.start, sl.stop)
            acc[idx] += acc[(idx - 1) // 2]
        leaf_acc = np.repeat(acc[level_slice(depth - 1)], 2, axis=0) if depth else np.zeros_like(f)
        return leaf_acc.reshape(x.shape)

    def apply_b(x):
        return (np.einsum("iab,ib...->ia...", winv, shape(x)) / n_leaves).reshape(x.shape)

    def solve_b(x):
        return (np.einsum("iab,ib...->ia...", w.values, shape(x)) * n_leaves).reshape(x.shape)

    if _pick(method, size) == "dense":
        c_embed = float(dense_pencil_eigvals(dense_matrix(apply_p, size),
                                             dense_matrix(apply_b, size))[-1])
    else:
        c_embed = power_iteration(apply_p, apply_b, solve_b, size).value
    mean = t.mean[:n_int]
    c_test = _testing_sup(t, mean @ a @ mean)
    return CarlesonConstants(max(c_embed, 0.0), c_test)


def s3_sequence(t: AveragesTree) -> CarlesonSequence:
    """``A_I = <W>_I^-1 W^(I) <W>_I^-1 W^(I) <W>_I^-1``, the sequence controlling S3."""
    n = t.n_internal
    what = weight_haar_coeffs(t)
    inv = t.mean_inv[:n]
    return CarlesonSequence(inv @ what @ inv @ what @ inv)


def testing_supremum(t: AveragesTree) -> float:
    """``sup_J λ_max(<W>_J^(-1/2) (1/|J|) sum_{I ⊆ J} W^(I) <W>_I^-1 W^(I) <W>_J^(-1/2))``."""
    what = weight_haar_coeffs(t)
    return _testing_sup(t, what @ t.mean_inv[:t.n_internal] @ what)


def testing_ratio(t: AveragesTree) -> float:
    return testing_supremum(t) / a2_characteristic(t) ** 2


# -- reports ------------------------------------------------------------------------

@dataclass
class BoundsReport:
    a2: float
    c_up: float
    c_low: float
    shift_norm: float
    tsigma_norm: float
    sigma_inf: float
    tv_ratio: float
    testing_ratio: float
    carleson_ratio: float
    metadata: dict = field(default_factory=dict)

    @property
    def c_w(self) -> float:
        return self.a2 * log_floor(self.a2)

    @property
    def b_w(self) -> float:
        return self.a2 ** 2 * log_floor(self.a2)

    def as_dict(self) -> dict:
        out = asdict(self)
        out["c_w"] = self.c_w
        out["b_w"] = self.b_w
        return out


def bounds_report(w: WeightField, sigma: MultiplierSymbol, f: VectorField,
                  method: str = "auto", **metadata) -> BoundsReport:
    t = averages_tree(w)
    sq = square_constants(w, method=method, tree=t)
    return BoundsReport(
        a2=a2_characteristic(t),
        c_up=sq.c_up,
        c_low=sq.c_low,
        shift_norm=weighted_op_norm("shift", w, method, tree=t).value,
        tsigma_norm=weighted_op_norm(sigma, w, method, tree=t).value,
        sigma_inf=sigma_norm(sigma, t),
        tv_ratio=tv_embedding_ratio(w, f, tree=t).ratio,
        testing_ratio=testing_ratio(t),
        carleson_ratio=carleson_constants(s3_sequence(t), w, method, tree=t).ratio,
        metadata={"depth": w.depth, "dim": w.dim, **metadata},
    )


SHAPE_SLACK = 10.0


def bound_shape_violations(r: BoundsReport, slack: float = SHAPE_SLACK) -> list[str]:
    """Check a report against the proven growth shapes, with multiplicative slack."""
    a2 = r.a2
    lg = log_floor(a2)
    checks = {
        "c_up": (r.c_up, slack * a2 ** 2 * lg),
        "c_low": (r.c_low, slack * a2 * lg),
        "shift_norm^2": (r.shift_norm ** 2, slack * a2 ** 3 * lg ** 2),
        "tsigma_norm": (r.tsigma_norm, slack * r.sigma_inf * a2 ** 1.5 * lg),
    }
    return [f"{name}={val!r} exceeds {cap!r}" for name, (val, cap) in checks.items() if val > cap]
