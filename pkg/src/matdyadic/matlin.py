"""Dense kernel for small real symmetric matrices.

Everything here accepts either a single ``(d, d)`` matrix or a stack of shape
``(..., d, d)``; stacks are processed in one vectorized pass, which is how the
dyadic tree code diagonalizes every node at once.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, NotPositiveDefiniteError, NumericalError

JACOBI_MAX_SWEEPS = 50
JACOBI_REL_TOL = 1e-14
PD_FLOOR = 1e-13


class EigenDecomp(NamedTuple):
    values: np.ndarray  # (..., d), ascending
    vectors: np.ndarray  # (..., d, d), orthonormal columns


def as_sym(m) -> np.ndarray:
    """Return ``(M + M^T) / 2`` as a float array, rejecting non-finite entries."""
    a = np.asarray(m, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise InvalidInputError(f"expected square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _offdiag_norm(a: np.ndarray) -> np.ndarray:
    d = a.shape[-1]
    mask = ~np.eye(d, dtype=bool)
    return np.sqrt(np.sum(a[..., mask] ** 2, axis=-1))


def eig_sym(m) -> EigenDecomp:
    """Cyclic Jacobi eigendecomposition of symmetric matrices.

    Sweeps until the off-diagonal Frobenius norm of every matrix in the stack
    is at most ``1e-14 * ||M||_F``. Raises :class:`NumericalError` if that
    does not happen within 50 sweeps.
    """
    a = as_sym(m).copy()
    d = a.shape[-1]
    batch = a.shape[:-2]
    a = a.reshape((-1, d, d))
    v = np.broadcast_to(np.eye(d), a.shape).copy()
    target = JACOBI_REL_TOL * np.sqrt(np.sum(a * a, axis=(-1, -2)))

    for sweep in range(JACOBI_MAX_SWEEPS + 1):
        off = _offdiag_norm(a)
        if np.all(off <= target):
            break
        if sweep == JACOBI_MAX_SWEEPS:
            worst = float(np.max(off - target))
            raise NumericalError(
                f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps "
                f"(worst off-diagonal excess {worst:.3e})"
            )
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[:, p, q]
                active = apq != 0.0
                if not np.any(active):
                    continue
                app = a[:, p, p]
                aqq = a[:, q, q]
                safe = np.where(active, apq, 1.0)
                with np.errstate(over="ignore"):
                    # tiny a_pq: tau -> inf gives t = 0, the right limit
                    tau = (aqq - app) / (2.0 * safe)
                    t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                c_ = c[:, None]
                s_ = s[:, None]
                # A <- J^T A J, J the (p, q) plane rotation
                rp = a[:, p, :].copy()
                rq = a[:, q, :].copy()
                a[:, p, :] = c_ * rp - s_ * rq
                a[:, q, :] = s_ * rp + c_ * rq
                cp = a[:, :, p].copy()
                cq = a[:, :, q].copy()
                a[:, :, p] = c_ * cp - s_ * cq
                a[:, :, q] = s_ * cp + c_ * cq
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = c_ * vp - s_ * vq
                v[:, :, q] = s_ * vp + c_ * vq

    values = np.diagonal(a, axis1=-2, axis2=-1).copy()
    order = np.argsort(values, axis=-1, kind="stable")
    values = np.take_along_axis(values, order, axis=-1)
    vectors = np.take_along_axis(v, order[:, None, :], axis=-1)
    return EigenDecomp(values.reshape(batch + (d,)), vectors.reshape(batch + (d, d)))


def spectral_apply(e: EigenDecomp, fn) -> np.ndarray:
    """Return ``Q fn(Λ) Q^T`` for a decomposition, symmetrized."""
    q = e.vectors
    out = (q * fn(e.values)[..., None, :]) @ np.swapaxes(q, -1, -2)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def check_pd(e: EigenDecomp, what: str = "matrix") -> None:
    lo = e.values[..., 0]
    hi = e.values[..., -1]
    bad = ~(lo > PD_FLOOR * np.maximum(hi, 0.0)) | ~(hi > 0)
    if np.any(bad):
        idx = np.argwhere(np.atleast_1d(bad))[0]
        raise NotPositiveDefiniteError(
            f"{what} is not positive definite (λ_min={np.atleast_1d(lo)[tuple(idx)]:.3e}, "
            f"λ_max={np.atleast_1d(hi)[tuple(idx)]:.3e}, at {tuple(int(i) for i in idx)})"
        )


def sqrt_spd(m) -> np.ndarray:
    e = eig_sym(m)
    check_pd(e)
    return spectral_apply(e, np.sqrt)


def invsqrt_spd(m) -> np.ndarray:
    e = eig_sym(m)
    check_pd(e)
    return spectral_apply(e, lambda lam: 1.0 / np.sqrt(lam))


def inv_spd(m) -> np.ndarray:
    e = eig_sym(m)
    check_pd(e)
    return spectral_apply(e, lambda lam: 1.0 / lam)


def op_norm(m) -> np.ndarray | float:
    """Largest singular value, ``sqrt(λ_max(M^T M))``, of a (stack of) matrix."""
    a = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    gram = np.swapaxes(a, -1, -2) @ a
    lam = eig_sym(gram).values[..., -1]
    out = np.sqrt(np.maximum(lam, 0.0))
    return float(out) if out.ndim == 0 else out


def gen_eig_extremes(a, b) -> tuple[float, float]:
    """Extreme generalized eigenvalues of the pencil ``A x = λ B x`` (B PD)."""
    a = as_sym(a)
    b = as_sym(b)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    r = invsqrt_spd(b)
    vals = eig_sym(r @ a @ r).values
    return float(vals[0]), float(vals[-1])


def psd_leq(a, b, tol: float = 0.0) -> bool:
    """``A <= B`` in the positive semidefinite order, up to ``tol * max(1, ||B||)``."""
    a = as_sym(a)
    b = as_sym(b)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    lam_min = eig_sym(b - a).values[0]
    return bool(lam_min >= -tol * max(1.0, op_norm(b)))
