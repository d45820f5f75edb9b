"""Invariant suite behind ``matdyadic verify``.

Each ``*_checks`` function draws random instances from ``rng`` and records
every property it tests in a :class:`Tally`. A check passes when its
measured excess over the allowed tolerance is not positive.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import files, matlin
from .bounds import (
    CarlesonSequence,
    bound_shape_violations,
    bounds_report,
    carleson_constants,
    dw_dominance_gap,
    inverse_equivalence_check,
    necessity_lower_bound,
    s123_decomposition,
    s3_sequence,
    square_constants,
    testing_supremum,
    tv_embedding_ratio,
    weighted_op_norm,
)
from .dyadic import (
    DyadicIndex,
    VectorField,
    analyze,
    averages,
    haar_function,
    internal_count,
    intervals,
    synthesize,
)
from .experiments import FamilySpec, csv_text, fit_exponent, run_sweep
from .operators import (
    MultiplierSymbol,
    apply_multiplier,
    apply_shift,
    disbalanced_basis,
    necessity_function,
    quadratic_forms,
    reconstruct_check,
    sigma_norm,
    square_norm_mc,
    square_norm_sq,
)
from .weights import (
    WeightField,
    a2_characteristic,
    averages_tree,
    l2w_norm_sq,
    random_martingale,
    random_spd,
    rotation,
    truncate,
    truncation_inverse,
)

MC_TRIALS = 4000


@dataclass
class CheckStat:
    passed: int = 0
    total: int = 0
    worst: float = -math.inf  # largest excess seen
    failures: list = field(default_factory=list)


class Tally:
    def __init__(self):
        self.stats: dict[str, CheckStat] = {}

    def record(self, name: str, excess: float, detail: str = "") -> bool:
        st = self.stats.setdefault(name, CheckStat())
        st.total += 1
        ok = bool(excess <= 0.0) and not math.isnan(excess)
        st.passed += ok
        st.worst = max(st.worst, excess) if not math.isnan(excess) else math.inf
        if not ok and len(st.failures) < 3:
            st.failures.append(detail or f"excess {excess!r}")
        return ok

    def ok(self, name: str, cond: bool, detail: str = "") -> bool:
        return self.record(name, 0.0 if cond else 1.0, detail)

    def close(self, name: str, got, want, rtol: float = 0.0, atol: float = 0.0) -> bool:
        got = np.asarray(got, dtype=float)
        want = np.asarray(want, dtype=float)
        err = float(np.max(np.abs(got - want))) if got.size else 0.0
        allowed = atol + rtol * float(np.max(np.abs(want))) if want.size else atol
        return self.record(name, err - allowed, f"|got-want|={err!r} allowed {allowed!r}")

    def leq(self, name: str, a: float, b: float, detail: str = "") -> bool:
        return self.record(name, float(a) - float(b), detail or f"{a!r} > {b!r}")

    @property
    def failed(self) -> list[str]:
        return [k for k, s in self.stats.items() if s.passed < s.total]

    def lines(self) -> list[str]:
        return [f"{k}={'pass' if s.passed == s.total else 'FAIL'} ({s.passed}/{s.total})"
                for k, s in sorted(self.stats.items())]


def _dump(w: WeightField) -> str:
    return json.dumps(files.weight_to_doc(w))


# -- matlin --------------------------------------------------------------------

def matlin_checks(rng: np.random.Generator, tally: Tally, dim: int) -> None:
    m = random_spd(rng, dim, spread=rng.uniform(0.5, 4.0))
    root = matlin.sqrt_spd(m)
    tally.close("matlin.sqrt", root @ root, m, rtol=1e-9)
    r = matlin.invsqrt_spd(m)
    lam = np.linalg.eigvalsh(m)
    tally.close("matlin.invsqrt", r @ m @ r, np.eye(dim), atol=1e-9 * lam[-1] / lam[0])
    e = matlin.eig_sym(m)
    tally.close("matlin.eig_reconstruct", (e.vectors * e.values) @ e.vectors.T, m, rtol=1e-12)
    tally.close("matlin.eig_orthonormal", e.vectors.T @ e.vectors, np.eye(dim), atol=1e-12)

    g = rng.standard_normal((dim, dim))
    tally.close("matlin.op_norm_transpose", matlin.op_norm(g.T), matlin.op_norm(g), rtol=1e-12)

    def psd():
        x = rng.standard_normal((dim, dim))
        return x @ x.T

    a1, a2 = psd(), psd()
    lam1 = matlin.op_norm(matlin.sqrt_spd(a1) @ matlin.sqrt_spd(a2)) ** 2
    tr = float(np.trace(a1 @ a2))
    tally.leq("matlin.fact1_lower", lam1, tr * (1 + 1e-9))
    tally.leq("matlin.fact1_upper", tr, dim * lam1 * (1 + 1e-9))
    b1, b2 = a1 + psd(), a2 + psd()
    tally.leq("matlin.fact2", tr, float(np.trace(b1 @ b2)) + 1e-9)
    tally.ok("matlin.psd_order", matlin.psd_leq(a1, b1, 1e-12) and matlin.psd_leq(a2, b2, 1e-12))

    b = random_spd(rng, dim)
    lo, _ = matlin.gen_eig_extremes(b, m)
    _, hi = matlin.gen_eig_extremes(m, b)
    tally.close("matlin.gen_eig_reciprocity", hi, 1.0 / lo, rtol=1e-9)


# -- dyadic --------------------------------------------------------------------

def dyadic_checks(rng: np.random.Generator, tally: Tally, dim: int, depth: int) -> None:
    f = VectorField(rng.standard_normal((1 << depth, dim)))
    g = VectorField(rng.standard_normal((1 << depth, dim)))
    s = analyze(f)
    tally.close("dyadic.parseval", s.norm_sq(), f.norm_sq(), rtol=1e-10)
    tally.close("dyadic.roundtrip", synthesize(s).values, f.values, atol=1e-12)
    a, b = rng.standard_normal(2)
    lin = analyze(VectorField(a * f.values + b * g.values))
    sg = analyze(g)
    tally.close("dyadic.linearity", lin.coeffs, a * s.coeffs + b * sg.coeffs, atol=1e-12)
    tally.close("dyadic.linearity", lin.mean, a * s.mean + b * sg.mean, atol=1e-12)
    avg = averages(f)
    n = internal_count(depth)
    idx = np.arange(n)
    tally.close("dyadic.midpoint", avg[idx], 0.5 * (avg[2 * idx + 1] + avg[2 * idx + 2]),
                atol=1e-14 * max(1.0, float(np.max(np.abs(f.values)))))
    for i in range(n):
        node = DyadicIndex.from_index(i)
        ok = node.left.parent == node and node.right.parent == node
        if not tally.ok("dyadic.parent_child", ok, f"{node}"):
            break


def haar_orthonormality(tally: Tally, depth: int) -> None:
    h = np.array([haar_function(i, depth) for i in intervals(depth)])
    gram = h @ h.T / h.shape[1]
    tally.close("dyadic.haar_orthonormal", gram, np.eye(len(h)), atol=1e-12)


# -- weights -------------------------------------------------------------------

def weight_checks(rng: np.random.Generator, tally: Tally, w: WeightField) -> None:
    t = averages_tree(w)
    dim = w.dim
    n = t.n_internal
    idx = np.arange(n)
    scale = float(np.max(np.abs(t.mean)))
    tally.close("weights.midpoint", t.mean[idx], 0.5 * (t.mean[2 * idx + 1] + t.mean[2 * idx + 2]),
                atol=1e-14 * scale)
    tally.close("weights.sqrt_cache", t.sqrt @ t.sqrt, t.mean, atol=1e-10 * scale)
    jensen = matlin.eig_sym(t.sqrt @ t.mean_inv @ t.sqrt).values[:, 0]
    tally.leq("weights.jensen", 1.0 - 1e-9, float(np.min(jensen)))
    a2 = a2_characteristic(t)
    tally.leq("weights.a2_ge_1", 1.0 - 1e-9, a2)
    c = float(np.exp(rng.uniform(-3, 3)))
    tally.close("weights.a2_scale", a2_characteristic(averages_tree(w.scaled(c))), a2, rtol=1e-10)
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    tally.close("weights.a2_conjugation", a2_characteristic(averages_tree(w.conjugated(q))),
                a2, rtol=1e-10)
    tally.close("weights.a2_constant",
                a2_characteristic(averages_tree(WeightField(np.broadcast_to(
                    w.values[0], w.values.shape).copy()))), 1.0, atol=1e-10)

    n_trunc = float(np.exp(rng.uniform(0.05, 2.0)))
    wn = truncate(w, n_trunc)
    tally.close("weights.truncation_inverse", wn.inverse_values(), truncation_inverse(w, n_trunc),
                atol=1e-9 * n_trunc)
    lam = wn.eig.values
    tally.leq("weights.truncation_bounds",
              max(1.0 / n_trunc - lam[:, 0].min(), lam[:, -1].max() - n_trunc), 1e-9 * n_trunc)
    tn = averages_tree(wn)
    lhs = np.trace(tn.mean @ tn.mean_inv, axis1=1, axis2=2)
    rhs = 2 * dim + np.trace(t.mean @ t.mean_inv, axis1=1, axis2=2)
    tally.leq("weights.truncation_trace", float(np.max(lhs - rhs)), 1e-9 * float(np.max(rhs)))

    if dim == 1:
        # scalar formulas: a2 = max_I <w>_I <1/w>_I
        vals = w.values[:, 0, 0]
        best = 0.0
        for j in range(w.depth + 1):
            blocks = vals.reshape(1 << j, -1)
            best = max(best, float(np.max(blocks.mean(1) * (1.0 / blocks).mean(1))))
        tally.close("weights.scalar_crosscheck", a2, best, rtol=1e-12)


# -- operators -----------------------------------------------------------------

def _random_symbol(rng, dim, levels) -> MultiplierSymbol:
    return MultiplierSymbol(rng.standard_normal((internal_count(levels), dim, dim)))


def operator_checks(rng: np.random.Generator, tally: Tally, w: WeightField,
                    mc_trials: int = MC_TRIALS) -> None:
    t = averages_tree(w)
    dim, depth = w.dim, w.depth
    f = VectorField(rng.standard_normal((1 << depth, dim)))
    s = analyze(f)
    base = square_norm_sq(s, t)

    shifted = apply_shift(s)
    tally.close("operators.shift_isometry", square_norm_sq(shifted, averages_tree(w.refine())),
                base, rtol=1e-10)
    tally.close("operators.shift_parseval", shifted.norm_sq(), s.zero_mean().norm_sq(), rtol=1e-12)

    sigma = _random_symbol(rng, dim, depth)
    sn = sigma_norm(sigma, t)
    tally.leq("operators.multiplier_contraction",
              square_norm_sq(apply_multiplier(sigma, s), t), sn ** 2 * base * (1 + 1e-10))

    for i in rng.choice(t.n_internal, size=min(4, t.n_internal), replace=False):
        interval = DyadicIndex.from_index(int(i))
        e = rng.standard_normal(dim)
        nf = necessity_function(t, interval, e)
        tally.close("operators.necessity_norm", l2w_norm_sq(synthesize(nf, depth), w), e @ e,
                    rtol=1e-10)
        sig = sigma.matrices[i]
        r = t.invsqrt[i]
        want = e @ (r @ sig.T @ t.mean[i] @ sig @ r) @ e
        got = l2w_norm_sq(synthesize(apply_multiplier(sigma, nf), depth), w)
        tally.close("operators.necessity_image", got, want, rtol=1e-10)

    # disbalanced Haar functions: gram matrix in L^2(W) across all intervals
    gs, owner = [], []
    for interval in intervals(depth):
        basis = disbalanced_basis(t, interval)
        i = interval.index
        tally.close("operators.w_k_sqrt", basis.weights,
                    1.0 / np.linalg.norm(t.sqrt[i] @ basis.vectors, axis=0), rtol=1e-10)
        tally.close("operators.w_k_invsqrt", basis.weights,
                    np.linalg.norm(t.invsqrt[i] @ basis.vectors, axis=0), rtol=1e-10)
        for k in range(dim):
            tally.leq("operators.reconstruction", reconstruct_check(t, interval, k), 1e-10)
        gs.append(basis.leaf_values(depth))
        owner += [i] * dim
    g = np.concatenate(gs)  # (m, leaves, d)
    gram = np.einsum("mxa,xab,nxb->mn", g, w.values, g) / (1 << depth)
    owner = np.array(owner)
    cross = np.where(owner[:, None] != owner[None, :], np.abs(gram), 0.0)
    tally.leq("operators.disbalanced_orthogonality", float(np.max(cross)), 1e-9)
    tally.leq("operators.disbalanced_norm", float(np.sqrt(np.max(np.diag(gram)))), 5 + 1e-9)

    mc = square_norm_mc(s, w, mc_trials, seed=int(rng.integers(2 ** 31)))
    tally.leq("operators.mc_5sigma", abs(mc.value - base), 5 * mc.stderr + 1e-12 * base)

    q = quadratic_forms(s, w, t)
    tally.close("operators.forms_dw", q.dw, base, rtol=1e-12)


# -- bounds --------------------------------------------------------------------

def bounds_checks(rng: np.random.Generator, tally: Tally, w: WeightField,
                  oracle: bool = False) -> None:
    t = averages_tree(w)
    dim, depth = w.dim, w.depth
    sq = square_constants(w, tree=t)
    tally.leq("bounds.c_up_ge_1", 1 - 1e-9, sq.c_up)
    tally.leq("bounds.c_low_ge_1", 1 - 1e-9, sq.c_low)
    if dim == 1:
        c = float(np.exp(rng.uniform(-2, 2)))
        sc = square_constants(w.scaled(c))
        tally.close("bounds.scalar_scale", [sc.c_up, sc.c_low], [sq.c_up, sq.c_low], rtol=1e-9)

    ie = inverse_equivalence_check(w, tree=t)
    tally.leq("bounds.inverse_equivalence", ie.residual, 1e-8)
    tally.close("bounds.inverse_equivalence", ie.direct, sq.c_low, rtol=1e-8)
    tally.leq("bounds.dw_dominance", dw_dominance_gap(t), 1 + 1e-9)

    f = VectorField(rng.standard_normal((1 << depth, dim)))
    s123 = s123_decomposition(w, f, tree=t)
    q = quadratic_forms(analyze(f), w, t)
    tally.close("bounds.s123_total", s123.total, q.dw_inv, rtol=1e-10)
    tally.close("bounds.s3_forms", s123.s3, s123.s3_averaged, rtol=1e-9, atol=1e-12)
    tally.leq("bounds.s123_triangle", s123.total, s123.s1 + s123.s2_bound + s123.s3 + 1e-9)
    tally.leq("bounds.tv_nonneg", 0.0, tv_embedding_ratio(w, f, tree=t).lhs)

    sigma = _random_symbol(rng, dim, depth)
    norm = weighted_op_norm(sigma, w, tree=t).value
    lower = necessity_lower_bound(sigma, w, tree=t)
    tally.leq("bounds.multiplier_necessity", lower, norm * (1 + 1e-8))
    tally.close("bounds.necessity_is_sigma_norm", lower, sigma_norm(sigma, t), rtol=1e-8)

    cs = carleson_constants(s3_sequence(t), w, tree=t)
    tally.leq("bounds.carleson_testing", cs.c_test, cs.c_embed * (1 + 1e-8))
    rnd = rng.standard_normal((t.n_internal, dim, dim))
    seq = CarlesonSequence(rnd @ np.swapaxes(rnd, -1, -2))
    cr = carleson_constants(seq, w, tree=t)
    tally.leq("bounds.carleson_testing", cr.c_test, cr.c_embed * (1 + 1e-8))

    # refinement leaves every supremum unchanged
    wr = w.refine()
    tr = averages_tree(wr)
    sqr = square_constants(wr, tree=tr)
    tally.close("bounds.refinement_a2", a2_characteristic(tr), a2_characteristic(t), rtol=1e-10)
    tally.close("bounds.refinement_square", [sqr.c_up, sqr.c_low], [sq.c_up, sq.c_low], rtol=1e-10)
    tally.close("bounds.refinement_testing", testing_supremum(tr), testing_supremum(t), rtol=1e-10)
    cref = carleson_constants(CarlesonSequence(seq.padded(depth + 1)), wr, tree=tr)
    tally.close("bounds.refinement_c_test", cref.c_test, cr.c_test, rtol=1e-10)

    if oracle:
        for name, fn in (("square", lambda m: square_constants(w, method=m, tree=t)),
                         ("shift", lambda m: (weighted_op_norm("shift", w, m, tree=t).value,)),
                         ("multiplier", lambda m: (weighted_op_norm(sigma, w, m, tree=t).value,)),
                         ("carleson", lambda m: carleson_constants(seq, w, m, tree=t))):
            tally.close(f"bounds.dense_power_{name}", fn("power"), fn("dense"), rtol=1e-6)

    rep = bounds_report(w, MultiplierSymbol.random_signs(rng, dim, depth), f)
    vals = [v for k, v in rep.as_dict().items() if k != "metadata"]
    tally.ok("bounds.report_nonneg", min(vals) >= 0)
    if rep.a2 <= 100:
        bad = bound_shape_violations(rep)
        tally.ok("bounds.shape", not bad, f"{'; '.join(bad)}; weight={_dump(w)}")


# -- experiments and files ---------------------------------------------------------

def experiment_checks(rng: np.random.Generator, tally: Tally) -> None:
    xs = np.exp(rng.uniform(0, 3, size=6))
    ys = np.exp(rng.uniform(0, 3, size=6))
    c = float(np.exp(rng.uniform(-5, 5)))
    tally.close("experiments.fit_rescale", fit_exponent(xs, c * ys).slope,
                fit_exponent(xs, ys).slope, atol=1e-12)
    spec = FamilySpec("random_martingale", 0.2, 0.8, 3, depth=3, dim=2,
                      seed=int(rng.integers(1000)))
    which = ("c_up", "c_low", "testing_ratio")
    tally.ok("experiments.determinism", csv_text(run_sweep(spec, which)) == csv_text(run_sweep(spec, which)))


def file_checks(tally: Tally, objects) -> None:
    for obj in objects:
        doc = json.loads(json.dumps(files.to_doc(obj)))
        back = files.load_from_doc(doc)
        a = getattr(obj, "values", getattr(obj, "matrices", None))
        b = getattr(back, "values", getattr(back, "matrices", None))
        tally.ok(f"files.roundtrip_{doc['kind']}", np.array_equal(a, b))


# -- fixtures -----------------------------------------------------------------------

FIXTURE_VALUES = {
    "two_leaf.json": {"a2": 1.5625},
    "step9.json": {"a2": 25.0 / 9.0, "c_up": 3.70782, "c_low": 1.73030},
    "const_id.json": {"a2": 1.0, "c_up": 1.0, "c_low": 1.0},
}


def fixture_dir() -> Path:
    return Path(str(resources.files("matdyadic") / "fixtures"))


def fixture_checks(rng: np.random.Generator, tally: Tally, directory: Path | None = None) -> list:
    """Run the weight and bounds suites on every shipped weight file."""
    directory = fixture_dir() if directory is None else directory
    loaded = []
    for path in sorted(directory.glob("*.json")):
        obj = files.load(path)
        loaded.append(obj)
        if not isinstance(obj, WeightField):
            continue
        weight_checks(rng, tally, obj)
        if obj.depth >= 1:
            operator_checks(rng, tally, obj, mc_trials=1000)
            bounds_checks(rng, tally, obj, oracle=obj.depth <= 4)
        want = FIXTURE_VALUES.get(path.name, {})
        if want:
            t = averages_tree(obj)
            tally.close(f"fixtures.{path.stem}_a2", a2_characteristic(t), want["a2"], atol=1e-12)
            if "c_up" in want:
                sq = square_constants(obj, tree=t)
                tally.close(f"fixtures.{path.stem}_square", [sq.c_up, sq.c_low],
                            [want["c_up"], want["c_low"]], atol=1e-4)
    return loaded


def run_verify(depth: int = 5, dim: int = 2, seed: int = 0, trials: int = 50,
               fixtures: Path | None = None) -> Tally:
    tally = Tally()
    rng = np.random.default_rng(seed)
    haar_orthonormality(tally, min(depth, 6))
    objects = fixture_checks(rng, tally, fixtures)
    for trial in range(trials):
        sub = np.random.default_rng([seed, trial])
        d = dim if trial % 5 else 1  # every fifth instance is scalar
        w = random_martingale(int(sub.integers(2 ** 31)), depth, float(sub.uniform(0.2, 1.0)), d)
        matlin_checks(sub, tally, int(sub.integers(1, 9)))
        dyadic_checks(sub, tally, d, int(sub.integers(0, 11)))
        weight_checks(sub, tally, w)
        operator_checks(sub, tally, w)
        bounds_checks(sub, tally, w, oracle=trial % 10 == 0)
        if trial % 10 == 0:
            experiment_checks(sub, tally)
            objects += [w, VectorField(sub.standard_normal((1 << depth, d))),
                        _random_symbol(sub, d, depth)]
    if dim == 2:
        w = rotation(4.0, depth)
        weight_checks(rng, tally, w)
        bounds_checks(rng, tally, w)
    file_checks(tally, objects)
    return tally
