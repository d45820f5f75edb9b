"""Weight-family sweeps, log-log exponent fits and CSV output."""
from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .bounds import (
    log_floor,
    square_constants,
    testing_ratio,
    tv_embedding_ratio,
    weighted_op_norm,
)
from .dyadic import VectorField
from .errors import InvalidInputError, MatDyadicError
from .operators import MultiplierSymbol
from .weights import FAMILIES, a2_characteristic, averages_tree, generate

log = logging.getLogger(__name__)

CSV_COLUMNS = ("family", "param", "depth", "dim", "a2", "c_up", "c_low", "shift_norm",
               "tsigma_norm", "tv_ratio", "testing_ratio", "runtime_ms")
MEASUREMENTS = ("c_up", "c_low", "shift_norm", "tsigma_norm", "tv_ratio", "testing_ratio")


@dataclass(frozen=True)
class FamilySpec:
    family: str
    start: float
    stop: float
    count: int
    geometric: bool = False
    depth: int = 4
    dim: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInputError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.count < 1:
            raise InvalidInputError("count must be >= 1")
        if self.geometric and not (self.start > 0 and self.stop > 0):
            raise InvalidInputError("geometric grids need positive endpoints")
        if self.depth < 1 or self.dim < 1:
            raise InvalidInputError("depth and dim must be >= 1")

    def params(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.start)])
        if self.geometric:
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    @classmethod
    def from_range(cls, family: str, text: str, **kw) -> "FamilySpec":
        """Parse ``a:b:n`` or ``a:b:n:geom``."""
        parts = text.split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("geom", "lin")):
            raise InvalidInputError(f"range must look like a:b:n[:geom], got {text!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise InvalidInputError(f"bad range {text!r}: {exc}") from None
        return cls(family, start, stop, count, len(parts) == 4 and parts[3] == "geom", **kw)


@dataclass
class SweepRow:
    family: str
    param: float
    depth: int
    dim: int
    a2: float | None = None
    c_up: float | None = None
    c_low: float | None = None
    shift_norm: float | None = None
    tsigma_norm: float | None = None
    tv_ratio: float | None = None
    testing_ratio: float | None = None
    runtime_ms: float | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def sweep_inputs(spec: FamilySpec) -> tuple[MultiplierSymbol, VectorField]:
    """Fixed symbol (random ±Id signs) and test function for a sweep, from its seed."""
    sigma = MultiplierSymbol.random_signs(np.random.default_rng([spec.seed, 1]),
                                          spec.dim, spec.depth)
    f = VectorField(np.random.default_rng([spec.seed, 2]).standard_normal(
        (1 << spec.depth, spec.dim)))
    return sigma, f


def measure_row(spec: FamilySpec, param: float, which: Iterable[str] = MEASUREMENTS) -> SweepRow:
    which = set(which)
    row = SweepRow(spec.family, float(param), spec.depth, spec.dim)
    start = time.perf_counter()
    try:
        w = generate(spec.family, float(param), spec.depth, spec.dim, spec.seed)
        t = averages_tree(w)
        sigma, f = sweep_inputs(spec)
        row.a2 = a2_characteristic(t)
        if {"c_up", "c_low"} & which:
            sq = square_constants(w, tree=t)
            row.c_up = sq.c_up if "c_up" in which else None
            row.c_low = sq.c_low if "c_low" in which else None
        if "shift_norm" in which:
            row.shift_norm = weighted_op_norm("shift", w, tree=t).value
        if "tsigma_norm" in which:
            row.tsigma_norm = weighted_op_norm(sigma, w, tree=t).value
        if "tv_ratio" in which:
            row.tv_ratio = tv_embedding_ratio(w, f, tree=t).ratio
        if "testing_ratio" in which:
            row.testing_ratio = testing_ratio(t)
    except MatDyadicError as exc:
        log.warning("sweep row %s=%r failed: %s", spec.family, param, exc)
        row.error = f"{type(exc).__name__}: {exc}"
    row.runtime_ms = 1000.0 * (time.perf_counter() - start)
    return row


def run_sweep(spec: FamilySpec, which: Iterable[str] = MEASUREMENTS, jobs: int = 1) -> list[SweepRow]:
    """One row per grid parameter, in parameter order; failed rows are kept."""
    which = tuple(which)
    unknown = set(which) - set(MEASUREMENTS) - {"a2"}
    if unknown:
        raise InvalidInputError(f"unknown measurements {sorted(unknown)}")
    params = spec.params()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(measure_row, [spec] * len(params), params, [which] * len(params)))
    return [measure_row(spec, p, which) for p in params]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows: Sequence[SweepRow], out, timing: bool = False) -> None:
    """Write rows in the fixed column order.

    Missing or failed measurements are empty cells. ``runtime_ms`` is left
    empty unless ``timing`` is set, so that fixed-seed output is reproducible
    byte for byte.
    """
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        vals = [getattr(r, c) for c in CSV_COLUMNS]
        if not timing:
            vals[-1] = None
        writer.writerow([_cell(v) for v in vals])


def csv_text(rows: Sequence[SweepRow], timing: bool = False) -> str:
    buf = io.StringIO()
    write_csv(rows, buf, timing)
    return buf.getvalue()


class ExponentFit(NamedTuple):
    slope: float
    intercept: float
    r2: float


def fit_exponent(xs, ys) -> ExponentFit:
    """Least-squares line through ``(log x, log y)``; the slope is the exponent."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError("xs and ys must be 1-D and the same length")
    if x.size < 2:
        raise InvalidInputError("need at least two points to fit an exponent")
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidInputError("exponent fits need positive values")
    lx, ly = np.log(x), np.log(y)
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    if sxx <= 1e-24 * max(1.0, float(np.sum(lx ** 2))):
        raise InvalidInputError("degenerate fit: all x values are equal")
    slope = float(np.sum((lx - lx.mean()) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    ss_res = float(np.sum((ly - (intercept + slope * lx)) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    # a flat response is fit perfectly by a zero slope
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 1e-24 * max(1.0, float(np.sum(ly ** 2))) else 1.0
    return ExponentFit(slope, intercept, r2)


BASE_SLOPES = (1.0, 1.5, 2.0)


def exponent_report(rows: Sequence[SweepRow], column: str) -> dict:
    """Raw fit of ``column`` against ``a2`` plus fits of ``y / (x^s log x)`` residuals."""
    good = [r for r in rows if not r.failed and r.a2 is not None and getattr(r, column) is not None]
    out = {"column": column, "points": len(good), "failed": sum(r.failed for r in rows)}
    xs = np.array([r.a2 for r in good])
    ys = np.array([getattr(r, column) for r in good])
    out["raw"] = fit_exponent(xs, ys)
    logs = np.array([log_floor(x) for x in xs])
    for s in BASE_SLOPES:
        out[f"residual_{s:g}"] = fit_exponent(xs, ys / (xs ** s * logs))
    return out


def format_report(rep: dict) -> str:
    lines = [f"column={rep['column']} points={rep['points']} failed={rep['failed']}"]
    for key, fit in rep.items():
        if isinstance(fit, ExponentFit):
            lines.append(f"{key}: slope={fit.slope!r} intercept={fit.intercept!r} r2={fit.r2!r}")
    return "\n".join(lines)
