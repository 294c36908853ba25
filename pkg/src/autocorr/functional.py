"""Exact evaluation of the shifted-product functional.

For a step function f and a d x n shift matrix A with columns a_i,

    g(t) = integral over R of prod_i f(x + t . a_i) dx,    t in [0, 1]^d.

The integrand is constant between consecutive shifted cell edges, so g(t) is
a finite sum of (interval length) x (product of cell values) and is computed
without quadrature.  For d = 1 the map t -> g(t) is piecewise affine with
kinks only where two shifted edges cross, which makes the minimum over
[0, 1] an exact finite search.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatchError, ZeroFunctionError
from .grid_fn import BOUNDARY_SNAP, GridFunction, l1_norm
from .matrix_spec import ShiftMatrix

DEFAULT_TGRID = 64
# cap on the number of grid points used by grid_refine when d >= 3
GRID_POINT_BUDGET = 20_000


class Method(str, Enum):
    EXACT_KINKS = "exact_kinks"
    GRID_REFINE = "grid_refine"


@dataclass(frozen=True)
class ShiftPoint:
    coords: tuple

    def __post_init__(self):
        c = tuple(float(x) for x in np.atleast_1d(np.asarray(self.coords, dtype=np.float64)))
        if any(not (0.0 <= x <= 1.0) for x in c):
            raise ValueError(f"shift coordinates must lie in [0, 1], got {c}")
        object.__setattr__(self, "coords", c)

    @property
    def d(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


def as_shift_point(t, d: int) -> ShiftPoint:
    sp = t if isinstance(t, ShiftPoint) else ShiftPoint(t)
    if sp.d != d:
        raise DimensionMismatchError(f"shift point has {sp.d} coordinates, matrix has d={d}")
    return sp


@dataclass(frozen=True)
class Extremum:
    t: ShiftPoint
    value: float
    method: Method

    def __iter__(self):
        # allows ``t, value = min_over_shifts(...)``
        return iter((self.t, self.value))


@dataclass(frozen=True)
class FunctionalReport:
    min_value: float
    argmin_t: ShiftPoint
    max_value: float
    argmax_t: ShiftPoint
    l1n: float
    ratio: float
    method: Method


# -- exact integration -----------------------------------------------------


def segments(f: GridFunction, shifts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split R into intervals on which every f(x + s_i) is constant.

    Returns the interval lengths and an (intervals x n) array of cell
    indices, with -1 where the shifted argument lies outside the grid.
    Intervals outside every shifted support are dropped.
    """
    shifts = np.asarray(shifts, dtype=np.float64)
    edges = f.edges()
    bps = np.unique((edges[None, :] - shifts[:, None]).ravel())
    lengths = np.diff(bps)
    mids = 0.5 * (bps[:-1] + bps[1:])
    idx = np.floor((mids[:, None] + shifts[None, :] - f.x0) / f.h).astype(np.int64)
    idx[(idx < 0) | (idx >= f.m)] = -1
    keep = lengths > 0
    return lengths[keep], idx[keep]


def _product_integral(f: GridFunction, shifts: np.ndarray) -> float:
    lengths, idx = segments(f, shifts)
    vals = np.where(idx >= 0, f.values[np.clip(idx, 0, None)], 0.0)
    return float(np.dot(lengths, np.prod(vals, axis=1)))


def shifted_product_integral(f: GridFunction, A: ShiftMatrix, t) -> float:
    """integral of prod_i f(x + t . a_i) dx, exactly."""
    t = as_shift_point(t, A.d)
    return _product_integral(f, t.as_array() @ A.entries)


def autocorrelation_lags(values: np.ndarray) -> np.ndarray:
    """C_p = sum_k v_k v_{k+p} for p = 0..m-1."""
    m = values.size
    return np.correlate(values, values, mode="full")[m - 1:]


def pair_integral(f: GridFunction, lag) -> np.ndarray:
    """integral f(y) f(y + tau) dy for an array of lags tau (n = 2 fast path).

    Uses g(tau) = h [(1 - r) C_q + r C_{q+1}] with |tau| / h = q + r.
    """
    tau = np.abs(np.asarray(lag, dtype=np.float64)) / f.h
    C = np.concatenate([autocorrelation_lags(f.values), [0.0, 0.0]])
    q = np.floor(tau)
    r = tau - q
    q = np.minimum(q, f.m).astype(np.int64)
    return f.h * ((1.0 - r) * C[q] + r * C[q + 1])


def _batch_evaluator(f: GridFunction, A: ShiftMatrix) -> Callable[[np.ndarray], np.ndarray]:
    """Return T (k x d) -> g values, vectorised when n == 2."""
    if A.n == 2:
        diff = A.entries[:, 1] - A.entries[:, 0]
        return lambda T: pair_integral(f, np.atleast_2d(T) @ diff)
    if A.n == 1:
        total = l1_norm(f)
        return lambda T: np.full(np.atleast_2d(T).shape[0], total)
    return lambda T: np.array([_product_integral(f, row @ A.entries) for row in np.atleast_2d(T)])


# -- d = 1 kink enumeration ------------------------------------------------


def kink_candidates(f: GridFunction, A: ShiftMatrix) -> np.ndarray:
    """Sorted t in [0, 1] containing 0, 1 and every edge-crossing time."""
    if A.d != 1:
        raise DimensionMismatchError("kink enumeration needs d = 1")
    a = A.entries[0]
    deltas = {abs(float(a[j] - a[i])) for i in range(A.n) for j in range(i + 1, A.n)}
    ts = [np.array([0.0, 1.0])]
    for delta in deltas:
        if delta == 0:
            continue
        kmax = min(int(np.floor(delta / f.h + BOUNDARY_SNAP)), f.m)
        ts.append(np.arange(kmax + 1) * f.h / delta)
    t = np.unique(np.concatenate(ts))
    return t[(t >= 0.0) & (t <= 1.0)]


def _pick(T: np.ndarray, values: np.ndarray, maximize: bool) -> int:
    """Index of the extremum; ties go to the lexicographically smallest t."""
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    best = values.max() if maximize else values.min()
    close = np.abs(values - best) <= 1e-12 * scale
    cand = np.flatnonzero(close)
    order = np.lexsort(T[cand].T[::-1])
    return int(cand[order[0]])


def _grid_refine(
    evaluate: Callable[[np.ndarray], np.ndarray],
    d: int,
    maximize: bool,
    tgrid: int | None = None,
    min_step: float = 1e-6,
) -> tuple[np.ndarray, float]:
    """Uniform grid search over [0,1]^d followed by coordinate descent."""
    r = DEFAULT_TGRID if tgrid is None else int(tgrid)
    if tgrid is None and (r + 1) ** d > GRID_POINT_BUDGET:
        r = max(2, int(GRID_POINT_BUDGET ** (1.0 / d)) - 1)
    axis = np.linspace(0.0, 1.0, r + 1)
    T = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    sign = -1.0 if maximize else 1.0
    vals = sign * evaluate(T)
    k = _pick(T, vals, maximize=False)
    t, best = T[k].copy(), float(vals[k])
    step = 1.0 / r
    while step >= min_step:
        improved = False
        for axis_i in range(d):
            for direction in (-1.0, 1.0):
                trial = t.copy()
                trial[axis_i] = min(1.0, max(0.0, trial[axis_i] + direction * step))
                v = sign * float(evaluate(trial[None, :])[0])
                if v < best:
                    t, best, improved = trial, v, True
        if not improved:
            step /= 2.0
    return t, sign * best


def _extremum(f: GridFunction, A: ShiftMatrix, maximize: bool, strategy=None, tgrid=None) -> Extremum:
    if f.is_zero():
        raise ZeroFunctionError("function is identically zero")
    method = Method(strategy) if strategy is not None else (
        Method.EXACT_KINKS if A.d == 1 else Method.GRID_REFINE)
    evaluate = _batch_evaluator(f, A)
    if method is Method.EXACT_KINKS:
        if A.d != 1:
            raise DimensionMismatchError("exact_kinks strategy needs d = 1")
        T = kink_candidates(f, A)[:, None]
        vals = evaluate(T)
        k = _pick(T, vals, maximize)
        return Extremum(ShiftPoint(T[k]), float(vals[k]), method)
    t, value = _grid_refine(evaluate, A.d, maximize, tgrid)
    return Extremum(ShiftPoint(t), float(value), method)


def min_over_shifts(f: GridFunction, A: ShiftMatrix, strategy=None, tgrid=None) -> Extremum:
    """min over t in [0,1]^d of the functional.

    Exact for d = 1; for d >= 2 the grid_refine result is an upper bound.
    """
    return _extremum(f, A, False, strategy, tgrid)


def max_over_shifts(f: GridFunction, A: ShiftMatrix, strategy=None, tgrid=None) -> Extremum:
    return _extremum(f, A, True, strategy, tgrid)


def _norm_power(f: GridFunction, n: int) -> float:
    l1n = l1_norm(f) ** n
    if not l1n > 0:
        raise ZeroFunctionError("the L1 norm of f underflows; rescale the values")
    return l1n


def ratio(f: GridFunction, A: ShiftMatrix, strategy=None, tgrid=None) -> FunctionalReport:
    lo = min_over_shifts(f, A, strategy, tgrid)
    hi = max_over_shifts(f, A, strategy, tgrid)
    l1n = _norm_power(f, A.n)
    return FunctionalReport(lo.value, lo.t, hi.value, hi.t, l1n, lo.value / l1n, lo.method)


def ratio_value(f: GridFunction, A: ShiftMatrix) -> float:
    """Just the ratio (d = 1, exact); cheaper than building a report."""
    if f.is_zero():
        raise ZeroFunctionError("function is identically zero")
    vals = _batch_evaluator(f, A)(kink_candidates(f, A)[:, None])
    return float(vals.min()) / _norm_power(f, A.n)


def correlation_curve(f: GridFunction, A: ShiftMatrix, samples: int) -> list[tuple[ShiftPoint, float]]:
    """g sampled at t_j = j / (samples - 1)."""
    if A.d != 1:
        raise DimensionMismatchError("correlation curves need d = 1")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    out = []
    for j in range(samples):
        t = ShiftPoint((j / (samples - 1),))
        out.append((t, shifted_product_integral(f, A, t)))
    return out


def averaging_upper_bound(f: GridFunction, A: ShiftMatrix) -> float:
    """integral over t in [0,1] of g(t), exact (trapezoid between kinks)."""
    if A.d != 1:
        raise DimensionMismatchError("averaging bound needs d = 1")
    T = kink_candidates(f, A)
    g = _batch_evaluator(f, A)(T[:, None])
    return float(np.sum(np.diff(T) * 0.5 * (g[1:] + g[:-1])))


def lipschitz_bound(f: GridFunction, A: ShiftMatrix) -> float:
    """Lipschitz constant of t -> g(t) used to bound sampling error."""
    a = A.entries[0]
    spread = float(np.max(a) - np.min(a))
    return A.n * (spread / f.h) * float(np.max(f.values)) ** (A.n - 1) * l1_norm(f)


def evaluate_many(f: GridFunction, A: ShiftMatrix, T: Sequence) -> np.ndarray:
    """g at each row of ``T`` (shape k x d)."""
    T = np.atleast_2d(np.asarray(T, dtype=np.float64))
    if T.shape[1] != A.d:
        raise DimensionMismatchError(f"expected {A.d} coordinates per shift point")
    return _batch_evaluator(f, A)(T)
