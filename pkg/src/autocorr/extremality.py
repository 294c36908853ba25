"""Necessary conditions for extremal functions.

The first variation of the functional under a small bump at x is governed by

    S(x, t) = sum_j prod_{i != j} f(x + t . (a_i - a_j)),

with f evaluated at Lebesgue points.  An extremal f must satisfy

    (1)  max_x min_t S(x, t)  <=  (n / |f|_1) min_t g(t)
    (2)  max_x min_t S(x, t)  <=  min_{x2 in supp f} max_t S(x2, t)

and a negative margin names a location where adding (or moving) mass helps.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, ShapeMismatchError, ZeroFunctionError
from .functional import Method, ShiftPoint, _grid_refine, _pick, as_shift_point, min_over_shifts
from .grid_fn import BOUNDARY_SNAP, GridFunction, ShapeClass, eval_lebesgue, l1_norm, shape_class, support_hull
from .matrix_spec import ShiftMatrix


@dataclass(frozen=True)
class ExtremalityReport:
    lhs: float
    rhs1: float
    rhs2: float
    margin1: float
    margin2: float
    witness_x1: float
    witness_x2: float
    witness_t1: ShiftPoint
    witness_t2: ShiftPoint
    x_grid_resolution: float
    t_method: Method
    verdict1: str
    verdict2: str
    rhs2_widened: Optional[float] = None
    witness_x2_widened: Optional[float] = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["witness_t1"] = list(self.witness_t1.coords)
        out["witness_t2"] = list(self.witness_t2.coords)
        out["t_method"] = self.t_method.value
        return out


@dataclass(frozen=True)
class ShapeReport:
    shape: ShapeClass
    lhs: float
    rhs1: float
    rhs2: float
    margin1: float
    margin2: float
    general_lhs: float
    max_pointwise_gap: float
    interior_points: int
    agrees: bool

    def to_dict(self) -> dict:
        out = asdict(self)
        out["shape"] = self.shape.value
        return out


# -- S(x, t) ----------------------------------------------------------------


def _S_batch(f: GridFunction, A: ShiftMatrix, x: np.ndarray, T: np.ndarray) -> np.ndarray:
    """S at paired points: x has shape (k,), T has shape (k, d)."""
    D = A.differences()                           # (n, n, d), D[i, j] = a_i - a_j
    offsets = np.einsum("kd,ijd->kij", T, D)
    vals = eval_lebesgue(f, x[:, None, None] + offsets)
    n = A.n
    vals[:, np.arange(n), np.arange(n)] = 1.0
    return np.prod(vals, axis=1).sum(axis=1)


def sum_product_S(f: GridFunction, A: ShiftMatrix, x: float, t) -> float:
    t = as_shift_point(t, A.d)
    return float(_S_batch(f, A, np.array([float(x)]), t.as_array()[None, :])[0])


def _candidate_ts(f: GridFunction, A: ShiftMatrix, x: np.ndarray) -> np.ndarray:
    """Per-x sorted t candidates (d = 1): crossings, midpoints, endpoints."""
    a = A.entries[0]
    deltas = sorted({float(a[i] - a[j]) for i in range(A.n) for j in range(A.n) if a[i] != a[j]})
    cols = [np.zeros((x.size, 1)), np.ones((x.size, 1))]
    for delta in deltas:
        # edges reachable from x by t * delta with t in [0, 1]
        lo = np.minimum(x, x + delta)
        k0 = np.floor((lo - f.x0) / f.h) - 1
        width = int(np.ceil(abs(delta) / f.h)) + 3
        edges = f.x0 + (k0[:, None] + np.arange(width)[None, :]) * f.h
        t = (edges - x[:, None]) / delta
        t = np.where((t > 0.0) & (t < 1.0), t, 1.0)
        cols.append(t)
    ts = np.sort(np.concatenate(cols, axis=1), axis=1)
    mids = 0.5 * (ts[:, 1:] + ts[:, :-1])
    return np.concatenate([ts, mids], axis=1)


def _extremes_in_t(f, A, x: np.ndarray, maximize: bool, tgrid=None) -> tuple[np.ndarray, np.ndarray, Method]:
    """For each x, the extremum over t of S(x, t) and a t attaining it."""
    x = np.asarray(x, dtype=np.float64)
    if A.d == 1:
        ts = _candidate_ts(f, A, x)
        k, w = ts.shape
        S = _S_batch(f, A, np.repeat(x, w), ts.reshape(-1, 1)).reshape(k, w)
        if maximize:
            best = S.max(axis=1)
        else:
            best = S.min(axis=1)
        scale = np.maximum(1.0, np.abs(S).max(axis=1))
        hit = np.abs(S - best[:, None]) <= 1e-12 * scale[:, None]
        # smallest attaining t
        tmasked = np.where(hit, ts, np.inf)
        return best, tmasked.min(axis=1)[:, None], Method.EXACT_KINKS
    values, args = [], []
    for xi in x:
        t, v = _grid_refine(
            lambda T, xi=xi: _S_batch(f, A, np.full(T.shape[0], xi), T), A.d, maximize, tgrid)
        values.append(v)
        args.append(t)
    return np.array(values), np.array(args), Method.GRID_REFINE


def min_t_S(f: GridFunction, A: ShiftMatrix, x: float, tgrid=None) -> tuple[ShiftPoint, float]:
    if f.is_zero():
        raise ZeroFunctionError("function is identically zero")
    v, t, _ = _extremes_in_t(f, A, np.array([float(x)]), False, tgrid)
    return ShiftPoint(t[0]), float(v[0])


def max_t_S(f: GridFunction, A: ShiftMatrix, x: float, tgrid=None) -> tuple[ShiftPoint, float]:
    if f.is_zero():
        raise ZeroFunctionError("function is identically zero")
    v, t, _ = _extremes_in_t(f, A, np.array([float(x)]), True, tgrid)
    return ShiftPoint(t[0]), float(v[0])


# -- condition checks ----------------------------------------------------------


def x_lattice(f: GridFunction, left: float, right: float, spacing: float, anchor: float | None = None) -> np.ndarray:
    """Points anchor + k * spacing covering [left, right] (anchor defaults to x0)."""
    anchor = f.x0 if anchor is None else anchor
    k_lo = int(np.floor((left - anchor) / spacing + BOUNDARY_SNAP))
    k_hi = int(np.ceil((right - anchor) / spacing - BOUNDARY_SNAP))
    return anchor + spacing * np.arange(k_lo, k_hi + 1)


def _verdict(margin: float, tol: float, one_sided: bool) -> str:
    if margin >= 0:
        return "satisfied"
    if margin < -tol and not one_sided:
        return "violated"
    return "inconclusive"


def _argbest(x: np.ndarray, values: np.ndarray, maximize: bool) -> int:
    return _pick(x[:, None], values, maximize)


def check_conditions(
    f: GridFunction,
    A: ShiftMatrix,
    x_resolution: float | None = None,
    *,
    widen_x2: bool = False,
    tol: float = 1e-9,
    tgrid=None,
) -> ExtremalityReport:
    """Scan x and evaluate both necessary conditions for extremality.

    x1 ranges over the support hull padded by the largest reachable shift
    (S vanishes beyond it), on a lattice through the cell midpoints with
    spacing ``x_resolution`` (default h); x2 ranges over the midpoints of
    nonzero cells.  At a midpoint, min_t S is the first-order gain of raising
    that whole cell, so a violated condition comes with a grid move that
    realises it.
    """
    hull = support_hull(f)
    xres = f.h if x_resolution is None else float(x_resolution)
    if not xres > 0:
        raise ValueError("x_resolution must be > 0")
    reach = A.max_reach()
    xs = x_lattice(f, hull.left - reach, hull.right + reach, xres, anchor=f.x0 + 0.5 * f.h)

    r_min, t_min, method = _extremes_in_t(f, A, xs, False, tgrid)
    k1 = _argbest(xs, r_min, maximize=True)
    lhs = float(r_min[k1])

    g_min = min_over_shifts(f, A, tgrid=tgrid)
    rhs1 = A.n / l1_norm(f) * g_min.value

    x2s = f.midpoints()[hull.indices]
    r_max, t_max, _ = _extremes_in_t(f, A, x2s, True, tgrid)
    k2 = _argbest(x2s, r_max, maximize=False)
    rhs2 = float(r_max[k2])

    rhs2_w = wit_w = None
    if widen_x2:
        r_wide, _, _ = _extremes_in_t(f, A, xs, True, tgrid)
        kw = _argbest(xs, r_wide, maximize=False)
        rhs2_w, wit_w = float(r_wide[kw]), float(xs[kw])

    one_sided = method is Method.GRID_REFINE
    margin1 = rhs1 - lhs
    margin2 = rhs2 - lhs
    return ExtremalityReport(
        lhs=lhs,
        rhs1=float(rhs1),
        rhs2=rhs2,
        margin1=float(margin1),
        margin2=float(margin2),
        witness_x1=float(xs[k1]),
        witness_x2=float(x2s[k2]),
        witness_t1=ShiftPoint(t_min[k1]),
        witness_t2=ShiftPoint(t_max[k2]),
        x_grid_resolution=xres,
        t_method=method,
        verdict1=_verdict(margin1, tol, one_sided),
        verdict2=_verdict(margin2, tol, one_sided),
        rhs2_widened=rhs2_w,
        witness_x2_widened=wit_w,
    )


def _is_zero_one_pair(A: ShiftMatrix) -> bool:
    return A.d == 1 and A.n == 2 and A.entries[0, 0] == 0.0 and A.entries[0, 1] == 1.0


def check_shape_specialization(
    f: GridFunction,
    A: ShiftMatrix | None = None,
    x_resolution: float | None = None,
    tol: float = 0.0,
) -> ShapeReport:
    """Simplified conditions for convex or concave f under A = [0 1].

    For convex f the inner minimum over t sits at t = 0 and for concave f at
    t = 1, provided x - 1 and x + 1 stay strictly inside the support hull and
    x is a cell midpoint or edge (elsewhere x - t and x + t can fall in
    adjacent cells).  Both the
    simplified and the general left-hand sides are taken over those interior
    scan points and compared.
    """
    from .matrix_spec import bs_preset

    A = bs_preset() if A is None else A
    if not _is_zero_one_pair(A):
        raise DimensionMismatchError("shape specialization is defined for A = [0 1] only")
    shape = shape_class(f, tol)
    if shape not in (ShapeClass.CONVEX, ShapeClass.CONCAVE):
        raise ShapeMismatchError(f"function is {shape.value}, need convex or concave")
    hull = support_hull(f)
    xres = f.h / 2 if x_resolution is None else float(x_resolution)
    xs = x_lattice(f, hull.left + 1.0, hull.right - 1.0, xres)
    eps = BOUNDARY_SNAP * f.h
    # strictly inside: at x - 1 = left the shifted point is a jump worth half a
    # cell; a hull of length exactly 2 only has the closed interior to offer
    strict = (xs - 1.0 > hull.left + eps) & (xs + 1.0 < hull.right - eps)
    closed = (xs - 1.0 >= hull.left - eps) & (xs + 1.0 <= hull.right + eps)
    xs = xs[strict] if strict.any() else xs[closed]
    if xs.size == 0:
        raise ShapeMismatchError("support hull is shorter than 2; no interior scan points")

    if shape is ShapeClass.CONVEX:
        special = 2.0 * eval_lebesgue(f, xs)
    else:
        special = eval_lebesgue(f, xs - 1.0) + eval_lebesgue(f, xs + 1.0)
    general, _, _ = _extremes_in_t(f, A, xs, False)

    x2s = f.midpoints()[hull.indices]
    if shape is ShapeClass.CONVEX:
        rhs2 = float(np.min(eval_lebesgue(f, x2s - 1.0) + eval_lebesgue(f, x2s + 1.0)))
    else:
        rhs2 = float(2.0 * np.min(eval_lebesgue(f, x2s)))
    rhs1 = 2.0 / l1_norm(f) * min_over_shifts(f, A).value
    lhs = float(np.max(special))
    general_lhs = float(np.max(general))
    return ShapeReport(
        shape=shape,
        lhs=lhs,
        rhs1=rhs1,
        rhs2=rhs2,
        margin1=rhs1 - lhs,
        margin2=rhs2 - lhs,
        general_lhs=general_lhs,
        max_pointwise_gap=float(np.max(np.abs(special - general))),
        interior_points=int(xs.size),
        agrees=abs(lhs - general_lhs) <= 1e-9 * max(1.0, abs(lhs)),
    )
