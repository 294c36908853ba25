"""Nonnegative step functions on a uniform grid.

A :class:`GridFunction` stores ``f(x) = sum_k v_k * chi_[x0 + k h, x0 + (k+1) h)(x)``
and is the only representation of candidate functions used by the package.
Values are kept in a read-only ``float64`` array so instances can be shared
freely; every move returns a new instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    InsufficientMassError,
    InvalidFunctionError,
    NonpositiveHeightError,
    SameCellError,
    ZeroFunctionError,
)

# Points closer than this (in cell units) to a cell boundary are treated as
# lying on it.  Shifted evaluation points are produced by floating-point
# arithmetic and would otherwise fall on an arbitrary side of a jump.
BOUNDARY_SNAP = 1e-9


class ShapeClass(str, Enum):
    CONVEX = "convex"
    CONCAVE = "concave"
    NEITHER = "neither"
    DEGENERATE = "degenerate"


class SupportHull(NamedTuple):
    left: float
    right: float
    indices: np.ndarray


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Step function with cell width ``h`` whose first cell starts at ``x0``."""

    x0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        x0 = float(self.x0)
        h = float(self.h)
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if not np.isfinite(x0):
            raise InvalidFunctionError("x0 must be finite")
        if not (np.isfinite(h) and h > 0):
            raise InvalidFunctionError(f"cell width h must be finite and > 0, got {h!r}")
        if values.size == 0:
            raise InvalidFunctionError("values must contain at least one cell")
        if not np.all(np.isfinite(values)):
            raise InvalidFunctionError("values must be finite")
        if np.any(values < 0):
            raise InvalidFunctionError("values must be nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "values", values)

    @classmethod
    def indicator(cls, left: float, right: float, h: float) -> "GridFunction":
        """chi_[left, right] sampled on cells of width ``h`` starting at ``left``."""
        m = int(round((right - left) / h))
        if m < 1 or abs(m * h - (right - left)) > 1e-9 * max(1.0, abs(right - left)):
            raise InvalidFunctionError("interval length must be a positive multiple of h")
        return cls(left, h, np.ones(m))

    @property
    def m(self) -> int:
        return self.values.size

    @property
    def right(self) -> float:
        return self.x0 + self.m * self.h

    def edges(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.m + 1)

    def midpoints(self) -> np.ndarray:
        return self.x0 + self.h * (np.arange(self.m) + 0.5)

    def is_zero(self) -> bool:
        return not np.any(self.values > 0)

    def cell_index(self, x: float) -> int:
        """Index of the cell containing ``x`` (may be outside ``0..m-1``)."""
        return int(np.floor((x - self.x0) / self.h + BOUNDARY_SNAP))

    def __call__(self, x):
        return eval_lebesgue(self, x)

    def __repr__(self):
        return f"GridFunction(x0={self.x0!r}, h={self.h!r}, values={self.values.tolist()!r})"

    # -- simple transforms -------------------------------------------------

    def with_values(self, values, x0: float | None = None) -> "GridFunction":
        return GridFunction(self.x0 if x0 is None else x0, self.h, values)

    def scaled(self, c: float) -> "GridFunction":
        return self.with_values(c * self.values)

    def translated(self, s: float) -> "GridFunction":
        return self.with_values(self.values, self.x0 + s)

    def reflected(self) -> "GridFunction":
        """x -> f(-x); the support [x0, x0 + m h] maps to [-x0 - m h, -x0]."""
        return self.with_values(self.values[::-1], -self.x0 - self.m * self.h)

    def padded(self, left: int = 0, right: int = 0) -> "GridFunction":
        values = np.concatenate([np.zeros(left), self.values, np.zeros(right)])
        return GridFunction(self.x0 - left * self.h, self.h, values)

    def trimmed(self) -> "GridFunction":
        """Drop zero cells at both ends (the zero function is returned unchanged)."""
        nz = np.flatnonzero(self.values > 0)
        if nz.size == 0:
            return self
        lo, hi = nz[0], nz[-1] + 1
        return GridFunction(self.x0 + lo * self.h, self.h, self.values[lo:hi])

    def refined(self, factor: int = 2) -> "GridFunction":
        """Same function on cells ``factor`` times narrower."""
        return GridFunction(self.x0, self.h / factor, np.repeat(self.values, factor))


def l1_norm(f: GridFunction) -> float:
    return f.h * float(np.sum(f.values))


def eval_lebesgue(f: GridFunction, x):
    """Limit of centred window averages of ``f`` at ``x``.

    Inside a cell this is the cell value; on a cell boundary it is the mean of
    the two neighbouring cells, with cells outside the grid counting as 0.
    Accepts scalars or arrays.
    """
    xa = np.asarray(x, dtype=np.float64)
    u = (xa - f.x0) / f.h
    j = np.rint(u)
    on_edge = np.abs(u - j) <= BOUNDARY_SNAP
    k = np.floor(u).astype(np.int64)
    padded = np.concatenate([[0.0], f.values, [0.0]])
    last = f.m + 1
    inner = padded[np.clip(k + 1, 0, last)]
    inner = np.where((k >= 0) & (k < f.m), inner, 0.0)
    je = j.astype(np.int64)
    left = padded[np.clip(je, 0, last)]
    right = padded[np.clip(je + 1, 0, last)]
    left = np.where((je - 1 >= 0) & (je - 1 < f.m), left, 0.0)
    right = np.where((je >= 0) & (je < f.m), right, 0.0)
    out = np.where(on_edge, 0.5 * (left + right), inner)
    if np.ndim(x) == 0:
        return float(out)
    return out


def support_hull(f: GridFunction) -> SupportHull:
    nz = np.flatnonzero(f.values > 0)
    if nz.size == 0:
        raise ZeroFunctionError("function is identically zero")
    return SupportHull(f.x0 + nz[0] * f.h, f.x0 + (nz[-1] + 1) * f.h, nz)


def shape_class(f: GridFunction, tol: float = 0.0) -> ShapeClass:
    """Discrete convexity of the values on the block of nonzero cells.

    Affine sequences are reported as convex.
    """
    nz = support_hull(f).indices
    if nz.size < 3 or nz[-1] - nz[0] + 1 != nz.size:
        return ShapeClass.DEGENERATE
    v = f.values[nz[0]: nz[-1] + 1]
    d2 = v[2:] - 2.0 * v[1:-1] + v[:-2]
    if np.all(d2 >= -tol):
        return ShapeClass.CONVEX
    if np.all(d2 <= tol):
        return ShapeClass.CONCAVE
    return ShapeClass.NEITHER


def _extend_to(f: GridFunction, k: int) -> tuple[GridFunction, int]:
    """Pad ``f`` with zero cells so that cell ``k`` exists; return new index."""
    if k < 0:
        return f.padded(left=-k), 0
    if k >= f.m:
        return f.padded(right=k - f.m + 1), k
    return f, k


def add_bump(f: GridFunction, x1: float, height: float) -> GridFunction:
    """Raise the cell containing ``x1`` by ``height``, extending the grid if needed."""
    if not height > 0:
        raise NonpositiveHeightError(f"bump height must be > 0, got {height!r}")
    g, k = _extend_to(f, f.cell_index(x1))
    values = g.values.copy()
    values[k] += height
    return g.with_values(values)


def move_mass(f: GridFunction, from_x2: float, to_x1: float, amount: float) -> GridFunction:
    """Move L1 mass ``amount`` from the cell at ``from_x2`` to the cell at ``to_x1``."""
    if not amount > 0:
        raise NonpositiveHeightError(f"amount must be > 0, got {amount!r}")
    src = f.cell_index(from_x2)
    dst = f.cell_index(to_x1)
    if src == dst:
        raise SameCellError(f"{from_x2!r} and {to_x1!r} lie in the same cell")
    delta = amount / f.h
    if not (0 <= src < f.m) or f.values[src] < delta:
        raise InsufficientMassError(f"cell at x={from_x2!r} holds less than {amount!r}")
    values = f.values.copy()
    values[src] -= delta
    g, dst = _extend_to(f.with_values(values), dst)
    values = g.values.copy()
    values[dst] += delta
    return g.with_values(values)


def as_grid_function(obj) -> GridFunction:
    if isinstance(obj, GridFunction):
        return obj
    if isinstance(obj, dict):
        return GridFunction(obj["x0"], obj["h"], obj["values"])
    raise TypeError(f"cannot interpret {type(obj).__name__} as a GridFunction")


def from_values(values: Sequence[float], h: float = 1.0, x0: float = 0.0) -> GridFunction:
    return GridFunction(x0, h, values)
