"""Reference implementations used only by the tests.

Each one is written from the definitions and avoids the package's own
evaluation paths, so agreement between the two is meaningful.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def interval_overlap(a_lo, a_hi, b_lo, b_hi):
    return np.maximum(0.0, np.minimum(a_hi, b_hi) - np.maximum(a_lo, b_lo))


def tuple_integral(x0: float, h: float, values, shifts) -> float:
    """integral of prod_i f(x + s_i) dx by enumerating one cell per factor.

    For cells (k_1, ..., k_n) the integrand equals prod v_{k_i} exactly on the
    intersection of the intervals [x0 + k_i h - s_i, x0 + (k_i + 1) h - s_i].
    """
    values = list(values)
    nz = [k for k, v in enumerate(values) if v > 0]
    total = 0.0
    for cells in itertools.product(nz, repeat=len(shifts)):
        lo = max(x0 + k * h - s for k, s in zip(cells, shifts))
        hi = min(x0 + (k + 1) * h - s for k, s in zip(cells, shifts))
        if hi > lo:
            total += (hi - lo) * float(np.prod([values[k] for k in cells]))
    return total


def lag_products(values) -> list[float]:
    """sum_k v_k v_{k+p} for p = 0..m-1, by explicit loops."""
    m = len(values)
    return [sum(values[k] * values[k + p] for k in range(m - p)) for p in range(m)]


def dense_autocorrelation(h: float, values, taus: np.ndarray) -> np.ndarray:
    """integral f(y) f(y + tau) dy for many lags at once.

    Two cells at distance p h overlap on max(0, h - |p h - tau|) after the
    shift; grouping cell pairs by p gives the lag products.
    """
    taus = np.asarray(taus, dtype=np.float64)
    out = np.zeros_like(taus)
    for p, c in enumerate(lag_products(list(values))):
        if c == 0:
            continue
        out += c * np.maximum(0.0, h - np.abs(p * h - taus))
        if p > 0:
            out += c * np.maximum(0.0, h - np.abs(-p * h - taus))
    return out


def lebesgue_value(x0: float, h: float, values, x: float) -> Fraction:
    """Value at a Lebesgue point in exact arithmetic (needs dyadic x0, h, x)."""
    u = (Fraction(x) - Fraction(x0)) / Fraction(h)

    def cell(k):
        return Fraction(values[k]) if 0 <= k < len(values) else Fraction(0)

    if u.denominator == 1:
        k = int(u)
        return (cell(k - 1) + cell(k)) / 2
    return cell(u.numerator // u.denominator)


def fraction_rank(rows) -> int:
    """Rank by Gaussian elimination over the rationals."""
    M = [[Fraction(x) for x in row] for row in rows]
    rank, col = 0, 0
    n_rows = len(M)
    n_cols = len(M[0]) if M else 0
    while rank < n_rows and col < n_cols:
        pivot = next((r for r in range(rank, n_rows) if M[r][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        for r in range(n_rows):
            if r != rank and M[r][col] != 0:
                factor = M[r][col] / M[rank][col]
                M[r] = [a - factor * b for a, b in zip(M[r], M[rank])]
        rank += 1
        col += 1
    return rank


def bl_closed_form(A: np.ndarray) -> float:
    """Infimum of det(sum lam_i a_i a_i^T) under prod lam_i = 1 when n = d + 1.

    The determinant is sum_k (prod_{i != k} lam_i) det(A_{-k})^2 (Cauchy-Binet);
    with c_k = det(A_{-k})^2 and prod lam = 1 this is sum_k c_k / lam_k, whose
    minimum by AM-GM is n (prod c_k)^(1/n).
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    n = A.shape[1]
    c = [np.linalg.det(np.delete(A, k, axis=1)) ** 2 if A.shape[0] > 0 else 1.0 for k in range(n)]
    return n * float(np.prod(c)) ** (1.0 / n)


def golden_section_min(fun, lo: float, hi: float, iters: int = 200) -> float:
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = fun(d)
    return min(fc, fd)


def exhaustive_ratio_unit_cells(values) -> Fraction:
    """Ratio for A = [0 1] and h = 1, exactly.

    With unit cells g(t) is affine on [0, 1] between g(0) = sum v_k^2 and
    g(1) = sum v_k v_{k+1}, so the minimum is at an endpoint.
    """
    v = [Fraction(x) for x in values]
    g0 = sum(x * x for x in v)
    g1 = sum(v[k] * v[k + 1] for k in range(len(v) - 1))
    return min(g0, g1) / sum(v) ** 2


def exhaustive_best(m: int, levels) -> tuple[tuple, Fraction]:
    """Best assignment of ``levels`` to ``m`` unit cells; first strict maximum wins."""
    best, best_r = None, None
    for combo in itertools.product(sorted(levels), repeat=m):
        if not any(combo):
            continue
        r = exhaustive_ratio_unit_cells(combo)
        if best_r is None or r > best_r:
            best, best_r = combo, r
    return best, best_r
