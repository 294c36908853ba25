"""Perturbation ascent for functions with a large ratio.

Each iteration first looks at the extremality conditions.  A violated
condition names a location and the matching move (a bump at the witness x1,
or moving mass from x2 to x1) is proposed.  When the conditions hold, or the
witness moves stop paying off, a mass-preserving step from a linear program
over all cells is tried, then random mass-preserving kicks, then a finer
grid.  Every proposal is accepted only if the exactly recomputed ratio
strictly increases, so accepted ratios form an increasing sequence.
"""

from __future__ import annotations

import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import linprog

from .errors import (
    InsufficientMassError,
    NotGuaranteedFiniteError,
    SameCellError,
    TooLargeError,
    ZeroFunctionError,
)
from .extremality import ExtremalityReport, check_conditions
from .functional import FunctionalReport, kink_candidates, ratio, ratio_value, segments
from .grid_fn import GridFunction, add_bump, l1_norm, move_mass
from .matrix_spec import ShiftMatrix, finiteness_check

log = logging.getLogger(__name__)

ENUMERATION_LIMIT = 10**6


@dataclass(frozen=True)
class AscentParams:
    bump_height: float = 0.1
    shrink_factor: float = 0.5
    max_iters: int = 2000
    stall_limit: int = 40
    tol: float = 1e-9
    seed: int = 0
    refine_depth: int = 2
    use_lp: bool = True
    max_span: Optional[float] = None

    def __post_init__(self):
        if not self.bump_height > 0:
            raise ValueError("bump_height must be > 0")
        if not 0 < self.shrink_factor < 1:
            raise ValueError("shrink_factor must lie in (0, 1)")
        if self.max_iters < 1 or self.stall_limit < 0:
            raise ValueError("max_iters must be >= 1 and stall_limit >= 0")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


@dataclass(frozen=True)
class TraceStep:
    iter: int
    move: str
    x1: Optional[float]
    x2: Optional[float]
    height: Optional[float]
    ratio: float
    accepted: bool


@dataclass
class AscentTrace:
    iterations: list = field(default_factory=list)

    def append(self, step: TraceStep):
        self.iterations.append(step)

    def accepted_ratios(self) -> list:
        return [s.ratio for s in self.iterations if s.accepted]

    def to_jsonl(self) -> str:
        from .io import dumps

        return "".join(dumps(asdict(s)) + "\n" for s in self.iterations)

    def __len__(self):
        return len(self.iterations)


@dataclass
class SearchResult:
    f: GridFunction
    report: FunctionalReport
    restart_ratios: list
    best_index: int
    trace: AscentTrace


def _require_finite(A: ShiftMatrix):
    verdict = finiteness_check(A)
    if not verdict.finite:
        raise NotGuaranteedFiniteError(
            f"rank(B) = {verdict.rank_of_B} < n = {A.n}; the ratio may be unbounded")


def _ratio(f: GridFunction, A: ShiftMatrix) -> float:
    if A.d == 1:
        return ratio_value(f, A)
    return ratio(f, A).ratio


# -- linear-programming step ------------------------------------------------


def _values_and_gradients(f: GridFunction, A: ShiftMatrix) -> tuple[np.ndarray, np.ndarray]:
    """g at every kink candidate and its gradient with respect to the cell values."""
    T = kink_candidates(f, A)
    v = f.values
    m = f.m
    if A.n == 2:
        delta = abs(float(A.entries[0, 1] - A.entries[0, 0]))
        padded = np.concatenate([np.zeros(m + 2), v, np.zeros(m + 2)])
        base = m + 2
        idx = np.arange(m)
        # D[p, k] = d C_p / d v_k = v_{k+p} + v_{k-p}
        p = np.arange(m + 2)[:, None]
        D = padded[base + idx[None, :] + p] + padded[base + idx[None, :] - p]
        C = np.concatenate([np.correlate(v, v, mode="full")[m - 1:], [0.0, 0.0]])
        tau = T * delta / f.h
        q = np.minimum(np.floor(tau), m).astype(np.int64)
        r = tau - q
        g = f.h * ((1 - r) * C[q] + r * C[q + 1])
        G = f.h * ((1 - r)[:, None] * D[q] + r[:, None] * D[q + 1])
        return g, G
    g = np.empty(T.size)
    G = np.zeros((T.size, m))
    for c, t in enumerate(T):
        lengths, cell = segments(f, t * A.entries[0])
        vals = np.where(cell >= 0, v[np.clip(cell, 0, None)], 0.0)
        g[c] = np.dot(lengths, np.prod(vals, axis=1))
        for i in range(A.n):
            others = np.prod(np.delete(vals, i, axis=1), axis=1) * lengths
            ok = cell[:, i] >= 0
            np.add.at(G[c], cell[ok, i], others[ok])
    return g, G


def _lp_step(f: GridFunction, A: ShiftMatrix, radius: float) -> tuple[np.ndarray, float]:
    """Mass-preserving change of the values maximising the linearised min of g.

    Returns the step and the predicted gain in min g.
    """
    g, G = _values_and_gradients(f, A)
    m = f.m
    scale = float(np.max(f.values))
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-G, np.ones((g.size, 1))])
    A_eq = np.concatenate([np.ones(m), [0.0]])[None, :]
    lo = np.maximum(-f.values, -radius * scale)
    bounds = [(lo[k], radius * scale) for k in range(m)] + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=g, A_eq=A_eq, b_eq=[0.0], bounds=bounds, method="highs")
    if res.status != 0:
        return np.zeros(m), 0.0
    return res.x[:m], float(res.x[-1] - g.min())


def _pad_for_growth(f: GridFunction, A: ShiftMatrix, max_span: float) -> GridFunction:
    """Keep a margin of zero cells at both ends so the support can grow."""
    want = max(1, int(np.ceil(0.25 * A.max_reach() / f.h)))
    nz = np.flatnonzero(f.values > 0)
    left = max(0, want - nz[0])
    right = max(0, want - (f.m - 1 - nz[-1]))
    budget = int(np.floor(max_span / f.h + 1e-9)) - f.m
    if budget <= 0:
        return f
    left = min(left, budget // 2)
    right = min(right, budget - left)
    return f.padded(left, right)


# -- ascent -------------------------------------------------------------------


def perturb_ascent(
    f0: GridFunction, A: ShiftMatrix, params: AscentParams = AscentParams()
) -> tuple[GridFunction, AscentTrace]:
    """Improve ``f0`` by local moves; returns the best function and the trace."""
    if f0.is_zero():
        raise ZeroFunctionError("initial function is identically zero")
    _require_finite(A)
    rng = np.random.default_rng(params.seed)
    tol = params.tol
    max_span = params.max_span
    if max_span is None:
        max_span = max(f0.m * f0.h, 4.0 * A.max_reach())

    f = f0
    best = _ratio(f, A)
    trace = AscentTrace()
    height = params.bump_height
    radius = params.bump_height
    kicks = 0
    depth = 0
    report: ExtremalityReport | None = None

    def record(it, move, x1, x2, h, r, ok):
        trace.append(TraceStep(it, move, x1, x2, h, float(r), bool(ok)))

    for it in range(params.max_iters):
        if report is None:
            report = check_conditions(f, A)

        # witness moves; mass transport first since it keeps the L1 norm
        proposal = None
        if height >= tol:
            if report.margin2 < -tol:
                amount = min(height * f.h, f.values[f.cell_index(report.witness_x2)] * f.h)
                try:
                    proposal = ("move_mass", report.witness_x1, report.witness_x2,
                                move_mass(f, report.witness_x2, report.witness_x1, amount))
                except (InsufficientMassError, SameCellError, ValueError):
                    proposal = None
            if proposal is None and report.margin1 < -tol:
                proposal = ("add_bump", report.witness_x1, None,
                            add_bump(f, report.witness_x1, height))
        if proposal is not None:
            move, x1, x2, g = proposal
            r = _ratio(g, A)
            ok = r > best
            record(it, move, x1, x2, height, r, ok)
            if ok:
                f, best, report = g, r, None
            else:
                height *= params.shrink_factor
            continue

        if params.use_lp and A.d == 1 and radius >= tol:
            fp = _pad_for_growth(f, A, max_span)
            step, gain = _lp_step(fp, A, radius)
            if gain <= tol * max(1.0, abs(best)):
                radius = 0.0
                continue
            values = np.maximum(fp.values + step, 0.0)
            g = fp.with_values(values)
            r = _ratio(g, A) if not g.is_zero() else -np.inf
            ok = r > best
            record(it, "lp_transport", float(fp.midpoints()[np.argmax(step)]),
                   float(fp.midpoints()[np.argmin(step)]), radius, r, ok)
            if ok:
                f, best, report = g.trimmed(), r, None
                radius = min(2.0 * radius, 1.0)
                height = params.bump_height
            else:
                radius *= params.shrink_factor
            continue

        if kicks < params.stall_limit:
            kicks += 1
            g, x1, x2 = _kick(f, rng, params.bump_height * 0.1)
            if g is None:
                kicks = params.stall_limit
                continue
            r = _ratio(g, A)
            ok = r > best
            record(it, "kick", x1, x2, params.bump_height * 0.1, r, ok)
            if ok:
                f, best, report = g, r, None
                kicks = 0
                radius = height = params.bump_height
            continue

        if depth < params.refine_depth:
            depth += 1
            f = f.refined(2)
            report = None
            kicks = 0
            radius = height = params.bump_height
            record(it, "refine", None, None, f.h, best, False)
            continue
        break

    return f.trimmed(), trace


def _kick(f: GridFunction, rng: np.random.Generator, size: float):
    """Random mass-preserving perturbation of the nonzero cells."""
    nz = np.flatnonzero(f.values > 0)
    if nz.size < 2:
        return None, None, None
    u = rng.standard_normal(nz.size)
    u -= u.mean()
    step = size * float(np.max(f.values)) * u / np.max(np.abs(u))
    # keep values nonnegative while preserving the sum
    limit = np.min(np.where(step < 0, f.values[nz] / np.maximum(-step, 1e-300), np.inf))
    if limit < 1.0:
        step *= limit
    values = f.values.copy()
    values[nz] += step
    values = np.maximum(values, 0.0)
    mids = f.midpoints()
    return f.with_values(values), float(mids[nz[np.argmax(step)]]), float(mids[nz[np.argmin(step)]])


# -- multi-start ----------------------------------------------------------------


def initial_function(m: int, h: float, seed: int, index: int = 0, restarts: int | None = None) -> GridFunction:
    """Starting function of restart ``index`` for a given seed."""
    child = np.random.SeedSequence(seed).spawn(index + 1)[index]
    values = np.random.default_rng(child).uniform(0.0, 1.0, m)
    if not np.any(values > 0):
        values[:] = 1.0
    return GridFunction(0.0, h, values)


def _one_restart(args):
    A, m, h, params, index = args
    f0 = initial_function(m, h, params.seed, index)
    f, trace = perturb_ascent(f0, A, params)
    return f, _ratio(f, A), trace


def _workers() -> int:
    raw = os.environ.get("AUTOCORR_THREADS")
    if raw is None:
        return 1
    try:
        k = int(raw)
    except ValueError:
        raise ValueError(f"AUTOCORR_THREADS must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise ValueError(f"AUTOCORR_THREADS must be a positive integer, got {raw!r}")
    return k


def random_restart_search(
    A: ShiftMatrix, restarts: int, m: int, h: float, params: AscentParams = AscentParams()
) -> SearchResult:
    """Run ``perturb_ascent`` from ``restarts`` seeded random starts; keep the best."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if m < 1 or not h > 0:
        raise ValueError("need m >= 1 and h > 0")
    _require_finite(A)
    jobs = [(A, m, h, params, i) for i in range(restarts)]
    workers = min(_workers(), restarts)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_restart, jobs))
    else:
        results = [_one_restart(job) for job in jobs]
    ratios = [r for _, r, _ in results]
    k = int(np.argmax(ratios))
    f, _, trace = results[k]
    log.info("best ratio %.6f from restart %d of %d", ratios[k], k, restarts)
    return SearchResult(f, ratio(f, A), ratios, k, trace)


def brute_force_oracle(
    A: ShiftMatrix, m: int, h: float, value_set: Iterable[float]
) -> tuple[GridFunction, float]:
    """Best ratio over every assignment of ``value_set`` to ``m`` cells."""
    levels = sorted(set(float(v) for v in value_set))
    if any(v < 0 for v in levels):
        raise ValueError("value_set must be nonnegative")
    if len(levels) ** m > ENUMERATION_LIMIT:
        raise TooLargeError(f"{len(levels)}^{m} assignments exceed {ENUMERATION_LIMIT}")
    best_f, best_r = None, -np.inf
    for combo in itertools.product(levels, repeat=m):
        if not any(combo):
            continue
        f = GridFunction(0.0, h, combo)
        r = _ratio(f, A)
        if r > best_r:
            best_f, best_r = f, r
    if best_f is None:
        raise ZeroFunctionError("value_set admits only the zero function")
    return best_f, best_r


def save_trace(trace: AscentTrace, path) -> None:
    with open(path, "w") as fh:
        fh.write(trace.to_jsonl())
