"""Monte Carlo benchmarks of the deployment schemes, plus the multi-cell
interference variant.

Every run is chunked into fixed-size blocks of realizations; block i always
consumes the substream derived from (seed, i), and block summaries are
merged in block order. Estimates are therefore bit-identical no matter how
many worker threads execute the blocks.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic1d import exact_number_beta_1d, optimal_beta_success_1d
from .model import (CellGeometry, Dimension, SystemParams, anchor_coords,
                    coverage_radius, snr, throughput)
from .numerics import golden_max
from .sampling import (DEFAULT_CHUNK, Realization, RealizationBatch, chunk_rng,
                       majority_anchor, sample_batch)

DEFAULT_REALIZATIONS = 100_000

_PK_GRID = 201
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class Variant(enum.Enum):
    NON_ADAPTIVE = "non-adaptive"
    MAJORITY_VOTE = "majority-vote"
    EXACT_NUMBER = "exact-number"
    PERFECT_KNOWLEDGE = "perfect-knowledge"


class Objective(enum.Enum):
    AVG_THROUGHPUT = "throughput"
    SUCCESS_PROB = "success"


@dataclass(frozen=True)
class Scheme:
    """What the UAV knows about the users and which metric it serves.

    beta only matters for the majority-vote variant; gamma_th is required
    for the success objective.
    """

    variant: Variant
    objective: Objective = Objective.AVG_THROUGHPUT
    beta: float = 0.0
    gamma_th: float | None = None

    def __post_init__(self):
        if self.variant is Variant.MAJORITY_VOTE and not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.objective is Objective.SUCCESS_PROB:
            if self.gamma_th is None or self.gamma_th <= 0.0:
                raise ValueError("success objective needs a positive gamma_th")


@dataclass(frozen=True)
class MetricsEstimate:
    mean: float
    std_error: float
    n_kept: int
    n_total: int
    seed: int

    def __post_init__(self):
        if self.n_kept > self.n_total:
            raise ValueError("kept count cannot exceed total")


def _estimate(n: int, total: float, total_sq: float, n_total: int,
              seed: int) -> MetricsEstimate:
    if n < 1:
        raise ValueError("no kept realizations; raise n_realizations")
    mean = total / n
    var = (total_sq - n * mean * mean) / (n - 1) if n > 1 else 0.0
    return MetricsEstimate(mean=mean, std_error=math.sqrt(max(var, 0.0) / n),
                           n_kept=n, n_total=n_total, seed=seed)


def _chunk_plan(n_realizations: int, chunk_size: int):
    full, tail = divmod(n_realizations, chunk_size)
    sizes = [chunk_size] * full
    if tail:
        sizes.append(tail)
    return sizes


def _run_chunks(worker, sizes, n_threads):
    if n_threads <= 1:
        return [worker(i, c) for i, c in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(worker, range(len(sizes)), sizes))


# ---------------------------------------------------------------------------
# per-realization placement rules


def _anchor_table(cell: CellGeometry, beta: float) -> np.ndarray:
    table = np.array([anchor_coords(cell, j, beta)
                      for j in range(cell.n_sectors + 1)])
    if cell.dimension == Dimension.LINE:
        return table[:, 0]
    return table


def _stab_point_1d(xs, rho: float, R: float) -> float:
    """Point covering the most users, by sweeping interval endpoints."""
    events = []
    for x in xs:
        events.append((x - rho, 0))
        events.append((x + rho, 1))
    events.sort()
    count = best = 0
    best_pos = float(xs[0])
    for pos, kind in events:
        if kind == 0:
            count += 1
            if count > best:
                best, best_pos = count, pos
        else:
            count -= 1
    return min(max(best_pos, -R), R)


def _stab_point_2d(pts: np.ndarray, rho: float, R: float) -> tuple:
    """Disk center covering the most users.

    Some optimal center is a user point or an intersection of two user
    circles; clipping candidates into the cell never uncovers anyone
    because projection onto the square is non-expansive.
    """
    k = len(pts)
    cands = [pts]
    for i in range(k):
        d = pts[i + 1:] - pts[i]
        d2 = (d * d).sum(axis=1)
        close = np.nonzero((d2 > 0.0) & (d2 <= 4.0 * rho * rho))[0]
        if close.size:
            dc = d[close]
            dd = np.sqrt(d2[close])
            mid = pts[i] + 0.5 * dc
            half = np.sqrt(np.maximum(rho * rho - 0.25 * d2[close], 0.0))
            perp = np.stack([-dc[:, 1], dc[:, 0]], axis=1) / dd[:, None]
            cands.append(mid + half[:, None] * perp)
            cands.append(mid - half[:, None] * perp)
    cand = np.clip(np.concatenate(cands, axis=0), -R, R)
    d2 = ((cand[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    covered = (d2 <= rho * rho * (1.0 + 1e-12) + 1e-9).sum(axis=1)
    best = int(np.argmax(covered))
    return (float(cand[best, 0]), float(cand[best, 1]))


def _grid_refine_2d(pts: np.ndarray, params: SystemParams, R: float) -> tuple:
    a, h = params.link_budget_a, params.altitude_h

    def total_at(X, Y):
        tot = np.zeros_like(X)
        for j in range(len(pts)):
            tot += np.log2(1.0 + a / ((X - pts[j, 0]) ** 2
                                      + (Y - pts[j, 1]) ** 2 + h * h))
        return tot

    g = np.linspace(-R, R, _PK_GRID)
    X, Y = np.meshgrid(g, g, indexing="ij")
    tot = total_at(X, Y)
    ix, iy = np.unravel_index(int(np.argmax(tot)), tot.shape)
    cx, cy = float(g[ix]), float(g[iy])
    span = float(g[1] - g[0])
    for _ in range(3):
        gx = np.clip(np.linspace(cx - span, cx + span, 21), -R, R)
        gy = np.clip(np.linspace(cy - span, cy + span, 21), -R, R)
        Xs, Ys = np.meshgrid(gx, gy, indexing="ij")
        ts = total_at(Xs, Ys)
        jx, jy = np.unravel_index(int(np.argmax(ts)), ts.shape)
        cx, cy = float(Xs[jx, jy]), float(Ys[jx, jy])
        span /= 10.0
    return (cx, cy)


def perfect_knowledge_placement(realization: Realization, params: SystemParams,
                                objective: Objective, cell: CellGeometry,
                                gamma_th: float | None = None):
    """UAV position maximizing this realization's total throughput, or the
    number of covered users, given every user location.

    Returns a coordinate tuple. The coverage objective is solved exactly;
    the throughput objective by grid search plus local refinement.
    """
    if realization.n_users < 1:
        raise ValueError("needs at least one user")
    R = cell.half_width_R
    pts = np.asarray(realization.coords, dtype=float)
    if objective is Objective.SUCCESS_PROB:
        rho = coverage_radius(params, gamma_th)
        if cell.dimension == Dimension.LINE:
            return (_stab_point_1d(pts, rho, R),)
        return _stab_point_2d(pts, rho, R)
    if cell.dimension == Dimension.LINE:
        a, h = params.link_budget_a, params.altitude_h
        grid = np.linspace(-R, R, _PK_GRID)
        tot = np.log2(1.0 + a / ((grid[:, None] - pts[None, :]) ** 2
                                 + h * h)).sum(axis=1)
        best = int(np.argmax(tot))
        step = float(grid[1] - grid[0])

        def f(x):
            return float(np.log2(1.0 + a / ((x - pts) ** 2 + h * h)).sum())

        res = golden_max(f, max(grid[best] - step, -R), min(grid[best] + step, R),
                         tol_x=1e-9)
        return (res.x,)
    return _grid_refine_2d(pts, params, R)


def _pk_throughput_positions_1d(batch: RealizationBatch, params: SystemParams,
                                R: float) -> np.ndarray:
    """Vectorized grid+golden search, grouped by user count."""
    a, h = params.link_budget_a, params.altitude_h
    kept_rows = np.nonzero(batch.kept)[0]
    counts = batch.counts[kept_rows]
    pos = np.empty(kept_rows.size)
    grid = np.linspace(-R, R, _PK_GRID)
    step = float(grid[1] - grid[0])
    for k in np.unique(counts):
        rows = np.nonzero(counts == k)[0]
        gather = (batch.offsets[kept_rows[rows]][:, None]
                  + np.arange(k)[None, :])
        C = batch.coords[gather]
        tot = np.zeros((rows.size, _PK_GRID))
        for j in range(k):
            tot += np.log2(1.0 + a / ((grid[None, :] - C[:, j, None]) ** 2 + h * h))
        best = np.argmax(tot, axis=1)
        lo = np.maximum(grid[best] - step, -R)
        hi = np.minimum(grid[best] + step, R)
        for _ in range(60):
            x1 = hi - _INVPHI * (hi - lo)
            x2 = lo + _INVPHI * (hi - lo)
            f1 = np.zeros(rows.size)
            f2 = np.zeros(rows.size)
            for j in range(k):
                f1 += np.log2(1.0 + a / ((x1 - C[:, j]) ** 2 + h * h))
                f2 += np.log2(1.0 + a / ((x2 - C[:, j]) ** 2 + h * h))
            keep_low = f1 > f2
            hi = np.where(keep_low, x2, hi)
            lo = np.where(keep_low, lo, x1)
        pos[rows] = 0.5 * (lo + hi)
    return pos


def _uav_positions(batch: RealizationBatch, cell: CellGeometry,
                   params: SystemParams, scheme: Scheme, en_cache: dict,
                   rho: float | None) -> np.ndarray:
    kept = batch.kept
    n_kept = int(kept.sum())
    R = cell.half_width_R
    if scheme.variant is Variant.NON_ADAPTIVE:
        table = _anchor_table(cell, 0.0)
        return table[np.zeros(n_kept, dtype=np.int64)]
    if scheme.variant is Variant.MAJORITY_VOTE:
        table = _anchor_table(cell, scheme.beta)
        return table[majority_anchor(batch.sector_counts[kept])]
    if scheme.variant is Variant.EXACT_NUMBER:
        sc = batch.sector_counts[kept]
        if scheme.objective is Objective.SUCCESS_PROB:
            # the per-count optimum shares the load-free interval, so one
            # factor serves every realization; only the direction adapts
            beta_mid = optimal_beta_success_1d(rho, R).midpoint if rho < R else 0.0
            factors = np.full(n_kept, beta_mid)
        else:
            factors = np.empty(n_kept)
            for i, (k1, k2) in enumerate(sc):
                key = (int(max(k1, k2)), int(min(k1, k2)))
                if key not in en_cache:
                    en_cache[key] = exact_number_beta_1d(key[0], key[1], params, R)
                factors[i] = en_cache[key]
        direction = np.sign(sc[:, 1] - sc[:, 0]).astype(float)
        return direction * factors * R
    # perfect knowledge
    if scheme.objective is Objective.AVG_THROUGHPUT and cell.dimension == Dimension.LINE:
        return _pk_throughput_positions_1d(batch, params, R)
    rows = np.nonzero(kept)[0]
    if cell.dimension == Dimension.LINE:
        out = np.empty(rows.size)
        for i, r in enumerate(rows):
            lo, hi = batch.offsets[r], batch.offsets[r + 1]
            out[i] = _stab_point_1d(batch.coords[lo:hi], rho, R)
        return out
    out = np.empty((rows.size, 2))
    for i, r in enumerate(rows):
        lo, hi = batch.offsets[r], batch.offsets[r + 1]
        pts = batch.coords[lo:hi]
        if scheme.objective is Objective.SUCCESS_PROB:
            out[i] = _stab_point_2d(pts, rho, R)
        else:
            out[i] = _grid_refine_2d(pts, params, R)
    return out


def _metric_values(positions: np.ndarray, typical: np.ndarray,
                   params: SystemParams, scheme: Scheme,
                   dimension: Dimension) -> np.ndarray:
    if dimension == Dimension.LINE:
        dist = np.abs(typical - positions)
    else:
        dist = np.sqrt(((typical - positions) ** 2).sum(axis=1))
    if scheme.objective is Objective.AVG_THROUGHPUT:
        return throughput(params, dist)
    return (snr(params, dist) >= scheme.gamma_th).astype(float)


def run_scheme(cell: CellGeometry, params: SystemParams, scheme: Scheme,
               n_realizations: int = DEFAULT_REALIZATIONS, seed: int = 0,
               n_threads: int = 1,
               chunk_size: int = DEFAULT_CHUNK) -> MetricsEstimate:
    """Estimate the typical user's mean metric under one deployment scheme.

    Empty cells are discarded, conditioning the estimate on at least one
    user being present.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be at least 1")
    if scheme.variant is Variant.EXACT_NUMBER and cell.dimension != Dimension.LINE:
        raise ValueError("the exact-number scheme is defined for line cells only")
    rho = None
    if scheme.objective is Objective.SUCCESS_PROB and scheme.variant in (
            Variant.EXACT_NUMBER, Variant.PERFECT_KNOWLEDGE):
        rho = coverage_radius(params, scheme.gamma_th)
    # shared across worker threads; entries are deterministic, so a racing
    # double-compute just rewrites the same value
    en_cache: dict = {}

    def worker(index: int, count: int):
        rng = chunk_rng(seed, index)
        batch = sample_batch(cell, count, rng)
        positions = _uav_positions(batch, cell, params, scheme, en_cache, rho)
        vals = _metric_values(positions, batch.typical_coords(), params,
                              scheme, cell.dimension)
        return vals.size, float(vals.sum()), float((vals * vals).sum())

    sizes = _chunk_plan(n_realizations, chunk_size)
    parts = _run_chunks(worker, sizes, n_threads)
    n = sum(p[0] for p in parts)
    s = math.fsum(p[1] for p in parts)
    ss = math.fsum(p[2] for p in parts)
    return _estimate(n, s, ss, n_realizations, seed)


def multi_uav_sweep_1d(cell: CellGeometry, params: SystemParams, betas,
                       n_side: int, n_realizations: int = DEFAULT_REALIZATIONS,
                       seed: int = 0,
                       objective: Objective = Objective.AVG_THROUGHPUT,
                       gamma_th: float | None = None, n_threads: int = 1,
                       chunk_size: int = DEFAULT_CHUNK) -> list:
    """Metric estimates for several displacement factors over a row of
    2*n_side+1 interfering cells, reusing the same realizations per factor.

    Each UAV majority-votes within its own cell; the typical user lives in
    the center cell and hears every other UAV as interference.
    """
    if cell.dimension != Dimension.LINE:
        raise ValueError("multi-UAV runs are defined for line cells only")
    if n_side < 0:
        raise ValueError("n_side must be nonnegative")
    betas = [float(b) for b in betas]
    if any(not 0.0 <= b <= 1.0 for b in betas):
        raise ValueError("beta must lie in [0, 1]")
    if objective is Objective.SUCCESS_PROB and (gamma_th is None or gamma_th <= 0):
        raise ValueError("success objective needs a positive gamma_th")
    R = cell.half_width_R
    mu = cell.mean_load_mu
    m = 2 * n_side + 1
    centers = 2.0 * R * (np.arange(m) - n_side)
    a, h = params.link_budget_a, params.altitude_h
    interferer = np.arange(m) != n_side

    def worker(index: int, count: int):
        rng = chunk_rng(seed, index)
        counts = rng.poisson(mu, (count, m))
        total = int(counts.sum())
        local = rng.uniform(-R, R, total)
        pick = rng.random(count)

        flat = counts.ravel()
        offsets = np.concatenate(([0], np.cumsum(flat)))
        starts = offsets[:-1]
        if total:
            left = np.add.reduceat((local < 0.0).astype(np.int64),
                                   np.minimum(starts, total - 1))
            left[flat == 0] = 0
        else:
            left = np.zeros(m * count, dtype=np.int64)
        left = left.reshape(count, m)
        toward = np.sign((counts - left) - left).astype(float)

        k0 = counts[:, n_side]
        kept = k0 > 0
        center_start = starts[np.arange(count) * m + n_side]
        j = np.minimum((pick * k0).astype(np.int64), np.maximum(k0 - 1, 0))
        x0 = local[(center_start + j)[kept]]
        toward = toward[kept]

        out = np.empty((len(betas), 3))
        for bi, beta in enumerate(betas):
            uav = centers[None, :] + toward * beta * R
            power = a / ((x0[:, None] - uav) ** 2 + h * h)
            sinr = power[:, n_side] / (1.0 + power[:, interferer].sum(axis=1))
            if objective is Objective.AVG_THROUGHPUT:
                vals = np.log2(1.0 + sinr)
            else:
                vals = (sinr >= gamma_th).astype(float)
            out[bi] = (vals.size, vals.sum(), (vals * vals).sum())
        return out

    sizes = _chunk_plan(n_realizations, chunk_size)
    parts = _run_chunks(worker, sizes, n_threads)
    results = []
    for bi in range(len(betas)):
        n = int(sum(p[bi, 0] for p in parts))
        s = math.fsum(p[bi, 1] for p in parts)
        ss = math.fsum(p[bi, 2] for p in parts)
        results.append(_estimate(n, s, ss, n_realizations, seed))
    return results


def multi_uav_1d(cell: CellGeometry, params: SystemParams, beta: float,
                 n_side: int, n_realizations: int = DEFAULT_REALIZATIONS,
                 seed: int = 0,
                 objective: Objective = Objective.AVG_THROUGHPUT,
                 gamma_th: float | None = None, n_threads: int = 1,
                 chunk_size: int = DEFAULT_CHUNK) -> MetricsEstimate:
    """Single-factor convenience wrapper around multi_uav_sweep_1d."""
    return multi_uav_sweep_1d(cell, params, [beta], n_side, n_realizations,
                              seed, objective, gamma_th, n_threads,
                              chunk_size)[0]
