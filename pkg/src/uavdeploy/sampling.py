"""Poisson point process sampling for one cell, plus the majority-vote
placement rule and empirical displacement-probability estimation.

Realizations are generated in struct-of-arrays batches so that everything
downstream (metrics, placement rules) stays vectorized.  Reproducibility
contract: a given (seed, chunk_index) pair always yields the same substream,
regardless of how many chunks are processed or by which thread.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .model import CellGeometry, Dimension, Placement, make_placement

# fixed chunk size so results do not depend on worker count
DEFAULT_CHUNK = 1 << 16


def chunk_rng(seed: int, chunk_index: int = 0) -> np.random.Generator:
    """Independent substream for one chunk of realizations."""
    ss = np.random.SeedSequence(seed, spawn_key=(chunk_index,))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class Realization:
    """One dropped user set.  coords is (k,) in 1D and (k, 2) in 2D."""

    coords: np.ndarray
    sector_counts: np.ndarray
    typical_index: int | None

    @property
    def n_users(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class RealizationBatch:
    """n realizations packed back to back.

    Realization i owns coords[offsets[i]:offsets[i+1]].  typical_index is a
    global index into coords, or -1 for empty realizations.
    """

    dimension: Dimension
    coords: np.ndarray          # (total,) or (total, 2)
    offsets: np.ndarray         # (n + 1,)
    counts: np.ndarray          # (n,)
    sector_counts: np.ndarray   # (n, M)
    typical_index: np.ndarray   # (n,)

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def kept(self) -> np.ndarray:
        """Mask of realizations with at least one user."""
        return self.counts > 0

    def typical_coords(self):
        """Coordinates of the typical user for realizations with k >= 1."""
        return self.coords[self.typical_index[self.kept]]

    def realization(self, i: int) -> Realization:
        lo, hi = self.offsets[i], self.offsets[i + 1]
        ti = self.typical_index[i]
        return Realization(coords=self.coords[lo:hi],
                           sector_counts=self.sector_counts[i],
                           typical_index=None if ti < 0 else int(ti - lo))


def sector_of(cell: CellGeometry, coords: np.ndarray) -> np.ndarray:
    """0-based sector index per user.

    1D: sector 0 is [-R, 0), sector 1 is [0, R].  2D: sectors 0..3 are the
    quadrants starting from {x>=0, y>=0} counterclockwise, with the boundary
    attached to the nonnegative side.
    """
    if cell.dimension == Dimension.LINE:
        return (coords >= 0.0).astype(np.int64)
    x, y = coords[:, 0], coords[:, 1]
    xn = x < 0.0
    yn = y < 0.0
    # quadrant order: (+,+) (-,+) (-,-) (+,-)
    return np.where(yn, np.where(xn, 2, 3), np.where(xn, 1, 0)).astype(np.int64)


def sample_batch(cell: CellGeometry, n: int, rng: np.random.Generator) -> RealizationBatch:
    """Draw n independent cell realizations.

    Draw order is fixed (counts, then coordinates, then typical-user picks)
    so identical generator state yields identical batches.
    """
    R = cell.half_width_R
    M = cell.n_sectors
    counts = rng.poisson(cell.mean_load_mu, n)
    total = int(counts.sum())
    if cell.dimension == Dimension.LINE:
        coords = rng.uniform(-R, R, total)
    else:
        coords = rng.uniform(-R, R, (total, 2))
    u = rng.random(n)

    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    owner = np.repeat(np.arange(n, dtype=np.int64), counts)
    sectors = sector_of(cell, coords)
    sector_counts = np.bincount(owner * M + sectors, minlength=n * M).reshape(n, M)
    # typical user: uniform pick among the k users, -1 when empty
    pick = np.minimum((u * counts).astype(np.int64), np.maximum(counts - 1, 0))
    typical = np.where(counts > 0, offsets[:-1] + pick, -1)
    return RealizationBatch(dimension=cell.dimension, coords=coords,
                            offsets=offsets, counts=counts,
                            sector_counts=sector_counts, typical_index=typical)


def sample(cell: CellGeometry, rng: np.random.Generator) -> Realization:
    """Single realization; see sample_batch for the batched form."""
    return sample_batch(cell, 1, rng).realization(0)


def majority_anchor(sector_counts: np.ndarray) -> np.ndarray:
    """Vectorized majority vote over sector counts (n, M) -> anchor j (n,).

    The anchor is sector argmax + 1 when the maximum is unique, else 0 (the
    cell center keeps the UAV when sectors tie).
    """
    sc = np.atleast_2d(sector_counts)
    mx = sc.max(axis=1)
    n_max = (sc == mx[:, None]).sum(axis=1)
    return np.where(n_max == 1, sc.argmax(axis=1) + 1, 0).astype(np.int64)


def majority_placement(cell: CellGeometry, sector_counts: np.ndarray,
                       beta: float) -> Placement:
    j = int(majority_anchor(np.asarray(sector_counts)[None, :])[0])
    return make_placement(cell, j, beta)


@dataclass(frozen=True)
class EmpiricalDisplacementProbs:
    """Joint frequencies q_hat[j] = P[anchor = j and typical user in S1],
    conditioned on k >= 1, with binomial standard errors."""

    q: np.ndarray           # (M + 1,), index 0 = center anchor
    std_error: np.ndarray
    n_kept: int
    n_total: int

    @property
    def discard_rate(self) -> float:
        return 1.0 - self.n_kept / self.n_total


def empirical_displacement_probs(cell: CellGeometry, beta: float, n_realizations: int,
                                 rng) -> EmpiricalDisplacementProbs:
    """Monte Carlo counterpart of the displacement probabilities.

    Empty realizations are discarded from numerator and denominator.  beta is
    accepted for signature symmetry with the analytic side; the anchor index
    does not depend on it.
    """
    if isinstance(rng, (int, np.integer)):
        rng = chunk_rng(int(rng))
    M = cell.n_sectors
    joint = np.zeros(M + 1, dtype=np.int64)
    n_kept = 0
    done = 0
    # bound per-chunk memory at roughly 4M coordinates
    chunk = max(1024, int(4e6 / max(1.0, cell.mean_load_mu)))
    while done < n_realizations:
        n = min(chunk, n_realizations - done)
        batch = sample_batch(cell, n, rng)
        kept = batch.kept
        n_kept += int(kept.sum())
        anchors = majority_anchor(batch.sector_counts[kept])
        typ_sector = sector_of(cell, np.atleast_1d(batch.typical_coords()))
        in_s1 = typ_sector == 0
        joint += np.bincount(anchors[in_s1], minlength=M + 1)
        done += n
    q = joint / max(n_kept, 1)
    se = np.sqrt(np.maximum(q * (1.0 - q), 0.0) / max(n_kept, 1))
    return EmpiricalDisplacementProbs(q=q, std_error=se, n_kept=n_kept,
                                      n_total=n_realizations)


def realizations_to_csv(batch: RealizationBatch, path) -> None:
    """Debug dump, one row per user: realization_id, x, y, is_typical."""
    two_d = batch.dimension == Dimension.SQUARE
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["realization_id", "x", "y", "is_typical"])
        for i in range(len(batch)):
            lo, hi = batch.offsets[i], batch.offsets[i + 1]
            for g in range(lo, hi):
                xy = batch.coords[g]
                x, y = (xy[0], xy[1]) if two_d else (xy, "")
                w.writerow([i, repr(float(x)), repr(float(y)) if two_d else "",
                            int(g == batch.typical_index[i])])
