"""Core radio and geometry model shared by the analytic and simulation code.

Everything downstream works in SI units: watts, meters, linear power ratios.
Spectral efficiency is reported in bit/s/Hz (log base 2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ZeroCoverage(ValueError):
    """SNR threshold unreachable even directly below the UAV."""


class Dimension(enum.IntEnum):
    """Cell shape: a line segment [-R, R] or a square [-R, R]^2."""

    LINE = 1
    SQUARE = 2


@dataclass(frozen=True)
class SystemParams:
    """Air-to-ground LoS link budget.

    The received SNR at ground distance u from the UAV's ground projection is
    a / (u^2 + h^2) with a = transmit_power * ref_gain_theta / noise_power,
    where ref_gain_theta is the channel power gain at 1 m.
    """

    transmit_power: float      # W
    altitude_h: float          # m
    ref_gain_theta: float      # linear, at ref_distance_d
    noise_power: float         # W
    ref_distance_d: float = 1.0   # m
    wavelength_nu: float = field(default=0.0)   # m, derived when omitted
    link_budget_a: float = field(default=0.0)   # m^2, always derived

    def __post_init__(self):
        for name in ("transmit_power", "altitude_h", "ref_gain_theta",
                     "noise_power", "ref_distance_d"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        a = self.transmit_power * self.ref_gain_theta / self.noise_power
        object.__setattr__(self, "link_budget_a", a)
        nu = self.wavelength_nu
        if nu == 0.0:
            # free-space reference gain theta = (nu / (4 pi d))^2
            nu = 4.0 * math.pi * self.ref_distance_d * math.sqrt(self.ref_gain_theta)
            object.__setattr__(self, "wavelength_nu", nu)
        else:
            implied = (nu / (4.0 * math.pi * self.ref_distance_d)) ** 2
            if abs(implied - self.ref_gain_theta) > 1e-9 * self.ref_gain_theta:
                raise ValueError("wavelength_nu inconsistent with ref_gain_theta")

    @classmethod
    def from_wavelength(cls, transmit_power: float, altitude_h: float,
                        wavelength_nu: float, noise_power: float,
                        ref_distance_d: float = 1.0) -> "SystemParams":
        theta = (wavelength_nu / (4.0 * math.pi * ref_distance_d)) ** 2
        return cls(transmit_power=transmit_power, altitude_h=altitude_h,
                   ref_gain_theta=theta, noise_power=noise_power,
                   ref_distance_d=ref_distance_d, wavelength_nu=wavelength_nu)


def default_params() -> SystemParams:
    """Reference link budget: 10 mW, 100 m altitude, -47 dB gain, -110 dBm noise."""
    return SystemParams(transmit_power=0.01, altitude_h=100.0,
                        ref_gain_theta=10.0 ** (-4.7), noise_power=1e-14)


@dataclass(frozen=True)
class CellGeometry:
    """One cell of half-width R with users dropped by a homogeneous Poisson
    process of the given density (per m in 1D, per m^2 in 2D)."""

    half_width_R: float
    density: float
    dimension: Dimension

    def __post_init__(self):
        if self.half_width_R <= 0:
            raise ValueError("half_width_R must be positive")
        if self.density <= 0:
            raise ValueError("density must be positive")
        object.__setattr__(self, "dimension", Dimension(self.dimension))

    @property
    def n_sectors(self) -> int:
        return 2 if self.dimension == Dimension.LINE else 4

    @property
    def mean_load_mu(self) -> float:
        """Expected user count in the whole cell."""
        R = self.half_width_R
        if self.dimension == Dimension.LINE:
            return 2.0 * R * self.density
        return 4.0 * R * R * self.density

    @classmethod
    def from_mean_load(cls, mu: float, half_width_R: float,
                       dimension: Dimension) -> "CellGeometry":
        if mu <= 0:
            raise ValueError("mu must be positive")
        R = half_width_R
        dim = Dimension(dimension)
        dens = mu / (2.0 * R) if dim == Dimension.LINE else mu / (4.0 * R * R)
        return cls(half_width_R=R, density=dens, dimension=dim)


@dataclass(frozen=True)
class Placement:
    """UAV ground-projection choice: anchor index j and its coordinates.

    j = 0 is the cell center; j >= 1 are the displaced anchors at distance
    factor beta.  coords has one entry per spatial dimension.
    """

    anchor_index: int
    coords: tuple
    beta: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if self.anchor_index < 0 or self.anchor_index > 2 * len(self.coords):
            raise ValueError("anchor_index out of range for this dimension")


def anchor_coords(cell: CellGeometry, anchor_index: int, beta: float) -> tuple:
    """Ground coordinates of anchor j.

    1D: j=1 sits at -beta*R (left sector), j=2 at +beta*R.
    2D: j=1..4 sit at (+-beta*R, +-beta*R) starting from the first quadrant
    and going counterclockwise.
    """
    R = cell.half_width_R
    if cell.dimension == Dimension.LINE:
        table = {0: (0.0,), 1: (-beta * R,), 2: (beta * R,)}
    else:
        b = beta * R
        table = {0: (0.0, 0.0), 1: (b, b), 2: (-b, b), 3: (-b, -b), 4: (b, -b)}
    if anchor_index not in table:
        raise ValueError(f"anchor_index {anchor_index} invalid for {cell.dimension.name}")
    return table[anchor_index]


def make_placement(cell: CellGeometry, anchor_index: int, beta: float) -> Placement:
    return Placement(anchor_index=anchor_index,
                     coords=anchor_coords(cell, anchor_index, beta), beta=beta)


def snr(params: SystemParams, ground_distance):
    """Received SNR (linear) at the given ground distance(s) from the UAV."""
    d = np.asarray(ground_distance, dtype=float)
    out = params.link_budget_a / (d * d + params.altitude_h ** 2)
    return float(out) if np.isscalar(ground_distance) or out.ndim == 0 else out


def throughput(params: SystemParams, ground_distance):
    """Spectral efficiency log2(1 + SNR) in bit/s/Hz."""
    return np.log2(1.0 + snr(params, ground_distance))


def coverage_radius(params: SystemParams, gamma_th: float) -> float:
    """Ground radius within which SNR >= gamma_th.

    Raises ZeroCoverage when the threshold is unreachable even at distance 0,
    i.e. gamma_th > a / h^2.
    """
    if gamma_th <= 0:
        raise ValueError("gamma_th must be positive")
    radicand = params.link_budget_a / gamma_th - params.altitude_h ** 2
    if radicand < 0:
        peak = params.link_budget_a / params.altitude_h ** 2
        raise ZeroCoverage(
            f"gamma_th={gamma_th:g} exceeds the peak SNR {peak:g} at distance 0")
    return math.sqrt(radicand)
