"""Sampled 2D fields on a centred rectangular grid in the detector (x, z) plane."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Unit(str, Enum):
    THICKNESS = "thickness_m"
    PHASE = "phase_rad"
    INTENSITY = "intensity_norm"
    VISIBILITY = "visibility"
    DIMENSIONLESS = "dimensionless"


@dataclass(frozen=True)
class Grid:
    """Pixel grid centred on the beam axis.

    ``nx`` pixels span ``extent_x`` along x, ``nz`` span ``extent_z``
    along z. Coordinates refer to pixel centres.
    """

    nx: int
    nz: int
    extent_x: float
    extent_z: float

    def __post_init__(self):
        if int(self.nx) < 1 or int(self.nz) < 1:
            raise ValueError(f"grid needs at least one pixel, got {self.nx}x{self.nz}")
        if not (self.extent_x > 0 and self.extent_z > 0):
            raise ValueError("grid extents must be positive")
        if not (np.isfinite(self.extent_x) and np.isfinite(self.extent_z)):
            raise ValueError("grid extents must be finite")

    @classmethod
    def square(cls, n: int, extent: float) -> "Grid":
        return cls(n, n, extent, extent)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.nz)

    @property
    def dx(self) -> float:
        return self.extent_x / self.nx

    @property
    def dz(self) -> float:
        return self.extent_z / self.nz

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) * self.dx - 0.5 * self.extent_x

    @property
    def z(self) -> np.ndarray:
        return (np.arange(self.nz) + 0.5) * self.dz - 0.5 * self.extent_z

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Z)`` pixel-centre coordinates, each of shape (nx, nz)."""
        return np.meshgrid(self.x, self.z, indexing="ij")

    def index_of(self, x: float, z: float) -> tuple[float, float]:
        """Fractional array index of physical point ``(x, z)``."""
        return ((x + 0.5 * self.extent_x) / self.dx - 0.5,
                (z + 0.5 * self.extent_z) / self.dz - 0.5)


@dataclass(frozen=True, eq=False)
class ScalarField2D:
    """Real-valued map sampled on a :class:`Grid`.

    ``values`` has shape ``(nx, nz)``: first index along x, second along z.
    The array is copied and made read-only on construction.
    """

    grid: Grid
    values: np.ndarray
    unit: Unit = Unit.DIMENSIONLESS

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "unit", Unit(self.unit))
        object.__setattr__(self, "values", v)
        if self.unit is Unit.VISIBILITY:
            if v.size and (v.min() < 0.0 or v.max() > 1.0):
                raise ValueError("visibility values must lie in [0, 1]")

    @property
    def nx(self) -> int:
        return self.grid.nx

    @property
    def nz(self) -> int:
        return self.grid.nz

    @property
    def extent_x(self) -> float:
        return self.grid.extent_x

    @property
    def extent_z(self) -> float:
        return self.grid.extent_z

    def with_values(self, values, unit: Unit | None = None) -> "ScalarField2D":
        return ScalarField2D(self.grid, values, self.unit if unit is None else unit)

    def mean(self) -> float:
        return float(self.values.mean())

    def __repr__(self):
        return (f"ScalarField2D({self.nx}x{self.nz}, extent=({self.extent_x:.4g}, "
                f"{self.extent_z:.4g}) m, unit={self.unit.value})")


def zeros(grid: Grid, unit: Unit = Unit.THICKNESS) -> ScalarField2D:
    return ScalarField2D(grid, np.zeros(grid.shape), unit)


def check_intensity(field: ScalarField2D) -> None:
    """Raise if an intensity map leaves [0, 1] (pre-noise contract)."""
    v = field.values
    if v.size and (np.nanmin(v) < 0.0 or np.nanmax(v) > 1.0 or not np.isfinite(v).all()):
        raise ValueError("intensity values must lie in [0, 1]")
