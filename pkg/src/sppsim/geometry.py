"""
Phase-shifting solids and their beam-path thickness maps.

The beam travels along y; maps live in the detector (x, z) plane. Two
independent routes produce the thickness of a spiral phase plate:

* :func:`thickness_map_direct` evaluates the height function at each pixel.
* :func:`thickness_map_radon` voxelizes the solid slice by slice in z and
  takes the single-angle parallel projection of every (x, y) slice.
"""

from __future__ import annotations

import functools
import math
import operator
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, ResolutionWarning
from .fields import Grid, ScalarField2D, Unit

TWO_PI = 2.0 * np.pi

#: Aperture of the plates used throughout (m).
SPP_DIAMETER = 15e-3


@dataclass(frozen=True)
class SpiralPhasePlate:
    """Disk whose height rises linearly with azimuth by ``step_height_hs`` per turn.

    A negative step gives the opposite chirality; ``base_thickness`` must
    then be at least ``|step_height_hs|`` so the solid has no negative height.
    The step seam lies along +x from the centre and belongs to the thin side.
    """

    step_height_hs: float
    diameter: float = SPP_DIAMETER
    base_thickness: float = 0.0
    n_slices: int = 256
    center_x: float = 0.0
    center_z: float = 0.0

    def __post_init__(self):
        if not self.diameter > 0:
            raise DomainError(f"diameter must be positive, got {self.diameter}")
        if not self.base_thickness >= 0:
            raise DomainError(f"base thickness must be >= 0, got {self.base_thickness}")
        if int(self.n_slices) < 16:
            raise DomainError(f"n_slices must be >= 16, got {self.n_slices}")
        if self.base_thickness + min(self.step_height_hs, 0.0) < 0:
            raise DomainError("negative step requires base_thickness >= |step_height_hs|")
        if not all(map(math.isfinite, (self.step_height_hs, self.diameter, self.center_x, self.center_z))):
            raise DomainError("plate parameters must be finite")

    @classmethod
    def from_momentum(cls, L: float, d_lambda: float, **kw) -> "SpiralPhasePlate":
        """Plate whose step is ``L`` lambda-thicknesses high."""
        if L < 0:
            kw.setdefault("base_thickness", -L * d_lambda)
        return cls(step_height_hs=L * d_lambda, **kw)

    @property
    def radius(self) -> float:
        return 0.5 * self.diameter

    @property
    def max_height(self) -> float:
        return self.base_thickness + max(self.step_height_hs, 0.0)

    def volume(self) -> float:
        return np.pi * self.radius**2 * (self.base_thickness + 0.5 * self.step_height_hs)


@dataclass(frozen=True)
class PhaseFlag:
    """Flat slab crossing both interferometer paths, tilted by ``rotation_phi0``."""

    slab_thickness_D0: float
    rotation_phi0: float
    bragg_angle: float

    def __post_init__(self):
        if not self.slab_thickness_D0 > 0:
            raise DomainError("slab thickness must be positive")
        if not 0 < self.bragg_angle < np.pi / 2:
            raise DomainError("Bragg angle must lie in (0, pi/2)")
        if not abs(self.rotation_phi0) < np.pi / 2 - self.bragg_angle:
            raise DomainError(
                f"|phi0| = {abs(self.rotation_phi0):.4g} rad exceeds pi/2 - theta_B")


@dataclass(frozen=True)
class RadonConfig:
    scan_angle_alpha: float = 0.0
    sampling_p: int | None = None  # rays per slice; None -> one ray per grid column


def azimuth(x, z, cx: float = 0.0, cz: float = 0.0):
    """Angle of ``(x, z)`` about ``(cx, cz)`` in [0, 2 pi)."""
    theta = np.mod(np.arctan2(z - cz, x - cx), TWO_PI)
    # mod of a tiny negative angle rounds up to exactly 2 pi
    return np.where(theta >= TWO_PI, 0.0, theta)


def spp_height(spp: SpiralPhasePlate, r, theta):
    """Plate height at polar position ``(r, theta)``; zero outside the aperture."""
    r = np.asarray(r, dtype=float)
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    theta = np.where(theta >= TWO_PI, 0.0, theta)
    h = spp.base_thickness + spp.step_height_hs * (theta / TWO_PI)
    out = np.where(r <= spp.radius, h, 0.0)
    return out if out.ndim else float(out)


def _height_at(spp: SpiralPhasePlate, x, z):
    r = np.hypot(x - spp.center_x, z - spp.center_z)
    return spp_height(spp, r, azimuth(x, z, spp.center_x, spp.center_z))


def thickness_map_direct(spp: SpiralPhasePlate, grid: Grid, supersample: int = 1) -> ScalarField2D:
    """Transmission length through the plate at every pixel.

    With ``supersample = k`` each pixel averages a k x k lattice of point
    samples, which anti-aliases the seam and the rim.
    """
    k = int(supersample)
    if k < 1:
        raise DomainError("supersample must be >= 1")
    X, Z = grid.mesh()
    if k == 1:
        return ScalarField2D(grid, _height_at(spp, X, Z), Unit.THICKNESS)
    offs = (np.arange(k) + 0.5) / k - 0.5
    acc = np.zeros(grid.shape)
    for ox in offs:
        for oz in offs:
            acc += _height_at(spp, X + ox * grid.dx, Z + oz * grid.dz)
    return ScalarField2D(grid, acc / (k * k), Unit.THICKNESS)


def project_slice(occupancy: np.ndarray, xs: np.ndarray, ys: np.ndarray,
                  alpha: float, p_edges: np.ndarray) -> np.ndarray:
    """Parallel projection of a rasterized slice along ``p = x cos(a) + y sin(a)``.

    Each occupied cell deposits its area into the p-bin holding its projected
    centre; dividing by the bin width gives line integrals (midpoint rule).
    ``occupancy`` is indexed ``[ix, iy]`` on cell centres ``xs``, ``ys``.
    """
    dx = xs[1] - xs[0] if xs.size > 1 else 1.0
    dy = ys[1] - ys[0] if ys.size > 1 else 1.0
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    p = X * np.cos(alpha) + Y * np.sin(alpha)
    weights = occupancy.astype(float) * (dx * dy)
    sums, _ = np.histogram(p.ravel(), bins=p_edges, weights=weights.ravel())
    return sums / np.diff(p_edges)


def _coarse_index(n_fine: int, n_coarse: int) -> np.ndarray:
    """Coarse cell holding the centre of each fine cell over a shared interval."""
    return np.floor((np.arange(n_fine) + 0.5) * n_coarse / n_fine).astype(int)


def _resample_axis(values: np.ndarray, n_out: int, axis: int) -> np.ndarray:
    """Mean of fine samples per output cell; nearest sample where a cell has none."""
    n_in = values.shape[axis]
    v = np.moveaxis(values, axis, 0)
    idx = _coarse_index(n_in, n_out)
    counts = np.bincount(idx, minlength=n_out)
    out = np.zeros((n_out,) + v.shape[1:])
    np.add.at(out, idx, v)
    empty = counts == 0
    counts = np.maximum(counts, 1)
    out /= counts.reshape((-1,) + (1,) * (v.ndim - 1))
    if empty.any():
        nearest = _coarse_index(n_out, n_in)
        out[empty] = v[nearest[empty]]
    return np.moveaxis(out, 0, axis)


def thickness_map_radon(spp: SpiralPhasePlate, grid: Grid, cfg: RadonConfig = RadonConfig()) -> ScalarField2D:
    """Thickness map from single-projection Radon transforms of z-slices.

    The field of view in x and z is the grid's; depth y spans the plate's
    maximum height. Each of ``spp.n_slices`` slices is rasterized on a
    ``sampling_p x sampling_p`` (x, y) raster and projected at angle alpha = 0,
    giving one line integral per ray. Rays and slices are then averaged into
    the grid pixels whose area contains them.
    """
    if cfg.scan_angle_alpha != 0.0:
        raise DomainError("thickness maps use the single projection alpha = 0")
    p = grid.nx if cfg.sampling_p is None else int(cfg.sampling_p)
    if p < grid.nx:
        raise DomainError(f"sampling_p ({p}) must be >= grid nx ({grid.nx})")
    n_slices = int(spp.n_slices)

    depth = spp.max_height
    if depth <= 0:
        return ScalarField2D(grid, np.zeros(grid.shape), Unit.THICKNESS)

    dx = grid.extent_x / p
    dy = depth / p
    dz = grid.extent_z / n_slices
    if n_slices < grid.nz or 0 < abs(spp.step_height_hs) < 2 * dy or spp.diameter < 2 * max(dx, dz):
        warnings.warn(
            f"Radon sampling (p={p}, slices={n_slices}) is coarse for this plate/grid",
            ResolutionWarning, stacklevel=2)

    xs = (np.arange(p) + 0.5) * dx - 0.5 * grid.extent_x
    ys = (np.arange(p) + 0.5) * dy
    zs = (np.arange(n_slices) + 0.5) * dz - 0.5 * grid.extent_z
    p_edges = np.arange(p + 1) * dx - 0.5 * grid.extent_x

    sino = np.empty((p, n_slices))
    for s, z in enumerate(zs):
        h = _height_at(spp, xs, np.full_like(xs, z))
        occupancy = ys[None, :] < h[:, None]
        sino[:, s] = project_slice(occupancy, xs, ys, cfg.scan_angle_alpha, p_edges)

    out = _resample_axis(_resample_axis(sino, grid.nx, 0), grid.nz, 1)
    return ScalarField2D(grid, out, Unit.THICKNESS)


def stack_thickness(maps: Sequence[ScalarField2D]) -> ScalarField2D:
    """Pixelwise sum of thickness maps of plates placed in one beam path."""
    maps = list(maps)
    if not maps:
        raise ValueError("need at least one map to stack")
    grid = maps[0].grid
    for m in maps[1:]:
        if m.grid != grid:
            raise ValueError(f"grid mismatch: {m.grid} vs {grid}")
    for m in maps:
        if m.unit is not Unit.THICKNESS:
            raise ValueError(f"can only stack thickness maps, got {m.unit.value}")
    total = functools.reduce(operator.add, (m.values for m in maps))
    return ScalarField2D(grid, total, Unit.THICKNESS)


def uniform_thickness(grid: Grid, t: float) -> ScalarField2D:
    return ScalarField2D(grid, np.full(grid.shape, float(t)), Unit.THICKNESS)


def flag_delta_thickness(flag: PhaseFlag) -> float:
    """Path-length difference between the two beams through a tilted flag.

    The beams cross the slab at ``theta_B - phi0`` and ``theta_B + phi0`` from
    its normal, so ``dD = D0 [1/cos(theta_B - phi0) - 1/cos(theta_B + phi0)]``.
    """
    th, phi = flag.bragg_angle, flag.rotation_phi0
    return flag.slab_thickness_D0 * (1.0 / np.cos(th - phi) - 1.0 / np.cos(th + phi))


def flag_phase(flag: PhaseFlag, d_lambda: float) -> float:
    """Relative phase (rad) introduced by the flag's path-length difference."""
    return TWO_PI * flag_delta_thickness(flag) / d_lambda
