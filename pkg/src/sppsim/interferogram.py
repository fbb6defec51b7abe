"""
Interferogram synthesis from thickness maps.

A thickness ``T`` of phase-shifting material in one path shifts the relative
phase by ``2 pi T / D_lambda``. The G-detector records

    I = 1/2 * (1 + V * cos(phi0 + 2 pi T / D_lambda))

where ``phi0`` is the flag phase and ``V`` the local visibility (1 for a
fully coherent, locally constant phase). The O-detector records ``1 - I``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import DomainError, ResolutionWarning
from .fields import Grid, ScalarField2D, Unit, check_intensity

TWO_PI = 2.0 * np.pi

#: Coherence kernel width per axis, in units of the packet parameter sigma.
KERNEL_WIDTH_FACTOR = math.sqrt(2.0)

#: Below this kernel width (in pixels) coherence is treated as unresolved.
UNRESOLVED_PIXEL_FRACTION = 0.1


def phase_map(thickness: ScalarField2D, d_lambda: float) -> ScalarField2D:
    if not d_lambda > 0:
        raise DomainError(f"d_lambda must be positive, got {d_lambda}")
    return ScalarField2D(thickness.grid, TWO_PI * thickness.values / d_lambda, Unit.PHASE)


def ideal_interferogram(thickness: ScalarField2D, d_lambda: float, phi0: float = 0.0) -> ScalarField2D:
    phase = phase_map(thickness, d_lambda).values
    return ScalarField2D(thickness.grid, 0.5 * (1.0 + np.cos(phi0 + phase)), Unit.INTENSITY)


def complementary_interferogram(I_g: ScalarField2D) -> ScalarField2D:
    """O-beam intensity for a given G-beam intensity (no absorption)."""
    check_intensity(I_g)
    return ScalarField2D(I_g.grid, 1.0 - I_g.values, Unit.INTENSITY)


@dataclass(frozen=True)
class CoherenceModel:
    """Transverse wave-packet widths; typically ``sigma_z << sigma_x``."""

    sigma_x: float = 3e-6
    sigma_z: float = 60e-9

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_z > 0):
            raise DomainError("coherence widths must be positive")

    def kernel_widths(self) -> tuple[float, float]:
        return (KERNEL_WIDTH_FACTOR * self.sigma_x, KERNEL_WIDTH_FACTOR * self.sigma_z)


def visibility_map(phase: ScalarField2D, coh: CoherenceModel, grid: Grid | None = None) -> ScalarField2D:
    """Modulus of the Gaussian-weighted mean of ``exp(i phase)`` around each pixel.

    The weight is a normalized anisotropic Gaussian of standard deviations
    :meth:`CoherenceModel.kernel_widths`. Axes whose width is under a tenth
    of a pixel are left unsmoothed; if both are, ``V = 1`` identically.
    """
    if grid is not None and grid != phase.grid:
        raise ValueError("phase map and grid disagree")
    g = phase.grid
    wx, wz = coh.kernel_widths()
    sx, sz = wx / g.dx, wz / g.dz
    if sx < UNRESOLVED_PIXEL_FRACTION and sz < UNRESOLVED_PIXEL_FRACTION:
        warnings.warn("coherence unresolved at this grid; visibility set to 1",
                      ResolutionWarning, stacklevel=2)
        return ScalarField2D(g, np.ones(g.shape), Unit.VISIBILITY)
    sigma = (sx if sx >= UNRESOLVED_PIXEL_FRACTION else 0.0,
             sz if sz >= UNRESOLVED_PIXEL_FRACTION else 0.0)
    c = ndimage.gaussian_filter(np.cos(phase.values), sigma, mode="nearest", truncate=6.0)
    s = ndimage.gaussian_filter(np.sin(phase.values), sigma, mode="nearest", truncate=6.0)
    return ScalarField2D(g, np.clip(np.hypot(c, s), 0.0, 1.0), Unit.VISIBILITY)


def modulated_intensity(phase: ScalarField2D, visibility: ScalarField2D, phi0: float = 0.0) -> ScalarField2D:
    """``1/2 (1 + V cos(phi0 + phase))``."""
    V = visibility.values
    return ScalarField2D(phase.grid, 0.5 * (1.0 + V * np.cos(phi0 + phase.values)), Unit.INTENSITY)


def coherent_interferogram(thickness: ScalarField2D, d_lambda: float, phi0: float,
                           coh: CoherenceModel, grid: Grid | None = None) -> ScalarField2D:
    phase = phase_map(thickness, d_lambda)
    return modulated_intensity(phase, visibility_map(phase, coh, grid), phi0)


# -- detector ---------------------------------------------------------------

NOISE_MODELS = ("none", "gaussian", "poisson")


@dataclass(frozen=True)
class DetectorSpec:
    nu: int = 100
    nv: int = 100
    pixel_pitch: float = 0.16e-3
    noise_model: str = "none"
    sigma_rel: float = 0.05
    counts_per_pixel: float = 50.0
    rng_seed: int = 0

    def __post_init__(self):
        if int(self.nu) < 1 or int(self.nv) < 1:
            raise DomainError("detector needs at least one pixel per axis")
        if not self.pixel_pitch > 0:
            raise DomainError("pixel pitch must be positive")
        if self.noise_model not in NOISE_MODELS:
            raise DomainError(f"noise model must be one of {NOISE_MODELS}, got {self.noise_model!r}")
        if self.sigma_rel < 0:
            raise DomainError("sigma_rel must be >= 0")
        if self.noise_model == "poisson" and not self.counts_per_pixel > 0:
            raise DomainError("counts_per_pixel must be positive for poisson noise")

    @property
    def grid(self) -> Grid:
        return Grid(self.nu, self.nv, self.nu * self.pixel_pitch, self.nv * self.pixel_pitch)


def _overlap_matrix(fine_edges: np.ndarray, coarse_edges: np.ndarray) -> np.ndarray:
    lo = np.maximum(coarse_edges[:-1, None], fine_edges[None, :-1])
    hi = np.minimum(coarse_edges[1:, None], fine_edges[None, 1:])
    w = np.clip(hi - lo, 0.0, None)
    w[w < 1e-9 * np.diff(coarse_edges).min()] = 0.0
    return w


def bin_to_detector(field: ScalarField2D, det: DetectorSpec) -> ScalarField2D:
    """Area-weighted mean of the field over each detector pixel.

    The detector is centred on the field and must fit inside it.
    """
    g, dg = field.grid, det.grid
    rtol = 1e-9
    if dg.extent_x > g.extent_x * (1 + rtol) or dg.extent_z > g.extent_z * (1 + rtol):
        raise DomainError("detector is larger than the field extent")
    if g.dx > dg.dx * (1 + rtol) or g.dz > dg.dz * (1 + rtol):
        raise DomainError("field grid is coarser than the detector")
    if g.shape == dg.shape and np.isclose(g.dx, dg.dx, rtol=1e-12) and np.isclose(g.dz, dg.dz, rtol=1e-12):
        return ScalarField2D(dg, field.values, field.unit)

    def edges(n, extent):
        return np.linspace(-0.5 * extent, 0.5 * extent, n + 1)

    Wx = _overlap_matrix(edges(g.nx, g.extent_x), edges(dg.nx, dg.extent_x))
    Wz = _overlap_matrix(edges(g.nz, g.extent_z), edges(dg.nz, dg.extent_z))
    num = Wx @ field.values @ Wz.T
    den = np.outer(Wx.sum(axis=1), Wz.sum(axis=1))
    return ScalarField2D(dg, num / den, field.unit)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; ``stream`` separates items of a series."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def apply_noise(field: ScalarField2D, det: DetectorSpec, stream: int = 0) -> ScalarField2D:
    if det.noise_model == "none":
        return field
    rng = make_rng(det.rng_seed, stream)
    v = field.values
    if det.noise_model == "gaussian":
        out = np.maximum(v + rng.normal(0.0, det.sigma_rel, size=v.shape), 0.0)
    else:
        out = rng.poisson(v * det.counts_per_pixel) / det.counts_per_pixel
    return ScalarField2D(field.grid, out, field.unit)


# -- phase analysis ---------------------------------------------------------

def phase_from_steps(frames: Sequence[ScalarField2D], phi0s: Sequence[float]) -> tuple[ScalarField2D, ScalarField2D]:
    """Recover the wrapped phase from phase-stepped interferograms.

    Fits ``I_k = a + b cos(phi0_k + Phi)`` per pixel by least squares and
    returns ``(Phi in (-pi, pi], b)``. Needs at least three distinct steps.
    """
    if len(frames) != len(phi0s) or len(frames) < 3:
        raise ValueError("need >= 3 frames with matching phase steps")
    phi0s = np.asarray(phi0s, dtype=float)
    grid = frames[0].grid
    Y = np.stack([f.values.ravel() for f in frames])
    A = np.column_stack([np.ones_like(phi0s), np.cos(phi0s), -np.sin(phi0s)])
    coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
    c, s = coef[1], coef[2]
    phase = np.arctan2(s, c).reshape(grid.shape)
    amp = np.hypot(c, s).reshape(grid.shape)
    return ScalarField2D(grid, phase, Unit.PHASE), ScalarField2D(grid, amp, Unit.DIMENSIONLESS)


@dataclass
class WindingResult:
    total: float  # sum of wrapped increments / 2 pi; integer up to rounding
    smooth: float  # same, skipping increments flagged as jumps
    jumps: list = field(default_factory=list)  # (azimuth, increment) pairs

    @property
    def winding_number(self) -> int:
        return int(round(self.total))

    @property
    def has_discontinuity(self) -> bool:
        return bool(self.jumps)


def sample_circle(field: ScalarField2D, radius: float, center=(0.0, 0.0), n_samples: int = 2048,
                  order: int = 1):
    """Samples of ``field`` on a circle, bilinear by default; returns ``(theta, values)``."""
    theta = np.arange(n_samples) * (TWO_PI / n_samples)
    x = center[0] + radius * np.cos(theta)
    z = center[1] + radius * np.sin(theta)
    ix, iz = field.grid.index_of(x, z)
    vals = ndimage.map_coordinates(field.values, [ix, iz], order=order, mode="nearest")
    return theta, vals


def winding_along_circle(phase: ScalarField2D, radius: float, center=(0.0, 0.0),
                         n_samples: int = 2048, jump_threshold: float = np.pi / 2) -> WindingResult:
    """Accumulated phase (in turns) along a counter-clockwise circle.

    Each sample takes the phase of the nearest pixel, so a discontinuity
    stays a single increment instead of being smeared by interpolation.
    Increments larger than ``jump_threshold`` are reported as jumps; for a
    closed loop ``total`` is always an integer while ``smooth`` is not.
    """
    theta, angle = sample_circle(phase, radius, center, n_samples, order=0)
    d = np.diff(np.append(angle, angle[0]))
    d = np.mod(d + np.pi, TWO_PI) - np.pi
    big = np.abs(d) > jump_threshold
    jumps = [(float(theta[i]), float(d[i])) for i in np.flatnonzero(big)]
    return WindingResult(total=float(d.sum() / TWO_PI), smooth=float(d[~big].sum() / TWO_PI), jumps=jumps)
