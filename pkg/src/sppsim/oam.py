"""Reference pattern of an equal superposition of +l and -l vortex beams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import DomainError
from .fields import Grid, ScalarField2D, Unit
from .interferogram import sample_circle


@dataclass(frozen=True)
class OamSuperposition:
    l: int
    ring_radius: float = 4e-3
    ring_width: float = 1e-3
    relative_phase: float = 0.0

    def __post_init__(self):
        if int(self.l) != self.l or self.l < 1:
            raise DomainError(f"l must be a positive integer, got {self.l}")
        if not (self.ring_radius > 0 and self.ring_width > 0):
            raise DomainError("ring radius and width must be positive")


def superposition_intensity(s: OamSuperposition, grid: Grid) -> ScalarField2D:
    """``|e^{i l theta} + e^{-i(l theta + phase)}|^2 / 4`` on a Gaussian ring.

    Gives ``R(r) cos^2(l theta + phase/2)``: a ring with 2l lobes, peak 1.
    """
    if s.ring_width < 4 * max(grid.dx, grid.dz):
        raise DomainError("ring width must span at least 4 pixels")
    X, Z = grid.mesh()
    r = np.hypot(X, Z)
    theta = np.arctan2(Z, X)
    envelope = np.exp(-0.5 * ((r - s.ring_radius) / s.ring_width) ** 2)
    half = 0.5 * np.mod(s.relative_phase, 2.0 * np.pi)
    I = envelope * np.cos(s.l * theta + half) ** 2
    return ScalarField2D(grid, I, Unit.INTENSITY)


def count_azimuthal_maxima(field: ScalarField2D, ring_radius: float, center=(0.0, 0.0),
                           prominence: float = 0.1, min_samples: int = 720) -> int:
    """Number of intensity maxima met on a circle around ``center``.

    The circle is sampled bilinearly and treated as periodic; a maximum
    counts if its prominence exceeds ``prominence`` times the ring peak.
    """
    _, v = sample_circle(field, ring_radius, center, n_samples=min_samples)
    peak = float(v.max())
    if peak <= 0 or np.ptp(v) <= prominence * peak:
        return 0
    # start at the global minimum so no maximum straddles the array ends
    k = int(np.argmin(v))
    ring = np.concatenate([v[k:], v[:k], v[k:k + 1]])
    peaks, _ = signal.find_peaks(ring, prominence=prominence * peak)
    return int(peaks.size)
