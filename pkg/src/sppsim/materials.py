"""
Neutron-optical constants of phase-shifting materials.

All lengths are SI metres. The neutron refractive index of a non-absorbing
material is ``n = 1 - lambda**2 * N * b_c / (2 pi)``, so a slab of thickness
``D`` shifts the phase of a transmitted wave by ``N * b_c * lambda * D``
relative to vacuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

AVOGADRO = 6.02214076e23  # mol^-1

#: Neutron wavelength used for every interferogram (m).
NEUTRON_WAVELENGTH = 0.271e-9

#: Si(111) lattice-plane spacing (m); sets the interference fringe period.
SI_111_SPACING = 0.3135e-9


@dataclass(frozen=True)
class Material:
    name: str
    number_density_N: float  # atoms / m^3
    coherent_length_bc: float  # m

    def __post_init__(self):
        if not (self.number_density_N > 0 and math.isfinite(self.number_density_N)):
            raise DomainError(f"number density must be positive, got {self.number_density_N}")
        if not math.isfinite(self.coherent_length_bc):
            raise DomainError("coherent scattering length must be finite")

    @classmethod
    def from_density(cls, name, density_g_cm3, molar_mass_g_mol, bc):
        n = density_g_cm3 / molar_mass_g_mol * AVOGADRO * 1e6
        return cls(name, n, bc)


@dataclass(frozen=True)
class BeamConfig:
    wavelength_lambda: float = NEUTRON_WAVELENGTH

    def __post_init__(self):
        if not (self.wavelength_lambda > 0 and math.isfinite(self.wavelength_lambda)):
            raise DomainError(f"wavelength must be positive, got {self.wavelength_lambda}")


# Bound coherent scattering lengths from the Sears (1992) neutron tables;
# number densities from room-temperature mass densities.
ALUMINUM = Material.from_density("Al", 2.70, 26.9815, 3.449e-15)
SILICON = Material.from_density("Si", 2.329, 28.0855, 4.1491e-15)

MATERIALS = {"Al": ALUMINUM, "aluminum": ALUMINUM, "Si": SILICON, "silicon": SILICON}


def get_material(name: str) -> Material:
    try:
        return MATERIALS[name]
    except KeyError:
        raise KeyError(f"unknown material preset {name!r}; known: {sorted(set(MATERIALS))}") from None


def lambda_thickness(m: Material, b: BeamConfig) -> float:
    """Thickness ``D_lambda = 2 pi / (N b_c lambda)`` giving a 2 pi phase shift."""
    with np.errstate(divide="ignore", invalid="ignore"):
        d = 2.0 * np.pi / (np.float64(m.number_density_N) * m.coherent_length_bc * b.wavelength_lambda)
    if not np.isfinite(d):
        raise DomainError(f"lambda-thickness undefined for {m.name} (b_c = {m.coherent_length_bc})")
    return float(d)


def effective_momentum(step_height_hs: float, d_lambda: float) -> float:
    """Ratio ``h_s / D_lambda``; a real number, not restricted to integers."""
    if not d_lambda > 0:
        raise DomainError(f"d_lambda must be positive, got {d_lambda}")
    return step_height_hs / d_lambda


def refractive_decrement(m: Material, b: BeamConfig) -> float:
    """``1 - n = lambda**2 N b_c / (2 pi)``, equal to ``lambda / D_lambda``."""
    lam = b.wavelength_lambda
    return float(lam * lam * m.number_density_N * m.coherent_length_bc / (2.0 * np.pi))


def prism_deflection(spp, m: Material, b: BeamConfig, radius: float) -> float:
    """Refraction angle (rad) of the local azimuthal wedge of a spiral plate.

    The plate acts like a prism whose thickness gradient along the azimuth is
    ``h_s / (2 pi r)``; the deflection is that gradient times ``1 - n``.
    """
    rim = 0.5 * spp.diameter
    if radius == 0:
        raise DomainError("deflection is singular at the vortex centre (radius = 0)")
    if not 0 < radius <= rim:
        raise DomainError(f"radius must lie in (0, {rim}], got {radius}")
    return refractive_decrement(m, b) * spp.step_height_hs / (2.0 * np.pi * radius)


def mean_prism_deflection(spp, m: Material, b: BeamConfig, inner_cutoff: float = 0.5e-3) -> float:
    """Area-weighted mean of :func:`prism_deflection` over an annulus.

    The annulus runs from ``inner_cutoff`` to the plate rim. With weight
    ``2 pi r dr`` the mean of ``1/r`` is ``2 / (R + r_in)``.
    """
    rim = 0.5 * spp.diameter
    if not 0 < inner_cutoff < rim:
        raise DomainError(f"inner cutoff must lie in (0, {rim}), got {inner_cutoff}")
    return refractive_decrement(m, b) * spp.step_height_hs / (2.0 * np.pi) * 2.0 / (rim + inner_cutoff)


def fringe_spacing(b: BeamConfig, bragg_angle: float) -> float:
    """First-order Bragg spacing ``lambda / (2 sin theta_B)``."""
    if not 0 < bragg_angle <= np.pi / 2:
        raise DomainError(f"Bragg angle must lie in (0, pi/2], got {bragg_angle}")
    return b.wavelength_lambda / (2.0 * np.sin(bragg_angle))


def bragg_angle(b: BeamConfig, d_spacing: float = SI_111_SPACING) -> float:
    s = b.wavelength_lambda / (2.0 * d_spacing)
    if not 0 < s <= 1:
        raise DomainError(f"no Bragg reflection for lambda={b.wavelength_lambda}, d={d_spacing}")
    return float(np.arcsin(s))
