"""
Two-beam dynamical diffraction in a perfect, non-absorbing crystal slab
(symmetric Laue case).

``y`` is the usual normalized deviation from the Bragg angle and
``A = pi t / Delta_H`` the slab thickness in units of the Pendelloesung
length. Exit positions across the Borrmann fan are labelled by
``Gamma = tan(Omega) / tan(theta_B)`` in (-1, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError


@dataclass(frozen=True)
class LaueCrystal:
    bragg_angle_thetaB: float
    reduced_thickness_A: float

    def __post_init__(self):
        if not 0 < self.bragg_angle_thetaB < np.pi / 2:
            raise DomainError("Bragg angle must lie in (0, pi/2)")
        if not self.reduced_thickness_A > 0:
            raise DomainError("reduced thickness A must be positive")


def rocking_curve(c: LaueCrystal, y):
    """Plane-wave ``(I_G, I_O)`` behind the slab; ``I_O = 1 - I_G``."""
    y = np.asarray(y, dtype=float)
    s2 = 1.0 + y * y
    i_g = np.sin(c.reduced_thickness_A * np.sqrt(s2)) ** 2 / s2
    return i_g, 1.0 - i_g


def thickness_averaged_reflectivity(y, a_min: float, a_max: float):
    """Mean of ``I_G(y)`` for ``A`` uniform on ``[a_min, a_max]`` (closed form)."""
    if not a_max > a_min:
        raise DomainError("need a_max > a_min")
    s = np.sqrt(1.0 + np.asarray(y, dtype=float) ** 2)
    # integral of sin^2(A s) dA = A/2 - sin(2 A s) / (4 s)
    prim = lambda a: a / 2.0 - np.sin(2.0 * a * s) / (4.0 * s)
    return (prim(a_max) - prim(a_min)) / ((a_max - a_min) * s * s)


def _fan_amplitude(gamma: float, A: float, y_split: float, tol: float) -> float:
    """``int_R sin(A sqrt(1+y^2)) / sqrt(1+y^2) * cos(A Gamma y) dy``.

    The head ``[0, y_split]`` uses adaptive quadrature. On the tail the
    integrand is rewritten with ``sqrt(1+y^2) = y + g(y)``, ``g -> 0``, as
    slowly varying amplitudes times ``sin``/``cos`` of ``A (1 +- Gamma) y``
    and integrated with Fourier-weighted quadrature to infinity.
    """
    def head(y):
        s = np.sqrt(1.0 + y * y)
        return np.sin(A * s) / s * np.cos(A * gamma * y)

    def g(y):
        return 1.0 / (np.sqrt(1.0 + y * y) + y)

    amp_sin = lambda y: np.cos(A * g(y)) / np.sqrt(1.0 + y * y)
    amp_cos = lambda y: np.sin(A * g(y)) / np.sqrt(1.0 + y * y)

    total, _ = integrate.quad(head, 0.0, y_split, limit=4000, epsabs=tol, epsrel=tol)
    for w in (A * (1.0 + gamma), A * (1.0 - gamma)):
        s, _ = integrate.quad(amp_sin, y_split, np.inf, weight="sin", wvar=w, limlst=400, epsabs=tol)
        c, _ = integrate.quad(amp_cos, y_split, np.inf, weight="cos", wvar=w, limlst=400, epsabs=tol)
        total += 0.5 * (s + c)
    return 2.0 * total


def fan_profile(c: LaueCrystal, gamma_samples, y_split: float = 10.0, tol: float = 1e-10) -> np.ndarray:
    """Diffracted intensity across the exit face for an incident pencil beam.

    Superposes the plane-wave solutions over ``y``; each component carries
    the lateral phase ``A y Gamma``. Normalized so that the integral over
    ``Gamma`` equals the ``y``-integrated rocking reflectivity.
    """
    gam = np.atleast_1d(np.asarray(gamma_samples, dtype=float))
    if np.any(np.abs(gam) >= 1.0):
        raise DomainError("Gamma must lie strictly inside (-1, 1)")
    A = c.reduced_thickness_A
    amp = np.array([_fan_amplitude(abs(g), A, y_split, tol) for g in gam])
    return A / (2.0 * np.pi) * amp**2


def fan_profile_bessel(c: LaueCrystal, gamma_samples) -> np.ndarray:
    """Closed form ``(pi A / 2) J0^2(A sqrt(1 - Gamma^2))`` of the same profile."""
    gam = np.asarray(gamma_samples, dtype=float)
    A = c.reduced_thickness_A
    return 0.5 * np.pi * A * special.j0(A * np.sqrt(1.0 - gam * gam)) ** 2


def integrated_reflectivity(c: LaueCrystal, y_split: float = 10.0, tol: float = 1e-10) -> float:
    """``int I_G(y) dy`` over the real line."""
    A = c.reduced_thickness_A
    f = lambda y: rocking_curve(c, y)[0]
    head, _ = integrate.quad(f, 0.0, y_split, limit=4000, epsabs=tol)
    # tail: sin^2(A s) / s^2 = (1 - cos(2 A s)) / (2 s^2) with s = y + g(y)
    g = lambda y: 1.0 / (np.sqrt(1.0 + y * y) + y)
    cc, _ = integrate.quad(lambda y: np.cos(2 * A * g(y)) / (1 + y * y), y_split, np.inf,
                           weight="cos", wvar=2 * A, limlst=400, epsabs=tol)
    ss, _ = integrate.quad(lambda y: np.sin(2 * A * g(y)) / (1 + y * y), y_split, np.inf,
                           weight="sin", wvar=2 * A, limlst=400, epsabs=tol)
    tail = 0.5 * (np.pi / 2 - np.arctan(y_split)) - 0.5 * (cc - ss)
    return 2.0 * (head + tail)
