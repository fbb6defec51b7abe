"""Phase-contrast simulation of spiral-phase-plate neutron interferograms."""

from .fields import Grid, ScalarField2D, Unit
from .materials import (ALUMINUM, BeamConfig, Material, effective_momentum, fringe_spacing,
                        lambda_thickness, mean_prism_deflection, prism_deflection, refractive_decrement)
from .geometry import (PhaseFlag, RadonConfig, SpiralPhasePlate, flag_delta_thickness, spp_height,
                       stack_thickness, thickness_map_direct, thickness_map_radon)
from .interferogram import (CoherenceModel, DetectorSpec, apply_noise, bin_to_detector,
                            coherent_interferogram, complementary_interferogram, ideal_interferogram,
                            visibility_map)
from .dyndiff import LaueCrystal, fan_profile, rocking_curve
from .oam import OamSuperposition, count_azimuthal_maxima, superposition_intensity

__version__ = "0.1.0"
