"""Design and analysis tools for dual-color fiber-coupled laser-diode units."""

from .beam import (
    FLAT,
    AstigmaticBeam,
    InterfacePair,
    beam_from_spec,
    beam_geometry,
    fresnel_t,
    intensity_at,
    propagate,
    rayleigh_from_fwhm,
    refract_flat,
)
from .coupling import Alignment, CouplingResult, FiberSpec, coupled_power
from .design import (
    Requirement,
    Scenario,
    corner_sweep,
    max_pathway,
    power_vs_pathway,
    tolerance_monte_carlo,
)
from .stack import BLUE_PL450B, PRESETS, RED_HL63603TG, LaserDiodeSpec, OpticalStack, build_unit_stack, trace_stack

__version__ = "0.1.0"
