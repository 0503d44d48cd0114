"""Laser-diode source data and the layered light path of a dual-color unit.

A unit routes light from a laser diode (LD) through an optional TO-can
window, index-matching glue and a dichroic mirror onto a flat-cleaved fiber.
Everything between the diode and the fiber face is modeled as a sequence of
flat interfaces and homogeneous propagation segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Union

from .beam import (
    DEFAULT_MSQ,
    AstigmaticBeam,
    InterfacePair,
    beam_from_spec,
    fresnel_t,
    propagate,
    refract_flat,
)
from .errors import ConstraintError, DomainError

GLUE_INDEX = 1.54
GLASS_INDEX = 1.5
FIBER_INDEX = 1.5
# TO-can window geometry is not published by the diode vendors; assumed.
WINDOW_THICKNESS = 0.25e-3
# 550 nm shortpass dichroic: shorter wavelengths pass, longer are reflected.
DICHROIC_CUTOFF = 550e-9

Choice = Literal["min", "nominal", "max"]
CHOICES: tuple[Choice, ...] = ("min", "nominal", "max")
_CHOICE_INDEX = {"min": 0, "nominal": 1, "max": 2}


def _triple(values) -> tuple[float, float, float]:
    t = tuple(float(v) for v in values)
    if len(t) != 3:
        raise DomainError(f"expected a (min, nominal, max) triple, got {values!r}")
    if not t[0] <= t[1] <= t[2]:
        raise DomainError(f"triple must be ordered min <= nominal <= max, got {t}")
    return t


@dataclass(frozen=True)
class LaserDiodeSpec:
    """Source parameters of one laser diode at its modeled drive current.

    Divergence triples are full-angle FWHM values in air [rad]; the offset
    triple bounds the transverse misalignment per axis [m].
    """

    label: str
    vacuum_wavelength: float
    power_at_drive: float
    theta_fwhm_1: tuple[float, float, float]
    theta_fwhm_2: tuple[float, float, float]
    offset_bound: tuple[float, float, float]
    can_window: bool
    min_pathway: float
    msq: float = DEFAULT_MSQ

    def __post_init__(self):
        for name in ("theta_fwhm_1", "theta_fwhm_2", "offset_bound"):
            object.__setattr__(self, name, _triple(getattr(self, name)))
        if not (self.power_at_drive > 0 and self.vacuum_wavelength > 0 and self.min_pathway > 0):
            raise DomainError("power, wavelength and min_pathway must be positive")
        if min(self.offset_bound) < 0:
            raise DomainError("offset bounds must be non-negative")

    def theta(self, axis: int, choice: Choice = "nominal") -> float:
        triple = self.theta_fwhm_1 if axis == 1 else self.theta_fwhm_2
        return triple[_CHOICE_INDEX[choice]]

    def offset(self, choice: Choice = "nominal") -> float:
        return self.offset_bound[_CHOICE_INDEX[choice]]

    def beam(self, choice_1: Choice = "nominal", choice_2: Choice = "nominal") -> AstigmaticBeam:
        """The diode's emission at its waist, in air."""
        return self.beam_with_angles(self.theta(1, choice_1), self.theta(2, choice_2))

    def beam_with_angles(self, theta_1: float, theta_2: float) -> AstigmaticBeam:
        return beam_from_spec(self.vacuum_wavelength, self.power_at_drive, theta_1, theta_2, self.msq, 1.0)


_deg = math.radians

BLUE_PL450B = LaserDiodeSpec(
    label="PL450B",
    vacuum_wavelength=450e-9,
    power_at_drive=88e-3,
    theta_fwhm_1=(_deg(4.0), _deg(7.5), _deg(11.0)),
    theta_fwhm_2=(_deg(18.0), _deg(21.5), _deg(25.0)),
    offset_bound=(5e-6, 10e-6, 15e-6),
    can_window=True,
    min_pathway=2.90e-3,
)

RED_HL63603TG = LaserDiodeSpec(
    label="HL63603TG",
    vacuum_wavelength=638e-9,
    power_at_drive=45e-3,
    theta_fwhm_1=(_deg(5.0), _deg(8.5), _deg(13.0)),
    theta_fwhm_2=(_deg(13.0), _deg(18.0), _deg(23.0)),
    offset_bound=(5e-6, 10e-6, 15e-6),
    can_window=False,
    min_pathway=0.46e-3,
)

PRESETS = {
    "blue-PL450B": BLUE_PL450B,
    "red-HL63603TG": RED_HL63603TG,
}


@dataclass(frozen=True)
class Propagation:
    n: float
    d: float

    def __post_init__(self):
        if not self.d >= 0:
            raise DomainError(f"propagation length must be >= 0, got {self.d!r}")
        if not self.n >= 1:
            raise DomainError(f"index must be >= 1, got {self.n!r}")


@dataclass(frozen=True)
class FlatInterface:
    n_to: float
    apply_fresnel: bool = True

    def __post_init__(self):
        if not self.n_to >= 1:
            raise DomainError(f"index must be >= 1, got {self.n_to!r}")


@dataclass(frozen=True)
class IdealMirror:
    """Lossless dichroic: transmits or reflects without touching the beam."""

    mode: Literal["transmit", "reflect"] = "transmit"

    def __post_init__(self):
        if self.mode not in ("transmit", "reflect"):
            raise DomainError(f"mirror mode must be 'transmit' or 'reflect', got {self.mode!r}")


StackElement = Union[Propagation, FlatInterface, IdealMirror]


@dataclass(frozen=True)
class OpticalStack:
    elements: tuple[StackElement, ...] = field(default_factory=tuple)
    source_index: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if sum(isinstance(e, IdealMirror) for e in self.elements) > 1:
            raise DomainError("a stack holds at most one mirror")

    @property
    def total_pathway(self) -> float:
        return math.fsum(e.d for e in self.elements if isinstance(e, Propagation))

    @property
    def interfaces(self) -> list[FlatInterface]:
        return [e for e in self.elements if isinstance(e, FlatInterface)]


def build_unit_stack(
    ld: LaserDiodeSpec,
    pathway: float,
    glue_index: float = GLUE_INDEX,
    glass_index: float = GLASS_INDEX,
    window_thickness: float = WINDOW_THICKNESS,
    fiber_index: float = FIBER_INDEX,
    mirror: bool = True,
) -> OpticalStack:
    """Canonical light path of one diode in a glued dual-color unit.

    ``pathway`` is the full source-to-fiber geometric length, window
    included.  The dichroic sits halfway along the glue segment.
    """
    if pathway < ld.min_pathway * (1 - 1e-12):
        raise ConstraintError(
            f"pathway {pathway * 1e3:.4g} mm is below the mechanical minimum "
            f"min_pathway={ld.min_pathway * 1e3:.4g} mm for {ld.label}"
        )
    elements: list[StackElement] = []
    glue_len = pathway
    if ld.can_window:
        if window_thickness > pathway:
            raise ConstraintError("window thickness exceeds the pathway")
        elements += [FlatInterface(glass_index), Propagation(glass_index, window_thickness)]
        glue_len = pathway - window_thickness
    elements.append(FlatInterface(glue_index))
    if mirror:
        mode = "transmit" if ld.vacuum_wavelength < DICHROIC_CUTOFF else "reflect"
        elements += [
            Propagation(glue_index, glue_len / 2),
            IdealMirror(mode),
            Propagation(glue_index, glue_len - glue_len / 2),
        ]
    else:
        elements.append(Propagation(glue_index, glue_len))
    elements.append(FlatInterface(fiber_index))
    return OpticalStack(tuple(elements), source_index=1.0)


def trace_stack(beam: AstigmaticBeam, stack: OpticalStack) -> AstigmaticBeam:
    """Carry ``beam`` through every element; returns the beam at the far end."""
    if beam.medium_index != stack.source_index:
        raise DomainError(
            f"beam is in a medium of index {beam.medium_index}, stack starts in {stack.source_index}"
        )
    for el in stack.elements:
        if isinstance(el, Propagation):
            if el.n != beam.medium_index:
                raise DomainError(f"propagation segment in n={el.n} but beam is in n={beam.medium_index}")
            beam = propagate(beam, el.d)
        elif isinstance(el, FlatInterface):
            t = fresnel_t(InterfacePair(beam.medium_index, el.n_to)) if el.apply_fresnel else 1.0
            beam = refract_flat(beam, el.n_to)
            if t != 1.0:
                beam = AstigmaticBeam(
                    beam.vacuum_wavelength, beam.power * t, beam.q1, beam.q2, beam.medium_index, beam.msq
                )
        # IdealMirror: lossless, geometry unchanged
    return beam
