"""Simple astigmatic Gaussian beams and the flat-interface ABCD transforms.

A beam carries one complex q parameter per principal axis,
``q = (z - z0) + i*zR``.  Only two ray matrices are supported: free
propagation ``[[1, d], [0, 1]]`` and flat refraction
``[[1, 0], [0, n_in/n_out]]``.  Under the ABCD law the latter scales q by
``n_out/n_in``, so spot sizes are continuous across an interface as long as
the wavelength *in the current medium* (``vacuum_wavelength / n``) is used
everywhere, which is the convention followed here.

Beams with M^2 > 1 are treated as an embedded Gaussian of effective
wavelength ``M^2 * lambda``: the Rayleigh distance derived from a measured
divergence already contains M^2, and putting it into the spot size as well
keeps the far-field 1/e^2 half-angle equal to ``1.699 * theta_fwhm / 2``.

All quantities are SI (metres, watts, radians).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, NamedTuple, Union

import numpy as np

from .errors import DomainError

#: Ratio of the 1/e^2 divergence angle to the FWHM divergence angle of a
#: Gaussian far field, sqrt(2 / ln 2).
FWHM_TO_1E2 = 1.699

#: Default beam quality factor for laser-diode emission.
DEFAULT_MSQ = 1.3

FLAT = "flat"

Curvature = Union[float, Literal["flat"]]


@dataclass(frozen=True)
class AstigmaticBeam:
    """Two-axis Gaussian beam at a fixed transverse plane.

    Attributes
    ----------
    vacuum_wavelength : float
        Wavelength in vacuum [m].
    power : float
        Total beam power [W].
    q1, q2 : complex
        Beam parameters of the two principal axes [m], in the coordinates of
        the medium the beam currently occupies.
    medium_index : float
        Refractive index of that medium.
    msq : float
        Beam quality factor M^2.
    """

    vacuum_wavelength: float
    power: float
    q1: complex
    q2: complex
    medium_index: float = 1.0
    msq: float = DEFAULT_MSQ

    def __post_init__(self):
        if not 100e-9 < self.vacuum_wavelength < 20e-6:
            raise DomainError(f"vacuum wavelength {self.vacuum_wavelength!r} m outside (100 nm, 20 um)")
        if not self.power >= 0:
            raise DomainError(f"power must be >= 0, got {self.power!r}")
        if not self.medium_index >= 1:
            raise DomainError(f"medium index must be >= 1, got {self.medium_index!r}")
        if not self.msq >= 1:
            raise DomainError(f"M^2 must be >= 1, got {self.msq!r}")
        q1, q2 = complex(self.q1), complex(self.q2)
        if not (q1.imag > 0 and q2.imag > 0):
            raise DomainError("Rayleigh distances (imaginary parts of q) must be > 0")
        object.__setattr__(self, "q1", q1)
        object.__setattr__(self, "q2", q2)

    @property
    def wavelength(self) -> float:
        """Wavelength in the current medium [m]."""
        return self.vacuum_wavelength / self.medium_index

    @property
    def effective_wavelength(self) -> float:
        """``M^2 * wavelength`` in the current medium [m]; sets spot sizes."""
        return self.msq * self.vacuum_wavelength / self.medium_index

    @property
    def rayleigh_distances(self) -> tuple[float, float]:
        return self.q1.imag, self.q2.imag


class BeamGeometry(NamedTuple):
    w1: float
    w2: float
    R1: Curvature
    R2: Curvature


@dataclass(frozen=True)
class InterfacePair:
    """Refractive indices on either side of a flat interface."""

    n1: float
    n2: float

    def __post_init__(self):
        if not (self.n1 >= 1 and self.n2 >= 1):
            raise DomainError(f"refractive indices must be >= 1, got ({self.n1!r}, {self.n2!r})")


def rayleigh_from_fwhm(theta_fwhm: float, wavelength_in_medium: float, msq: float = DEFAULT_MSQ) -> float:
    """Rayleigh distance of one axis from its full-angle FWHM divergence.

    ``zR = 4 * lambda * M^2 / (pi * (1.699 * theta_fwhm)^2)``.  The angle and
    the wavelength must refer to the same medium.
    """
    if not 0 < theta_fwhm < math.pi / 2:
        raise DomainError(f"theta_fwhm must be in (0, pi/2) rad, got {theta_fwhm!r}")
    if not wavelength_in_medium > 0:
        raise DomainError(f"wavelength must be > 0, got {wavelength_in_medium!r}")
    if not msq > 0:
        raise DomainError(f"M^2 must be > 0, got {msq!r}")
    return 4.0 * wavelength_in_medium * msq / ((theta_fwhm * FWHM_TO_1E2) ** 2 * math.pi)


def beam_from_spec(
    wavelength: float,
    power: float,
    theta_fwhm_1: float,
    theta_fwhm_2: float,
    msq: float = DEFAULT_MSQ,
    medium_index: float = 1.0,
) -> AstigmaticBeam:
    """Beam at its waist built from source data.

    ``wavelength`` is the vacuum wavelength; the divergence angles are those
    measured in the medium of index ``medium_index``.
    """
    lam = wavelength / medium_index
    z1 = rayleigh_from_fwhm(theta_fwhm_1, lam, msq)
    z2 = rayleigh_from_fwhm(theta_fwhm_2, lam, msq)
    return AstigmaticBeam(wavelength, power, 1j * z1, 1j * z2, medium_index, msq)


def propagate(beam: AstigmaticBeam, d: float) -> AstigmaticBeam:
    """Free propagation by ``d`` metres within the current medium."""
    if not d >= 0:
        raise DomainError(f"propagation distance must be >= 0, got {d!r}")
    return replace(beam, q1=beam.q1 + d, q2=beam.q2 + d)


def refract_flat(beam: AstigmaticBeam, n_out: float) -> AstigmaticBeam:
    """Cross a flat interface into a medium of index ``n_out``.

    Power is untouched; Fresnel loss is accounted for separately with
    :func:`fresnel_t`.
    """
    if not n_out >= 1:
        raise DomainError(f"n_out must be >= 1, got {n_out!r}")
    scale = n_out / beam.medium_index
    return replace(beam, q1=beam.q1 * scale, q2=beam.q2 * scale, medium_index=n_out)


def _axis_geometry(q: complex, lam: float) -> tuple[float, Curvature]:
    mag2 = q.real * q.real + q.imag * q.imag
    w = math.sqrt(lam * mag2 / (math.pi * q.imag))
    R: Curvature = FLAT if q.real == 0 else mag2 / q.real
    return w, R


def beam_geometry(beam: AstigmaticBeam) -> BeamGeometry:
    """Spot semi-axes (1/e^2 radii) and wavefront radii of curvature.

    A radius is reported as :data:`FLAT` at a waist.
    """
    lam = beam.effective_wavelength
    w1, R1 = _axis_geometry(beam.q1, lam)
    w2, R2 = _axis_geometry(beam.q2, lam)
    return BeamGeometry(w1, w2, R1, R2)


def peak_intensity(beam: AstigmaticBeam) -> float:
    """On-axis irradiance [W/m^2]."""
    z1, z2 = beam.rayleigh_distances
    return 2.0 * beam.power * math.sqrt(z1 * z2) / (beam.effective_wavelength * abs(beam.q1 * beam.q2))


def intensity_at(beam: AstigmaticBeam, x, y):
    """Irradiance [W/m^2] at transverse position(s) ``(x, y)``.

    Accepts scalars or broadcastable arrays.
    """
    w1, w2, _, _ = beam_geometry(beam)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = peak_intensity(beam) * np.exp(-2.0 * (x / w1) ** 2 - 2.0 * (y / w2) ** 2)
    return out[()] if out.ndim == 0 else out


def fresnel_t(pair: InterfacePair) -> float:
    """Normal-incidence power transmission of a flat interface."""
    n1, n2 = pair.n1, pair.n2
    return 4.0 * n1 * n2 / (n1 + n2) ** 2
