"""Inverse design and tolerance analysis of a single diode light path.

Every evaluation goes diode -> :func:`build_unit_stack` -> :func:`trace_stack`
-> :func:`coupled_power`.  On top of that sit a power-vs-pathway curve, a
bisection for the longest admissible pathway, an exhaustive corner sweep
over the (min, nominal, max) parameter triples and a seeded Monte Carlo.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .coupling import Alignment, FiberSpec, coupled_power
from .errors import ConstraintError, DomainError, NoFeasibleDesign
from .stack import CHOICES, Choice, LaserDiodeSpec, build_unit_stack, trace_stack

MAX_CURVE_PATHWAY = 20e-3
SEARCH_LIMIT = 100e-3
BISECTION_TOL = 1e-6
#: Returned by :func:`max_pathway` when the requirement still holds at the
#: search limit (reported as ">100 mm").
BEYOND_SEARCH_LIMIT = math.inf


@dataclass(frozen=True)
class Requirement:
    label: str
    min_power: float

    def __post_init__(self):
        if not self.min_power > 0:
            raise DomainError(f"min_power must be > 0, got {self.min_power!r}")


BLUE_REQUIREMENT = Requirement("450 nm", 100e-6)
RED_REQUIREMENT = Requirement("638 nm", 1e-3)


def requirement_for(ld: LaserDiodeSpec) -> Requirement:
    """Default power requirement for a diode, chosen by color."""
    return BLUE_REQUIREMENT if ld.vacuum_wavelength < 550e-9 else RED_REQUIREMENT


@dataclass(frozen=True)
class Scenario:
    divergence: tuple[Choice, Choice] = ("nominal", "nominal")
    offset: Alignment = Alignment()
    fiber: FiberSpec = FiberSpec()

    def __post_init__(self):
        for c in self.divergence:
            if c not in CHOICES:
                raise DomainError(f"divergence choice must be one of {CHOICES}, got {c!r}")


@dataclass
class SweepReport:
    pathway: float
    corners: list[dict]
    worst: dict
    best: dict
    margins: dict[str, float]


@dataclass
class MonteCarloReport:
    pathway: float
    n: int
    seed: int
    samples: np.ndarray  # columns: theta1, theta2, dx, dy, power
    percentiles: dict[str, float]
    pass_probability: dict[str, float]
    columns: tuple[str, ...] = field(default=("theta1", "theta2", "dx", "dy", "power"))


def _power(ld, pathway, beam, fiber, align, stack_kwargs):
    stack = build_unit_stack(ld, pathway, **stack_kwargs)
    face = trace_stack(beam, stack)
    return coupled_power(face, fiber, align, source_power=ld.power_at_drive).coupled_power


def coupled_power_at(ld: LaserDiodeSpec, scenario: Scenario, pathway: float, **stack_kwargs) -> float:
    """Coupled power [W] for one pathway under ``scenario``."""
    beam = ld.beam(*scenario.divergence)
    return _power(ld, pathway, beam, scenario.fiber, scenario.offset, stack_kwargs)


def power_vs_pathway(ld, scenario, pathway_range, steps, **stack_kwargs):
    """Coupled power on an evenly spaced pathway grid.

    Returns ``(pathways, powers)`` as arrays in ascending pathway order.
    """
    lo, hi = sorted(pathway_range)
    if steps < 2:
        raise DomainError("steps must be >= 2")
    if lo < ld.min_pathway * (1 - 1e-12) or hi > MAX_CURVE_PATHWAY * (1 + 1e-12):
        raise ConstraintError(
            f"pathway range must lie within [min_pathway={ld.min_pathway * 1e3:.4g} mm, "
            f"{MAX_CURVE_PATHWAY * 1e3:.0f} mm]"
        )
    pathways = np.linspace(lo, hi, int(steps))
    powers = np.array([coupled_power_at(ld, scenario, float(p), **stack_kwargs) for p in pathways])
    return pathways, powers


def max_pathway(ld: LaserDiodeSpec, scenario: Scenario, req: Requirement, **stack_kwargs) -> float:
    """Longest pathway [m] whose coupled power still meets ``req``.

    Bisects to a bracket narrower than 1 um and returns its lower end.

    Raises
    ------
    NoFeasibleDesign
        If even the mechanically shortest pathway falls short.
    """
    def p(x):
        return coupled_power_at(ld, scenario, x, **stack_kwargs)

    if p(ld.min_pathway) < req.min_power:
        raise NoFeasibleDesign(
            f"{ld.label}: {p(ld.min_pathway) * 1e3:.4g} mW at min_pathway is below "
            f"{req.label} requirement of {req.min_power * 1e3:.4g} mW"
        )
    beam = ld.beam(*scenario.divergence)
    lo = max(ld.min_pathway, 100 * max(beam.rayleigh_distances))
    if p(lo) < req.min_power:
        lo = ld.min_pathway

    hi = 1e-3
    while True:
        if hi > lo and p(hi) < req.min_power:
            break
        if hi >= SEARCH_LIMIT:
            return BEYOND_SEARCH_LIMIT
        if hi > lo:
            lo = hi
        hi = min(2 * hi, SEARCH_LIMIT)

    while hi - lo >= BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if p(mid) >= req.min_power:
            lo = mid
        else:
            hi = mid
    return lo


def corner_sweep(
    ld: LaserDiodeSpec,
    pathway: float,
    fiber: FiberSpec = FiberSpec(),
    requirements: Optional[Sequence[Requirement]] = None,
    **stack_kwargs,
) -> SweepReport:
    """Coupled power at every (divergence, offset) corner of the source data.

    Each divergence axis takes its min/nominal/max value and each offset
    axis takes 0, the nominal bound or the maximal bound: 81 corners.
    """
    if requirements is None:
        requirements = [requirement_for(ld)]
    offset_levels = {"zero": 0.0, "nominal": ld.offset("nominal"), "max": ld.offset("max")}
    corners = []
    for c1, c2, ox, oy in itertools.product(CHOICES, CHOICES, offset_levels, offset_levels):
        beam = ld.beam(c1, c2)
        align = Alignment(offset_levels[ox], offset_levels[oy])
        power = _power(ld, pathway, beam, fiber, align, stack_kwargs)
        corners.append({
            "theta1": c1, "theta2": c2, "offset_x": ox, "offset_y": oy,
            "theta1_rad": ld.theta(1, c1), "theta2_rad": ld.theta(2, c2),
            "dx_m": align.dx, "dy_m": align.dy, "power_w": power,
        })
    worst = min(corners, key=lambda c: c["power_w"])
    best = max(corners, key=lambda c: c["power_w"])
    margins = {r.label: worst["power_w"] - r.min_power for r in requirements}
    return SweepReport(pathway, corners, worst, best, margins)


def _draw(ld, seed, index):
    rng = np.random.default_rng([seed, index])
    t1 = rng.uniform(ld.theta_fwhm_1[0], ld.theta_fwhm_1[2])
    t2 = rng.uniform(ld.theta_fwhm_2[0], ld.theta_fwhm_2[2])
    omax = ld.offset("max")
    dx, dy = rng.uniform(-omax, omax, size=2)
    return t1, t2, dx, dy


def tolerance_monte_carlo(
    ld: LaserDiodeSpec,
    pathway: float,
    fiber: FiberSpec = FiberSpec(),
    n: int = 1000,
    seed: int = 0,
    requirements: Optional[Sequence[Requirement]] = None,
    jobs: int = 1,
    **stack_kwargs,
) -> MonteCarloReport:
    """Coupled-power distribution under uniformly drawn source tolerances.

    Draw ``i`` uses its own generator seeded with ``(seed, i)``, so the
    samples do not depend on ``jobs`` or on execution order.
    """
    if n < 100:
        raise DomainError("Monte Carlo needs n >= 100")
    if requirements is None:
        requirements = [requirement_for(ld)]
    stack = build_unit_stack(ld, pathway, **stack_kwargs)

    def one(i):
        t1, t2, dx, dy = _draw(ld, seed, i)
        face = trace_stack(ld.beam_with_angles(t1, t2), stack)
        p = coupled_power(face, fiber, Alignment(dx, dy)).coupled_power
        return t1, t2, dx, dy, p

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, range(n)))
    else:
        rows = [one(i) for i in range(n)]
    samples = np.array(rows, dtype=float)
    powers = samples[:, 4]
    p5, p50, p95 = np.percentile(powers, [5, 50, 95])
    percentiles = {"p5": float(p5), "p50": float(p50), "p95": float(p95),
                   "min": float(powers.min()), "max": float(powers.max())}
    passes = {r.label: float(np.mean(powers >= r.min_power)) for r in requirements}
    return MonteCarloReport(pathway, n, seed, samples, percentiles, passes)
