"""Scenario files: YAML/JSON documents that configure the design commands.

Surface units are mm, um, mW and degrees; everything is converted to SI
here and nowhere else.  Unknown keys are rejected by the schema.

Example::

    laser: blue-PL450B            # or a full mapping, see LASER_SCHEMA
    fiber: {core_radius_um: 25, core_index: 1.5, acceptance_na: null}
    stack: {glue_index: 1.54, glass_index: 1.5, window_thickness_mm: 0.25}
    scenario: {divergence: [nominal, nominal], offset_um: [0, 0]}
    requirement: {label: blue, min_power_mw: 0.1}
    sweep: {from_mm: 2.9, to_mm: 20, steps: 50}
    montecarlo: {n: 1000, pathway_mm: 2.9}
    seed: 7
"""

from __future__ import annotations

import copy
import math
import os
from pathlib import Path

import jsonschema
import yaml

from .coupling import Alignment, FiberSpec
from .design import Requirement, Scenario, requirement_for
from .errors import DomainError
from .stack import PRESETS, LaserDiodeSpec

SEED_ENV = "DUALBEAM_SEED"

_num = {"type": "number"}
_triple = {"type": "array", "items": _num, "minItems": 3, "maxItems": 3}
_choice = {"enum": ["min", "nominal", "max"]}

LASER_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["label", "wavelength_nm", "power_mw", "theta1_deg", "theta2_deg",
                 "offset_um", "can_window", "min_pathway_mm"],
    "properties": {
        "label": {"type": "string"},
        "wavelength_nm": _num,
        "power_mw": _num,
        "theta1_deg": _triple,
        "theta2_deg": _triple,
        "offset_um": _triple,
        "can_window": {"type": "boolean"},
        "min_pathway_mm": _num,
        "msq": _num,
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "laser": {"oneOf": [{"enum": sorted(PRESETS)}, LASER_SCHEMA]},
        "fiber": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "core_radius_um": _num, "core_index": _num,
                "acceptance_na": {"type": ["number", "null"]},
            },
        },
        "stack": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "glue_index": _num, "glass_index": _num, "fiber_index": _num,
                "window_thickness_mm": _num, "mirror": {"type": "boolean"},
            },
        },
        "scenario": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "divergence": {"type": "array", "items": _choice, "minItems": 2, "maxItems": 2},
                "offset_um": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
            },
        },
        "requirement": {
            "type": "object", "additionalProperties": False,
            "properties": {"label": {"type": "string"}, "min_power_mw": _num},
        },
        "sweep": {
            "type": "object", "additionalProperties": False,
            "properties": {"from_mm": _num, "to_mm": _num, "steps": {"type": "integer"}},
        },
        "corners": {
            "type": "object", "additionalProperties": False,
            "properties": {"pathway_mm": _num},
        },
        "montecarlo": {
            "type": "object", "additionalProperties": False,
            "properties": {"n": {"type": "integer"}, "pathway_mm": _num},
        },
        "seed": {"type": "integer"},
    },
}


class SchemaError(DomainError):
    pass


def load_scenario_file(path) -> dict:
    doc = yaml.safe_load(Path(path).read_text()) or {}
    validate(doc)
    return doc


def validate(doc: dict) -> None:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"scenario file invalid at {where}: {exc.message}") from None


def preset_document(ld: LaserDiodeSpec) -> dict:
    return {
        "label": ld.label,
        "wavelength_nm": ld.vacuum_wavelength * 1e9,
        "power_mw": ld.power_at_drive * 1e3,
        "theta1_deg": [math.degrees(v) for v in ld.theta_fwhm_1],
        "theta2_deg": [math.degrees(v) for v in ld.theta_fwhm_2],
        "offset_um": [v * 1e6 for v in ld.offset_bound],
        "can_window": ld.can_window,
        "min_pathway_mm": ld.min_pathway * 1e3,
        "msq": ld.msq,
    }


def resolve(doc: dict, overrides: dict) -> dict:
    """Merge CLI overrides into a scenario document and fill every default.

    The result is the fully explicit document embedded in reports.
    """
    doc = copy.deepcopy(doc)
    for dotted, value in overrides.items():
        if value is None:
            continue
        *parents, leaf = dotted.split(".")
        node = doc
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    validate(doc)

    laser = doc.get("laser", "blue-PL450B")
    preset = laser if isinstance(laser, str) else None
    laser_doc = preset_document(PRESETS[laser]) if preset else dict(laser)
    laser_doc.setdefault("msq", 1.3)
    ld = laser_from_document(laser_doc)
    req = requirement_for(ld)

    seed = doc.get("seed")
    if seed is None:
        env = os.environ.get(SEED_ENV)
        seed = int(env) if env not in (None, "") else 0

    fiber = {"core_radius_um": 25.0, "core_index": 1.5, "acceptance_na": None, **doc.get("fiber", {})}
    stack = {"glue_index": 1.54, "glass_index": 1.5, "fiber_index": 1.5,
             "window_thickness_mm": 0.25, "mirror": True, **doc.get("stack", {})}
    scenario = {"divergence": ["nominal", "nominal"], "offset_um": [0.0, 0.0], **doc.get("scenario", {})}
    requirement = {"label": req.label, "min_power_mw": req.min_power * 1e3, **doc.get("requirement", {})}
    sweep = {"from_mm": laser_doc["min_pathway_mm"], "to_mm": 20.0, "steps": 50, **doc.get("sweep", {})}
    corners = {"pathway_mm": laser_doc["min_pathway_mm"], **doc.get("corners", {})}
    montecarlo = {"n": 1000, "pathway_mm": laser_doc["min_pathway_mm"], **doc.get("montecarlo", {})}
    return {
        "laser": laser_doc,
        "preset": preset,
        "fiber": fiber,
        "stack": stack,
        "scenario": scenario,
        "requirement": requirement,
        "sweep": sweep,
        "corners": corners,
        "montecarlo": montecarlo,
        "seed": int(seed),
    }


def laser_from_document(d: dict) -> LaserDiodeSpec:
    return LaserDiodeSpec(
        label=d["label"],
        vacuum_wavelength=d["wavelength_nm"] * 1e-9,
        power_at_drive=d["power_mw"] * 1e-3,
        theta_fwhm_1=tuple(math.radians(v) for v in d["theta1_deg"]),
        theta_fwhm_2=tuple(math.radians(v) for v in d["theta2_deg"]),
        offset_bound=tuple(v * 1e-6 for v in d["offset_um"]),
        can_window=d["can_window"],
        min_pathway=d["min_pathway_mm"] * 1e-3,
        msq=d.get("msq", 1.3),
    )


def build_objects(resolved: dict):
    """``(ld, scenario, requirement, stack_kwargs)`` from a resolved document."""
    if resolved["preset"]:
        ld = PRESETS[resolved["preset"]]
    else:
        ld = laser_from_document(resolved["laser"])
    f = resolved["fiber"]
    fiber = FiberSpec(f["core_radius_um"] * 1e-6, f["core_index"], f["acceptance_na"])
    s = resolved["scenario"]
    scenario = Scenario(tuple(s["divergence"]), Alignment(*(v * 1e-6 for v in s["offset_um"])), fiber)
    r = resolved["requirement"]
    req = Requirement(r["label"], r["min_power_mw"] * 1e-3)
    st = resolved["stack"]
    stack_kwargs = {
        "glue_index": st["glue_index"], "glass_index": st["glass_index"],
        "fiber_index": st["fiber_index"], "window_thickness": st["window_thickness_mm"] * 1e-3,
        "mirror": st["mirror"],
    }
    return ld, scenario, req, stack_kwargs
