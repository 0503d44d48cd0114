"""Command-line front end: ``dualbeam <command> [options]``.

Exit status: 0 success, 2 usage or schema error, 3 infeasible design,
4 numerical non-convergence, 5 drive-current cap violation.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import design, profile, protocol, spikes
from .errors import (
    ConstraintError,
    DomainError,
    EstimationError,
    NoFeasibleDesign,
    QuadratureError,
    SafetyError,
)
from .scenario import build_objects, load_scenario_file, resolve

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_SAFETY = 0, 2, 3, 4, 5


def _emit(text: str, path) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _num(v) -> str:
    """Shortest round-tripping text of a float (numpy scalars included)."""
    return repr(float(v))


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _resolved(args, extra=None) -> dict:
    doc = load_scenario_file(args.scenario) if args.scenario else {}
    overrides = {
        "laser": args.preset,
        "requirement.min_power_mw": getattr(args, "min_power_mw", None),
        "seed": getattr(args, "seed", None),
    }
    if args.offset_um is not None:
        overrides["scenario.offset_um"] = list(args.offset_um)
    if args.divergence is not None:
        overrides["scenario.divergence"] = list(args.divergence)
    if args.core_radius_um is not None:
        overrides["fiber.core_radius_um"] = args.core_radius_um
    if args.na is not None:
        overrides["fiber.acceptance_na"] = args.na
    overrides.update(extra or {})
    return resolve(doc, overrides)


# -- design commands -------------------------------------------------------

def cmd_curve(args):
    res = _resolved(args, {"sweep.from_mm": args.from_mm, "sweep.to_mm": args.to_mm, "sweep.steps": args.steps})
    ld, scenario, _, kw = build_objects(res)
    sw = res["sweep"]
    xs, ps = design.power_vs_pathway(ld, scenario, (sw["from_mm"] * 1e-3, sw["to_mm"] * 1e-3), sw["steps"], **kw)
    lines = ["pathway_mm,power_mW\n"] + [f"{_num(x * 1e3)},{_num(p * 1e3)}\n" for x, p in zip(xs, ps)]
    _emit("".join(lines), args.out)


def cmd_pathway(args):
    res = _resolved(args)
    ld, scenario, req, kw = build_objects(res)
    length = design.max_pathway(ld, scenario, req, **kw)
    report = {"scenario": res, "min_pathway_mm": ld.min_pathway * 1e3,
              "requirement_mW": req.min_power * 1e3}
    if length == design.BEYOND_SEARCH_LIMIT:
        report.update(pathway_mm=">100 mm", margin=None, power_mW=None)
    else:
        power = design.coupled_power_at(ld, scenario, length, **kw)
        report.update(pathway_mm=length * 1e3, margin=(length - ld.min_pathway) * 1e3,
                      power_mW=power * 1e3)
    _emit(_json(report), args.out)


def _corner(c: dict) -> dict:
    return {
        "theta1": c["theta1"], "theta2": c["theta2"], "offset_x": c["offset_x"], "offset_y": c["offset_y"],
        "theta1_deg": float(np.degrees(c["theta1_rad"])), "theta2_deg": float(np.degrees(c["theta2_rad"])),
        "dx_um": c["dx_m"] * 1e6, "dy_um": c["dy_m"] * 1e6, "power_mW": c["power_w"] * 1e3,
    }


def cmd_corners(args):
    res = _resolved(args, {"corners.pathway_mm": args.pathway_mm})
    ld, scenario, req, kw = build_objects(res)
    rep = design.corner_sweep(ld, res["corners"]["pathway_mm"] * 1e-3, scenario.fiber, [req], **kw)
    out = {
        "scenario": res,
        "pathway_mm": rep.pathway * 1e3,
        "n_corners": len(rep.corners),
        "corners": [_corner(c) for c in rep.corners],
        "worst": _corner(rep.worst),
        "best": _corner(rep.best),
        "margin_mW": {k: v * 1e3 for k, v in rep.margins.items()},
    }
    _emit(_json(out), args.out)


def cmd_montecarlo(args):
    res = _resolved(args, {"montecarlo.n": args.n, "montecarlo.pathway_mm": args.pathway_mm})
    ld, scenario, req, kw = build_objects(res)
    mc = res["montecarlo"]
    rep = design.tolerance_monte_carlo(ld, mc["pathway_mm"] * 1e-3, scenario.fiber, mc["n"], res["seed"],
                                       [req], jobs=args.jobs, **kw)
    out = {
        "scenario": res,
        "pathway_mm": rep.pathway * 1e3,
        "n": rep.n,
        "seed": rep.seed,
        "percentiles_mW": {k: v * 1e3 for k, v in rep.percentiles.items()},
        "pass_probability": rep.pass_probability,
    }
    _emit(_json(out), args.out)
    if args.samples_csv:
        rows = ["draw,theta1_deg,theta2_deg,dx_um,dy_um,power_mW\n"]
        for i, (t1, t2, dx, dy, p) in enumerate(rep.samples):
            rows.append(",".join([str(i)] + [_num(v) for v in (np.degrees(t1), np.degrees(t2), dx * 1e6, dy * 1e6, p * 1e3)]) + "\n")
        Path(args.samples_csv).write_text("".join(rows))


# -- analysis commands -----------------------------------------------------

def cmd_overlap(args):
    a = profile.load_image(args.image_a, args.pitch)
    b = profile.load_image(args.image_b, args.pitch)
    ma = profile.illuminated_mask(a, args.noise_mean, args.noise_sd, args.k)
    mb = profile.illuminated_mask(b, args.noise_mean, args.noise_sd, args.k)
    if args.mask_a:
        profile.write_mask_pgm(args.mask_a, ma)
    if args.mask_b:
        profile.write_mask_pgm(args.mask_b, mb)
    inputs = {"command": "overlap", "image_a": args.image_a, "image_b": args.image_b, "pitch": args.pitch,
              "k": args.k, "noise_mean": args.noise_mean, "noise_sd": args.noise_sd}
    _emit(_json({"scenario": inputs, "iou": profile.iou(ma, mb), "area_a": ma.area, "area_b": mb.area,
                 "k": args.k}), args.out)


def cmd_protocol(args):
    if args.kind == "square":
        train = protocol.square_train(args.period_s, args.duty, args.ma, args.cycles)
    elif args.kind == "chirp":
        train = protocol.chirp_train(protocol.ChirpSpec(args.f0, args.f_end, args.duration_s, args.duty, args.ma))
    else:
        train = protocol.ladder_train(args.i_max, args.pulse_s, args.period_s, args.per_rung,
                                      args.multiples or protocol.DEFAULT_MULTIPLES)
    _emit(protocol.format_train_csv(train), args.out)
    if args.render is not None:
        if not args.render_out:
            raise DomainError("--render needs --render-out")
        protocol.write_samples(args.render_out, protocol.render(train, args.render), args.render_format)


def cmd_tag(args):
    pulses = protocol.read_train_csv(args.pulses)
    sp = spikes.read_spikes(args.spikes, tuple(args.session) if args.session else None)
    epoch = tuple(args.epoch) if args.epoch else sp.session_span
    tag = spikes.poisson_tag(sp, pulses, epoch, args.alpha)
    inputs = {"command": "tag", "spikes": args.spikes, "pulses": args.pulses,
              "session": list(sp.session_span), "epoch": list(epoch), "alpha": args.alpha,
              "psth_window": list(args.psth_window), "bin": args.bin}
    out = {
        "scenario": inputs,
        "class": tag.klass, "p_value": tag.p_value, "r_in": tag.r_in, "r_out": tag.r_out,
        "eta": tag.eta, "k_in": tag.k_in, "expected_in": tag.expected_in,
        "alpha": args.alpha, "epoch": list(epoch), "n_pulses": len(pulses),
        "valid_unit": spikes.validity_filter(tag.r_out),
    }
    _emit(_json(out), args.out)
    if args.psth_out:
        h = spikes.psth(sp, pulses.onsets, tuple(args.psth_window), args.bin)
        buf = io.StringIO()
        buf.write("bin_start_s,bin_end_s,count,rate_hz\n")
        for lo, hi, c, r in zip(h.bin_edges[:-1], h.bin_edges[1:], h.counts, h.rate):
            buf.write(f"{_num(lo)},{_num(hi)},{int(c)},{_num(r)}\n")
        Path(args.psth_out).write_text(buf.getvalue())


# -- parser ----------------------------------------------------------------

def _design_parent():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--scenario", help="YAML/JSON scenario file")
    p.add_argument("--preset", choices=["blue-PL450B", "red-HL63603TG"])
    p.add_argument("--min-power-mw", type=float)
    p.add_argument("--offset-um", type=float, nargs=2, metavar=("DX", "DY"))
    p.add_argument("--divergence", nargs=2, choices=["min", "nominal", "max"])
    p.add_argument("--core-radius-um", type=float)
    p.add_argument("--na", type=float, help="fiber NA; enables acceptance-cone clipping")
    p.add_argument("--out", help="output file (default stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualbeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    dp = _design_parent()

    p = sub.add_parser("curve", parents=[dp], help="coupled power vs pathway (CSV)")
    p.add_argument("--from-mm", type=float)
    p.add_argument("--to-mm", type=float)
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("pathway", parents=[dp], help="longest pathway meeting the requirement (JSON)")
    p.set_defaults(func=cmd_pathway)

    p = sub.add_parser("corners", parents=[dp], help="81-corner tolerance sweep (JSON)")
    p.add_argument("--pathway-mm", type=float)
    p.set_defaults(func=cmd_corners)

    p = sub.add_parser("montecarlo", parents=[dp], help="Monte Carlo tolerance analysis (JSON)")
    p.add_argument("--pathway-mm", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, help="defaults to the scenario seed, then $DUALBEAM_SEED, then 0")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--samples-csv")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("overlap", help="illuminated-mask overlap of two images (JSON)")
    p.add_argument("image_a")
    p.add_argument("image_b")
    p.add_argument("--pitch", type=float, default=1.0)
    p.add_argument("--k", type=float, default=3.0)
    p.add_argument("--noise-mean", type=float)
    p.add_argument("--noise-sd", type=float)
    p.add_argument("--mask-a")
    p.add_argument("--mask-b")
    p.add_argument("--out")
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("protocol", help="stimulation pulse trains (CSV)")
    p.add_argument("kind", choices=["square", "chirp", "ladder"])
    p.add_argument("--period-s", type=float, default=1.0)
    p.add_argument("--duty", type=float, default=0.5)
    p.add_argument("--ma", type=float, default=protocol.MAX_CURRENT_MA)
    p.add_argument("--cycles", type=int, default=1)
    p.add_argument("--f0", type=float, default=0.0)
    p.add_argument("--f-end", type=float, default=100.0)
    p.add_argument("--duration-s", type=float, default=20.0)
    p.add_argument("--i-max", type=float)
    p.add_argument("--multiples", type=lambda s: [float(v) for v in s.split(",")])
    p.add_argument("--pulse-s", type=float, default=0.05)
    p.add_argument("--per-rung", type=int, default=10)
    p.add_argument("--render", type=float, metavar="HZ")
    p.add_argument("--render-out")
    p.add_argument("--render-format", choices=["f32", "csv"], default="f32")
    p.add_argument("--out")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("tag", help="optogenetic tagging by Poisson test (JSON + PSTH CSV)")
    p.add_argument("--spikes", required=True, help="spike times, one per line [s]")
    p.add_argument("--pulses", required=True, help="pulse train CSV")
    p.add_argument("--session", type=float, nargs=2, metavar=("START", "END"))
    p.add_argument("--epoch", type=float, nargs=2, metavar=("START", "END"))
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--psth-window", type=float, nargs=2, default=(-0.1, 0.2), metavar=("PRE", "POST"))
    p.add_argument("--bin", type=float, default=0.01)
    p.add_argument("--psth-out")
    p.add_argument("--seed", type=int, help="accepted for interface symmetry; tagging is deterministic")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tag)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "protocol" and args.kind == "ladder" and args.i_max is None:
        parser.error("protocol ladder requires --i-max")
    try:
        args.func(args)
    except SafetyError as exc:
        print(f"dualbeam: safety: {exc}", file=sys.stderr)
        return EXIT_SAFETY
    except NoFeasibleDesign as exc:
        print(f"dualbeam: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except QuadratureError as exc:
        print(f"dualbeam: numerical: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, ConstraintError, EstimationError, OSError) as exc:
        print(f"dualbeam: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
