"""Command-line front end: catalog listing, verification, flows, builders.

Exit codes follow one contract everywhere: 0 means every requested check
passed, 1 means a numerical check or integration failed, 2 means the request
itself was bad (unknown model, malformed arguments, builder preconditions).
All randomness descends from --seed through the documented per-check
splitting rule, so repeated runs emit byte-identical reports.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys

import numpy as np

from . import critical, flow, jets, registry, verifier
from .blowup import blowup_d4
from .errors import HamflowError, ImmediateExit, StiffFlow
from .handles import attach_2handle
from .model import HamiltonianModel, enumerate_decompositions
from .planar import disc_bundle_over_surface, free_action_planar


def _canonical(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        print(text)


def _render(args, lines, payload, header, rows) -> None:
    if args.format == "json":
        _emit(args, _canonical(_json_safe(payload)))
    elif args.format == "csv":
        _emit(args, _csv_text(header, rows))
    else:
        _emit(args, "\n".join(lines))


def _tolerances(items):
    tols = dict(verifier.DEFAULT_TOLERANCES)
    for item in items:
        if "=" in item:
            name, _, raw = item.partition("=")
            name = name.strip()
            if name not in tols:
                known = ", ".join(verifier.CHECK_IDS)
                raise ValueError(f"unknown check {name!r}; known checks: {known}")
            tols[name] = float(raw)
        else:
            value = float(item)
            tols = {name: value for name in tols}
    return tols


def _run_config(args) -> verifier.RunConfig:
    return verifier.RunConfig(
        seed=args.seed, samples=args.samples, tolerances=_tolerances(args.tol)
    )


def _report_rows(rep):
    rows = []
    for entry in rep.to_dict()["checks"]:
        if "skipped" in entry:
            status = "skipped"
        else:
            status = "passed" if entry["passed"] else "failed"
        rows.append((entry["id"], f"{entry['max_residual']:.6e}", status, entry.get("note", "")))
    rows.append(("overall", "", "passed" if rep.overall else "failed", ""))
    return rows


def _verified_report(model: HamiltonianModel, config: verifier.RunConfig):
    rep = verifier.run_all(model, config)
    return dataclasses.replace(rep, critical=critical.critical_surface_census(model))


# ----------------------------------------------------------------------
# subcommands


def cmd_list(args) -> int:
    catalog = [
        {"name": e.name, "signature": e.signature, "summary": e.summary}
        for e in registry.CATALOG.values()
    ]
    zoo = list(registry.ZOO)
    lines = ["catalog:"]
    lines += [f"  {e['signature']:34s} {e['summary']}" for e in catalog]
    lines.append("standard examples:")
    lines += [f"  {spec}" for spec in zoo]
    rows = [(spec, registry.CATALOG[spec.split("(", 1)[0]].summary) for spec in zoo]
    payload = {"catalog": catalog, "zoo": zoo}
    _render(args, lines, payload, ("spec", "summary"), rows)
    return 0


def cmd_verify(args) -> int:
    model = registry.build(args.model)
    rep = _verified_report(model, _run_config(args))
    _render(args, rep.lines(), rep.to_dict(), ("check", "max_residual", "status", "note"), _report_rows(rep))
    return 0 if rep.overall else 1


def cmd_flow(args) -> int:
    model = registry.build(args.model)
    if not 0 <= args.chart < len(model.charts):
        raise ValueError(f"chart index {args.chart} out of range for {model.name}")
    cd = model.charts[args.chart]
    start = np.array([float(tok) for tok in args.start.split(",")], dtype=float)
    if start.shape[0] != cd.chart.dim:
        raise ValueError(
            f"start has {start.shape[0]} coordinates, chart {cd.chart.name!r} has {cd.chart.dim}"
        )
    start = cd.chart.wrap(start)
    if not bool(cd.chart.contains(start[None], slack=1e-9)[0]):
        raise ValueError(f"start lies outside the domain of chart {cd.chart.name!r}")

    if args.classify_orbit:
        oc = flow.classify_orbit(model, args.chart, start)
        payload = {
            "kind": oc.kind,
            "detail": oc.detail,
            "up_termination": None if oc.upward is None else oc.upward.termination,
            "down_termination": None if oc.downward is None else oc.downward.termination,
        }
        lines = [f"orbit kind: {oc.kind}" + (f" ({oc.detail})" if oc.detail else "")]
        _render(args, lines, payload, ("field", "value"), sorted(payload.items()))
        return 0

    direction = 1 if args.direction == "up" else -1
    try:
        res = flow.integrate(model, args.chart, start, direction=direction, max_time=args.max_time)
    except ImmediateExit as exc:
        payload = {"termination": "immediate_exit", "note": str(exc)}
        _render(
            args,
            [f"immediate exit: {exc}"],
            payload,
            ("field", "value"),
            sorted(payload.items()),
        )
        return 0
    except StiffFlow as exc:
        print(f"error: StiffFlow: {exc}", file=sys.stderr)
        return 1

    h0 = float(res.h_values[0])
    h1 = float(res.h_values[-1])
    payload = {
        "termination": res.termination,
        "direction": res.direction,
        "steps": int(len(res.times)),
        "t_final": float(res.times[-1]),
        "h_start": h0,
        "h_end": h1,
        "monotone": bool(res.monotone),
        "end_chart": int(res.end_chart),
        "end_point": [float(v) for v in res.end_point],
    }
    if args.trajectory:
        dim = res.points.shape[1]
        header = ["t", "chart"] + [f"x{j}" for j in range(dim)] + ["H"]
        with open(args.trajectory, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for t, ci, p, h in zip(res.times, res.chart_indices, res.points, res.h_values):
                writer.writerow([f"{t:.12g}", ci] + [f"{v:.12g}" for v in p] + [f"{h:.12g}"])
    lines = [
        f"termination: {res.termination} after {len(res.times)} points, t={res.times[-1]:.6g}",
        f"H: {h0:.6g} -> {h1:.6g} ({'monotone' if res.monotone else 'not monotone'})",
        f"end point (chart {res.end_chart}): {np.array2string(res.end_point, precision=6)}",
    ]
    _render(args, lines, payload, ("field", "value"), sorted((k, str(v)) for k, v in payload.items()))
    return 0


def cmd_legendrian(args) -> int:
    model = registry.build(args.model)
    found = flow.detect_legendrian_set(model, seed=args.seed, samples=args.samples)
    components = []
    for comp in found.components:
        cd = model.charts[comp.chart_index]
        h_res = float(
            np.abs(cd.hamiltonian(jets.seed(comp.representative[None, :], order=0)).value[0])
        )
        components.append(
            {
                "chart_index": comp.chart_index,
                "representative": [float(v) for v in comp.representative],
                "H_residual": h_res,
                "stabilizer": flow.stabilizer_of(model, comp.chart_index, comp.representative),
            }
        )
    payload = {"count": len(components), "components": components}
    lines = [f"{len(components)} Legendrian orbit component(s)"]
    rows = []
    for i, comp in enumerate(components):
        lines.append(
            f"  [{i}] chart {comp['chart_index']}, stabilizer {comp['stabilizer']}, "
            f"|H| = {comp['H_residual']:.3e}, at {comp['representative']}"
        )
        rows.append(
            (
                i,
                comp["chart_index"],
                comp["stabilizer"],
                f"{comp['H_residual']:.6e}",
                " ".join(f"{v:.9g}" for v in comp["representative"]),
            )
        )
    _render(args, lines, payload, ("component", "chart", "stabilizer", "H_residual", "representative"), rows)
    return 0


def _parse_holes(raw: str | None):
    if not raw:
        return None
    centers = []
    for part in raw.split(";"):
        toks = [t for t in part.split(",") if t.strip()]
        if len(toks) != 2:
            raise ValueError(f"hole centers need two coordinates, got {part!r}")
        centers.append((float(toks[0]), float(toks[1])))
    return tuple(centers)


def cmd_build(args) -> int:
    if args.builder == "free-action":
        model = free_action_planar(args.k, holes=_parse_holes(args.holes))
    elif args.builder == "disc-bundle":
        model = disc_bundle_over_surface(_parse_holes(args.holes) or (), collar=args.collar)
    elif args.builder == "attach-2handle":
        model = attach_2handle(registry.build(args.base), None, eps=args.eps, kappa=args.kappa)
    else:
        model = blowup_d4(args.weights[0], args.weights[1], size=args.size)

    rep = _verified_report(model, _run_config(args))
    descriptor = {
        "name": model.name,
        "params": _json_safe(model.params),
        "charts": [cd.chart.name for cd in model.charts],
        "meta": _json_safe(model.meta),
    }
    payload = {"model": descriptor, "report": rep.to_dict()}
    lines = [f"built {model.name} with charts {', '.join(descriptor['charts'])}"]
    weight = model.meta.get("sphere_weight")
    if weight is not None:
        if weight == 0:
            lines.append("exceptional sphere: fixed pointwise")
        else:
            lines.append(f"exceptional sphere: orbit stabilizer order {weight}")
    lines += rep.lines()
    _render(args, lines, payload, ("check", "max_residual", "status", "note"), _report_rows(rep))
    return 0 if rep.overall else 1


def cmd_decompositions(args) -> int:
    decs = enumerate_decompositions(args.genus)
    lines = [f"(h={d.h},k={d.k})" for d in decs]
    payload = [{"h": d.h, "k": d.k} for d in decs]
    _render(args, lines, payload, ("h", "k"), [(d.h, d.k) for d in decs])
    return 0


# ----------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed for all sampling")
    p.add_argument("--samples", type=int, default=500, help="sample count per check")
    p.add_argument(
        "--tol",
        action="append",
        default=[],
        metavar="[CHECK=]VALUE",
        help="override one check tolerance (repeatable) or all of them at once",
    )
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--output", metavar="PATH", default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamflow",
        description="Verification and flow experiments for rotation-invariant Hamiltonian blocks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", help="show the model catalog and the standard example list")
    _add_common(p)
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("verify", help="run the full identity suite on one model")
    p.add_argument("model", help='model spec, e.g. "disc_d4(1,-1)"')
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("flow", help="integrate one moment-gradient trajectory")
    p.add_argument("model")
    p.add_argument("--start", required=True, metavar="X,Y,...", help="comma-separated start coordinates")
    p.add_argument("--chart", type=int, default=0)
    p.add_argument("--direction", choices=("up", "down"), default="up")
    p.add_argument("--max-time", type=float, default=60.0)
    p.add_argument("--classify-orbit", action="store_true", help="report the invariant surface type instead")
    p.add_argument("--trajectory", metavar="PATH", default=None, help="also write the sampled path as CSV")
    _add_common(p)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("legendrian", help="locate zero-level boundary orbit components")
    p.add_argument("model")
    _add_common(p)
    p.set_defaults(func=cmd_legendrian)

    p = sub.add_parser("build", help="run a constructor and verify the result")
    bsub = p.add_subparsers(dest="builder", required=True)

    b = bsub.add_parser("free-action", help="free circle model over a planar potential")
    b.add_argument("--k", type=int, default=1, help="number of boundary circles of the base")
    b.add_argument("--holes", default=None, metavar="X,Y;X,Y", help="k-1 hole centers")
    _add_common(b)
    b.set_defaults(func=cmd_build, builder="free-action")

    b = bsub.add_parser("disc-bundle", help="rotation-invariant disc bundle over a sublevel surface")
    b.add_argument("--holes", default=None, metavar="X,Y;X,Y")
    b.add_argument("--collar", type=float, default=0.1)
    _add_common(b)
    b.set_defaults(func=cmd_build, builder="disc-bundle")

    b = bsub.add_parser("attach-2handle", help="graft a saddle block along a zero-level boundary orbit")
    b.add_argument("--base", required=True, metavar="SPEC")
    b.add_argument("--eps", type=float, default=0.05)
    b.add_argument("--kappa", type=float, default=0.55)
    _add_common(b)
    b.set_defaults(func=cmd_build, builder="attach-2handle")

    b = bsub.add_parser("blowup", help="replace the origin of the weighted ball by a sphere")
    b.add_argument("--weights", type=int, nargs=2, required=True, metavar=("M", "N"))
    b.add_argument("--size", type=float, default=0.2)
    _add_common(b)
    b.set_defaults(func=cmd_build, builder="blowup")

    p = sub.add_parser("decompositions", help="list the (h, k) splittings for a genus")
    p.add_argument("genus", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_decompositions)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HamflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
