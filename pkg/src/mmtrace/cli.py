"""Command-line front end.

Subcommands: generate, verify, norms, experiment, report.
Exit codes: 0 ok, 2 parameter error, 3 resolution error, 4 io error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import io as mio
from .errors import IoError, MMTraceError, ParameterError, ResolutionError
from .experiments import report_emit, run_equivalence
from .functionals import SampleFunction
from .generators import GeneratorSpec, generate
from .measures import build_measure_sequence, verify_regular_sequence
from .regularity import (
    adr_report_json,
    check_adr,
    check_lcr,
    default_r_grid,
    lcr_report_json,
    porosity_scan,
)


def _cmd_generate(args) -> int:
    cfg_text = open(args.spec).read()
    kv = {}
    for raw in cfg_text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            k, _, v = line.partition("=")
            kv[k.strip()] = v.strip()
    pieces = [mio._parse_piece(p) for p in kv["pieces"].split(";") if p.strip()]
    spec = GeneratorSpec(
        kind=kv["kind"],
        h=mio._parse_real(kv["h"]),
        pieces=pieces,
        c_res=mio._parse_real(kv.get("c_res", "1")),
        name=kv.get("name", kv["kind"]),
    )
    space, piecewise = generate(spec)
    os.makedirs(args.out, exist_ok=True)
    mio.save_space(space, os.path.join(args.out, "space.mmspace"))
    mio.save_pieces(piecewise, os.path.join(args.out, "pieces.json"))
    print(f"wrote {args.out}/space.mmspace ({space.n} points) and pieces.json")
    return 0


def _pieces_path(args) -> str:
    if args.pieces:
        return args.pieces
    return os.path.join(os.path.dirname(os.path.abspath(args.space)), "pieces.json")


def _cmd_verify(args) -> int:
    space = mio.load_space(args.space, c_res=args.c_res)
    piecewise = mio.load_pieces(_pieces_path(args))
    grid = default_r_grid(space)
    out = {}
    if args.what == "adr":
        for i, pc in enumerate(piecewise.pieces):
            k1, k2, ok = check_adr(space, pc, grid)
            out[f"piece_{i + 1}"] = adr_report_json(pc, grid, k1, k2, ok)
    elif args.what == "lcr":
        for i, pc in enumerate(piecewise.pieces):
            lam = check_lcr(space, pc.ids, pc.theta, grid)
            out[f"piece_{i + 1}"] = lcr_report_json(grid, lam)
    elif args.what == "porosity":
        rep = porosity_scan(space, piecewise.union_ids, args.sigma, grid)
        out = rep.to_json()
    elif args.what == "measure-seq":
        seq = build_measure_sequence(space, piecewise, piecewise.theta_S)
        cert = verify_regular_sequence(space, seq)
        out = cert.to_json()
    else:
        raise ParameterError(f"unknown verification target {args.what!r}")
    print(json.dumps(out, sort_keys=True, indent=1))
    return 0


def _cmd_norms(args) -> int:
    from .experiments import ExperimentConfig, evaluate_functional

    space = mio.load_space(args.space, c_res=args.c_res)
    piecewise = mio.load_pieces(_pieces_path(args))
    values = mio.load_function(args.f, space.n)
    f = SampleFunction(values=values, domain=piecewise)
    seq = build_measure_sequence(space, piecewise, piecewise.theta_S, p=args.p)
    cfg = ExperimentConfig(
        generator=GeneratorSpec(kind="grid1d", h=0.5, pieces=[]),
        resolutions=[space.resolution],
        functionals=args.which.split(","),
        functions=[],
        p=args.p,
        c=args.c,
        sigma=args.sigma,
    )
    out = {}
    for name in args.which.split(","):
        rep = evaluate_functional(name, space, piecewise, seq, f, cfg)
        out[name] = rep.to_json()
    print(json.dumps(out, sort_keys=True, indent=1))
    return 0


def _cmd_experiment(args) -> int:
    cfg = mio.load_config(args.config)
    report = run_equivalence(cfg)
    os.makedirs(args.out, exist_ok=True)
    report_emit(report, "csv", os.path.join(args.out, "report.csv"), cfg)
    report_emit(report, "json", os.path.join(args.out, "report.json"), cfg)
    print(f"wrote {args.out}/report.csv and report.json ({len(report.cells)} cells)")
    return 0


def _cmd_report(args) -> int:
    src = os.path.join(args.indir, "report.json")
    try:
        with open(src) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read {src}: {exc}") from exc
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True, indent=1))
    else:
        csv_path = os.path.join(args.indir, "report.csv")
        try:
            sys.stdout.write(open(csv_path).read())
        except OSError as exc:
            raise IoError(f"cannot read {csv_path}: {exc}") from exc
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mmtrace", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a synthetic instance from a generator spec")
    g.add_argument("--spec", required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=_cmd_generate)

    v = sub.add_parser("verify", help="run a regularity verifier on an instance")
    v.add_argument("--space", required=True)
    v.add_argument("--pieces", default=None, help="defaults to pieces.json beside the space file")
    v.add_argument("--what", required=True, choices=["adr", "lcr", "porosity", "measure-seq"])
    v.add_argument("--sigma", type=float, default=0.25)
    v.add_argument("--c-res", dest="c_res", type=float, default=1.0)
    v.set_defaults(fn=_cmd_verify)

    n = sub.add_parser("norms", help="evaluate trace functionals for a sample function")
    n.add_argument("--space", required=True)
    n.add_argument("--pieces", default=None, help="defaults to pieces.json beside the space file")
    n.add_argument("--f", required=True)
    n.add_argument("--which", required=True, help="comma list, e.g. gl1,bn,trace_simple:1")
    n.add_argument("--p", type=float, default=2.5)
    n.add_argument("--c", type=float, default=6.0)
    n.add_argument("--sigma", type=float, default=0.01)
    n.add_argument("--c-res", dest="c_res", type=float, default=1.0)
    n.set_defaults(fn=_cmd_norms)

    e = sub.add_parser("experiment", help="run a configuration-driven equivalence experiment")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(fn=_cmd_experiment)

    r = sub.add_parser("report", help="re-emit a stored experiment report")
    r.add_argument("--in", dest="indir", required=True)
    r.add_argument("--format", choices=["csv", "json"], default="csv")
    r.set_defaults(fn=_cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except ResolutionError as exc:
        print(f"resolution error: {exc}", file=sys.stderr)
        return 3
    except IoError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4
    except MMTraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
