"""Command-line interface.

Subcommands are thin adapters over the library: ``atlas build|verify``,
``classify``, ``decompose``, ``certify``, ``separate``, ``solve`` and
``gap``.  Exit codes: 0 on success, 2 on domain errors (bad input, bad
configuration), 3 on numerical failures.  ``CUTFORGE_SEED`` and
``CUTFORGE_THREADS`` provide environment defaults, overridable by flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .atlas import (
    AtlasError,
    canonicalize,
    enumerate_facets,
    facetness_check,
    load_atlas,
    save_atlas,
)
from .certify import certify_batch, write_certify_report
from .eigencg import RadicalVec, classify_family, decompose_f2, ecg
from .exactnum import parse_radical
from .ineq import LiftedPoint, is_valid_bqp
from .instances import InstanceFormatError, parse_biqmac
from .numerics import EigenError, LpNumericalError
from .relax import RelaxConfig, gap_report, run_pipeline
from .reports import write_report, write_trace
from .separate import SeparatorConfig, bh_separate, sampling_loop, write_cut_pool

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_NUMERIC = 3


@dataclass
class RunConfig:
    instance: str
    relaxation: str
    atlas_paths: dict = field(default_factory=dict)
    separator: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str = "out"
    time_limit: float | None = None
    sense: str = "max-to-min"
    presolve: bool = False
    plots: bool = True


def _env_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("CUTFORGE_SEED", "0"))


def _parse_vec(text: str) -> RadicalVec:
    parts = [p for p in text.split(",") if p.strip()]
    return RadicalVec(parse_radical("0"), tuple(parse_radical(p) for p in parts))


def cmd_atlas(args) -> int:
    if args.action == "build":
        atlas = enumerate_facets(args.n, long_run=args.long,
                                 checkpoint=args.checkpoint,
                                 progress=(lambda done, total, rays: print(
                                     f"rows {done}/{total}, rays {rays}", file=sys.stderr))
                                 if args.verbose else None)
        save_atlas(atlas, args.output)
        print(f"wrote {len(atlas)} facets for n={args.n} to {args.output}")
        return EXIT_OK
    atlas = load_atlas(args.path)
    print(f"atlas n={atlas.n} count={len(atlas)} sha={atlas.meta['sha'][:12]}... checksum OK")
    if args.full:
        for f in atlas.facets:
            if not is_valid_bqp(f):
                print(f"INVALID facet: {f}")
                return EXIT_DOMAIN
            if not facetness_check(canonicalize(f), atlas.n):
                print(f"NOT A FACET: {f}")
                return EXIT_DOMAIN
        print(f"all {len(atlas)} facets pass validity and facetness checks")
    return EXIT_OK


def cmd_classify(args) -> int:
    v0 = parse_radical(args.v0)
    vec = RadicalVec(v0, _parse_vec(args.v).v)
    tag = classify_family(vec)
    print(tag)
    print(ecg(vec))
    return EXIT_OK


def cmd_decompose(args) -> int:
    v0 = parse_radical(args.v0)
    vec = RadicalVec(v0, _parse_vec(args.v).v)
    bh_m, lam_m, bh_p, lam_p = decompose_f2(vec)
    print(f"lambda_minus = {lam_m}")
    print(f"bh_minus: {bh_m}")
    print(f"lambda_plus = {lam_p}")
    print(f"bh_plus: {bh_p}")
    return EXIT_OK


def cmd_certify(args) -> int:
    atlas = load_atlas(args.atlas)
    report = certify_batch(atlas, box=args.box, lambda_max=args.lambda_max,
                           progress=(lambda done, total, s: print(
                               f"{done}/{total} {s}", file=sys.stderr))
                           if args.verbose else None)
    json_path = args.json or (os.path.splitext(args.output)[0] + ".json")
    write_certify_report(report, args.output, json_path)
    print(json.dumps(report.summary(), sort_keys=True))
    if args.plots:
        from .plots import plot_certify_buckets

        fig = os.path.splitext(args.output)[0] + ".png"
        plot_certify_buckets(report.summary(), fig)
        print(f"figure: {fig}")
    return EXIT_OK


def _load_point(path: str) -> LiftedPoint:
    with open(path) as fh:
        data = json.load(fh)
    return LiftedPoint(x=np.array(data["x"], dtype=float),
                       X=np.array(data["X"], dtype=float))


def cmd_separate(args) -> int:
    point = _load_point(args.point)
    cfg = SeparatorConfig(time_limit=args.time_limit,
                          U_hat=args.budget, viol_tol=args.viol_tol)
    indices = [int(t) for t in args.indices.split(",")] if args.indices else list(range(point.n))
    res = bh_separate(point, indices, cfg)
    print(f"{len(res.cuts)} violated cuts (complete={res.complete}, nodes={res.nodes})")
    for w0, w, v in res.cuts[: args.top]:
        print(f"w0={w0} w={list(w)} v_cut={v:.6f}")
    if args.output:
        from .eigencg import bh_ineq

        with open(args.output, "w") as fh:
            for w0, w, v in res.cuts:
                lifted = canonicalize(bh_ineq(w0, w).lifted_to(point.n, indices))
                fh.write(f"{lifted} # vcut={v:.6f}\n")
        print(f"pool: {args.output}")
    return EXIT_OK


def cmd_solve(args) -> int:
    seed = _env_seed(args)
    run = RunConfig(instance=args.instance, relaxation=args.relaxation,
                    seed=seed, out_dir=args.out, time_limit=args.time_limit,
                    sense=args.sense, presolve=args.presolve, plots=args.plots)
    inst = parse_biqmac(args.instance, sense=args.sense)
    cfg = RelaxConfig(presolve=args.presolve)
    bh_cfg = None
    if args.time_limit is not None:
        bh_cfg = SeparatorConfig(time_limit=args.time_limit)
    t0 = time.time()
    result = run_pipeline(inst, args.relaxation, cfg=cfg, seed=seed, bh_cfg=bh_cfg)
    elapsed = time.time() - t0
    gap = None
    if args.ub is not None:
        gap = gap_report(args.ub, result.bound)
    os.makedirs(args.out, exist_ok=True)
    rows = [{
        "instance": inst.name or os.path.basename(args.instance),
        "relaxation": args.relaxation,
        "value": result.bound,
        "cuts_added": sum(result.cuts_added.values()),
        "time_s": elapsed,
        "gap": gap,
    }]
    provenance = {"seed": seed, "run_config": run.__dict__,
                  "cuts_added": result.cuts_added,
                  "stage_bounds": result.stage_bounds,
                  "sdp_converged": result.converged_sdp}
    paths = write_report(rows, args.out, provenance)
    write_trace(result.trace, os.path.join(args.out, "trace.csv"))
    print(f"bound[{args.relaxation}] = {result.bound:.2f}")
    if gap is not None:
        print(f"gap = {gap:.2f}%")
    print(f"report: {paths['csv']}")
    if args.plots:
        from .plots import plot_bound_trace

        fig = os.path.join(args.out, "bound_trace.png")
        plot_bound_trace(result.trace, fig,
                         title=f"{inst.name} relaxation ({args.relaxation})")
        print(f"figure: {fig}")
    return EXIT_OK


def cmd_gap(args) -> int:
    print(f"{gap_report(args.ub, args.lb):.2f}%")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cutforge",
                                 description="Cutting planes for box QCQPs")
    ap.add_argument("--version", action="version", version=f"cutforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p_atlas = sub.add_parser("atlas", help="facet atlas build / verify")
    atlas_sub = p_atlas.add_subparsers(dest="action", required=True)
    p_build = atlas_sub.add_parser("build")
    p_build.add_argument("-n", type=int, required=True)
    p_build.add_argument("-o", "--output", required=True)
    p_build.add_argument("--long", action="store_true",
                         help="allow the multi-hour n=6 enumeration")
    p_build.add_argument("--checkpoint")
    p_build.add_argument("-v", "--verbose", action="store_true")
    p_build.set_defaults(func=cmd_atlas)
    p_verify = atlas_sub.add_parser("verify")
    p_verify.add_argument("path")
    p_verify.add_argument("--full", action="store_true",
                          help="re-check validity and facetness of every entry")
    p_verify.set_defaults(func=cmd_atlas)

    p_cls = sub.add_parser("classify", help="family tag of a vector")
    p_cls.add_argument("--v0", required=True)
    p_cls.add_argument("--v", required=True, help="comma-separated radicals")
    p_cls.set_defaults(func=cmd_classify)

    p_dec = sub.add_parser("decompose", help="two-BH decomposition of an F2 vector")
    p_dec.add_argument("--v0", required=True)
    p_dec.add_argument("--v", required=True)
    p_dec.set_defaults(func=cmd_decompose)

    p_cert = sub.add_parser("certify", help="classify an atlas")
    p_cert.add_argument("--atlas", required=True)
    p_cert.add_argument("-o", "--output", required=True, help="CSV path")
    p_cert.add_argument("--json")
    p_cert.add_argument("--box", type=int, default=4)
    p_cert.add_argument("--lambda-max", type=int, default=10**4)
    p_cert.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)
    p_cert.add_argument("-v", "--verbose", action="store_true")
    p_cert.set_defaults(func=cmd_certify)

    p_sep = sub.add_parser("separate", help="BH separation at a point")
    p_sep.add_argument("--point", required=True, help="JSON with x and X")
    p_sep.add_argument("--indices", help="comma-separated subset (default: all)")
    p_sep.add_argument("--time-limit", type=float, default=10.0)
    p_sep.add_argument("--budget", type=int, default=10)
    p_sep.add_argument("--viol-tol", type=float, default=-0.01)
    p_sep.add_argument("--top", type=int, default=5)
    p_sep.add_argument("-o", "--output")
    p_sep.set_defaults(func=cmd_separate)

    p_solve = sub.add_parser("solve", help="run a relaxation pipeline")
    p_solve.add_argument("--instance", required=True)
    p_solve.add_argument("--relaxation", default="i",
                         choices=list("i ii iii iv v vi vii viii ix".split()))
    p_solve.add_argument("--seed", type=int, default=None)
    p_solve.add_argument("--out", default="out")
    p_solve.add_argument("--sense", default="max-to-min",
                         choices=["max-to-min", "as-is"])
    p_solve.add_argument("--presolve", action="store_true",
                         help="drop never-binding McCormick rows (static models)")
    p_solve.add_argument("--ub", type=float, help="known upper bound for the gap")
    p_solve.add_argument("--time-limit", type=float, default=None,
                         help="per-separation time limit for pipeline (ix)")
    p_solve.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)
    p_solve.set_defaults(func=cmd_solve)

    p_gap = sub.add_parser("gap", help="optimality gap from UB and LB")
    p_gap.add_argument("--ub", type=float, required=True)
    p_gap.add_argument("--lb", type=float, required=True)
    p_gap.set_defaults(func=cmd_gap)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError,
            InstanceFormatError, AtlasError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (LpNumericalError, EigenError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
