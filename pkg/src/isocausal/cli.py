"""Command-line front end: validate documents, dispatch, emit reports.

Every subcommand prints one JSON report to standard output (or ``--out``)
with the command echo, the verdict payload, the tolerances used and the
wall time.  Exit codes encode outcomes so shells can branch: 0 for a
positive verdict, 1 for schema or input errors, 2 for a negative verdict
(not causal, obstruction, infeasible), 3 for numerical failures such as
undecidable quadrature.  CSV output exists only for grid dumps.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import re
import sys
import time

import numpy as np

from . import specdoc
from .algebra import classify_dp, null_oracle
from .fixtures import fixture
from .grid import (
    chain_obstruction,
    closedness_probe,
    coverage_criterion,
    coverage_verdict,
    dump_csv,
    future_set,
    helix_curve,
    node_index,
    past_set,
)
from .lorentz import cone_angles
from .mapping import Chart, MetricField, check_causal_mapping, minkowski_stability
from .products import (
    GRWSpec,
    arrival_time,
    circle_fiber,
    conformal_interval,
    desitter_instability_probe,
    grw_classify,
    grw_obstruction,
    horizon_check,
    line_fiber,
    sphere_fiber,
)
from .specdoc import SpecError, build, load_document
from .waves import (
    PlaneWaveSpec,
    boundary_report,
    mp_causal_check,
    planewave_profile,
    planewave_to_mp,
    weyl_flatness,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_SCHEMA = 1
EXIT_VERDICT = 2
EXIT_NUMERICAL = 3

# tokens that mark a negative verdict rather than a bad input when a
# domain operation raises
_VERDICT_MARKS = ("no feasible", "condition (i) fails")
_NUMERICAL_MARKS = ("undecidable", "unbounded")


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors map to the schema exit code."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let interval endpoints like -inf or -2.5e3 pass as values
        self._negative_number_matcher = re.compile(
            r"^-(inf|\d+\.?\d*([eE][-+]?\d+)?|\.\d+([eE][-+]?\d+)?)$")

    def error(self, message):
        raise SpecError(message)


def _matrix(text, what: str) -> np.ndarray:
    try:
        value = np.asarray(json.loads(text), dtype=float)
    except (ValueError, TypeError) as exc:
        raise SpecError(f"{what} must be a JSON numeric matrix: {exc}")
    if value.ndim != 2 or value.shape[0] != value.shape[1]:
        raise SpecError(f"{what} must be square, got shape {value.shape}")
    return value


def _vector(text, what: str) -> np.ndarray:
    try:
        value = np.asarray(json.loads(text), dtype=float)
    except (ValueError, TypeError) as exc:
        raise SpecError(f"{what} must be a JSON numeric vector: {exc}")
    if value.ndim != 1:
        raise SpecError(f"{what} must be one-dimensional")
    return value


def _plain(value):
    """Make any report payload JSON-serializable and deterministic."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return _plain(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if value is None or isinstance(value, str):
        return value
    return str(value)


def _document(path, *kinds):
    doc = load_document(path)
    if doc["kind"] not in kinds:
        raise SpecError(f"{path}: expected a {' or '.join(kinds)} document, "
                        f"got kind {doc['kind']!r}")
    return doc


def _interval_arg(pair) -> tuple:
    try:
        lo, hi = (float(v) for v in pair)
    except ValueError as exc:
        raise SpecError(f"interval endpoints must be numbers or inf: {exc}")
    if not lo < hi:
        raise SpecError(f"interval [{pair[0]}, {pair[1]}] is empty")
    return (lo, hi)


_FIBERS = {"circle": circle_fiber, "sphere": sphere_fiber, "line": line_fiber}


def _grw_from_args(f: str, interval, fiber: str) -> GRWSpec:
    return GRWSpec(interval=_interval_arg(interval), f=f,
                   fiber=_FIBERS[fiber]())


def _fixture_grid(args):
    shape = tuple(args.shape) if getattr(args, "shape", None) else None
    try:
        return fixture(args.fixture, shape=shape).grid
    except (KeyError, ValueError) as exc:
        raise SpecError(f"unknown or malformed fixture "
                        f"{args.fixture!r}: {exc}")


# ---------------------------------------------------------------- commands


def _cmd_dp_check(args):
    g = _matrix(args.g, "--g")
    T = _matrix(args.tensor, "--T")
    orientation = _vector(args.orientation, "--orientation") \
        if args.orientation else None
    rep = classify_dp(g, T, orientation=orientation, tol=args.tol)
    payload = {
        "classification": rep.classification,
        "segre": rep.segre,
        "eigenvalues": rep.eigenvalues,
        "lambda0": rep.lambda0,
        "null_lambda": rep.null_lambda,
        "margin": rep.margin,
        "boundary": rep.boundary,
        "canonical": rep.canonical,
        "witness": rep.witness,
        "witness_value": rep.witness_value,
    }
    if args.oracle:
        oracle = null_oracle(g, T, orientation=orientation,
                             samples=args.samples, seed=args.seed)
        agree = (rep.classification == "Future") == \
            (oracle.min_pair_value >= -args.tol and
             oracle.min_diag_value >= -args.tol)
        payload["oracle"] = oracle
        payload["oracle_agrees"] = agree
    code = EXIT_OK if rep.classification == "Future" else EXIT_VERDICT
    return payload, code


def _cmd_map_check(args):
    phi, source, target = specdoc.build_map(
        _document(args.spec, "diffeo"))
    verdict = check_causal_mapping(phi, source, target,
                                   grid=args.grid or 41, tol=args.tol)
    code = EXIT_OK if verdict.outcome == "Causal" else EXIT_VERDICT
    return {"verdict": verdict, "source": source.name,
            "target": target.name}, code


def _cmd_cone_angles(args):
    g = _matrix(args.g, "--g")
    orientation = _vector(args.orientation, "--orientation") \
        if args.orientation else None
    rep = cone_angles(g, orientation=orientation)
    return {"theta_min": rep.theta_min, "theta_max": rep.theta_max,
            "dir_min": rep.dir_min, "dir_max": rep.dir_max}, EXIT_OK


_INF = math.inf


def _bump_field(amplitude: float, width: float) -> MetricField:
    if amplitude < 0 or width <= 0:
        raise SpecError("amplitude must be nonnegative and width positive")
    w2 = repr(width * width)
    r2 = "t^2 + x^2"
    bump = (f"1 + {amplitude!r} * piecewise({r2} < {w2}, "
            f"exp(1 - 1/(1 - ({r2})/{w2})), 0)")
    chart = Chart(("t", "x"), ((-_INF, _INF), (-_INF, _INF)))
    return MetricField(chart, (("1", "0"), ("0", f"-({bump})")),
                       name="bumped plane")


def _cmd_stability(args):
    if args.spec:
        field = specdoc.build_metric(_document(args.spec, "metric"))
    else:
        field = _bump_field(args.amplitude, args.width)
    bracket = minkowski_stability(field, grid=args.grid or 41)
    payload = {
        "theta_minus": bracket.theta_minus,
        "theta_plus": bracket.theta_plus,
        "valid": bracket.valid,
        "verdict": bracket.verdict,
        "lower": bracket.lower,
        "upper": bracket.upper,
        "samples": bracket.samples,
    }
    code = EXIT_OK if bracket.verdict == "isocausal" else EXIT_VERDICT
    return payload, code


def _cmd_grw_classify(args):
    spec = _grw_from_args(args.f, args.interval, args.fiber)
    cls = grw_classify(spec)
    profile = conformal_interval(spec)
    return {"class": cls, "profile": profile}, EXIT_OK


def _cmd_grw_compare(args):
    interval1 = args.interval1 or args.interval
    interval2 = args.interval2 or args.interval
    spec1 = _grw_from_args(args.f1, interval1, args.fiber)
    spec2 = _grw_from_args(args.f2, interval2, args.fiber)
    rep = grw_obstruction(spec1, spec2)
    if rep.related == "isocausal":
        code = EXIT_OK
    elif rep.related == "no":
        code = EXIT_VERDICT
    else:
        code = EXIT_NUMERICAL
    return {"obstruction": rep}, code


def _cmd_grw_probe(args):
    rep = desitter_instability_probe(amplitude=args.amplitude,
                                     width=args.width)
    return {"probe": rep}, EXIT_OK


def _arrival_spec(args):
    doc = _document(args.spec, "grw", "timeproduct")
    return build(doc)


def _cmd_arrival(args):
    spec = _arrival_spec(args)
    shape = tuple(args.shape) if args.shape else (161, 161)
    window = _interval_arg(args.window) if args.window else None
    field = arrival_time(spec, base=tuple(args.base), shape=shape,
                         window=window)
    if args.format == "csv":
        _write_arrival_csv(args.out, field)
        return None, EXIT_OK
    return {"arrival": field}, EXIT_OK


def _write_arrival_csv(path, field):
    if path is None:
        raise SpecError("csv output needs --out")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,t_plus,t_minus,truncated_plus,truncated_minus\n")
        for i in range(field.coords.size):
            fh.write("%.9g,%.9g,%.9g,%d,%d\n"
                     % (field.coords[i], field.t_plus[i], field.t_minus[i],
                        field.truncated_plus[i], field.truncated_minus[i]))


def _cmd_horizon(args):
    spec = _arrival_spec(args)
    shape = tuple(args.shape) if args.shape else (161, 161)
    window = _interval_arg(args.window) if args.window else None
    rep = horizon_check(spec, x0=args.x0, shape=shape, window=window)
    code = EXIT_OK if (rep.noPastHorizon and rep.noFutureHorizon) \
        else EXIT_VERDICT
    return {"horizon": rep}, code


def _mpwave_spec(path):
    doc = _document(path, "mpwave", "planewave")
    built = build(doc)
    if isinstance(built, PlaneWaveSpec):
        built = planewave_to_mp(built)
    return built


def _cmd_mpwave_check(args):
    spec1 = _mpwave_spec(args.spec1)
    spec2 = _mpwave_spec(args.spec2)
    rep = mp_causal_check(spec1, spec2, grid=args.grid, tol=args.tol)
    payload = {
        "k1": rep.k1,
        "k2": rep.k2,
        "a": rep.a,
        "ratio": rep.ratio,
        "map": {"names": list(rep.phi.names),
                "components": [f"{rep.a * rep.k2!r} * u",
                               f"{rep.a * rep.k1!r} * v",
                               *rep.phi.names[2:]]},
        "verdict": rep.verdict,
        "note": rep.note,
    }
    code = EXIT_OK if rep.verdict.outcome == "Causal" else EXIT_VERDICT
    return payload, code


def _cmd_mpwave_profile(args):
    spec = build(_document(args.spec, "planewave"))
    u_grid = np.linspace(spec.u_bounds[0], spec.u_bounds[1], args.samples)
    prof = planewave_profile(spec, u_grid)
    payload = {
        "signature": list(prof.signature),
        "signatureConstant": prof.signatureConstant,
        "definiteness": prof.definiteness,
        "supRatio": prof.supRatio,
        "lam_abs_min": prof.lam_abs_min,
        "lam_abs_max": prof.lam_abs_max,
        "note": prof.note,
    }
    return payload, EXIT_OK


def _cmd_mpwave_weyl(args):
    rep = weyl_flatness(_matrix(args.Q, "--Q"), args.n)
    return {"weyl": rep}, EXIT_OK


def _cmd_mpwave_boundary(args):
    if args.spec:
        spec = build(_document(args.spec, "planewave"))
    elif args.Q:
        Q = _matrix(args.Q, "--Q")
        spec = PlaneWaveSpec(
            frequency=tuple(tuple(repr(float(v)) for v in row) for row in Q),
            locallySymmetric=True)
    else:
        raise SpecError("boundary needs --spec or --Q")
    rep = boundary_report(spec)
    code = EXIT_OK if rep.case != "Unknown" else EXIT_VERDICT
    return {"boundary": rep}, code


def _gridjob_args(args):
    """Fold an optional gridjob document into the oracle flags."""
    if getattr(args, "spec", None):
        job = specdoc.build_gridjob(_document(args.spec, "gridjob"))
        args.fixture = args.fixture or job["fixture"]
        args.shape = args.shape or job["shape"]
        if hasattr(args, "source"):
            args.source = args.source or job["source"]
        if hasattr(args, "relation"):
            args.relation = args.relation or job["relation"]
    if not args.fixture:
        raise SpecError("a fixture token is required (--fixture or --spec)")


def _cmd_oracle_build(args):
    _gridjob_args(args)
    grid = _fixture_grid(args)
    if args.format == "csv":
        if args.out is None:
            raise SpecError("csv output needs --out")
        dump_csv(grid, args.out)
        return None, EXIT_OK
    payload = {
        "fixture": args.fixture,
        "shape": list(grid.shape),
        "live": int(grid.mask.sum()),
        "cell": [grid.dt, grid.dx],
        "wrap": grid.wrap,
        "offsets": [list(o) for o in grid.offsets],
    }
    return payload, EXIT_OK


def _cmd_oracle_reach(args):
    _gridjob_args(args)
    if args.source is None:
        raise SpecError("a source point is required (--source or --spec)")
    relation = args.relation or "J"
    grid = _fixture_grid(args)
    source = tuple(float(v) for v in args.source)
    idx = node_index(grid, source)
    fut = future_set(grid, idx, kind=relation)
    past = past_set(grid, idx, kind=relation)
    if args.format == "csv":
        _write_reach_csv(args.out, grid, fut, past)
        return None, EXIT_OK
    live = int(grid.mask.sum())
    payload = {
        "fixture": args.fixture,
        "source": list(source),
        "relation": relation,
        "future_nodes": int(fut.sum()),
        "past_nodes": int(past.sum()),
        "live_nodes": live,
        "future_fraction": float(fut.sum() / max(live, 1)),
        "past_fraction": float(past.sum() / max(live, 1)),
    }
    return payload, EXIT_OK


def _write_reach_csv(path, grid, fut, past):
    if path is None:
        raise SpecError("csv output needs --out")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x,live,future,past\n")
        for i in range(grid.ts.size):
            for j in range(grid.xs.size):
                fh.write("%.9g,%.9g,%d,%d,%d\n"
                         % (grid.ts[i], grid.xs[j], grid.mask[i, j],
                            fut[i, j], past[i, j]))


def _cmd_oracle_chain(args):
    _gridjob_args(args)
    grid = _fixture_grid(args)
    rep = chain_obstruction(grid, args.j)
    code = EXIT_OK if rep.feasible else EXIT_VERDICT
    return {"chain": rep}, code


def _cmd_oracle_cover(args):
    _gridjob_args(args)
    grid = _fixture_grid(args)
    timelike = coverage_criterion(grid, helix_curve(grid, args.beta),
                                  "timelike")
    null = coverage_criterion(grid, helix_curve(grid, 1.0), "null")
    verdict = coverage_verdict(timelike, null)
    code = EXIT_OK if verdict == "timelike-covers" else EXIT_VERDICT
    return {"verdict": verdict, "timelike": timelike, "null": null}, code


def _cmd_oracle_closedness(args):
    _gridjob_args(args)
    grid = _fixture_grid(args)
    rep = closedness_probe(grid, tuple(args.point))
    code = EXIT_OK if rep.closed else EXIT_VERDICT
    return {"closedness": rep}, code


# ------------------------------------------------------------------ parser


def _common() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--grid", type=int, default=None,
                        help="samples per axis for verification grids")
    common.add_argument("--seed", type=int, default=42,
                        help="seed for stochastic oracles")
    common.add_argument("--tol", type=float, default=1e-9,
                        help="margin tolerance")
    common.add_argument("--out", default=None,
                        help="write the report to this path")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="report format (csv for grid dumps only)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(
        prog="isocausal",
        description="Compare the causal structure of Lorentzian metrics.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("dp-check", parents=[common],
                       help="classify a symmetric tensor against a metric")
    p.add_argument("--g", required=True, help="metric matrix as JSON")
    p.add_argument("--T", dest="tensor", required=True,
                   help="tensor matrix as JSON")
    p.add_argument("--orientation", help="future side vector as JSON")
    p.add_argument("--oracle", action="store_true",
                   help="cross-check with the random null-direction oracle")
    p.add_argument("--samples", type=int, default=4096)
    p.set_defaults(handler=_cmd_dp_check)

    p = sub.add_parser("map-check", parents=[common],
                       help="verify a map between two metric documents")
    p.add_argument("--spec", required=True, help="diffeo document path")
    p.set_defaults(handler=_cmd_map_check)

    p = sub.add_parser("cone-angles", parents=[common],
                       help="half-angles of a constant metric's cone")
    p.add_argument("--g", required=True, help="metric matrix as JSON")
    p.add_argument("--orientation", help="future side vector as JSON")
    p.set_defaults(handler=_cmd_cone_angles)

    p = sub.add_parser("stability", parents=[common],
                       help="bracket a plane perturbation between flat cones")
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--spec", help="metric document overriding the bump")
    p.set_defaults(handler=_cmd_stability)

    grw = sub.add_parser("grw", help="warped product analyses")
    gsub = grw.add_subparsers(dest="subcommand", required=True,
                              parser_class=_Parser)

    p = gsub.add_parser("classify", parents=[common],
                        help="coarse causal class of a warped metric")
    p.add_argument("--f", required=True, help="warping expression in t")
    p.add_argument("--interval", nargs=2, required=True,
                   metavar=("LO", "HI"))
    p.add_argument("--fiber", choices=sorted(_FIBERS), default="circle")
    p.set_defaults(handler=_cmd_grw_classify)

    p = gsub.add_parser("compare", parents=[common],
                        help="directional obstruction between two warpings")
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)
    p.add_argument("--interval", nargs=2, default=("-inf", "inf"),
                   metavar=("LO", "HI"))
    p.add_argument("--interval1", nargs=2, default=None,
                   metavar=("LO", "HI"))
    p.add_argument("--interval2", nargs=2, default=None,
                   metavar=("LO", "HI"))
    p.add_argument("--fiber", choices=sorted(_FIBERS), default="circle")
    p.set_defaults(handler=_cmd_grw_compare)

    p = gsub.add_parser("probe-desitter", parents=[common],
                        help="two-sided class split of a bumped cosh warping")
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--width", type=float, default=1.0)
    p.set_defaults(handler=_cmd_grw_probe)

    p = sub.add_parser("arrival", parents=[common],
                       help="signal arrival times from a comoving base point")
    p.add_argument("--spec", required=True,
                   help="grw or timeproduct document path")
    p.add_argument("--base", nargs=2, type=float, required=True,
                   metavar=("T", "X"))
    p.add_argument("--shape", nargs=2, type=int, default=None,
                   metavar=("NT", "NX"))
    p.add_argument("--window", nargs=2, default=None, metavar=("LO", "HI"))
    p.set_defaults(handler=_cmd_arrival)

    p = sub.add_parser("horizon", parents=[common],
                       help="particle horizon reports for a product metric")
    p.add_argument("--spec", required=True,
                   help="grw or timeproduct document path")
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--shape", nargs=2, type=int, default=None,
                   metavar=("NT", "NX"))
    p.add_argument("--window", nargs=2, default=None, metavar=("LO", "HI"))
    p.set_defaults(handler=_cmd_horizon)

    wave = sub.add_parser("mpwave", help="wave metric analyses")
    wsub = wave.add_subparsers(dest="subcommand", required=True,
                               parser_class=_Parser)

    p = wsub.add_parser("check", parents=[common],
                        help="dominance check between two wave documents")
    p.add_argument("--spec1", required=True)
    p.add_argument("--spec2", required=True)
    p.set_defaults(handler=_cmd_mpwave_check)

    p = wsub.add_parser("profile", parents=[common],
                        help="frequency matrix eigenvalue survey")
    p.add_argument("--spec", required=True, help="planewave document path")
    p.add_argument("--samples", type=int, default=201)
    p.set_defaults(handler=_cmd_mpwave_profile)

    p = wsub.add_parser("weyl", parents=[common],
                        help="conformal flatness of a constant profile")
    p.add_argument("--Q", required=True, help="symmetric matrix as JSON")
    p.add_argument("--n", type=int, required=True,
                   help="spacetime dimension")
    p.set_defaults(handler=_cmd_mpwave_weyl)

    p = wsub.add_parser("boundary", parents=[common],
                        help="conformal-boundary class of a plane wave")
    p.add_argument("--spec", help="planewave document path")
    p.add_argument("--Q", help="constant frequency matrix as JSON")
    p.set_defaults(handler=_cmd_mpwave_boundary)

    oracle = sub.add_parser("oracle", help="discrete reachability probes")
    osub = oracle.add_subparsers(dest="subcommand", required=True,
                                 parser_class=_Parser)

    p = osub.add_parser("build", parents=[common],
                        help="build a fixture grid and dump or summarize it")
    p.add_argument("--fixture", default=None)
    p.add_argument("--spec", help="gridjob document path")
    p.add_argument("--shape", nargs=2, type=int, default=None)
    p.set_defaults(handler=_cmd_oracle_build)

    p = osub.add_parser("reach", parents=[common],
                        help="future and past sets of a grid point")
    p.add_argument("--fixture", default=None)
    p.add_argument("--spec", help="gridjob document path")
    p.add_argument("--shape", nargs=2, type=int, default=None)
    p.add_argument("--source", nargs=2, type=float, default=None,
                   metavar=("T", "X"))
    p.add_argument("--relation", choices=("J", "I"), default=None)
    p.set_defaults(handler=_cmd_oracle_reach)

    p = osub.add_parser("chain", parents=[common],
                        help="feasibility of a j-link covering chain")
    p.add_argument("--fixture", default=None)
    p.add_argument("--spec", help="gridjob document path")
    p.add_argument("--shape", nargs=2, type=int, default=None)
    p.add_argument("--j", type=int, required=True)
    p.set_defaults(handler=_cmd_oracle_chain)

    p = osub.add_parser("cover", parents=[common],
                        help="helix coverage trichotomy on a cylinder grid")
    p.add_argument("--fixture", default=None)
    p.add_argument("--spec", help="gridjob document path")
    p.add_argument("--shape", nargs=2, type=int, default=None)
    p.add_argument("--beta", type=float, default=0.9)
    p.set_defaults(handler=_cmd_oracle_cover)

    p = osub.add_parser("closedness", parents=[common],
                        help="probe closedness of the causal relation")
    p.add_argument("--fixture", default=None)
    p.add_argument("--spec", help="gridjob document path")
    p.add_argument("--shape", nargs=2, type=int, default=None)
    p.add_argument("--point", nargs=2, type=float, required=True,
                   metavar=("T", "X"))
    p.set_defaults(handler=_cmd_oracle_closedness)

    return parser


def _command_echo(args) -> str:
    name = args.command
    if getattr(args, "subcommand", None):
        name = f"{name} {args.subcommand}"
    return name


def _emit(report, args, started: float) -> None:
    if report is None:
        return
    envelope = {
        "command": _command_echo(args),
        "report": _plain(report),
        "seed": args.seed,
        "tolerances": {"tol": args.tol, "grid": args.grid},
        "wallTime": time.perf_counter() - started,
    }
    text = json.dumps(envelope, indent=2, sort_keys=True)
    if args.out and args.format == "json":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _fail(message: str, code: int) -> int:
    print(json.dumps({"error": message, "exit": code}), file=sys.stderr)
    return code


_CSV_COMMANDS = {"arrival", "oracle build", "oracle reach"}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SpecError as exc:
        return _fail(str(exc), EXIT_SCHEMA)
    if args.format == "csv" and _command_echo(args) not in _CSV_COMMANDS:
        return _fail("csv output is only available for grid dumps",
                     EXIT_SCHEMA)
    started = time.perf_counter()
    try:
        report, code = args.handler(args)
    except SpecError as exc:
        return _fail(str(exc), EXIT_SCHEMA)
    except ValueError as exc:
        message = str(exc)
        if any(mark in message for mark in _VERDICT_MARKS):
            return _fail(message, EXIT_VERDICT)
        if any(mark in message for mark in _NUMERICAL_MARKS):
            return _fail(message, EXIT_NUMERICAL)
        return _fail(message, EXIT_SCHEMA)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(str(exc), EXIT_NUMERICAL)
    _emit(report, args, started)
    return code


if __name__ == "__main__":
    sys.exit(main())
