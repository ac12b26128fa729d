"""Command-line entry point: grushinlab <command> [options].

Every command can also be driven by a JSON file passed with --config:

    {"command": "evolve", "parameters": {"k": 0.75, "bc": "friedrichs"},
     "seed": 0, "output_path": "run.csv"}

Parameter names are the long option names with dashes replaced by
underscores. Exit codes: 0 success, 2 undecidable or inconclusive, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, io
from .errors import GrushinLabError, InconclusiveError, UndecidableError
from .frames import FrameProfile
from .geodesics import DT, START, T_FINAL, GeodesicState, figure1_scenario, integrate, write_figure1, \
    write_trajectory_csv
from .grushin_spectral import (
    CurvatureLaplacianSpec,
    build_witness,
    check_witness,
    classify_alpha_grushin,
    read_witness_csv,
    region_map,
    write_region_csv,
    write_witness_csv,
)
from .evolution import (
    X_MIN_EVOLUTION,
    BoundaryCondition,
    bump,
    confinement_report,
    evolution_grid,
    heat_evolve,
    schrodinger_evolve,
    wave_packet,
    write_report,
    write_snapshots,
)
from .grids import ModeField
from .sturm1d import Endpoint, Potential1D, classify, deficiency_from_classification, infinity_notes

EXIT_OK, EXIT_ERROR, EXIT_UNDECIDED = 0, 1, 2
COMMANDS = ("classify", "region-map", "geodesics", "witness", "check-witness", "evolve", "figure1")
CONFIG_KEYS = {"command", "parameters", "seed", "output_path"}
DEFAULT_PROFILE = '{"kind": "grushin"}'


class UsageError(GrushinLabError):
    pass


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_path: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not isinstance(self.parameters, dict):
            raise UsageError("parameters must be a mapping")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise UsageError("seed must be an integer")

    @classmethod
    def from_dict(cls, cfg: dict) -> "RunConfig":
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(cfg) - CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "command" not in cfg:
            raise UsageError("config needs a 'command'")
        return cls(cfg["command"], cfg.get("parameters", {}), cfg.get("seed", 0), cfg.get("output_path"))

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            cfg = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(cfg)


# --------------------------------------------------------------------------- parsing helpers


def _range_spec(text: str):
    """'lo:hi:n' -> (lo, hi, n)."""
    try:
        lo, hi, n = text.split(":")
        return float(lo), float(hi), int(n)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}") from exc


def _profile(text: str) -> FrameProfile:
    try:
        return FrameProfile.from_config(json.loads(text))
    except (json.JSONDecodeError, TypeError, KeyError) as exc:
        raise UsageError(f"bad --profile {text!r}: {exc}") from exc


def _emit_json(obj, out) -> None:
    if out:
        io.write_json(out, obj)
    else:
        sys.stdout.write(io.dumps_json(obj).rstrip("\n") + "\n")


# --------------------------------------------------------------------------- commands


def cmd_classify(a) -> int:
    if a.alpha is not None or a.c is not None:
        if a.alpha is None or a.c is None:
            raise UsageError("--alpha and --c go together")
        if a.k is not None:
            raise UsageError("give either --alpha/--c or --k")
        v = classify_alpha_grushin(a.alpha, a.c)
        _emit_json(v.to_dict(), a.out)
        return EXIT_OK
    if a.k is None:
        raise UsageError("classify needs --alpha/--c or --k")
    p = Potential1D.inverse_square(a.k, a.g1)
    ec = classify(p, numeric=a.numeric)
    out = {"at_zero": ec.at_zero.value, "at_infinity": ec.at_infinity.value,
           "method": "numeric" if a.numeric else "analytic", "k": a.k, "g1": a.g1,
           "notes": infinity_notes(p)}
    code = EXIT_OK
    if ec.at_zero == Endpoint.UNDECIDABLE:
        out["n_plus"] = out["n_minus"] = None
        code = EXIT_UNDECIDED
    else:
        d = deficiency_from_classification(ec)
        out["n_plus"], out["n_minus"] = d.n_plus, d.n_minus
    _emit_json(out, a.out)
    return code


def cmd_region_map(a) -> int:
    a0, a1, na = a.alpha
    c0, c1, nc = a.c
    grid = region_map((a0, a1), (c0, c1), (na, nc))
    write_region_csv(grid, a.out)
    return EXIT_OK


def cmd_geodesics(a) -> int:
    profile = _profile(a.profile)
    if a.figure1:
        trajs = figure1_scenario(a.n_rays, profile, a.t_final, a.dt)
        write_figure1(trajs, a.out, profile, a.t_final)
        summary = [{"ray": r, "energy_drift": t.energy_drift, "final": list(t.states[-1]),
                    "winding_number": t.winding_number()} for r, t in enumerate(trajs)]
        io.write_json(Path(a.out) / "summary.json", summary)
        return EXIT_OK
    traj = integrate(profile, GeodesicState(a.x0, a.y0, a.px, a.py), a.t_final, a.dt)
    write_trajectory_csv(traj, a.out, profile)
    return EXIT_OK


def cmd_figure1(a) -> int:
    a.figure1 = True
    a.x0 = a.y0 = a.px = a.py = None
    return cmd_geodesics(a)


def cmd_witness(a) -> int:
    spec = CurvatureLaplacianSpec(_profile(a.profile), a.c)
    w = build_witness(spec, a.sign, a.epsilon, a.side)
    write_witness_csv(w, a.out)
    return EXIT_OK


def cmd_check_witness(a) -> int:
    res = check_witness(read_witness_csv(a.path))
    _emit_json(res, a.out)
    return EXIT_OK


def cmd_evolve(a) -> int:
    p = Potential1D.inverse_square(a.k, a.g1)
    bc = BoundaryCondition.parse(a.bc)
    x = evolution_grid(a.x_min)
    if a.mode == "heat":
        u0 = ModeField(x, bump(x, a.x0, a.width or 0.5))
        run = heat_evolve(p, u0, bc, a.dt, a.T, x_min=a.x_min, stride=a.stride)
    else:
        u0 = ModeField(x, wave_packet(x, a.x0, a.width or 0.15, a.momentum))
        run = schrodinger_evolve(p, u0, bc, a.dt, a.T, x_min=a.x_min, stride=a.stride)
    write_snapshots(run, a.out)
    report = confinement_report(run)
    out = Path(a.out)
    write_report(report, a.report or out.with_suffix(".json"), out.with_name(out.stem + "_summary.csv"))
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    ap = argparse.ArgumentParser(prog="grushinlab", formatter_class=fmt,
                                 description="Self-adjointness toolkit for curvature Laplacians "
                                             "on almost-Riemannian surfaces.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--config", help="JSON run configuration; replaces the command line", default=None)
    sub = ap.add_subparsers(dest="command", metavar="command")

    s = sub.add_parser("classify", formatter_class=fmt, help="classify -Delta_alpha + cK or k/x^2 + g1/x")
    s.add_argument("--alpha", type=float, default=None, help="alpha-Grushin exponent")
    s.add_argument("--c", type=float, default=None, help="curvature coupling")
    s.add_argument("--k", type=float, default=None, help="inverse-square strength")
    s.add_argument("--g1", type=float, default=0.0, help="coefficient of 1/x")
    s.add_argument("--numeric", action="store_true", help="use the ODE oracle at 0")
    s.add_argument("--out", default=None, help="JSON output (stdout if omitted)")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("region-map", formatter_class=fmt, help="e.s.a. verdicts on an (alpha, c) lattice")
    s.add_argument("--alpha", type=_range_spec, default="-5:8:1300", help="alpha lattice lo:hi:n (inclusive)")
    s.add_argument("--c", type=_range_spec, default="0:4.2:420", help="c lattice lo:hi:n (inclusive)")
    s.add_argument("--out", default="map.csv", help="CSV output")
    s.set_defaults(func=cmd_region_map)

    for name, helptext in (("geodesics", "integrate one geodesic, or the ray fan with --figure1"),
                           ("figure1", "the 16-ray fan from (-1/2, 0) with a gnuplot script")):
        s = sub.add_parser(name, formatter_class=fmt, help=helptext)
        s.add_argument("--profile", default=DEFAULT_PROFILE, help="frame profile as JSON")
        s.add_argument("--t-final", type=float, default=T_FINAL, help="integration time")
        s.add_argument("--dt", type=float, default=DT, help="RK4 step")
        s.add_argument("--n-rays", type=int, default=16, help="rays in the fan")
        if name == "geodesics":
            s.add_argument("--x0", type=float, default=START[0], help="initial x")
            s.add_argument("--y0", type=float, default=START[1], help="initial y")
            s.add_argument("--px", type=float, default=1.0, help="initial p_x")
            s.add_argument("--py", type=float, default=0.0, help="initial p_y")
            s.add_argument("--figure1", action="store_true", help="write the ray fan into --out (a directory)")
            s.add_argument("--out", default="geodesic.csv", help="CSV output, or directory with --figure1")
            s.set_defaults(func=cmd_geodesics)
        else:
            s.add_argument("--out", default="figure1", help="output directory")
            s.set_defaults(func=cmd_figure1)

    s = sub.add_parser("witness", formatter_class=fmt, help="write a witness function h_sign")
    s.add_argument("--c", type=float, default=0.3, help="curvature coupling in (0, 1/2)")
    s.add_argument("--sign", choices=["plus", "minus"], default="plus", help="which Frobenius solution")
    s.add_argument("--epsilon", type=float, default=0.1, help="cutoff radius")
    s.add_argument("--side", choices=["plus", "minus"], default="plus", help="side of the singular set")
    s.add_argument("--profile", default=DEFAULT_PROFILE, help="frame profile as JSON")
    s.add_argument("--out", default="witness.csv", help="CSV output")
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("check-witness", formatter_class=fmt, help="membership tests for a witness CSV")
    s.add_argument("path", help="witness CSV")
    s.add_argument("--out", default=None, help="JSON output (stdout if omitted)")
    s.set_defaults(func=cmd_check_witness)

    s = sub.add_parser("evolve", formatter_class=fmt, help="heat or Schroedinger evolution of one mode")
    s.add_argument("--mode", choices=["heat", "schrodinger"], default="heat", help="equation")
    s.add_argument("--k", type=float, default=0.75, help="inverse-square strength")
    s.add_argument("--g1", type=float, default=0.0, help="coefficient of 1/x")
    s.add_argument("--bc", default="friedrichs", help="friedrichs, far_wall or mix:<theta>")
    s.add_argument("--dt", type=float, default=1e-4, help="time step")
    s.add_argument("--T", type=float, default=0.5, help="final time")
    s.add_argument("--x0", type=float, default=1.0, help="center of the initial data")
    s.add_argument("--width", type=float, default=None,
                   help="bump half width (heat, 0.5 if omitted) or packet width (schrodinger, 0.15)")
    s.add_argument("--momentum", type=float, default=-8.0, help="packet momentum (schrodinger)")
    s.add_argument("--x-min", type=float, default=X_MIN_EVOLUTION, help="truncation point near 0")
    s.add_argument("--stride", type=int, default=100, help="steps between snapshots")
    s.add_argument("--out", default="run.csv", help="snapshot CSV")
    s.add_argument("--report", default=None, help="summary JSON (default: --out with .json)")
    s.set_defaults(func=cmd_evolve)
    return ap


def _subparser(ap, command):
    for act in ap._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices[command]
    raise UsageError(command)


def _config_argv(sp, cfg: RunConfig) -> list[str]:
    """The config parameters spelled as command-line arguments of the subcommand."""
    acts = {act.dest: act for act in sp._actions if act.dest != "help"}
    unknown = set(cfg.parameters) - set(acts)
    if unknown:
        raise UsageError(f"unknown parameters for {cfg.command}: {sorted(unknown)}")
    params = dict(cfg.parameters)
    if cfg.output_path is not None:
        params["out"] = cfg.output_path
    argv = []
    for key, val in params.items():
        act = acts[key]
        if not act.option_strings:
            argv.append(str(val))
            continue
        flag = act.option_strings[-1]
        if isinstance(act, argparse._StoreTrueAction):
            if not isinstance(val, bool):
                raise UsageError(f"{key} must be true or false")
            if val:
                argv.append(flag)
            continue
        if isinstance(val, (list, tuple)):
            val = ":".join(repr(v) for v in val)
        elif isinstance(val, float):
            val = repr(val)
        argv.append(f"{flag}={val}")
    return argv


def _namespace_from_config(ap, cfg: RunConfig) -> argparse.Namespace:
    sp = _subparser(ap, cfg.command)
    try:
        ns = sp.parse_args(_config_argv(sp, cfg))
    except SystemExit as exc:
        raise UsageError(f"invalid parameters for {cfg.command}") from exc
    ns.command = cfg.command
    return ns


def run(config: RunConfig) -> int:
    return _dispatch(_namespace_from_config(build_parser(), config), config.seed)


def _dispatch(ns, seed: int = 0) -> int:
    np.random.seed(seed)  # nothing is sampled today; fixed for reproducibility
    try:
        return ns.func(ns)
    except (UndecidableError, InconclusiveError) as exc:
        print(f"grushinlab: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except (GrushinLabError, ValueError, OSError) as exc:
        print(f"grushinlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit with 2; ours is 1
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        if ns.config is not None:
            if ns.command is not None:
                raise UsageError("--config replaces the command line; give one or the other")
            cfg = RunConfig.load(ns.config)
            ns = _namespace_from_config(ap, cfg)
            return _dispatch(ns, cfg.seed)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        print(f"grushinlab: error: {exc}", file=sys.stderr)
        ap.print_usage(sys.stderr)
        return EXIT_ERROR
    if ns.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_ERROR
    return _dispatch(ns)


if __name__ == "__main__":
    sys.exit(main())
