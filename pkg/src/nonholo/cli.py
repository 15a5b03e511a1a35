"""Command-line interface: ``nonholo {list,simulate,verify,compare}``.

Exit codes: 0 success, 1 verification failure, 2 usage error or unknown
system/parameter, 3 invalid initial state, 4 integration aborted. Every error
is reported on stderr as a single line starting with ``error:<code>:``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import systems, verify
from .errors import (
    DimensionMismatch,
    DriftExceeded,
    InitialStateError,
    InvalidParameter,
    SingularStateEncountered,
)
from .implicit import reactive_force
from .integrate import IntegrationConfig, lift, simulate_implicit, simulate_parametric
from .model import VelState
from .parametric import ParamState, fiber_metric

EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_STATE = 3
EXIT_RUNTIME = 4
DEFAULT_SEED = 0


class CliError(Exception):
    def __init__(self, code, kind, message):
        super().__init__(message)
        self.code = code
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, "usage", message)


def _vector(text, what):
    try:
        vals = [float(tok) for tok in text.split(",")]
    except ValueError:
        raise CliError(EXIT_STATE, "malformed-state", f"cannot parse {what} {text!r}") from None
    if not all(np.isfinite(vals)):
        raise CliError(EXIT_STATE, "malformed-state", f"{what} must be finite")
    return np.array(vals)


def _params(pairs):
    out = {}
    for item in pairs or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise CliError(EXIT_USAGE, "bad-parameter", f"expected key=value, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise CliError(EXIT_USAGE, "bad-parameter", f"parameter {key!r} is not a number") from None
    return out


def _build(name, pairs):
    if name not in systems.FACTORIES:
        raise CliError(EXIT_USAGE, "unknown-system", f"unknown system {name!r}; try 'list'")
    try:
        return systems.get(name, **_params(pairs))
    except TypeError as exc:
        raise CliError(EXIT_USAGE, "bad-parameter", str(exc)) from None
    except InvalidParameter as exc:
        raise CliError(EXIT_USAGE, "bad-parameter", str(exc)) from None


def _check_len(vec, n, what):
    if vec.size != n:
        raise CliError(EXIT_STATE, "malformed-state", f"{what} needs {n} values, got {vec.size}")
    return vec


def _initial_param(b, args):
    q = _check_len(_vector(args.state, "state"), b.n, "state") if args.state else b.default_state.q
    z = _check_len(_vector(args.params_z, "params-z"), b.m, "params-z") if args.params_z else b.default_state.z
    return ParamState(q, z)


def _initial_vel(b, args):
    s = _initial_param(b, args)
    if args.qdot:
        return VelState(s.q, _check_len(_vector(args.qdot, "qdot"), b.n, "qdot"))
    return lift(b.parametric, s)


def _config(args):
    try:
        return IntegrationConfig(
            step=args.step,
            t_end=args.t_end,
            record_every=args.record_every,
            drift_abort_threshold=args.drift_threshold,
            project=getattr(args, "project", False),
        )
    except InvalidParameter as exc:
        raise CliError(EXIT_USAGE, "bad-config", str(exc)) from None


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("NONHOLO_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise CliError(EXIT_USAGE, "bad-seed", f"NONHOLO_SEED must be an integer, got {env!r}") from None


def _run(fn, *a):
    try:
        return fn(*a)
    except InitialStateError as exc:
        raise CliError(EXIT_STATE, "initial-state", str(exc)) from None
    except DimensionMismatch as exc:
        raise CliError(EXIT_STATE, "malformed-state", str(exc)) from None
    except DriftExceeded as exc:
        raise CliError(EXIT_RUNTIME, "drift", str(exc)) from None
    except SingularStateEncountered as exc:
        raise CliError(EXIT_RUNTIME, "singular", str(exc)) from None


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)


# -- commands -----------------------------------------------------------------


def _system_info(b):
    return {
        "name": b.name,
        "description": b.description,
        "n": b.n,
        "m": b.m,
        "r": b.r,
        "coordinates": list(b.coordinates),
        "parameters_z": list(b.parameters),
        "system_parameters": b.params,
        "default_state": {"q": b.default_state.q.tolist(), "z": b.default_state.z.tolist()},
    }


def cmd_list(args):
    infos = [_system_info(systems.get(name)) for name in systems.names()]
    if args.json:
        print(json.dumps(infos, indent=2))
        return 0
    for info in infos:
        print(f"{info['name']}  (n={info['n']}, m={info['m']}, r={info['r']})")
        print(f"  {info['description']}")
        print(f"  coordinates q: {', '.join(info['coordinates'])}")
        print(f"  parameters z:  {', '.join(info['parameters_z'])}")
        params = ", ".join(f"{k}={v:g}" for k, v in info["system_parameters"].items())
        print(f"  defaults:      {params}")
    return 0


def cmd_simulate(args):
    b = _build(args.system, args.param)
    cfg = _config(args)
    if args.method == "parametric":
        if args.qdot:
            raise CliError(EXIT_USAGE, "usage", "--qdot applies to the implicit method only")
        traj = _run(simulate_parametric, b.spec, b.parametric, _initial_param(b, args), cfg, b.implicit)
    else:
        traj = _run(simulate_implicit, b.spec, b.implicit, _initial_vel(b, args), cfg)
    if args.format == "csv":
        text = traj.to_csv()
    else:
        doc = {"system": b.name, "parameters": b.params, **traj.to_dict()}
        text = json.dumps(doc) + "\n"
    _emit(text, args.output)
    return 0


def cmd_verify(args):
    if args.all or not args.systems:
        names = systems.names()
    else:
        names = args.systems
    builtins = [_build(name, None) for name in names]
    seed = _seed(args)

    def run():
        reps = []
        for b in builtins:
            reps.extend(
                verify.run_suite(b, seed=seed, samples=args.samples, trajectories=not args.no_trajectories)
            )
        return reps

    if args.inject_fault:
        with verify.inject_fault(args.inject_fault):
            reports = run()
    else:
        reports = run()
    passed = all(r.passed for r in reports)
    doc = {"seed": seed, "fault": args.inject_fault, "passed": passed, "reports": [r.to_dict() for r in reports]}
    _emit(json.dumps(doc, indent=2) + "\n", args.output)
    return 0 if passed else EXIT_FAIL


def _profile_rows(b, traj, rows):
    idx = np.unique(np.linspace(0, traj.times.size - 1, rows).round().astype(int))
    out = []
    for k in idx:
        vs = VelState(traj.q[k], traj.aux[k])
        rep = reactive_force(b.spec, b.implicit, vs)
        out.append((float(traj.times[k]), rep.r_contravariant, float(np.linalg.norm(rep.r_contravariant)), rep.power))
    return out


def _disc_scaled_agreement(b, s0, cfg, td):
    """Integrate the rescaled Z system directly and compare with the rescaled D trajectory."""
    from .integrate import simulate

    A = lambda y: b.spec.forces(y[:4], np.zeros(4))
    mra = b.params["m"] * b.params["R"] ** 2 + b.params["A"]
    y0 = np.concatenate([b.fixtures["scale_positions"](s0.q), [mra * s0.z[0], s0.z[1]]])
    rhs = b.fixtures["scaled_z_rhs"]
    tz = _run(simulate, lambda y: rhs(y, A(y)), y0, cfg, None, None, 4, "scaled")
    scaled = np.array([b.fixtures["scale_positions"](q) for q in td.q])
    return float(np.max(np.abs(scaled - tz.q)))


def cmd_compare(args):
    b = _build(args.system, args.param)
    cfg = _config(args)
    s0 = _initial_param(b, args)
    tz = _run(simulate_parametric, b.spec, b.parametric, s0, cfg, b.implicit)
    td = _run(simulate_implicit, b.spec, b.implicit, lift(b.parametric, s0), cfg)
    dev = float(np.max(np.abs(tz.q - td.q)))
    lines = [
        f"system: {b.name}",
        f"t_end: {cfg.t_end:g}  step: {cfg.steps()[1]:.6g}",
        f"max |q_Z - q_D|: {dev:.3e}",
        f"max |C| along D: {float(np.max(td.cres)):.3e}",
        f"max |R_i qdot^i| along D: {float(np.max(np.abs(td.rpower))):.3e}",
        "reactive force profile (D method):",
        "  t  " + "  ".join(f"R{i + 1}" for i in range(b.n)) + "  |R|  power",
    ]
    for t, r, norm, power in _profile_rows(b, td, args.profile_rows):
        lines.append(f"  {t:.6g}  " + "  ".join(f"{v:.6e}" for v in r) + f"  {norm:.6e}  {power:.3e}")
    if b.name == "coaxial-discs":
        dets = [np.linalg.det(fiber_metric(b.spec, b.parametric, ParamState.from_vector(y, b.n))[0]) for y in tz.states]
        lines.append(f"det G_ab drift along Z: {float(np.max(dets) - np.min(dets)):.3e} (det = {dets[0]:.12g})")
    if b.name == "vertical-disc":
        lines.append(f"rescaled D vs rescaled Z agreement: max deviation {_disc_scaled_agreement(b, s0, cfg, td):.3e}")
    _emit("\n".join(lines) + "\n", args.output)
    return 0


# -- parser -------------------------------------------------------------------


def _add_run_options(p, t_end_default):
    p.add_argument("system")
    p.add_argument("--state", help="comma-separated configuration q")
    p.add_argument("--params-z", dest="params_z", help="comma-separated parameters z")
    p.add_argument("-p", "--param", action="append", metavar="KEY=VALUE", help="system parameter (repeatable)")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--t-end", dest="t_end", type=float, default=t_end_default)
    p.add_argument("--record-every", dest="record_every", type=int, default=10)
    p.add_argument("--drift-threshold", dest="drift_threshold", type=float, default=1e-6)
    p.add_argument("--output", "-o", default=None, help="output path (default stdout)")


def build_parser():
    parser = _Parser(prog="nonholo", description="Non-holonomic systems: simulate and verify.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("list", help="list builtin systems")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("simulate", help="integrate one system and write its trajectory")
    _add_run_options(p, 1.0)
    p.add_argument("--method", choices=("parametric", "implicit"), default="parametric")
    p.add_argument("--qdot", help="comma-separated velocities (implicit method)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--project", action="store_true", help="project velocities back onto C after each step")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("systems", nargs="*")
    p.add_argument("--all", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--no-trajectories", dest="no_trajectories", action="store_true")
    p.add_argument("--inject-fault", dest="inject_fault", choices=verify.FAULT_TARGETS, default=None)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="integrate both methods and report their agreement")
    _add_run_options(p, 1.0)
    p.add_argument("--profile-rows", dest="profile_rows", type=int, default=11)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        msg = " ".join(str(exc).split())
        print(f"error:{exc.code}:{exc.kind}: {msg}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
