"""Command-line front end.

Subcommands: validate, complementary, kl-check, algebra-check, bounds,
recover, discriminate, verify, duality-check.  Inputs and outputs are the
JSON schemas defined in the library; float output carries 17 significant
digits and files are written atomically, so identical invocations produce
byte-identical results.

Exit codes: 0 success/affirmative, 1 negative verdict, 2 parse error,
3 invariant violation, 4 desk-scale guard.

The default seed is 0, overridable by the QDK_SEED environment variable and
by --seed.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import jsonio
from .channels import (
    KrausChannel,
    algebra_from_dict,
    channel_from_dict,
    channel_to_dict,
    complementary,
    compose,
    isometry_from_dict,
    matrix_from_json,
    matrix_to_json,
    minimal_kraus_count,
)
from .discrimination import delta_estimate, ensemble, success_probability_bounds
from .errors import ChansimError, DeskScaleExceeded
from .fidelity import as_density, worst_case_fidelity
from .oracles import brute_force_povm_minimax, duality_check
from .qec import CodeSpec, algebra_correctable_check, knill_laflamme_check
from .recovery import SimulationProblem, near_optimal_recovery

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_DESK_SCALE = 4

KNOWN_TOLERANCES = {
    "kl_residual": 1e-8,
    "duality_gap": 5e-3,
    "fidelity_target": 1.0 - 1e-7,
}


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load_json(path):
    try:
        return jsonio.read(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot parse {path}: {exc}", EXIT_PARSE)


def _load_channel(path) -> KrausChannel:
    data = _load_json(path)
    try:
        return channel_from_dict(data)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE)
    except ChansimError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVARIANT)


def _load_code(path) -> CodeSpec:
    data = _load_json(path)
    try:
        iso = isometry_from_dict(data)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE)
    except ChansimError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVARIANT)
    return CodeSpec(iso, label=str(data.get("name", "")))


def _load_state(path):
    data = _load_json(path)
    if "matrix" not in data:
        raise CliError(f"{path}: state payload needs a 'matrix' key", EXIT_PARSE)
    try:
        mat = matrix_from_json(data["matrix"])
        return as_density(mat)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE)
    except ChansimError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVARIANT)


def _load_ensemble(path):
    data = _load_json(path)
    if "states" not in data:
        raise CliError(f"{path}: ensemble payload needs a 'states' key", EXIT_PARSE)
    try:
        mats = [matrix_from_json(m) for m in data["states"]]
        ens = ensemble(mats)
    except ValueError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE)
    except ChansimError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVARIANT)
    if "dim" in data and int(data["dim"]) != ens.dim:
        raise CliError(f"{path}: declared dim does not match the states", EXIT_PARSE)
    return ens


def _emit(payload, out_path=None):
    if out_path:
        jsonio.write_atomic(out_path, payload)
    else:
        sys.stdout.write(jsonio.dumps(payload))


def _tolerances(pairs):
    tol = dict(KNOWN_TOLERANCES)
    for item in pairs or []:
        if "=" not in item:
            raise CliError(f"--tol expects key=value, got {item!r}", EXIT_PARSE)
        key, _, raw = item.partition("=")
        if key not in tol:
            raise CliError(f"unknown tolerance {key!r}", EXIT_PARSE)
        try:
            tol[key] = float(raw)
        except ValueError:
            raise CliError(f"tolerance {key!r} needs a float, got {raw!r}", EXIT_PARSE)
    return tol


def cmd_validate(args):
    ch = _load_channel(args.channel)
    payload = {
        "name": ch.name,
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "tp_mode": ch.tp_mode,
        "n_kraus": ch.n_kraus,
        "minimal_kraus": minimal_kraus_count(ch),
    }
    _emit(payload, args.out)
    return EXIT_OK


def cmd_complementary(args):
    ch = _load_channel(args.channel)
    if ch.tp_mode != "tp":
        raise CliError("complementary channel needs a trace-preserving input", EXIT_INVARIANT)
    comp = complementary(ch)
    comp.name = (ch.name + "_complementary") if ch.name else "complementary"
    _emit(channel_to_dict(comp), args.out)
    return EXIT_OK


def cmd_kl_check(args):
    tol = args.tolerances
    code = _load_code(args.code)
    noise = _load_channel(args.noise)
    try:
        res = knill_laflamme_check(code, noise, tol=tol["kl_residual"])
    except ChansimError as exc:
        raise CliError(str(exc), EXIT_INVARIANT)
    payload = {
        "correctable": res.correctable,
        "residual": float(res.residual),
        "lambda": matrix_to_json(res.lambda_matrix),
    }
    _emit(payload, args.out)
    return EXIT_OK if res.correctable else EXIT_NEGATIVE


def cmd_algebra_check(args):
    tol = args.tolerances
    alg_data = _load_json(args.algebra)
    try:
        alg = algebra_from_dict(alg_data)
    except ValueError as exc:
        raise CliError(f"{args.algebra}: {exc}", EXIT_PARSE)
    except ChansimError as exc:
        raise CliError(f"{args.algebra}: {exc}", EXIT_INVARIANT)
    code = _load_code(args.code)
    noise = _load_channel(args.noise)
    try:
        res = algebra_correctable_check(alg, code, noise, tol=tol["kl_residual"])
    except ChansimError as exc:
        raise CliError(str(exc), EXIT_INVARIANT)
    _emit({"correctable": res.correctable, "residual": float(res.residual)}, args.out)
    return EXIT_OK if res.correctable else EXIT_NEGATIVE


def _build_problem(args) -> SimulationProblem:
    noise = _load_channel(args.noise)
    if getattr(args, "code", None):
        code = _load_code(args.code)
        from .channels import encode_then_noise

        noise = encode_then_noise(code.encoding, noise)
    sigma = None
    if getattr(args, "sigma", None):
        sigma = _load_state(args.sigma)
    try:
        return SimulationProblem(noise, sigma)
    except ChansimError as exc:
        raise CliError(str(exc), EXIT_INVARIANT)


def cmd_bounds(args):
    problem = _build_problem(args)
    report = near_optimal_recovery(problem, seed=args.seed)
    _emit(report.to_dict(), args.out)
    return EXIT_OK


def cmd_recover(args):
    problem = _build_problem(args)
    report = near_optimal_recovery(problem, seed=args.seed)
    if report.recovery is None:
        for line in report.warnings:
            sys.stderr.write(f"warning: {line}\n")
        return EXIT_NEGATIVE
    report.recovery.name = "near_optimal_recovery"
    _emit(channel_to_dict(report.recovery), args.out)
    return EXIT_OK


def cmd_discriminate(args):
    ens = _load_ensemble(args.ensemble)
    res = delta_estimate(ens, seed=args.seed)
    bracket = success_probability_bounds(ens, seed=args.seed)
    payload = {
        "delta": float(res.delta),
        "p_star": [float(p) for p in res.p_star],
        "error_bracket": [float(bracket.err_lower), float(bracket.err_upper)],
        "converged": bool(res.converged),
    }
    if args.oracle:
        try:
            oracle = brute_force_povm_minimax(ens, seed=args.seed)
        except DeskScaleExceeded as exc:
            raise CliError(str(exc), EXIT_DESK_SCALE)
        payload["oracle_error"] = 1.0 - float(oracle.value)
    _emit(payload, args.out)
    return EXIT_OK


def cmd_verify(args):
    tol = args.tolerances
    noise = _load_channel(args.noise)
    rec = _load_channel(args.recovery)
    if getattr(args, "target", None):
        target = _load_channel(args.target)
    else:
        from .channels import identity_channel

        target = identity_channel(noise.dim_in)
    try:
        composed = compose(rec, noise)
    except ChansimError as exc:
        raise CliError(str(exc), EXIT_INVARIANT)
    res = worst_case_fidelity(composed, target, seed=args.seed)
    dist = float(np.sqrt(max(0.0, 1.0 - res.value)))
    payload = {
        "fidelity": float(res.value),
        "distance": dist,
        "converged": bool(res.converged),
    }
    _emit(payload, args.out)
    return EXIT_OK if res.value >= tol["fidelity_target"] else EXIT_NEGATIVE


def cmd_duality_check(args):
    tol = args.tolerances
    n = _load_channel(args.noise)
    m = _load_channel(args.target)
    try:
        res = duality_check(n, m, args.budget, seed=args.seed)
    except DeskScaleExceeded as exc:
        raise CliError(str(exc), EXIT_DESK_SCALE)
    payload = {
        "primal": float(res.primal),
        "dual": float(res.dual),
        "gap": float(res.gap),
    }
    _emit(payload, args.out)
    return EXIT_OK if res.gap <= tol["duality_gap"] else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chansim",
        description="Worst-case fidelity bounds and recovery constructions for channel simulation",
    )
    parser.add_argument("--seed", type=int, default=None, help="seed (default: QDK_SEED or 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, **flags):
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        p.add_argument("--out", default=None, help="write JSON here instead of stdout")
        p.add_argument("--tol", action="append", metavar="KEY=VALUE", help="tolerance override")
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS, dest="seed")
        return p

    p = add("validate", cmd_validate)
    p.add_argument("channel")

    p = add("complementary", cmd_complementary)
    p.add_argument("channel")

    p = add("kl-check", cmd_kl_check)
    p.add_argument("code")
    p.add_argument("noise")

    p = add("algebra-check", cmd_algebra_check)
    p.add_argument("algebra")
    p.add_argument("code")
    p.add_argument("noise")

    p = add("bounds", cmd_bounds)
    p.add_argument("noise")
    p.add_argument("--code", default=None)
    p.add_argument("--sigma", default=None)

    p = add("recover", cmd_recover)
    p.add_argument("noise")
    p.add_argument("--code", default=None)
    p.add_argument("--sigma", default=None)

    p = add("discriminate", cmd_discriminate)
    p.add_argument("ensemble")
    p.add_argument("--oracle", action="store_true", help="also run the brute-force POVM search")

    p = add("verify", cmd_verify)
    p.add_argument("noise")
    p.add_argument("recovery")
    p.add_argument("--target", default=None)

    p = add("duality-check", cmd_duality_check)
    p.add_argument("noise")
    p.add_argument("target")
    p.add_argument("--budget", type=int, default=6)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None:
        args.seed = int(os.environ.get("QDK_SEED", "0"))
    try:
        args.tolerances = _tolerances(getattr(args, "tol", None))
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except ChansimError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
