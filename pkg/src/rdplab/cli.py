"""Command-line front end: curves, solving, simulations, verification.

Exit codes: 0 ok, 1 usage or I/O error, 2 verification failed, 3 infeasible.
The seed falls back to the RDPLAB_SEED environment variable, then 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import closed_forms, serialize
from .coding import (
    DERANDOMIZED,
    SHARED_SEED,
    random_typical_codebook,
    shift_ensemble_sim,
    simulate_circle,
    soft_covering_tv,
)
from .solver import INFEASIBLE, SolverOptions, solve_rdp, sweep_curve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY_FAILED = 2
EXIT_INFEASIBLE = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for failed
    # verification, so remap to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message)


class CliError(Exception):
    pass


def _default_seed() -> int:
    return int(os.environ.get("RDPLAB_SEED", "0"))


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="rdplab", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("curve", help="closed-form or solver-swept curves")
    curve_sub = curve.add_subparsers(dest="curve_kind", required=True)
    cb = curve_sub.add_parser("binary", help="Bernoulli closed forms")
    cb.add_argument("--rho", type=float, default=0.25)
    cb.add_argument("--grid", type=int, default=200)
    _io_flags(cb, default_format="csv")
    cg = curve_sub.add_parser("gaussian", help="Gaussian closed forms")
    cg.add_argument("--var", type=float, default=1.0)
    cg.add_argument("--grid", type=int, default=200)
    _io_flags(cg, default_format="csv")
    cs = curve_sub.add_parser("solve", help="numerical sweep of a problem file")
    cs.add_argument("--problem", required=True)
    cs.add_argument("--D-grid", dest="d_grid", required=True, metavar="A:B:N")
    cs.add_argument("--P-grid", dest="p_grid", default=None, metavar="A:B:N")
    cs.add_argument("--tol", type=float, default=1e-6)
    _io_flags(cs, default_format="csv")

    solve = sub.add_parser("solve", help="solve one (D, P) instance")
    solve.add_argument("--problem", required=True)
    solve.add_argument("--D", type=float, required=True)
    solve.add_argument("--P", type=float, required=True)
    solve.add_argument("--tol", type=float, default=1e-6)
    _io_flags(solve, default_format="json")

    sim = sub.add_parser("simulate", help="run a coding-scheme simulation")
    sim_sub = sim.add_subparsers(dest="sim_kind", required=True)
    sc = sim_sub.add_parser("circle", help="one-bit unit-circle schemes")
    sc.add_argument("--scheme", required=True,
                    choices=("private", "common", "antipodal", "unconstrained"))
    sc.add_argument("--samples", type=int, default=1_000_000)
    sc.add_argument("--seed", type=int, default=None)
    sc.add_argument("--exact", action="store_true")
    _io_flags(sc, default_format="json")
    sb = sim_sub.add_parser("block", help="shift-ensemble block coding")
    sb.add_argument("--spec", required=True,
                    help="JSON with source, channel, distortion")
    sb.add_argument("--n", type=int, required=True)
    sb.add_argument("--rate", type=float, required=True)
    sb.add_argument("--delta", type=float, required=True)
    sb.add_argument("--trials", type=int, default=1000)
    sb.add_argument("--seed", type=int, default=None)
    sb.add_argument("--mode", choices=(SHARED_SEED, DERANDOMIZED), default=SHARED_SEED)
    sb.add_argument("--alpha", type=float, default=0.1)
    sb.add_argument("--marginals-csv", default=None,
                    help="also write per-letter marginals as t,atom,prob")
    _io_flags(sb, default_format="json")
    so = sim_sub.add_parser("softcover", help="exact soft-covering TV scan")
    so.add_argument("--spec", required=True,
                    help="JSON with target, channel, reference")
    so.add_argument("--n", type=int, nargs="+", required=True)
    so.add_argument("--rate", type=float, required=True)
    so.add_argument("--delta", type=float, required=True)
    so.add_argument("--codebooks", type=int, default=1,
                    help="number of codebook seeds to average")
    so.add_argument("--seed", type=int, default=None)
    _io_flags(so, default_format="json")

    verify = sub.add_parser("verify", help="check an optimality certificate")
    verify_sub = verify.add_subparsers(dest="verify_kind", required=True)
    vk = verify_sub.add_parser("kkt", help="binary construction certificate")
    vk.add_argument("--rho", type=float, required=True)
    vk.add_argument("--D", type=float, required=True)
    vk.add_argument("--grid", type=int, default=1001)
    _io_flags(vk, default_format="json")
    return top


def _io_flags(parser, default_format):
    parser.add_argument("--output", default=None, help="file path (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=default_format)


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w") as fh:
            fh.write(text)


def _parse_grid(spec: str) -> np.ndarray:
    try:
        a, b, n = spec.split(":")
        return np.linspace(float(a), float(b), int(n))
    except Exception as exc:
        raise CliError(f"bad grid spec {spec!r}, expected A:B:N") from exc


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _curve_rows(kind: str, args) -> list[dict]:
    if args.grid < 1:
        raise CliError("--grid must be positive")
    rows = []
    if kind == "binary":
        dmax = 2.0 * args.rho * (1.0 - args.rho)
        for dist in np.linspace(0.0, dmax, args.grid + 1):
            rows.append(
                {
                    "D": dist,
                    "phi": closed_forms.phi_binary(args.rho, dist),
                    "varphi": closed_forms.varphi_binary(args.rho, dist),
                    "rd_half": closed_forms.rd_half_binary(args.rho, dist),
                }
            )
    else:
        dmax = 2.0 * args.var
        for dist in np.linspace(0.0, dmax, args.grid + 1):
            rows.append(
                {
                    "D": dist,
                    "phi": closed_forms.phi_gaussian(args.var, dist),
                    "varphi": closed_forms.varphi_gaussian(args.var, dist),
                    "rd_half": closed_forms.rd_gaussian(args.var, dist / 2.0),
                }
            )
    return rows


def _run_curve(args) -> int:
    if args.curve_kind in ("binary", "gaussian"):
        try:
            rows = _curve_rows(args.curve_kind, args)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
        cols = ["D", "phi", "varphi", "rd_half"]
    else:
        prob = serialize.problem_from_dict(_load_json(args.problem))
        d_grid = _parse_grid(args.d_grid)
        p_grid = _parse_grid(args.p_grid) if args.p_grid else None
        opts = SolverOptions(tol=args.tol)
        rows = [
            {
                "D": dist,
                "P": perc,
                "rate_bits": sol.rate,
                "achieved_D": sol.achieved_dist,
                "achieved_P": sol.achieved_perc,
                "status": sol.status,
            }
            for dist, perc, sol in sweep_curve(prob, d_grid, p_grid, opts)
        ]
        cols = ["D", "P", "rate_bits", "achieved_D", "achieved_P", "status"]
    if args.format == "csv":
        _emit(serialize.curve_csv(rows, cols), args.output)
    else:
        _emit(serialize.dumps({"rows": rows, "columns": cols}), args.output)
    return EXIT_OK


def _run_solve(args) -> int:
    prob = serialize.problem_from_dict(_load_json(args.problem))
    prob = replace(prob, dist_budget=args.D, perc_budget=args.P)
    sol = solve_rdp(prob, SolverOptions(tol=args.tol))
    _emit(serialize.dumps(serialize.solution_to_dict(sol)), args.output)
    return EXIT_INFEASIBLE if sol.status == INFEASIBLE else EXIT_OK


def _run_simulate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.sim_kind == "circle":
        est = simulate_circle(args.scheme, args.samples, seed, exact=args.exact)
        _emit(serialize.dumps(serialize.circle_estimate_to_dict(est)), args.output)
        return EXIT_OK
    if args.sim_kind == "block":
        spec = _load_json(args.spec)
        source = serialize.pmf_from_dict(spec["source"])
        channel = serialize.channel_from_dict(spec["channel"])
        rep = shift_ensemble_sim(
            channel,
            source,
            np.array(spec["distortion"], dtype=float),
            n=args.n,
            rate_bits=args.rate,
            delta=args.delta,
            trials=args.trials,
            seed=seed,
            mode=args.mode,
            alpha=args.alpha,
        )
        _emit(serialize.dumps(serialize.sim_report_to_dict(rep)), args.output)
        if args.marginals_csv:
            with open(args.marginals_csv, "w") as fh:
                fh.write(serialize.marginals_csv(rep.per_letter_marginals))
        return EXIT_OK
    spec = _load_json(args.spec)
    target = serialize.pmf_from_dict(spec["target"])
    channel = serialize.channel_from_dict(spec["channel"])
    reference = serialize.pmf_from_dict(spec["reference"])
    scan = []
    for n in args.n:
        tvs = []
        for cb_seed in range(args.codebooks):
            cb = random_typical_codebook(target, n, args.rate, args.delta, seed + cb_seed)
            tvs.append(soft_covering_tv(channel, cb, reference))
        scan.append({"n": n, "tv_mean": float(np.mean(tvs)), "tv_values": tvs})
    payload = {
        "rate_bits": args.rate,
        "delta": args.delta,
        "codebooks": args.codebooks,
        "seed": seed,
        "scan": scan,
    }
    _emit(serialize.dumps(payload), args.output)
    return EXIT_OK


def _run_verify(args) -> int:
    try:
        sol = closed_forms.binary_optimal_construction(args.rho, args.D)
        report = closed_forms.kkt_verify(args.rho, args.D, sol, grid_size=args.grid)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _emit(serialize.dumps(serialize.kkt_report_to_dict(report)), args.output)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "curve":
            return _run_curve(args)
        if args.command == "solve":
            return _run_solve(args)
        if args.command == "simulate":
            return _run_simulate(args)
        return _run_verify(args)
    except CliError as exc:
        print(f"rdplab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"rdplab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
