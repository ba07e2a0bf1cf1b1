"""Command-line front door: runs, sweeps, audits, bound checks, networking.

Every subcommand emits CSV (to --out or stdout) so results feed external
plotting tools directly; identical flags and seed produce byte-identical
output.  Validation problems exit with status 2 and a message naming the
violated constraint.
"""

import argparse
import csv
import sys

import numpy as np

from . import cluster
from .numerics import relative_error
from .schemes import (
    INNER_IDS,
    SCHEME_IDS,
    InsufficientResponsesError,
    SchemeParams,
    generator_matrices,
)
from .sharing import audit_scheme
from .simulator import (
    SWEEP_AXES,
    RunConfig,
    run_local,
    run_to_csv,
    sample_inputs,
    sweep,
    sweep_summary_to_csv,
    sweep_trials_to_csv,
)
from .vandermonde import reports_to_csv, verify_bounds_exhaustive


def _parse_size(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"--size wants three comma-separated integers t,s,r, got {text!r}")
    return tuple(int(p) for p in parts)


def _parse_values(text: str):
    return [float(v) for v in text.split(",") if v]


def _parse_workers(text: str):
    addresses = []
    for item in text.split(","):
        host, _, port = item.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"--workers entries must look like host:port, got {item!r}")
        addresses.append((host, int(port)))
    return addresses


def _add_scheme_flags(parser: argparse.ArgumentParser, precision_default: str) -> None:
    parser.add_argument("--scheme", required=True, choices=SCHEME_IDS)
    parser.add_argument("--M", type=int, help="inner-dimension block count (inner schemes)")
    parser.add_argument("--K", type=int, help="row block count of A (outer schemes)")
    parser.add_argument("--L", type=int, help="column block count of B (outer schemes)")
    parser.add_argument("--X", type=int, default=3, help="noise block count (0 disables privacy)")
    parser.add_argument("--N", type=int, help="worker count; defaults to threshold + stragglers")
    parser.add_argument("--S", type=int, default=0, help="straggler allowance")
    parser.add_argument("--delta", type=float, help="per-symbol leakage target in nats")
    parser.add_argument("--sigma2", type=float, help="explicit noise variance, overriding --delta")
    parser.add_argument("--precision", choices=("single", "double"), default=precision_default)
    parser.add_argument("--seed", type=int, default=0)


def _params_from_args(args) -> SchemeParams:
    inner = args.scheme in INNER_IDS
    if inner:
        if args.K is not None or args.L is not None:
            raise ValueError(f"{args.scheme} partitions the inner dimension: use --M, not --K/--L")
        parts = {"m_parts": args.M if args.M is not None else 8}
    else:
        if args.M is not None:
            raise ValueError(f"{args.scheme} partitions the outer dimensions: use --K/--L, not --M")
        parts = {
            "k_parts": args.K if args.K is not None else 4,
            "l_parts": args.L if args.L is not None else 4,
        }
    return SchemeParams(
        args.scheme,
        x=args.X,
        stragglers=args.S,
        n_workers=args.N,
        sigma2=args.sigma2,
        delta=args.delta,
        precision=args.precision,
        seed=args.seed,
        **parts,
    )


def _out_or_stdout(path):
    return path if path else sys.stdout


def cmd_run(args) -> int:
    params = _params_from_args(args)
    config = RunConfig(params, dims=_parse_size(args.size), trials=args.trials)
    result = run_local(config)
    run_to_csv(result, _out_or_stdout(args.out))
    if args.out:
        print(f"wrote {args.out}; median rel_error {result.median:.6g}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    params = _params_from_args(args)
    config = RunConfig(params, dims=_parse_size(args.size), trials=args.trials)
    pairs = sweep(config, args.axis, _parse_values(args.values))
    sweep_trials_to_csv(pairs, _out_or_stdout(args.out))
    if args.summary_out:
        sweep_summary_to_csv(pairs, args.summary_out)
    return 0


def _write_audit_csv(reports, path) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(["side", "subset", "frobenius_nats", "logdet_nats"])
        for side, report in reports:
            for subset, fro, logdet in report.entries:
                writer.writerow(
                    [side, "-".join(map(str, subset)), f"{fro:.17g}", f"{logdet:.17g}"]
                )
    finally:
        if path:
            fh.close()


def cmd_audit(args) -> int:
    if args.delta is None:
        raise ValueError("an audit needs --delta, the leakage target to check against")
    if args.sigma2 is not None:
        # --sigma2 overrides the calibrated variance; --delta stays the target
        target, args.delta = args.delta, None
        params = _params_from_args(args)
        args.delta = target
    else:
        params = _params_from_args(args)
    if params.x == 0:
        raise ValueError("an audit needs X >= 1: X = 0 encodes without any noise")
    t = args.t if args.t is not None else params.x
    schemes = generator_matrices(params)
    variances = params.noise_variances()
    reports = []
    worst = 0.0
    for side, scheme, sigma2 in zip("AB", schemes, variances):
        report = audit_scheme(
            scheme, sigma2, t, args.delta, sample=args.sample, rng_seed=params.seed
        )
        reports.append((side, report))
        worst = max(worst, report.worst_frobenius)
        status = "pass" if report.passed else "FAIL"
        print(
            f"{side}-side: worst leakage {report.worst_frobenius:.6g} nats over "
            f"{report.n_subsets} subsets of size {t} (target {args.delta:g}) -> {status}",
            file=sys.stderr,
        )
    if args.out or args.print_subsets:
        _write_audit_csv(reports, args.out)
    passed = all(report.passed for _, report in reports)
    print(f"overall: worst leakage {worst:.6g} nats -> {'pass' if passed else 'FAIL'}")
    return 0 if passed else 1


def cmd_bounds(args) -> int:
    reports = verify_bounds_exhaustive(args.n_max)
    violations = [r for r in reports if not r.ok]
    if args.out:
        reports_to_csv(reports, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    print(f"{len(reports)} subsets measured up to n = {args.n_max}; {len(violations)} violations")
    return 0 if not violations else 1


def cmd_serve_worker(args) -> int:
    server = cluster.serve_worker(args.host, args.port)
    print(f"listening on {server.server_address[0]}:{server.port}", flush=True)
    try:
        server.serve_forever(poll_interval=0.1)
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_coordinate(args) -> int:
    params = _params_from_args(args)
    addresses = _parse_workers(args.workers)
    # inputs match the simulator's first trial, so results line up run-for-run
    rng = np.random.default_rng(np.random.SeedSequence(params.seed, spawn_key=(0,)))
    a, b = sample_inputs(rng, params, _parse_size(args.size))
    product = cluster.coordinate(addresses, params, a, b, timeout=args.timeout)
    wide = np.complex128 if np.iscomplexobj(a) else np.float64
    exact = a.astype(wide) @ b.astype(wide)
    print(f"rel_error {relative_error(product, exact):.17g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdmm",
        description="Secure distributed matrix multiplication on roots of unity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one scheme locally, CSV of trial errors")
    _add_scheme_flags(run, "single")
    run.add_argument("--size", default="256,256,256", help="problem dims t,s,r")
    run.add_argument("--trials", type=int, default=50)
    run.add_argument("--out", help="CSV path (stdout when omitted)")
    run.set_defaults(func=cmd_run)

    swp = sub.add_parser("sweep", help="repeat runs while varying delta, X, or S")
    _add_scheme_flags(swp, "single")
    swp.add_argument("--axis", required=True, choices=SWEEP_AXES)
    swp.add_argument("--values", required=True, help="comma-separated values for the axis")
    swp.add_argument("--size", default="256,256,256", help="problem dims t,s,r")
    swp.add_argument("--trials", type=int, default=50)
    swp.add_argument("--out", help="per-trial CSV path (stdout when omitted)")
    swp.add_argument("--summary-out", help="per-value median/quantile CSV path")
    swp.set_defaults(func=cmd_sweep)

    audit = sub.add_parser("audit", help="exhaustive leakage audit of both generator sides")
    _add_scheme_flags(audit, "double")
    audit.add_argument("--t", type=int, help="colluding subset size (defaults to X)")
    audit.add_argument("--sample", type=int, help="sample this many subsets instead of all")
    audit.add_argument("--out", help="per-subset leakage CSV path")
    audit.add_argument(
        "--print-subsets", action="store_true", help="stream the per-subset CSV to stdout"
    )
    audit.set_defaults(func=cmd_audit)

    bounds = sub.add_parser("bounds", help="exhaustively verify the Vandermonde norm bounds")
    bounds.add_argument("--n-max", type=int, default=8)
    bounds.add_argument("--out", help="per-subset CSV path")
    bounds.set_defaults(func=cmd_bounds)

    serve = sub.add_parser("serve-worker", help="run one worker over TCP")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=0, help="0 picks a free port")
    serve.set_defaults(func=cmd_serve_worker)

    coord = sub.add_parser("coordinate", help="multiply over a fleet of TCP workers")
    _add_scheme_flags(coord, "double")
    coord.add_argument("--workers", required=True, help="comma-separated host:port list")
    coord.add_argument("--size", default="64,64,64", help="problem dims t,s,r")
    coord.add_argument("--timeout", type=float, default=30.0)
    coord.set_defaults(func=cmd_coordinate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InsufficientResponsesError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
