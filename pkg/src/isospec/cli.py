"""Command-line front end.

Subcommands: ``solve`` (factorize, spectra, partner ladder), ``deform``
(one-parameter isospectral deformation), ``chain`` (multi-parameter chain),
``verify`` (full invariant suite).  Exit codes: 0 success, 1 invariant
failure, 2 input error, 3 singular deformation parameter.
"""

from __future__ import annotations

import argparse
import sys

from .catalog import CATALOG_NAMES, PotentialSpec
from .errors import IsospecError, SingularParameterError, TableFormatError
from .report import (
    RunConfig,
    all_invariants_pass,
    emit_report,
    prepare_problem,
    run_chain,
    run_deform,
    run_solve,
    run_verify,
)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_INPUT = 2
EXIT_SINGULAR = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isospec",
        description=(
            "Factorize 1-D Schrodinger potentials and build strictly "
            "isospectral deformation families, verifying the spectral "
            "identities by direct computation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("solve", "factorize a potential and compare both partner spectra"),
        ("deform", "build a one-parameter isospectral deformation"),
        ("chain", "iterate deformations for a multi-parameter family"),
        ("verify", "run the invariant suite and report pass/fail per item"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument(
            "--potential",
            default="harmonic",
            help=f"catalog name {CATALOG_NAMES} or path to a CSV table",
        )
        cmd.add_argument("--omega", type=float, help="harmonic frequency (default 1)")
        cmd.add_argument("--a", type=float, help="well-depth parameter (default 1)")
        cmd.add_argument("--xmin", type=float, help="left edge of the grid")
        cmd.add_argument("--xmax", type=float, help="right edge of the grid")
        cmd.add_argument("--n", type=int, help="grid point count (odd)")
        cmd.add_argument("--k", type=int, default=6, help="eigenvalues to compare")
        cmd.add_argument("--lambda", dest="lam", type=float, help="deformation parameter")
        cmd.add_argument(
            "--lambdas", help="comma-separated deformation parameters (chain)"
        )
        cmd.add_argument(
            "--integral-origin",
            choices=("left", "mid"),
            default="left",
            help="lower limit convention for running integrals",
        )
        cmd.add_argument("--format", choices=("json", "csv"), default="json")
        cmd.add_argument("--out", help="output file (default: stdout)")
        cmd.add_argument(
            "--figures", metavar="DIR", help="render figures into this directory"
        )
        cmd.add_argument(
            "--no-timestamp",
            action="store_true",
            help="omit the generation timestamp (byte-stable output)",
        )
    return parser


def _potential_spec(args: argparse.Namespace) -> PotentialSpec:
    name = args.potential
    if name in CATALOG_NAMES:
        params = {}
        if args.omega is not None:
            params["omega"] = args.omega
        if args.a is not None:
            params["a"] = args.a
        return PotentialSpec("catalog", catalog_name=name, params=params)
    return PotentialSpec("tabulated", table_path=name)


def _run_config(args: argparse.Namespace) -> RunConfig:
    grid = None
    grid_args = (args.xmin, args.xmax, args.n)
    if any(v is not None for v in grid_args):
        if any(v is None for v in grid_args):
            raise ValueError("--xmin, --xmax and --n must be given together")
        grid = (args.xmin, args.xmax, args.n)
    lambdas: tuple[float, ...] = ()
    if args.lam is not None and args.lambdas:
        raise ValueError("give either --lambda or --lambdas, not both")
    if args.lam is not None:
        lambdas = (args.lam,)
    elif args.lambdas:
        try:
            lambdas = tuple(float(tok) for tok in args.lambdas.split(",") if tok.strip())
        except ValueError:
            raise ValueError(f"could not parse --lambdas {args.lambdas!r}")
    return RunConfig(
        potential=_potential_spec(args),
        grid=grid,
        k=args.k,
        lambdas=lambdas,
        integral_origin=args.integral_origin,
        output_format=args.format,
        output_path=args.out,
        figures_dir=args.figures,
        timestamp=not args.no_timestamp,
    )


_RUNNERS = {
    "solve": run_solve,
    "deform": run_deform,
    "chain": run_chain,
    "verify": run_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _run_config(args)
        if args.command == "deform" and len(config.lambdas) != 1:
            raise ValueError("deform requires exactly one --lambda")
        if args.command == "chain" and not config.lambdas:
            raise ValueError("chain requires at least one parameter via --lambdas")
        problem = prepare_problem(config)
        report = _RUNNERS[args.command](problem)
    except SingularParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.interval is not None:
            lo, hi = exc.interval
            print(
                f"excluded parameter interval: [{lo:.6g}, {hi:.6g}]", file=sys.stderr
            )
        return EXIT_SINGULAR
    except (OSError, ValueError, TableFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IsospecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    payload = emit_report(report, config)
    if not config.output_path:
        sys.stdout.write(payload)
    if args.command == "verify" and not all_invariants_pass(report):
        failures = [e["name"] for e in report["invariants"] if not e["passed"]]
        print(f"failed invariants: {','.join(failures)}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
