"""Batch command-line interface.

Every flag can also be set through an environment variable named
``UGEN_<FLAG>`` (upper case, dashes as underscores), e.g. ``UGEN_SEED=7``.
Command-line values win over the environment.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analytic, ncp, search
from .channel import KrausChannel, stinespring_dilate
from .errors import UgenError
from .io import InputError, complex_matrix, dumps, read_json, write_csv, write_json
from .matching import solve_env
from .qstate import TwoQubitState
from .unitary import CNOT, SWAP, NonlocalParams, nonlocal_unitary

log = logging.getLogger("ugen")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNRESOLVED = 3
ENV_PREFIX = "UGEN_"

_GATES = {"cnot": CNOT, "swap_cnot": SWAP @ CNOT, "swap": SWAP, "identity": np.eye(4, dtype=complex)}


def _env(name: str, default, cast=str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return default
    if cast is bool:
        return raw.strip().lower() in {"1", "true", "yes", "on"}
    return cast(raw)


def _tol(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1e-3:
        raise argparse.ArgumentTypeError(f"tol must lie in (0, 1e-3], got {v}")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--tol", type=_tol, default=_env("tol", 1e-6, float))
    p.add_argument("--workers", type=int, default=_env("workers", 1, int))
    p.add_argument("--out", type=Path, default=_env("out", None, Path), help="output directory")
    p.add_argument("--strict", action="store_true", default=_env("strict", False, bool))
    p.add_argument("--tii", action="store_true", default=_env("tii", False, bool),
                   help="draw nonzero diagonal correlations in sweep cases")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="ugen", description="Product-state generation of correlated qubit dynamics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("werner", parents=[common], help="minimum strength and fidelity for Werner states")
    p.add_argument("--lambda-steps", type=int, default=_env("lambda_steps", 21, int))
    p.add_argument("--numerical", action="store_true", help="also run the direct search per point")

    p = sub.add_parser("swapcnot", parents=[common], help="R_y-rotated Bell state under SWAP.CNOT")
    p.add_argument("--theta-steps", type=int, default=_env("theta_steps", 25, int))

    p = sub.add_parser("ncp", parents=[common], help="realigned spectra of the correlated CNOT family")
    p.add_argument("--p", type=str, default=_env("p", "0.25,0.5,0.75"), help="comma-separated p values")
    p.add_argument("--t-steps", type=int, default=_env("t_steps", 50, int))

    p = sub.add_parser("sweep", parents=[common], help="random three-parameter campaign")
    p.add_argument("--n", type=int, default=_env("n", 1000, int))
    p.add_argument("--cases", type=Path, default=None, help="replay a case-list JSON instead of generating")
    p.add_argument("--export-cases", type=Path, default=None)
    p.add_argument("--no-kraus", action="store_true")

    p = sub.add_parser("solve", parents=[common], help="solve the matching condition for one case")
    p.add_argument("--case", type=Path, required=True)

    p = sub.add_parser("dilate", parents=[common], help="single-ancilla dilation of a two-term channel")
    p.add_argument("--channel", type=Path, required=True)
    return parser


def _emit_json(args, name: str, obj) -> None:
    if args.out is None:
        sys.stdout.write(dumps(obj) + "\n")
    else:
        write_json(args.out / name, obj)


def _out_dir(args) -> Path:
    return Path(".") if args.out is None else args.out


def cmd_werner(args) -> int:
    grid = np.linspace(0, 1, args.lambda_steps)
    header = ["lambda", "epsilon_min", "axis_x", "axis_y", "axis_z", "zeta_x", "zeta_y", "zeta_z", "fidelity"]
    if args.numerical:
        header.append("epsilon_numeric")
    rows = []
    for lam in grid:
        s = analytic.werner_epsilon_min(float(lam))
        row = [s.lam, s.epsilon_min, *s.axis, *s.zeta, s.fidelity]
        if args.numerical:
            row.append(analytic.werner_numerical(float(lam)).epsilon_min)
        rows.append(row)
    path = write_csv(_out_dir(args) / "werner.csv", header, rows)
    log.info("wrote %s", path)
    return EXIT_OK


def cmd_swapcnot(args) -> int:
    grid = np.linspace(0, np.pi / 2, args.theta_steps)
    table = analytic.swapcnot_ry_sweep(grid, workers=args.workers)
    path = write_csv(_out_dir(args) / "swapcnot.csv", ["theta", "epsilon_min"], table)
    log.info("wrote %s", path)
    return EXIT_OK


def cmd_ncp(args) -> int:
    try:
        ps = [float(x) for x in args.p.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--p expects comma-separated numbers, got {args.p!r}")
    t_grid = np.pi / 2 * np.arange(1, args.t_steps + 1) / args.t_steps
    rows = ncp.spectra_table(ps, t_grid)
    header = ["p", "t", "closed_form", "numeric_min_eig", "mitigated_min_eig"]
    path = write_csv(_out_dir(args) / "ncp.csv", header, [[r[h] for h in header] for r in rows])
    log.info("wrote %s", path)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.cases is not None:
        data = read_json(args.cases)
        try:
            cases = [search.CaseRecord.from_dict(d) for d in data["cases"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.cases}: bad case list ({exc})") from exc
        report = search.sweep_cases(cases, args.tol, args.workers, kraus=not args.no_kraus)
    else:
        report = search.sweep(args.n, args.seed, args.tol, args.workers, tii=args.tii, kraus=not args.no_kraus)
    out = _out_dir(args)
    rows = report.rows()
    header = list(rows[0].keys()) if rows else ["id"]
    write_csv(out / "sweep.csv", header, [[r[h] for h in header] for r in rows])
    summary = report.summary()
    write_json(out / "sweep_summary.json", summary)
    if args.export_cases is not None:
        args.export_cases.parent.mkdir(parents=True, exist_ok=True)
        args.export_cases.write_text(search.cases_to_json([o.case for o in report.outcomes]))
    log.info("retained %d, resolved %d", summary["retained"], summary["resolved"])
    if args.strict and summary["resolved"] < summary["retained"]:
        return EXIT_UNRESOLVED
    return EXIT_OK


def load_case_file(path: Path) -> tuple[np.ndarray, TwoQubitState]:
    """A case file holds ``state`` plus one of ``U``, ``alpha`` or ``gate``."""
    data = read_json(path)
    try:
        state = TwoQubitState.from_dict(data["state"])
        if "U" in data:
            U = complex_matrix(data["U"])
        elif "alpha" in data:
            U = nonlocal_unitary(NonlocalParams(data["alpha"]))
        else:
            U = _GATES[data.get("gate", "cnot").lower()]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad case file ({exc})") from exc
    return U, state


def cmd_solve(args) -> int:
    U, state = load_case_file(args.case)
    sol = solve_env(U, state, tol=args.tol)
    _emit_json(args, "solution.json", sol.to_dict())
    if args.strict and not sol.is_valid:
        return EXIT_UNRESOLVED
    return EXIT_OK


def cmd_dilate(args) -> int:
    data = read_json(args.channel)
    try:
        ch = KrausChannel.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.channel}: bad channel ({exc})") from exc
    d = stinespring_dilate(ch)
    out = d.to_dict()
    out["unitarity_defect"] = float(np.abs(d.W.conj().T @ d.W - np.eye(4)).max())
    _emit_json(args, "dilation.json", out)
    return EXIT_OK


COMMANDS = {
    "werner": cmd_werner,
    "swapcnot": cmd_swapcnot,
    "ncp": cmd_ncp,
    "sweep": cmd_sweep,
    "solve": cmd_solve,
    "dilate": cmd_dilate,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, FileNotFoundError) as exc:
        print(f"ugen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UgenError as exc:
        print(f"ugen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
