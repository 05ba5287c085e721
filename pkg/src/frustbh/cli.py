"""Command-line entry point: ``frustbh {sweep,point,oracle,plotdata}``.

Exit codes: 0 success, 1 configuration or usage error, 2 every point (or
the oracle check) failed, 3 some points failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ModelConfig, ObservableConfig, SolverConfig, load_config
from .correlators import dimer_report
from .dimer_oracle import (
    dimer_average_closed,
    dimer_xy_delta_closed,
    dimer_zz_delta_closed,
    perfect_dimer_state,
)
from .fock import default_n_max, n_states
from .sweep import (
    COLUMNS,
    SweepError,
    emit_plot_data,
    read_records,
    run_point,
    run_sweep,
    with_output,
)

EXIT_OK, EXIT_CONFIG, EXIT_ALL_FAILED, EXIT_PARTIAL = 0, 1, 2, 3


def _cmd_sweep(args) -> int:
    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output is not None or args.format is not None:
        config = with_output(config, args.output or config.output.path, args.format)
    try:
        outcome = run_sweep(config)
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(
        f"{outcome.n_points - outcome.n_failed}/{outcome.n_points} points written to {outcome.path}"
        + (f"; see {outcome.notes_path}" if outcome.notes else "")
    )
    return outcome.exit_code


def _cmd_point(args) -> int:
    M = args.M
    N = args.N if args.N is not None else M // 2
    if args.hardcore and args.nmax not in (None, 1):
        print(f"error: --hardcore requires --nmax 1, got {args.nmax}", file=sys.stderr)
        return EXIT_CONFIG
    n_max = args.nmax if args.nmax is not None else default_n_max(N, args.hardcore)
    if M < 2 or n_states(M, N, n_max) == 0:
        print(f"error: no basis states for M={M}, N={N}, n_max={n_max}", file=sys.stderr)
        return EXIT_CONFIG
    if args.t2 == 0:
        print("error: --t2 must be nonzero", file=sys.stderr)
        return EXIT_CONFIG
    model = ModelConfig(M, N, n_max, args.boundary, args.hardcore, args.t2, N * 2 == M)
    obs = ObservableConfig(
        dimer_xy=M >= 4, dimer_zz=M >= 4, ggm=not args.no_ggm, ggm_scope=args.ggm_scope,
    )
    res = run_point(model, args.t1, args.U, SolverConfig(args.tol, args.max_iter, args.seed), obs, args.Nq)
    for n in res.notes:
        print(f"{n.kind}: {n.field}: {n.message}", file=sys.stderr)
    if res.failed:
        return EXIT_ALL_FAILED
    rec = res.record
    if args.json:
        print(json.dumps(rec.to_json(), indent=1))
    else:
        width = max(map(len, COLUMNS))
        for c, v in zip(COLUMNS, rec.to_row()):
            print(f"{c:<{width}}  {v}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    M = args.M
    if M % 2 or M < 8:
        print(f"error: closed forms need even M >= 8, got {M}", file=sys.stderr)
        return EXIT_CONFIG
    psi = perfect_dimer_state(M)
    worst = abs(np.linalg.norm(psi.amplitudes) - 1.0)
    print(f"perfect dimer state, M={M}: dimension {psi.basis.dimension}, norm error {worst:.2e}")
    for channel, closed in (("xy", dimer_xy_delta_closed), ("zz", dimer_zz_delta_closed)):
        rep = dimer_report(psi, channel, "current" if channel == "xy" else None)
        print(f"D_{channel}(delta): delta, numeric, closed form")
        for d in range(M - 2):
            num, ref = rep.values[d], closed(M, d)
            worst = max(worst, abs(num - ref))
            print(f"  {d:3d}  {num: .17g}  {ref: .17g}")
        ref = dimer_average_closed(M, channel)
        worst = max(worst, abs(rep.average - ref))
        print(f"D_{channel} average: numeric {rep.average:.17g}, closed form {ref:.17g}")
    ok = worst <= args.atol
    print(f"max deviation {worst:.3e} ({'PASS' if ok else 'FAIL'} at {args.atol:g})")
    return EXIT_OK if ok else EXIT_ALL_FAILED


def _cmd_plotdata(args) -> int:
    try:
        records = read_records(args.results)
        text = emit_plot_data(records, args.quantity, args.output)
    except (SweepError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output is None:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="frustbh",
        description="Exact diagonalization of the frustrated 1D Bose-Hubbard chain.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="run a configured (t1/t2, U') grid")
    s.add_argument("config", type=Path)
    s.add_argument("-o", "--output", type=Path, help="override [output] path")
    s.add_argument("--format", choices=("csv", "json"), help="override [output] format")
    s.set_defaults(func=_cmd_sweep)

    s = sub.add_parser("point", help="evaluate a single parameter set")
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--N", type=int, help="particle number (default M/2)")
    s.add_argument("--nmax", type=int, help="occupation cap (default 1 if hard-core, else min(N, 5))")
    s.add_argument("--t1", type=float, required=True)
    s.add_argument("--t2", type=float, default=-1.0)
    s.add_argument("--U", type=float, default=0.0)
    s.add_argument("--boundary", choices=("open", "periodic"), default="open")
    s.add_argument("--hardcore", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--max-iter", type=int, default=5000)
    s.add_argument("--Nq", type=int, default=1000, help="momentum grid size")
    s.add_argument("--ggm-scope", choices=("all", "contiguous+parity"), default="all")
    s.add_argument("--no-ggm", action="store_true", help="skip the bipartition search")
    s.add_argument("--json", action="store_true", help="print the record as JSON")
    s.set_defaults(func=_cmd_point)

    s = sub.add_parser("oracle", help="check perfect-dimer correlators against closed forms")
    s.add_argument("--M", type=int, default=20)
    s.add_argument("--atol", type=float, default=1e-12)
    s.set_defaults(func=_cmd_oracle)

    s = sub.add_parser("plotdata", help="emit a ratio x U' matrix for one quantity")
    s.add_argument("results", type=Path, help="sweep output (CSV or JSON)")
    s.add_argument("quantity", help="column name, e.g. ggm or Sq_norm")
    s.add_argument("-o", "--output", type=Path, help="write here instead of stdout")
    s.set_defaults(func=_cmd_plotdata)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
