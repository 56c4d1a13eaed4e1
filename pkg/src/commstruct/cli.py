"""Command-line entry point: ``commstruct generate|ratios|sweep|report|oracle``.

Exit codes for ``ratios``: 0 has structure, 1 no structure, 2 indeterminate.
Errors use codes above 2.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .conductance import (CommunityBounds, c_ratio, c_ratio_oracle_small, discover_communities,
                          format_communities)
from .criterion import (DEFAULT_THRESHOLDS, HAS_STRUCTURE, INDETERMINATE, NO_STRUCTURE,
                        EvaluateOptions, evaluate, graph_digest)
from .entropy import exact_entropy_small, maximize_entropy_ratio
from .errors import CommStructError, DomainError, EmptyGraphError, OracleRefusal, ParseError
from .generators import GenSpec, generate
from .graph import format_edge_list, read_edge_list
from .modularity import exact_modularity_small, maximize_modularity
from .partition import format_partition
from .sweep import (ER_DEFAULT_GRID, PA_DEFAULT_GRID, SweepSpec, aggregate_rows,
                    format_aggregate, run_sweep)

log = logging.getLogger("commstruct")

EXIT_CODES = {HAS_STRUCTURE: 0, NO_STRUCTURE: 1, INDETERMINATE: 2}
EXIT_PARSE, EXIT_EMPTY, EXIT_DOMAIN, EXIT_IO, EXIT_USAGE = 3, 4, 5, 6, 7

REPORT_COLUMNS = ("network", "n", "m", "tau", "sigma", "theta", "verdict",
                  "sigma_minus_tau", "alpha_in_band")


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-size", type=int, default=None,
                   help="smallest community size (default: ceil(log n))")
    p.add_argument("--max-size", type=int, default=None,
                   help="largest community size (default: ceil(sqrt n) - 1)")
    p.add_argument("--log-base", type=float, default=2.0,
                   help="base of the logarithm in the default size window")
    p.add_argument("--degree-mode", choices=("full", "internal"), default="full")
    p.add_argument("--seed-fraction", type=float, default=None)
    p.add_argument("--thresholds", default="0,0.3,0.3",
                   help="tau,sigma,theta thresholds")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true",
                   help="record wall-clock times (output is then not byte-reproducible)")


class _Parser(argparse.ArgumentParser):
    # argparse's default exit status 2 would read as "indeterminate"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = _Parser(prog="commstruct", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["generate"] = sub.add_parser("generate", help="write a random ER or PA graph")
    p.add_argument("--model", choices=("er", "pa"), required=True, type=str.lower)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o", default="-")

    p = subs["ratios"] = sub.add_parser("ratios", help="estimate tau, sigma and theta for an edge list")
    p.add_argument("input")
    p.add_argument("--which", choices=("all", "entropy", "modularity", "conductance"), default="all")
    p.add_argument("--reject-directed", action="store_true")
    p.add_argument("--partition-out", default=None)
    p.add_argument("--communities-out", default=None)
    _add_estimator_flags(p)

    p = subs["sweep"] = sub.add_parser("sweep", help="ratio sweep over an ER p-grid or PA d-grid")
    p.add_argument("--model", choices=("er", "pa"), required=True, type=str.lower)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--grid", default=None, help="comma-separated p or d values")
    p.add_argument("--seeds-per-cell", type=int, default=3)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--cell-timeout", type=float, default=None)
    p.add_argument("--aggregate", choices=("mean", "median"), default=None)
    p.add_argument("--aggregate-out", default=None)
    _add_estimator_flags(p)
    p.set_defaults(restarts=8)

    p = subs["report"] = sub.add_parser("report", help="ratio table for a directory of edge lists")
    p.add_argument("corpus")
    p.add_argument("--csv", default=None, help="also write the table as CSV here")
    _add_estimator_flags(p)

    p = subs["oracle"] = sub.add_parser("oracle", help="exhaustive optima for tiny graphs")
    p.add_argument("input")
    p.add_argument("--which", choices=("modularity", "entropy", "conductance"), required=True)
    p.add_argument("--min-size", type=int, default=None)
    p.add_argument("--max-size", type=int, default=None)
    p.add_argument("--k-max", type=int, default=3)
    p.add_argument("--degree-mode", choices=("full", "internal"), default="full")

    for p in subs.values():
        p.add_argument("--config", default=None, help="flat key=value file of flag defaults")
    return parser, subs


def _read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ParseError(f"{path}: expected key=value, got {line!r}", lineno)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(parser, subs, argv) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    command = next((a for a in argv if a in subs), None)
    config = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif a.startswith("--config="):
            config = a.split("=", 1)[1]
    if command is None or config is None:
        return parser.parse_args(argv)
    sp = subs[command]
    known = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, raw in _read_config(config).items():
        action = known.get(key)
        if action is None or key == "config":
            raise ParseError(f"{config}: unknown key {key!r}")
        if action.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = action.type(raw) if action.type else raw
        # a value from the config satisfies a required flag
        action.required = False
    sp.set_defaults(**defaults)
    return parser.parse_args(argv)


def _bounds(args, n: int) -> CommunityBounds | None:
    if args.min_size is None and args.max_size is None:
        return None
    default = CommunityBounds.default(n, getattr(args, "log_base", 2.0))
    lo = args.min_size if args.min_size is not None else (default.min_size if default else 1)
    hi = args.max_size if args.max_size is not None else (default.max_size if default else n - 1)
    return CommunityBounds(lo, hi)


def _options(args, n: int | None = None) -> EvaluateOptions:
    thresholds = tuple(float(t) for t in args.thresholds.split(","))
    if len(thresholds) != 3:
        raise ValueError("--thresholds needs three comma-separated values")
    return EvaluateOptions(restarts=args.restarts, seed=args.seed,
                           bounds=_bounds(args, n) if n is not None else None,
                           log_base=args.log_base, thresholds=thresholds,
                           degree_mode=args.degree_mode, seed_fraction=args.seed_fraction,
                           workers=args.workers, record_times=args.timing)


def cmd_generate(args) -> int:
    spec = GenSpec(args.model.upper(), args.n, p=args.p, d=args.d, seed=args.seed)
    G = generate(spec)
    text = format_edge_list(G)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    print(f"n={G.n} m={G.m}", file=sys.stderr)
    return 0


def _warn_vacuous(n: int, bounds) -> None:
    if bounds is None:
        log.warning("no community size satisfies log n <= s < sqrt n for n=%d; "
                    "theta is not evaluable (use --min-size/--max-size)", n)


def cmd_ratios(args) -> int:
    G = read_edge_list(args.input, directed_as_undirected=not args.reject_directed)
    opts = _options(args, G.n)
    bounds = opts.bounds or CommunityBounds.default(G.n, opts.log_base)
    if args.which in ("all", "conductance"):
        _warn_vacuous(G.n, bounds)
    if args.which == "all":
        report = evaluate(G, opts, provenance={"source": Path(args.input).name,
                                               "source_sha256": graph_digest(G)})
        sys.stdout.write(report.to_record())
        return EXIT_CODES[report.verdict]
    t_tau, t_sigma, t_theta = opts.thresholds
    if args.which == "modularity":
        res = maximize_modularity(G, opts.restarts, opts.seed, opts.workers)
        value, passed = res.value, res.value > t_sigma
        print(f"sigma={value!r}")
    elif args.which == "entropy":
        mod = maximize_modularity(G, opts.restarts, opts.seed, opts.workers)
        res = maximize_entropy_ratio(G, opts.restarts, opts.seed, [mod.partition],
                                     opts.degree_mode, opts.workers)
        value, passed = res.value, res.value > t_tau
        print(f"tau={value!r}")
    else:
        if bounds is None:
            print("theta=none")
            return EXIT_CODES[INDETERMINATE]
        cs = discover_communities(G, bounds, opts.seed_fraction, opts.seed, opts.workers)
        value = c_ratio(cs)
        passed = value > t_theta
        print(f"theta={value!r}")
        print(f"communities={len(cs)}")
        if args.communities_out:
            Path(args.communities_out).write_text(format_communities(cs), encoding="utf-8")
    if args.which != "conductance" and args.partition_out:
        Path(args.partition_out).write_text(format_partition(res.partition), encoding="utf-8")
    return 0 if passed else 1


def cmd_sweep(args) -> int:
    model = args.model.upper()
    if args.grid:
        grid = tuple(float(x) if model == "ER" else int(x) for x in args.grid.split(","))
    else:
        grid = ER_DEFAULT_GRID if model == "ER" else PA_DEFAULT_GRID
    opts = _options(args)
    if args.min_size is not None or args.max_size is not None:
        opts = replace(opts, bounds=_bounds(args, args.n))
    _warn_vacuous(args.n, opts.bounds or CommunityBounds.default(args.n, opts.log_base))
    spec = SweepSpec(model, args.n, grid, args.seeds_per_cell, args.base_seed, opts)

    def progress(row):
        log.info("%s n=%d param=%s seed=%d -> %s", row.model, row.n, row.param, row.seed, row.verdict)

    rows = run_sweep(spec, args.out, workers=args.workers, cell_timeout=args.cell_timeout,
                     progress=progress)
    if args.aggregate:
        text = format_aggregate(aggregate_rows(rows, args.aggregate, opts.thresholds))
        target = args.aggregate_out or str(Path(args.out).with_suffix(f".{args.aggregate}.csv"))
        Path(target).write_text(text, encoding="utf-8")
    return 0


def _report_table(rows: list[dict]) -> str:
    lines = ["{:<24} {:>8} {:>9} {:>7} {:>7} {:>7}  {:<14} {:>7}  {}".format(
        "network", "n", "m", "tau", "sigma", "theta", "verdict", "s-t", "alpha_band")]
    for r in rows:
        theta = "-" if r["theta"] is None else f"{r['theta']:.2f}"
        lines.append("{:<24} {:>8} {:>9} {:>7.2f} {:>7.2f} {:>7}  {:<14} {:>7.2f}  {}".format(
            r["network"], r["n"], r["m"], r["tau"], r["sigma"], theta, r["verdict"],
            r["sigma_minus_tau"], "yes" if r["alpha_in_band"] else "no"))
    return "\n".join(lines) + "\n"


def report_rows(corpus: Path, opts_for) -> tuple[list[dict], list[tuple[str, str]]]:
    rows, errors = [], []
    for path in sorted(p for p in corpus.iterdir() if p.is_file()):
        try:
            G = read_edge_list(path)
            report = evaluate(G, opts_for(G.n), provenance={"source": path.name})
        except (CommStructError, UnicodeDecodeError, OSError) as exc:
            errors.append((path.name, str(exc)))
            continue
        diff = report.sigma - report.tau
        rows.append({"network": path.stem, "n": G.n, "m": G.m, "tau": report.tau,
                     "sigma": report.sigma, "theta": report.theta, "verdict": report.verdict,
                     "sigma_minus_tau": diff, "alpha_in_band": 0.2 <= diff <= 0.3})
    return rows, errors


def format_report_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in rows:
        writer.writerow([r["network"], r["n"], r["m"], repr(r["tau"]), repr(r["sigma"]),
                         "" if r["theta"] is None else repr(r["theta"]), r["verdict"],
                         repr(r["sigma_minus_tau"]), str(r["alpha_in_band"]).lower()])
    return buf.getvalue()


def cmd_report(args) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise FileNotFoundError(f"{corpus} is not a directory")
    rows, errors = report_rows(corpus, lambda n: _options(args, n))
    sys.stdout.write(_report_table(rows))
    for name, message in errors:
        print(f"error: {name}: {message}", file=sys.stderr)
    if args.csv:
        Path(args.csv).write_text(format_report_csv(rows), encoding="utf-8")
    return EXIT_PARSE if errors else 0


def cmd_oracle(args) -> int:
    G = read_edge_list(args.input)
    if args.which == "modularity":
        res = exact_modularity_small(G)
        print(f"sigma={res.value!r}")
        sys.stdout.write(format_partition(res.partition))
    elif args.which == "entropy":
        res = exact_entropy_small(G, args.degree_mode)
        print(f"tau={res.value!r}")
        sys.stdout.write(format_partition(res.partition))
    else:
        bounds = CommunityBounds(args.min_size or 1, args.max_size or G.n - 1)
        cs, theta = c_ratio_oracle_small(G, bounds, args.k_max)
        print(f"theta={theta!r}")
        sys.stdout.write(format_communities(cs))
    return 0


COMMANDS = {"generate": cmd_generate, "ratios": cmd_ratios, "sweep": cmd_sweep,
            "report": cmd_report, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser, subs = build_parser()
    try:
        args = _apply_config(parser, subs, argv)
    except (ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except EmptyGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, OracleRefusal) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
