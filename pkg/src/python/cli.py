"""
Command-line front end.

Usage::

    python -m src.python [-v] <command> [options]

Commands
--------
constants   optimize a constant triple, or show published rows (--seed-table)
bound       theorem bound for a distribution and n
truncate    truncated bound minimized over the cut point
compare     CSV of Shao and theorem bounds over a parameter range
tails       CSV of log tail ratios against Student's t
verify      Monte Carlo check of a bound
selfcheck   numerical checks of the sharp constants and the published rows

Exit status is 0 on success, 1 on a computation error or a failed check, and
2 on a usage error.
"""

import argparse
import csv
import logging
import sys
from typing import List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .bounds import (
    format_number,
    minimize_truncated_bound,
    shao_bound,
    theorem_bound,
    truncated_bound,
)
from .config import Settings, configure_logging, get_settings
from .constants import (
    ConstantTriple,
    ParameterVector,
    check_published_row,
    combined_constants,
    optimize_constants,
)
from .errors import (
    ConfigurationError,
    MomentDivergenceError,
    SenbeError,
    SpecSyntaxError,
)
from .moments import (
    SPEC_GRAMMAR,
    DistributionSpec,
    analytic_moments,
    gamma_functionals,
    moment_summary,
    parse_distribution_spec,
)
from .tables import BE_NONIID, PUBLISHED_ROWS, ceil_to_published
from .verify import (
    check_bound_holds,
    lemma2_proof_checks,
    prop1_constants,
    prop1_gap,
    tail_ratio_data,
    theorem1_proof_checks,
)

logger = logging.getLogger(__name__)

COMPARE_COLUMNS = (
    "dist",
    "param",
    "n",
    "shao",
    "shao_trunc_min",
    "thm",
    "thm_trunc_min",
    "b_star_shao",
    "b_star_thm",
)
TAILS_COLUMNS = ("z", "log_ratio_phi", "log_ratio_phi_scaled", "log_ratio_phi_n")
SELFCHECK_N = (2, 10, 100, 10_000)


class UsageError(Exception):
    """Raised instead of exiting when the command line is malformed."""


class _Parser(argparse.ArgumentParser):
    stream: Optional[TextIO] = None

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")

    def _print_message(self, message: str, file: Optional[TextIO] = None) -> None:
        # help and version text follow the result stream; errors stay on stderr
        if self.stream is not None and file in (None, sys.stdout):
            file = self.stream
        super()._print_message(message, file)


def _reals(text: str, count: Optional[int] = None) -> Tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected reals, got {text!r}") from None
    if count is not None and len(values) != count:
        raise argparse.ArgumentTypeError(f"expected {count} values, got {text!r}")
    return values


def _triple_arg(text: str) -> Tuple[float, ...]:
    return _reals(text, 3)


def _int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _grid(text: str) -> np.ndarray:
    parts = text.split(":")
    try:
        lo, hi, points = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError):
        raise argparse.ArgumentTypeError(
            f"expected lo:hi:points, got {text!r}"
        ) from None
    if len(parts) != 3 or points < 1 or (points > 1 and not hi > lo):
        raise argparse.ArgumentTypeError(f"expected lo:hi:points, got {text!r}")
    return np.linspace(lo, hi, points)


def build_parser(out: Optional[TextIO] = None) -> argparse.ArgumentParser:
    """Argument parser for every command; help text is written to ``out``."""
    parser = _Parser(
        prog="senbe",
        description="Explicit Berry-Esseen bounds for self-normalized sums",
        epilog=SPEC_GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v progress, -vv detail"
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("constants", help="optimize or list constant triples")
    p.add_argument("--weights", type=_triple_arg, default=(1.0, 1.0, 1.0))
    p.add_argument("--be", type=float, default=BE_NONIID, help="0.56 or 0.4785")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument(
        "--seed-table",
        action="store_true",
        help="print the published rows for these weights instead of optimizing",
    )

    p = sub.add_parser("bound", help="theorem bound for a distribution")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--triple", help="published triple name, e.g. t1 or t4iid")
    group.add_argument("--A", dest="constants", type=_triple_arg, help="a3,a4,a6")
    p.add_argument(
        "--theorem", choices=("noniid", "iid"), default="noniid", help="form for --A"
    )

    p = sub.add_parser("truncate", help="truncated bound minimized over b")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--triple", default="t2")
    p.add_argument("--family", choices=("thm", "shao"), default="thm")

    p = sub.add_parser(
        "compare",
        help="CSV comparison over a parameter range",
        description="columns: " + ",".join(COMPARE_COLUMNS),
    )
    p.add_argument("--dist", choices=("student", "pareto"), required=True)
    p.add_argument("--param-range", type=_grid, required=True)
    p.add_argument("--n", type=_int_list, required=True)
    p.add_argument("--triple", default="t2")
    p.add_argument("--out", choices=("csv",), default="csv")

    p = sub.add_parser(
        "tails",
        help="CSV of log tail ratios",
        description="columns: " + ",".join(TAILS_COLUMNS),
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--z", type=_grid, required=True)

    p = sub.add_parser("verify", help="Monte Carlo check of a bound")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--triple", required=True)

    sub.add_parser("selfcheck", help="run the numerical self-checks")
    for p in (parser, *sub.choices.values()):
        if isinstance(p, _Parser):
            p.stream = out
    return parser


def _triple(args: argparse.Namespace) -> ConstantTriple:
    if getattr(args, "constants", None) is not None:
        a3, a4, a6 = args.constants
        return ConstantTriple.custom(a3, a4, a6, theorem=args.theorem)
    return ConstantTriple.published(args.triple)


def _cmd_constants(args: argparse.Namespace, cfg: Settings, out: TextIO) -> int:
    digits = cfg.output_digits
    weights = tuple(args.weights)
    if args.seed_table:
        rows = [
            r
            for r in PUBLISHED_ROWS
            if tuple(float(w) for w in r.weights) == weights
            and abs(r.be_const - args.be) < 1e-12
        ]
        if not rows:
            raise ConfigurationError(
                f"no published row for weights {weights} and be {args.be}"
            )
        blocks = []
        for row in rows:
            p = ParameterVector.from_row(row)
            t = combined_constants(p, row.be_const)
            lines = [f"row={row.name}", f"label={row.label}"]
            params = p.as_dict().items()
            lines += [f"{k}={format_number(v, digits)}" for k, v in params]
            for key, value, shown in zip(("A3", "A4", "A6"), t.values, row.triple):
                lines.append(f"{key}={format_number(value, digits)}")
                lines.append(f"{key}_ceiled={ceil_to_published(value, shown)}")
                lines.append(f"{key}_published={shown}")
            blocks.append("\n".join(lines))
        print("\n\n".join(blocks), file=out)
        return 0

    p, t = optimize_constants(
        weights, args.be, budget=args.budget, settings=cfg  # type: ignore[arg-type]
    )
    lines = [
        "weights=" + ",".join(format_number(w, digits) for w in weights),
        f"be={format_number(args.be, digits)}",
        "objective="
        + format_number(max(w * a for w, a in zip(weights, t.values)), digits),
    ]
    lines += [f"{k}={format_number(v, digits)}" for k, v in p.as_dict().items()]
    for key, value, case in zip(("A3", "A4", "A6"), t.values, t.attained_by):
        lines.append(f"{key}={format_number(value, digits)}")
        lines.append(f"{key}_case={case}")
    print("\n".join(lines), file=out)
    return 0


def _cmd_bound(args: argparse.Namespace, cfg: Settings, out: TextIO) -> int:
    spec = parse_distribution_spec(args.dist, cfg)
    t = _triple(args)
    if spec.is_truncated:
        assert spec.window is not None
        a, b = spec.window
        report = truncated_bound(spec, args.n, b, t, cfg, a=a)
    else:
        report = theorem_bound(moment_summary(spec, cfg).with_n(args.n), t)
    print(report.to_text(cfg.output_digits), file=out)
    return 0


def _cmd_truncate(args: argparse.Namespace, cfg: Settings, out: TextIO) -> int:
    spec = parse_distribution_spec(args.dist, cfg)
    t = ConstantTriple.published(args.triple) if args.family == "thm" else None
    b_star, report = minimize_truncated_bound(spec, args.n, t, args.family, cfg)
    print(f"b_star={format_number(b_star, cfg.output_digits)}", file=out)
    print(report.to_text(cfg.output_digits), file=out)
    return 0


def _untruncated_values(
    spec: DistributionSpec, n: int, t: ConstantTriple, cfg: Settings
) -> Tuple[float, float]:
    try:
        shao = shao_bound(gamma_functionals(spec, n, cfg), n).value
    except MomentDivergenceError:
        shao = float("inf")
    try:
        thm = theorem_bound(analytic_moments(spec, cfg).with_n(n), t).value
    except MomentDivergenceError:
        thm = float("inf")
    return shao, thm


def _cmd_compare(args: argparse.Namespace, cfg: Settings, out: TextIO) -> int:
    digits = cfg.output_digits
    t = ConstantTriple.published(args.triple)
    make = (
        DistributionSpec.student if args.dist == "student" else DistributionSpec.pareto
    )
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COMPARE_COLUMNS)
    for n in args.n:
        for param in args.param_range:
            spec = make(float(param))
            shao, thm = _untruncated_values(spec, n, t, cfg)
            b_shao, shao_min = minimize_truncated_bound(spec, n, None, "shao", cfg)
            b_thm, thm_min = minimize_truncated_bound(spec, n, t, "thm", cfg)
            values = (shao, shao_min.value, thm, thm_min.value, b_shao, b_thm)
            writer.writerow(
                [args.dist, format_number(float(param), digits), str(n)]
                + [format_number(v, digits) for v in values]
            )
    return 0


def _cmd_tails(args: argparse.Namespace, cfg: Settings, out: TextIO) -> int:
    digits = cfg.output_digits
    table = tail_ratio_data(args.n, [float(z) for z in args.z])
    for note in table.notes:
        logger.warning(note)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TAILS_COLUMNS)
    for row in table.rows:
        writer.writerow(
            [
                format_number(row.z, digits),
                format_number(row.log_ratio_phi, digits),
                format_number(row.log_ratio_phi_scaled, digits),
                format_number(row.log_ratio_phi_n, digits),
            ]
        )
    return 0


def _cmd_verify(args: argparse.Namespace, cfg: Settings, out: TextIO) -> int:
    spec = parse_distribution_spec(args.dist, cfg)
    check = check_bound_holds(
        spec,
        args.n,
        args.samples,
        args.seed,
        triple=ConstantTriple.published(args.triple),
        settings=cfg,
    )
    print(check.to_text(cfg.output_digits), file=out)
    return 0 if check.passed else 1


def _cmd_selfcheck(args: argparse.Namespace, cfg: Settings, out: TextIO) -> int:
    results: List[Tuple[str, bool]] = []
    prop1 = prop1_constants()
    sharp = abs(prop1.sup2C - 2.0 * prop1.C) <= 1e-9
    results.append(("prop1_sup_equals_2C", sharp))
    for n in SELFCHECK_N:
        results.append((f"prop1_gap_n={n}", prop1_gap(n) < prop1.C / (n - 1)))
    results.append(("lemma2", lemma2_proof_checks().passed))
    results.append(("theorem1_auxiliary", theorem1_proof_checks().passed))
    for row in PUBLISHED_ROWS:
        results.append((f"row_{row.name}", check_published_row(row.name).passed))
    for name, ok in results:
        print(f"{name}={'ok' if ok else 'FAIL'}", file=out)
    return 0 if all(ok for _, ok in results) else 1


_COMMANDS = {
    "constants": _cmd_constants,
    "bound": _cmd_bound,
    "truncate": _cmd_truncate,
    "compare": _cmd_compare,
    "tails": _cmd_tails,
    "verify": _cmd_verify,
    "selfcheck": _cmd_selfcheck,
}


def run(
    argv: Optional[Sequence[str]] = None,
    out: Optional[TextIO] = None,
    settings: Optional[Settings] = None,
) -> int:
    """Parse ``argv``, run one command and return the exit status."""
    stdout = out if out is not None else sys.stdout
    parser = build_parser(stdout)
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"{exc}\n\n{parser.format_usage()}\n{SPEC_GRAMMAR}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        # --help
        return int(exc.code or 0)
    configure_logging(args.verbose)
    try:
        cfg = settings if settings is not None else get_settings()
        return _COMMANDS[args.command](args, cfg, stdout)
    except SpecSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SenbeError as exc:
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
