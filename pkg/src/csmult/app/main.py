"""Command-line entry point for csmult."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Sequence

from csmult.analysis.geometry import DomainConstructionError
from csmult.app.report import FAIL, NOT_ASSERTED, PASS, RunReport, write_reports
from csmult.app.suite import (
    CONFIG_DOMAIN,
    CheckSpec,
    SuiteContext,
    load_manifest,
    run_checks,
)
from csmult.config import Settings
from csmult.experiment import ConfigError, ExperimentConfig, default_experiment, load_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="csmult",
        description="Multiplier checks for Cauchy–Stieltjes integrals on polynomial-image domains",
    )
    parser.add_argument("--config", type=Path, help="JSON experiment config merged over the defaults")
    parser.add_argument("--out", help="Directory for the JSON report and CSV summary")
    parser.add_argument("--n-override", type=int, help="Override the level-curve node count n")
    parser.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("domain-info", help="Arc length, chord-arc constant and speed of the configured domain")
    for name, text in (
        ("lambda", "Havin functional Λ(f)"),
        ("mult-bound", "Lower bound for the multiplier norm of f"),
        ("theorem1", "Check mult_lower ≤ ‖f‖_E∞ + Λ(f)"),
        ("vinogradov", "Collect Λ(f) and ‖f′‖_H¹ on the disc (not asserted)"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("function", help="Function name from the config")
    theorem2 = sub.add_parser("theorem2", help="Check Λ(f) ≤ C(p, s0, c0)·‖f′‖_Ep")
    theorem2.add_argument("function", help="Function name from the config")
    theorem2.add_argument("--p", type=float, action="append",
                          help="Exponent p > 1 (repeatable; default: search.p_values)")
    knorm = sub.add_parser("knorm", help="Bracket the K(G) norm of K_μ")
    knorm.add_argument("measure", help="Measure name from the config")
    verify = sub.add_parser("verify", help="Run the acceptance suite")
    verify.add_argument("--manifest", type=Path, help="Acceptance manifest (default: shipped acceptance.toml)")
    return parser.parse_args(argv)


def build_checks(args: argparse.Namespace, config: ExperimentConfig) -> List[CheckSpec]:
    """Checks for a single-functional subcommand, all on the configured domain."""
    theorem_tol = config.tolerances.theorem
    if args.command == "domain-info":
        return [
            CheckSpec("s0", "s0"),
            CheckSpec("chord-arc", "chord-arc", params={"n": config.domain.n_check}),
            CheckSpec("min-speed", "min-speed"),
            CheckSpec("arc-length", "arc-length-drift", params={"n": config.domain.n_check}),
        ]
    if args.command == "knorm":
        return [CheckSpec(
            "knorm", f"knorm-{args.measure}",
            measure=config.measure(args.measure),
            expected=0.0, relation="le", tol=config.tolerances.bracket,
            inputs={"measure": args.measure},
        )]

    f = config.function(args.function)
    inputs = {"function": args.function}
    if args.command == "lambda":
        return [CheckSpec("lambda", f"lambda-{args.function}", function=f, inputs=inputs)]
    if args.command == "mult-bound":
        return [CheckSpec("mult-bound", f"mult-bound-{args.function}", function=f, inputs=inputs)]
    if args.command == "theorem1":
        return [CheckSpec(
            "theorem1", f"theorem1-{args.function}", function=f,
            expected=0.0, relation="ge", tol=theorem_tol, inputs=inputs,
        )]
    if args.command == "theorem2":
        return [
            CheckSpec(
                "theorem2", f"theorem2-{args.function}-p{p:g}", function=f, params={"p": p},
                expected=0.0, relation="ge", tol=theorem_tol, inputs={**inputs, "p": p},
            )
            for p in (args.p or config.search.p_values)
        ]
    if args.command == "vinogradov":
        return [CheckSpec("vinogradov", f"vinogradov-{args.function}", function=f, inputs=inputs)]
    raise ConfigError(f"unknown command {args.command!r}")


def run(args: argparse.Namespace, settings: Settings) -> int:
    config = load_experiment(args.config) if args.config else default_experiment()
    config = config.with_overrides(n=args.n_override, out=args.out)
    echo = {"experiment": config.echo(), "threads": settings.threads, "n_max": settings.n_max}

    if args.command == "verify":
        manifest_path = args.manifest or (Path(config.output.manifest) if config.output.manifest else None)
        manifest = load_manifest(config, manifest_path)
        ctx = SuiteContext(config, manifest.domains, manifest.seed, manifest.battery_cases, settings.n_max)
        specs = list(manifest.checks)
        echo.update(manifest=manifest.source, seed=manifest.seed, battery_cases=manifest.battery_cases)
    else:
        ctx = SuiteContext(config, n_max=settings.n_max)
        specs = build_checks(args, config)
    ctx.domain(CONFIG_DOMAIN)

    report = RunReport(command=args.command, config=echo)
    report.checks.extend(run_checks(specs, ctx, settings.threads))

    out_dir = Path(config.output.directory) if config.output.directory else settings.out_dir
    write_reports(report, out_dir, config.output.json, config.output.csv)
    counts = report.counts()
    logger.info(
        "%s: %d pass, %d fail, %d not asserted",
        args.command, counts[PASS], counts[FAIL], counts[NOT_ASSERTED],
    )
    return EXIT_FAILED if report.failed else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    settings = Settings.load()
    configure_logging("WARNING" if args.quiet or settings.quiet else settings.log_level)

    try:
        return run(args, settings)
    except (ConfigError, DomainConstructionError) as exc:
        logger.error("%s", exc)
        print(f"csmult: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
