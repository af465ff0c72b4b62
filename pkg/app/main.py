"""Command line entry point for Giant Lineage.

Usage:
    uv run python -m app.main [--config run.toml] [--debug] <command> [options]

Commands:
    ingest          Parse, validate and index the corpus file
    build-cocite    Build (and cache) the co-citation snapshot of one year
    giants          Assign the giant of every eligible focal paper
    metrics         Per-paper metric table (C, G, D, DP, normalized values)
    analyze         Run named analyses (all by default)
    all             Every stage from ingest to analyze
    synth           Generate a synthetic corpus with planted signals
    oracle-check    Compare the pipeline with the brute-force oracle

Every stage command also runs the stages before it, reusing their caches.
A TOML file given with ``--config`` overrides the defaults documented in
``config.example.toml``; flags given on the command line override the file.

Exit codes:
    0  success
    1  a stage failed (partial outputs are marked)
    2  usage or configuration error
    3  input error (missing or malformed corpus file)
    4  oracle mismatch
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app.analysis.runner import ANALYSES
from app.core.config import (
    Damping,
    InputFormat,
    SelfCitationMode,
    Settings,
    TableFormat,
    load_settings,
)
from app.core.errors import InfeasibleConfigError, OracleCapExceededError
from app.core.tracing import flush_tracing, init_tracing
from app.pipeline.graph import run_pipeline
from app.pipeline.models import ExitCode, PipelineState, Stage
from app.synthgen.agreement import compare_with_oracle
from app.synthgen.generator import generate
from app.synthgen.models import GeneratorConfig
from app.synthgen.oracle import oracle_giants

logger = logging.getLogger(__name__)

STAGE_COMMANDS = {
    "ingest": Stage.INGEST,
    "build-cocite": Stage.BUILD_COCITE,
    "giants": Stage.GIANTS,
    "metrics": Stage.METRICS,
    "analyze": Stage.ANALYZE,
    "all": Stage.ANALYZE,
}


# =============================================================================
# ARGUMENTS
# =============================================================================


def _run_options() -> argparse.ArgumentParser:
    """Options shared by every pipeline command."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--corpus", type=Path, help="Corpus file (default: paths.corpus_file)")
    parent.add_argument("--format", choices=[f.value for f in InputFormat], help="Corpus file layout")
    parent.add_argument("--cache-dir", type=Path, help="Cache directory")
    parent.add_argument("--output-dir", type=Path, help="Output directory")
    parent.add_argument(
        "--table-format", choices=[f.value for f in TableFormat], help="Giants/metrics table layout"
    )
    parent.add_argument("--workers", type=int, help="Worker threads per publication year")
    parent.add_argument(
        "--from", dest="year_from", type=int, help="First focal year (default: corpus min)"
    )
    parent.add_argument("--to", dest="year_to", type=int, help="Last focal year (default: corpus max)")
    parent.add_argument(
        "--exclude-own-refs",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Remove the focal paper's own pairs from its snapshot (default: on)",
    )
    parent.add_argument(
        "--count-isolated",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Count never-co-cited references in N (default: on)",
    )
    parent.add_argument("--damping", choices=[d.value for d in Damping], help="Importance damping")
    parent.add_argument("--window", type=int, help="Window t in years for C_t and G_t")
    parent.add_argument(
        "--no-self-citations",
        action="store_true",
        help="Headline G drops focal papers sharing an author with their giant",
    )
    parent.add_argument("--targets", type=Path, help="Target paper ids for matched comparisons")
    parent.add_argument("--progress", action="store_true", help="Show progress bars")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="giant-lineage", description="Giant identification on temporal co-citation networks"
    )
    parser.add_argument("--config", type=Path, help="TOML settings file")
    parser.add_argument("--debug", action="store_true", help="Debug logging")
    commands = parser.add_subparsers(dest="command", required=True)
    run = _run_options()

    commands.add_parser("ingest", parents=[run], help="Index the corpus")
    cocite = commands.add_parser("build-cocite", parents=[run], help="Build one snapshot")
    cocite.add_argument("--year", type=int, help="Snapshot year (default: first focal year)")
    commands.add_parser("giants", parents=[run], help="Assign giants")
    commands.add_parser("metrics", parents=[run], help="Compute per-paper metrics")
    analyze = commands.add_parser("analyze", parents=[run], help="Run analyses")
    analyze.add_argument("names", nargs="*", help=f"Analyses to run: {', '.join(sorted(ANALYSES))}")
    commands.add_parser("all", parents=[run], help="Run every stage")

    synth = commands.add_parser("synth", help="Generate a synthetic corpus")
    synth.add_argument("--config", dest="synth_config", type=Path, help="Generator TOML file")
    synth.add_argument("--out", type=Path, required=True, help="Output directory")
    synth.add_argument("--format", choices=[f.value for f in InputFormat], default="jsonl")
    synth.add_argument("--seed", type=int, help="Override the configured seed")
    synth.add_argument("--papers", type=int, help="Override n_papers")

    oracle = commands.add_parser(
        "oracle-check", parents=[run], help="Compare pipeline and brute-force oracle"
    )
    oracle.add_argument("--cap", type=int, help="Largest corpus the oracle accepts")
    return parser


def settings_from_args(args: argparse.Namespace) -> Settings:
    """Settings from the TOML file plus every flag given on the command line."""
    groups: dict[str, dict[str, Any]] = {
        "paths": {
            "corpus_file": args.corpus,
            "cache_dir": args.cache_dir,
            "output_dir": args.output_dir,
            "targets_file": args.targets,
            "table_format": args.table_format,
        },
        "ingest": {"input_format": args.format},
        "cocite": {"exclude_own_refs": args.exclude_own_refs},
        "giant": {
            "workers": args.workers,
            "year_from": args.year_from,
            "year_to": args.year_to,
            "count_isolated_in_n": args.count_isolated,
            "damping": args.damping,
        },
        "metrics": {
            "window": args.window,
            "self_citations": "exclude" if args.no_self_citations else None,
        },
        "synth": {"oracle_cap": getattr(args, "cap", None)},
    }
    overrides: dict[str, Any] = {
        name: {k: v for k, v in values.items() if v is not None} for name, values in groups.items()
    }
    overrides = {k: v for k, v in overrides.items() if v}
    if args.debug:
        overrides["debug"] = True
    return load_settings(args.config, **overrides)


# =============================================================================
# COMMANDS
# =============================================================================


def _report(state: PipelineState) -> None:
    for name, manifest in state.manifests.items():
        print(f"{name:<14} {manifest.status.value:<9} {manifest.row_counts}")
    for name, reason in state.skipped.items():
        print(f"skipped {name}: {reason}")
    if state.error:
        print(f"error: {state.error}", file=sys.stderr)


def cmd_pipeline(args: argparse.Namespace, settings: Settings) -> int:
    names = getattr(args, "names", None) or None
    state = run_pipeline(
        settings,
        target=STAGE_COMMANDS[args.command],
        analyses=names,
        cocite_year=getattr(args, "year", None),
        show_progress=args.progress,
    )
    _report(state)
    return int(state.exit_code)


def cmd_synth(args: argparse.Namespace) -> int:
    config = GeneratorConfig.from_toml(args.synth_config) if args.synth_config else GeneratorConfig()
    updates = {k: v for k, v in {"seed": args.seed, "n_papers": args.papers}.items() if v is not None}
    if updates:
        config = GeneratorConfig.model_validate({**config.model_dump(), **updates})
    out = generate(config, args.out, InputFormat(args.format), show_progress=sys.stderr.isatty())
    print(f"Wrote {out.papers} papers to {out.corpus_file} (config {out.config_hash})")
    return int(ExitCode.OK)


def cmd_oracle_check(args: argparse.Namespace, settings: Settings) -> int:
    """Giants and metrics through the pipeline, then the oracle; G is compared with self-citations kept."""
    metrics = settings.metrics.model_copy(update={"self_citations": SelfCitationMode.INCLUDE})
    settings = settings.model_copy(update={"metrics": metrics})
    state = run_pipeline(settings, target=Stage.METRICS, show_progress=args.progress)
    if state.error:
        _report(state)
        return int(state.exit_code)
    oracle = oracle_giants(
        settings.paths.corpus_file,
        settings.ingest,
        exclude_own_refs=settings.cocite.exclude_own_refs,
        count_isolated_in_n=settings.giant.count_isolated_in_n,
        cap=settings.synth.oracle_cap,
    )
    comparison = compare_with_oracle(oracle, state.giant_results, state.rows)
    for name, agreement in comparison.quantities.items():
        print(f"{name:<12} {agreement.rate:.4f} ({agreement.mismatches}/{agreement.checked} mismatches)")
        for example in agreement.examples:
            print(f"    {example}")
    return int(ExitCode.OK if comparison.ok else ExitCode.ORACLE_MISMATCH)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    unknown = [n for n in getattr(args, "names", None) or [] if n not in ANALYSES]
    if unknown:
        parser.error(f"unknown analyses: {', '.join(unknown)}")
    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format="%(asctime)s %(levelname)s [%(name)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    try:
        if args.command == "synth":
            return cmd_synth(args)
        settings = settings_from_args(args)
    except (ValidationError, InfeasibleConfigError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        return int(ExitCode.USAGE)

    init_tracing()
    try:
        if args.command == "oracle-check":
            try:
                return cmd_oracle_check(args, settings)
            except OracleCapExceededError as e:
                logger.error(str(e))
                return int(ExitCode.USAGE)
        return cmd_pipeline(args, settings)
    finally:
        flush_tracing()


if __name__ == "__main__":
    sys.exit(main())
