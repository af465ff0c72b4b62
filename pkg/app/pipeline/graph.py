"""Staged pipeline as a LangGraph workflow.

    START -> ingest -> build_cocite -> giants -> metrics -> analyze -> END

After every stage the router ends the graph early when the target stage is
reached or the stage failed.

Each stage reuses its cache when the (input hash, config hash, stage
version) key matches, writes its outputs plus ``<stage>.manifest.json`` to
the output directory, and hands over to the next stage. A failing stage
writes a PARTIAL manifest and ends the graph with a nonzero exit code.
"""

import functools
import hashlib
import logging
from collections.abc import Callable
from pathlib import Path

from langgraph.graph import END, START, StateGraph
from langgraph.graph.state import CompiledStateGraph
from pydantic import ValidationError

from app.analysis.matching import read_targets
from app.analysis.runner import ANALYSES, AnalysisInputs, run_analyses
from app.cocite.snapshot import build_snapshot, load_snapshot, save_snapshot
from app.core.config import TOOL_VERSION, Settings
from app.core.errors import (
    CacheVersionError,
    CorpusFormatError,
    DuplicatePaperError,
    InfeasibleConfigError,
)
from app.core.tables import write_json
from app.core.tracing import observe
from app.corpus.ingest import file_sha256, load_corpus, load_corpus_cache, save_corpus_cache
from app.giant.driver import assign_all_giants, write_giant_table
from app.metrics.table import build_metric_rows, write_metric_table
from app.pipeline.cache import (
    load_stage_cache,
    partial_manifest,
    read_manifest,
    save_stage_cache,
    stage_config_hash,
    stage_header,
    write_manifest,
)
from app.pipeline.models import (
    STAGE_ORDER,
    STAGE_VERSIONS,
    ExitCode,
    PipelineState,
    Stage,
    StageManifest,
    StageStatus,
)

logger = logging.getLogger(__name__)

StageNode = Callable[[PipelineState], dict]


# =============================================================================
# HELPERS
# =============================================================================


def exit_code_for(error: BaseException) -> ExitCode:
    """Map a stage exception onto the process exit code."""
    if isinstance(error, CorpusFormatError | DuplicatePaperError | FileNotFoundError):
        return ExitCode.INPUT
    if isinstance(error, InfeasibleConfigError | ValidationError):
        return ExitCode.USAGE
    return ExitCode.STAGE_FAILURE


def _input_hash(state: PipelineState, stage: Stage) -> str:
    corpus_hash = state.corpus.source_sha256 if state.corpus is not None else ""
    targets = state.settings.paths.targets_file
    if stage == Stage.ANALYZE and targets is not None and targets.exists():
        combined = f"{corpus_hash}:{file_sha256(targets)}"
        return hashlib.sha256(combined.encode("utf-8")).hexdigest()
    return corpus_hash


def _manifest(
    state: PipelineState,
    stage: Stage,
    status: StageStatus,
    outputs: list[Path],
    row_counts: dict[str, int],
    input_hash: str | None = None,
    analyses: list[str] | None = None,
    skipped: dict[str, str] | None = None,
) -> dict[str, StageManifest]:
    manifest = StageManifest(
        stage=stage,
        stage_version=STAGE_VERSIONS[stage],
        tool_version=TOOL_VERSION,
        input_hash=input_hash if input_hash is not None else _input_hash(state, stage),
        config_hash=stage_config_hash(state.settings, stage),
        status=status,
        outputs=[str(p) for p in outputs],
        row_counts=row_counts,
        analyses=analyses or [],
        skipped=skipped or {},
    )
    write_manifest(manifest, state.settings.paths.output_dir)
    logger.info(f"Stage {stage.value}: {status.value} {row_counts}")
    return {**state.manifests, stage.value: manifest}


def _guarded(stage: Stage) -> Callable[[StageNode], StageNode]:
    """Turn an exception inside a stage into an error update and a PARTIAL manifest."""

    def decorate(fn: StageNode) -> StageNode:
        @functools.wraps(fn)
        def node(state: PipelineState) -> dict:
            try:
                return fn(state)
            except Exception as e:
                code = exit_code_for(e)
                logger.error(f"Stage {stage.value} failed: {e}", exc_info=state.settings.debug)
                output_dir = state.settings.paths.output_dir
                cfg = stage_config_hash(state.settings, stage)
                manifest = partial_manifest(stage, _input_hash(state, stage), cfg, output_dir)
                write_manifest(manifest, output_dir)
                return {
                    "error": f"{stage.value}: {e}",
                    "exit_code": code,
                    "manifests": {**state.manifests, stage.value: manifest},
                }

        return node

    return decorate


# =============================================================================
# NODES
# =============================================================================


@_guarded(Stage.INGEST)
@observe(name="stage_ingest")
def ingest(state: PipelineState) -> dict:
    """Load the corpus index from cache, or parse and index the corpus file."""
    s = state.settings
    corpus_file = s.paths.corpus_file
    if not corpus_file.exists():
        raise FileNotFoundError(f"Corpus file not found: {corpus_file}")
    digest = file_sha256(corpus_file)
    cache = s.paths.cache_dir / "corpus.pkl"
    try:
        corpus = load_corpus_cache(cache, digest, s.ingest)
        status = StageStatus.CACHED
    except CacheVersionError as e:
        logger.info(f"Rebuilding corpus index ({e})")
        corpus = load_corpus(corpus_file, s.ingest)
        save_corpus_cache(corpus, cache)
        status = StageStatus.COMPLETE

    report = s.paths.output_dir / "ingest.report.json"
    write_json(
        {**corpus.report.model_dump(mode="json"), "eligible_focal": sum(corpus.eligibility_flags.values())},
        report,
    )
    manifests = _manifest(
        state,
        Stage.INGEST,
        status,
        [report],
        {"papers": len(corpus), "eligible_focal": sum(corpus.eligibility_flags.values())},
        input_hash=digest,
    )
    return {"corpus": corpus, "manifests": manifests}


def _base_year(state: PipelineState) -> int:
    assert state.corpus is not None
    if state.target == Stage.BUILD_COCITE and state.cocite_year is not None:
        return state.cocite_year
    y_min, y_max = state.corpus.year_range
    return min(max(state.settings.giant.year_from or y_min, y_min), y_max)


@_guarded(Stage.BUILD_COCITE)
@observe(name="stage_build_cocite")
def build_cocite(state: PipelineState) -> dict:
    """Base co-citation snapshot for the first focal year, cached per corpus and year."""
    corpus = state.corpus
    assert corpus is not None
    s = state.settings
    year = _base_year(state)
    cache = s.paths.cache_dir / f"cocite-{year}.pkl"
    snapshot = None
    status = StageStatus.COMPLETE
    if s.cocite.cache_snapshots:
        try:
            snapshot = load_snapshot(cache, corpus, year)
            status = StageStatus.CACHED
        except CacheVersionError as e:
            logger.info(f"Rebuilding snapshot {year} ({e})")
    if snapshot is None:
        snapshot = build_snapshot(corpus, year, workers=s.giant.workers)
        if s.cocite.cache_snapshots:
            save_snapshot(snapshot, cache)
    outputs = [cache] if s.cocite.cache_snapshots else []
    manifests = _manifest(
        state,
        Stage.BUILD_COCITE,
        status,
        outputs,
        {"as_of_year": year, "pairs": snapshot.pair_count, "total_weight": snapshot.total_weight},
    )
    return {"snapshot": snapshot, "manifests": manifests}


@_guarded(Stage.GIANTS)
@observe(name="stage_giants")
def giants(state: PipelineState) -> dict:
    """Giant of every eligible focal paper, then the giants table."""
    corpus = state.corpus
    assert corpus is not None
    s = state.settings
    input_hash = _input_hash(state, Stage.GIANTS)
    header = stage_header(Stage.GIANTS, input_hash, stage_config_hash(s, Stage.GIANTS))
    cache = s.paths.cache_dir / "giants.pkl"
    try:
        results = load_stage_cache(cache, header)
        status = StageStatus.CACHED
    except CacheVersionError as e:
        logger.info(f"Recomputing giants ({e})")
        results = assign_all_giants(
            corpus,
            giant=s.giant,
            cocite=s.cocite,
            base_snapshot=state.snapshot,
            show_progress=state.show_progress,
        )
        save_stage_cache(cache, header, results)
        status = StageStatus.COMPLETE

    fmt = s.paths.table_format
    table = write_giant_table(results, s.paths.output_dir / f"giants.{fmt.value}", fmt)
    manifests = _manifest(
        state,
        Stage.GIANTS,
        status,
        [table],
        {"giants": len(results), "with_giant": sum(r.has_giant for r in results.values())},
    )
    return {"giant_results": results, "manifests": manifests}


@_guarded(Stage.METRICS)
@observe(name="stage_metrics")
def metrics(state: PipelineState) -> dict:
    """Per-paper metric table."""
    corpus = state.corpus
    assert corpus is not None
    s = state.settings
    header = stage_header(
        Stage.METRICS, _input_hash(state, Stage.METRICS), stage_config_hash(s, Stage.METRICS)
    )
    cache = s.paths.cache_dir / "metrics.pkl"
    try:
        rows = load_stage_cache(cache, header)
        status = StageStatus.CACHED
    except CacheVersionError as e:
        logger.info(f"Recomputing metrics ({e})")
        rows = build_metric_rows(corpus, state.giant_results, s.metrics, state.show_progress)
        save_stage_cache(cache, header, rows)
        status = StageStatus.COMPLETE

    fmt = s.paths.table_format
    table = write_metric_table(rows, s.paths.output_dir / f"metrics.{fmt.value}", fmt)
    manifests = _manifest(state, Stage.METRICS, status, [table], {"metrics": len(rows)})
    return {"rows": rows, "manifests": manifests}


def _reusable_analysis(state: PipelineState, requested: list[str]) -> StageManifest | None:
    """The previous analyze manifest, if its key and selection match and its outputs exist."""
    s = state.settings
    previous = read_manifest(s.paths.output_dir, Stage.ANALYZE)
    if previous is None or previous.status not in (StageStatus.COMPLETE, StageStatus.CACHED):
        return None
    key = (STAGE_VERSIONS[Stage.ANALYZE], TOOL_VERSION, _input_hash(state, Stage.ANALYZE))
    if (previous.stage_version, previous.tool_version, previous.input_hash) != key:
        return None
    if previous.config_hash != stage_config_hash(s, Stage.ANALYZE):
        return None
    if previous.analyses != requested:
        return None
    if not all(Path(p).exists() for p in previous.outputs):
        return None
    return previous


@_guarded(Stage.ANALYZE)
@observe(name="stage_analyze")
def analyze(state: PipelineState) -> dict:
    """Run the named analyses and write each table with its metadata sidecar."""
    corpus = state.corpus
    assert corpus is not None
    s = state.settings
    requested = list(state.analyses) if state.analyses is not None else list(ANALYSES)
    previous = _reusable_analysis(state, requested)
    if previous is not None:
        logger.info(f"Reusing analysis tables {list(previous.row_counts)}")
        manifests = _manifest(
            state,
            Stage.ANALYZE,
            StageStatus.CACHED,
            [Path(p) for p in previous.outputs],
            previous.row_counts,
            analyses=requested,
            skipped=previous.skipped,
        )
        return {
            "tables": list(previous.row_counts),
            "skipped": previous.skipped,
            "manifests": manifests,
        }

    targets = read_targets(s.paths.targets_file) if s.paths.targets_file else None
    inputs = AnalysisInputs(
        corpus=corpus,
        giant_results=state.giant_results,
        rows=state.rows,
        analysis=s.analysis,
        window=s.metrics.window,
        targets=targets,
    )
    tables, skipped = run_analyses(inputs, requested)

    focal_years = [corpus.year_of(pid) for pid in state.giant_results]
    years = (min(focal_years), max(focal_years)) if focal_years else None
    cfg = stage_config_hash(s, Stage.ANALYZE)
    out_dir = s.paths.output_dir / "analysis"
    outputs: list[Path] = []
    row_counts: dict[str, int] = {}
    for table in tables:
        outputs.extend(table.with_provenance(cfg, corpus.source_sha256, years).write(out_dir))
        row_counts[table.name] = len(table.frame)
    manifests = _manifest(
        state,
        Stage.ANALYZE,
        StageStatus.COMPLETE,
        outputs,
        row_counts,
        analyses=requested,
        skipped=skipped,
    )
    return {"tables": [t.name for t in tables], "skipped": skipped, "manifests": manifests}


# =============================================================================
# GRAPH CONSTRUCTION
# =============================================================================

NODES: dict[Stage, StageNode] = {
    Stage.INGEST: ingest,
    Stage.BUILD_COCITE: build_cocite,
    Stage.GIANTS: giants,
    Stage.METRICS: metrics,
    Stage.ANALYZE: analyze,
}


def _router(stage: Stage) -> Callable[[PipelineState], str]:
    def route(state: PipelineState) -> str:
        if state.error is not None or state.target == stage:
            return "end"
        return "next"

    return route


def build_pipeline_graph() -> StateGraph:
    """Build the pipeline graph.

    Returns:
        Configured StateGraph (not yet compiled).
    """
    graph = StateGraph(PipelineState)
    for stage in STAGE_ORDER:
        graph.add_node(stage.value, NODES[stage])

    graph.add_edge(START, STAGE_ORDER[0].value)
    for stage, following in zip(STAGE_ORDER, STAGE_ORDER[1:], strict=False):
        graph.add_conditional_edges(
            stage.value, _router(stage), {"next": following.value, "end": END}
        )
    graph.add_edge(STAGE_ORDER[-1].value, END)
    return graph


def create_pipeline() -> CompiledStateGraph:
    return build_pipeline_graph().compile()


def run_pipeline(
    settings: Settings,
    target: Stage = Stage.ANALYZE,
    analyses: list[str] | None = None,
    cocite_year: int | None = None,
    show_progress: bool = False,
) -> PipelineState:
    """Run every stage up to ``target``.

    Returns:
        Final state; ``exit_code`` is nonzero when a stage failed.
    """
    initial = PipelineState(
        settings=settings,
        target=target,
        analyses=analyses,
        cocite_year=cocite_year,
        show_progress=show_progress,
    )
    final = create_pipeline().invoke(initial)
    state = PipelineState.model_validate(final)
    if state.error:
        logger.error(f"Pipeline stopped: {state.error}")
    else:
        logger.info(f"Pipeline finished at {target.value}")
    return state
