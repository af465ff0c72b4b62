"""Stage caches and manifests.

A stage cache is two consecutive pickles: a header naming the stage, its
version and the input/config hashes, then the payload. A cache is reused
only when the whole header matches.
"""

import json
import logging
import pickle
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app.core.config import TOOL_VERSION, Settings, config_hash
from app.core.errors import CacheVersionError
from app.core.tables import PARTIAL_SUFFIX, write_json
from app.pipeline.models import STAGE_SECTIONS, STAGE_VERSIONS, Stage, StageManifest, StageStatus

logger = logging.getLogger(__name__)

STAGE_CACHE_FORMAT = "giant-lineage/stage"


def stage_config_hash(settings: Settings, stage: Stage) -> str:
    """Hash of the settings a stage depends on; the worker count never counts."""
    pinned = settings.model_copy(update={"giant": settings.giant.model_copy(update={"workers": 1})})
    return config_hash(pinned, *STAGE_SECTIONS[stage])


def stage_header(stage: Stage, input_hash: str, cfg_hash: str) -> dict[str, Any]:
    return {
        "format": STAGE_CACHE_FORMAT,
        "stage": stage.value,
        "stage_version": STAGE_VERSIONS[stage],
        "tool_version": TOOL_VERSION,
        "input_hash": input_hash,
        "config_hash": cfg_hash,
    }


def save_stage_cache(path: Path, header: dict[str, Any], payload: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        pickle.dump(header, f, protocol=5)
        pickle.dump(payload, f, protocol=5)
    logger.info(f"Stage cache written to {path}")


def load_stage_cache(path: Path, header: dict[str, Any]) -> Any:
    """Payload of a stage cache whose header equals ``header``.

    Raises:
        CacheVersionError: If the cache is missing, unreadable or stale.
    """
    if not path.exists():
        raise CacheVersionError(f"no stage cache at {path}")
    try:
        with open(path, "rb") as f:
            found = pickle.load(f)
            if found != header:
                raise CacheVersionError(f"stale stage cache {path}")
            return pickle.load(f)
    except (pickle.UnpicklingError, EOFError, AttributeError, ModuleNotFoundError) as e:
        raise CacheVersionError(f"unreadable stage cache {path}: {e}") from e


# =============================================================================
# MANIFESTS
# =============================================================================


def manifest_path(output_dir: Path, stage: Stage) -> Path:
    return output_dir / f"{stage.value}.manifest.json"


def write_manifest(manifest: StageManifest, output_dir: Path) -> Path:
    return write_json(manifest.model_dump(mode="json"), manifest_path(output_dir, manifest.stage))


def read_manifest(output_dir: Path, stage: Stage) -> StageManifest | None:
    path = manifest_path(output_dir, stage)
    if not path.exists():
        return None
    try:
        return StageManifest.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except (json.JSONDecodeError, ValidationError) as e:
        logger.warning(f"Ignoring unreadable manifest {path}: {e}")
        return None


def partial_manifest(stage: Stage, input_hash: str, cfg_hash: str, output_dir: Path) -> StageManifest:
    """Manifest of a failed stage, listing the ``.partial`` files left behind."""
    leftovers = sorted(str(p) for p in output_dir.rglob(f"*{PARTIAL_SUFFIX}")) if output_dir.exists() else []
    return StageManifest(
        stage=stage,
        stage_version=STAGE_VERSIONS[stage],
        tool_version=TOOL_VERSION,
        input_hash=input_hash,
        config_hash=cfg_hash,
        status=StageStatus.PARTIAL,
        outputs=leftovers,
    )
