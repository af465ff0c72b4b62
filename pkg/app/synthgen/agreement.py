"""Compare pipeline outputs against the brute-force oracle."""

import logging
import math
from collections.abc import Iterable, Mapping

from pydantic import BaseModel, Field

from app.giant.models import GiantResult
from app.metrics.models import MetricRow
from app.synthgen.oracle import OracleResult

logger = logging.getLogger(__name__)

QUANTITIES = ("focal_set", "giant", "stop_n", "no_giant", "percolation", "G", "C", "D")

# Examples kept per quantity in the report
MAX_EXAMPLES = 10


class QuantityAgreement(BaseModel):
    checked: int = 0
    mismatches: int = 0
    examples: list[str] = Field(default_factory=list)

    @property
    def rate(self) -> float:
        return 1.0 if self.checked == 0 else 1.0 - self.mismatches / self.checked

    def record(self, paper_id: str, ours: object, theirs: object, same: bool) -> None:
        self.checked += 1
        if not same:
            self.mismatches += 1
            if len(self.examples) < MAX_EXAMPLES:
                self.examples.append(f"{paper_id}: pipeline={ours!r} oracle={theirs!r}")


class OracleComparison(BaseModel):
    """Per-quantity agreement between the pipeline and the oracle."""

    quantities: dict[str, QuantityAgreement] = Field(
        default_factory=lambda: {q: QuantityAgreement() for q in QUANTITIES}
    )

    @property
    def ok(self) -> bool:
        return all(q.mismatches == 0 for q in self.quantities.values())

    def rates(self) -> dict[str, float]:
        return {name: q.rate for name, q in self.quantities.items()}


def _same_d(a: float | None, b: float | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return math.isclose(a, b, rel_tol=0.0, abs_tol=1e-12)


def compare_with_oracle(
    oracle: OracleResult,
    giant_results: Mapping[str, GiantResult],
    rows: Iterable[MetricRow] = (),
) -> OracleComparison:
    """Check giants, stop_n, no-giant flags, percolation, G, C and D paper by paper.

    Any mismatch, including a focal paper known to only one side, counts
    against agreement.
    """
    report = OracleComparison()
    q = report.quantities

    ours_focal, theirs_focal = set(giant_results), set(oracle.giants)
    for pid in sorted(ours_focal ^ theirs_focal):
        q["focal_set"].record(pid, pid in ours_focal, pid in theirs_focal, same=False)
    for pid in sorted(ours_focal & theirs_focal):
        q["focal_set"].record(pid, True, True, same=True)
        result = giant_results[pid]
        expected = oracle.giants[pid]
        q["giant"].record(pid, result.giant_id, expected, result.giant_id == expected)
        q["stop_n"].record(pid, result.stop_n, oracle.stop_n[pid], result.stop_n == oracle.stop_n[pid])
        q["no_giant"].record(
            pid, not result.has_giant, expected is None, (not result.has_giant) == (expected is None)
        )
        reached = oracle.percolation[pid]
        q["percolation"].record(
            pid, result.percolation_reached, reached, result.percolation_reached == reached
        )

    for row in rows:
        pid = row.paper_id
        if pid not in oracle.C:
            q["C"].record(pid, row.C, None, same=False)
            continue
        q["G"].record(pid, row.G, oracle.G[pid], row.G == oracle.G[pid])
        q["C"].record(pid, row.C, oracle.C[pid], row.C == oracle.C[pid])
        q["D"].record(pid, row.D, oracle.D[pid], _same_d(row.D, oracle.D[pid]))

    for name, agreement in q.items():
        if agreement.mismatches:
            logger.error(f"Oracle mismatch on {name}: {agreement.mismatches}/{agreement.checked}")
    return report
