"""
Condition Reports

Per-condition verdicts with counterexample witnesses, order-independent
merging of partial reports, and JSON persistence.
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from space.norms import Tolerance
from verdicts import Verdict

logger = logging.getLogger(__name__)

MAX_WITNESSES = 5


class Witness(BaseModel):
    """A pair falsifying a condition: lhs > rhs beyond tolerance."""

    model_config = ConfigDict(frozen=True)

    x: Tuple[float, ...]
    y: Tuple[float, ...]
    lhs: float
    rhs: float
    clause: Optional[str] = None

    @property
    def violation(self):
        return self.lhs - self.rhs

    def sort_key(self):
        # Most severe first; ties resolve to the lexicographically smallest pair
        return (-self.violation, self.x, self.y)


class ConditionReport(BaseModel):
    """Outcome of checking one condition on one sample plan."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan='constants')

    condition: str
    verdict: Verdict
    pairs_checked: int = 0
    premise_vacuous_count: int = 0
    tolerance: Tolerance = Field(default_factory=Tolerance)
    witnesses: List[Witness] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)

    @property
    def failed(self):
        return self.verdict == Verdict.FAIL

    def to_dict(self):
        return self.model_dump(mode='json')


def rank_witnesses(witnesses, limit=MAX_WITNESSES):
    """Deduplicate by pair, sort by severity then position, keep the first limit."""
    seen = set()
    ranked = []
    for w in sorted(witnesses, key=Witness.sort_key):
        if (w.x, w.y) in seen:
            continue
        seen.add((w.x, w.y))
        ranked.append(w)
        if len(ranked) == limit:
            break
    return ranked


def _combine_max(values):
    present = [v for v in values if v is not None]
    return max(present) if present else None


def merge_reports(reports, limit=MAX_WITNESSES):
    """
    Merge partial reports of the same condition and tolerance.

    Counts are summed, witnesses re-ranked, and numeric details combined by
    key: 'failing_*' counts are summed, 'max_*' values maximized. The result
    does not depend on the order of reports.

    Args:
        reports: Non-empty list of ConditionReport
        limit: Maximum witnesses kept

    Returns:
        ConditionReport
    """
    first = reports[0]
    checked = sum(r.pairs_checked for r in reports)
    skipped = sum(r.premise_vacuous_count for r in reports)
    witnesses = rank_witnesses([w for r in reports for w in r.witnesses], limit)

    details = {}
    for key in sorted({k for r in reports for k in r.details}):
        values = [r.details.get(key) for r in reports]
        if key.startswith('failing_'):
            details[key] = sum(v or 0 for v in values)
        elif key.startswith('max_'):
            details[key] = _combine_max(values)
        else:
            details[key] = next(v for v in values if v is not None)

    if witnesses:
        verdict = Verdict.FAIL
    elif checked == 0:
        verdict = Verdict.VACUOUS
    else:
        verdict = Verdict.PASS

    return ConditionReport(
        condition=first.condition,
        verdict=verdict,
        pairs_checked=checked,
        premise_vacuous_count=skipped,
        tolerance=first.tolerance,
        witnesses=witnesses,
        details=details,
    )


def reports_to_json(reports):
    """Stable JSON text for a list of reports."""
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)


def save_report(reports, path):
    """
    Save reports to a JSON file.

    Args:
        reports: List of ConditionReport
        path: Destination file
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(path, 'w', encoding='utf-8') as f:
        f.write(reports_to_json(reports))
        f.write('\n')

    logger.info("Reports saved to: %s", path)


def load_report(path):
    """
    Load reports from a JSON file.

    Returns:
        List of ConditionReport, or None if the file does not exist
    """
    if not os.path.exists(path):
        return None

    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)

    return [ConditionReport.model_validate(item) for item in data]
