"""
Verdict models shared by the property checks.

"pass" always means "no counterexample found on the data checked"; every
verdict carries its counts and the tolerance it was judged with.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from space.norms import Tolerance


class Verdict(str, Enum):
    PASS = 'pass'
    FAIL = 'fail'
    VACUOUS = 'vacuous'
    NOT_APPLICABLE = 'not-applicable'


class PropertyVerdict(BaseModel):
    """Outcome of a sequence- or trace-level property check."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan='constants')

    name: str
    verdict: Verdict
    checked: int = 0
    skipped: int = 0
    first_violation: Optional[int] = None
    tolerance: Tolerance = Field(default_factory=Tolerance)
    details: Dict[str, Any] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)

    @property
    def failed(self):
        return self.verdict == Verdict.FAIL


def not_applicable(name, reason, tolerance=None, **details):
    """Build a not-applicable verdict whose details carry the unmet hypothesis."""
    return PropertyVerdict(
        name=name,
        verdict=Verdict.NOT_APPLICABLE,
        tolerance=tolerance or Tolerance(),
        details={'reason': reason, **details},
    )
