"""
Run Manifests

Every file a command writes is accompanied by a manifest recording how it was
produced. Outputs depend only on the manifest's inputs; the timestamp is the
one field that changes between identical runs.
"""

import json
import logging
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from config import VERSION
from errors import InputError

logger = logging.getLogger(__name__)


class RunManifest(BaseModel):
    model_config = ConfigDict(frozen=True)

    command: List[str]
    seed: Optional[int] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)
    mapping_source: Optional[str] = None
    mapping_hash: Optional[str] = None
    mapping_name: Optional[str] = None
    # repr of the norm exponent, e.g. '2.0' or 'inf'
    norm_p: Optional[str] = None
    version: str = VERSION
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    config: Optional[Dict[str, Any]] = None
    stop_reason: Optional[str] = None

    def to_dict(self):
        return self.model_dump(mode='json', exclude_none=True)


def write_manifest(manifest, output_path):
    """Write manifest next to output_path as <output_path>.manifest.json."""
    path = output_path + '.manifest.json'
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(manifest.to_dict(), f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info("Manifest saved to: %s", path)
    return path


def check_mapping_hash(manifest, digest):
    """
    Refuse to work on an output produced from a different mapping.

    Raises:
        InputError: missing or mismatched mapping hash
    """
    recorded = (manifest or {}).get('mapping_hash')
    if recorded is None:
        raise InputError("manifest records no mapping hash; refusing to verify")
    if recorded != digest:
        raise InputError(
            f"mapping hash mismatch: trace was produced from {recorded[:12]}..., "
            f"the given mapping hashes to {digest[:12]}..."
        )


def check_norm_exponent(manifest, p):
    """
    Refuse to verify an output under a different norm than it was produced with.

    Raises:
        InputError: missing or mismatched norm exponent
    """
    recorded = (manifest or {}).get('norm_p')
    if recorded is None:
        raise InputError("manifest records no norm exponent; refusing to verify")
    if recorded != repr(float(p)):
        raise InputError(f"norm mismatch: trace was produced with p={recorded}, verify was given p={float(p)!r}")
