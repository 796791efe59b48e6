"""
Mapping Loading Utilities

Helper functions for resolving a mapping source (a gallery reference or a DSL
file) into a MappingDef together with the hash recorded in run manifests.
"""

import hashlib
import os

from errors import InputError
from mapping.dsl import parse_mapping
from mapping.gallery import gallery_get

GALLERY_PREFIX = 'gallery:'


def parse_gallery_reference(source):
    """
    Split 'gallery:<id>[:k=v,...]' into its id and parameters.

    Returns:
        Tuple of (gallery_id, params dict)
    """
    body = source[len(GALLERY_PREFIX):]
    gallery_id, _, raw_params = body.partition(':')
    params = {}
    for item in filter(None, (s.strip() for s in raw_params.split(','))):
        key, sep, value = item.partition('=')
        if not sep:
            raise InputError(f"gallery parameter {item!r} must look like name=value")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise InputError(f"gallery parameter {key.strip()!r} is not a number: {value!r}") from None
    return gallery_id.strip(), params


def canonical_source(source):
    """Canonical text of a mapping source, the input of the source hash."""
    if source.startswith(GALLERY_PREFIX):
        gallery_id, params = parse_gallery_reference(source)
        rendered = ','.join(f"{k}={params[k]!r}" for k in sorted(params))
        return f"{GALLERY_PREFIX}{gallery_id}:{rendered}"

    if not os.path.exists(source):
        raise FileNotFoundError(f"Mapping file not found: {source}")
    with open(source, 'r', encoding='utf-8') as f:
        return f.read()


def source_hash(source):
    """SHA-256 hex digest of the canonical source text."""
    return hashlib.sha256(canonical_source(source).encode('utf-8')).hexdigest()


def load_mapping(source, p=2.0):
    """
    Load a mapping from a gallery reference or a DSL file.

    Args:
        source: 'gallery:<id>[:k=v,...]' or a path to a DSL file
        p: Norm exponent of the ambient space

    Returns:
        Tuple of (MappingDef, source hash)
    """
    text = canonical_source(source)
    digest = hashlib.sha256(text.encode('utf-8')).hexdigest()

    if source.startswith(GALLERY_PREFIX):
        gallery_id, params = parse_gallery_reference(source)
        return gallery_get(gallery_id, p=p, **params), digest

    name = os.path.splitext(os.path.basename(source))[0]
    return parse_mapping(text, name=name, p=p), digest
