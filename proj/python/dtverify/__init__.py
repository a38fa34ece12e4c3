"""Python bindings for the dtv decompose-then-verify toolkit."""

import json

from . import _core
from ._core import (
    DtvError,
    aggregate,
    binarize_label,
    cache_key as _cache_key,
    classify,
    crossover_n,
    evaluate_point,
    metrics,
    parse_detection_response,
    parse_subclaims,
    run_cli,
)

__all__ = [
    "DtvError",
    "aggregate",
    "binarize_label",
    "build_combinations",
    "cache_key",
    "classify",
    "crossover_n",
    "evaluate_point",
    "metrics",
    "parse_detection_response",
    "parse_subclaims",
    "run_cli",
]


def cache_key(payload):
    """SHA-256 of the canonical serialization of a JSON-compatible payload."""
    return _cache_key(json.dumps(payload))


def build_combinations(entry, dataset_id=None):
    """Contiguous claim combinations of a dataset entry, as entry dicts."""
    ds = dataset_id if dataset_id is not None else entry.get("dataset_id", "")
    return [json.loads(s) for s in _core.build_combinations_json(json.dumps(entry), ds)]
