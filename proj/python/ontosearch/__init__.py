"""Semantic employee search over a case-annotated knowledge base."""

import json

from ._core import (
    CorpusError,
    KnowledgeBase,
    ParseError,
    QueryError,
    ScoringParams,
    ValidationError,
    f_measure,
    format_metric,
    load_kb,
    loads_kb,
    precision,
    recall,
    validate_kb_text,
)
from . import _core

__all__ = [
    "CorpusError",
    "KnowledgeBase",
    "ParseError",
    "QueryError",
    "ScoringParams",
    "ValidationError",
    "evaluate",
    "f_measure",
    "format_metric",
    "load_kb",
    "loads_kb",
    "precision",
    "recall",
    "search",
    "validate_kb_text",
]


def search(kb, text, dept=None, k=10, params=None):
    """Run one query; returns the same document /api/search serves."""
    return json.loads(_core.search_json(kb, text, dept, k, params or ScoringParams()))


def evaluate(kb, corpus, params=None, k=10, threads=0):
    """Evaluate a JSON-lines corpus; returns the JSON report as a dict."""
    return json.loads(_core.eval_json(kb, str(corpus), params or ScoringParams(), k, threads))
