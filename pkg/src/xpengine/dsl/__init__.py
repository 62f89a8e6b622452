"""Textual experiment specification language: parser, checker, printer."""

from .ast import ExperimentSpec, SourceError
from .parser import parse_experiment
from .printer import canonical_form
from .semantics import check_semantics, declared_metric_names

__all__ = [
    "ExperimentSpec",
    "SourceError",
    "parse_experiment",
    "canonical_form",
    "check_semantics",
    "declared_metric_names",
]
