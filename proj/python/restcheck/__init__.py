"""Linearizability testing for REST services."""

import json

from ._restcheck import (
    FixtureServer,
    RestcheckError,
    check,
    cli,
    render,
    run,
    student_spec_yaml,
    student_workload_yaml,
    validate_spec,
)
from ._restcheck import generate as _generate

__all__ = [
    "FixtureServer",
    "RestcheckError",
    "check",
    "cli",
    "fixture",
    "generate",
    "parse_history",
    "render",
    "run",
    "student_spec_yaml",
    "student_workload_yaml",
    "validate_spec",
]


def generate(resource, count=1, seed=0, spec_yaml=None):
    """Generated objects for `resource`, decoded to dicts."""
    return [json.loads(text) for text in _generate(resource, count, seed, spec_yaml)]


def parse_history(history_jsonl):
    """The events of a JSONL history as dicts."""
    return [json.loads(line) for line in history_jsonl.splitlines() if line.strip()]


class fixture:
    """Context manager serving a FixtureServer on a background thread."""

    def __init__(self, **options):
        self.server = FixtureServer(**options)

    def __enter__(self):
        self.server.start()
        return self.server

    def __exit__(self, *exc):
        self.server.stop()
        return False
