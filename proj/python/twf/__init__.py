"""Twisted Fock space numerics."""

import json

from ._twf import *  # noqa: F401,F403
from ._twf import NumericalError, run_verify


def verify(suites=(), lambdas=(), seed=7, tolerance=None):
    """Run verification suites; returns (exit_code, list of record dicts)."""
    code, text = run_verify(list(suites), list(lambdas), seed, tolerance)
    records = [json.loads(line) for line in text.splitlines() if line]
    return code, [r for r in records if "summary" not in r]


__all__ = ["NumericalError", "verify"]
