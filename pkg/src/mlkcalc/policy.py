"""Truncation policy shared by every infinite series in the package."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

DEFAULT_MAX_TERMS = 10_000


def _env_max_terms() -> int:
    raw = os.environ.get("MLKCALC_MAX_TERMS")
    if raw is None:
        return DEFAULT_MAX_TERMS
    value = int(raw)
    if value < 1:
        raise ValueError("MLKCALC_MAX_TERMS must be a positive integer")
    return value


@dataclass(frozen=True)
class TruncationPolicy:
    """When to stop summing a series.

    A series stops once ``|term| <= abs_tol + rel_tol * |partial_sum|`` has held
    for ``patience`` consecutive terms, and at least ``min_terms`` terms have
    been taken.  Hitting ``max_terms`` first is an error.
    """

    abs_tol: float = 0.0
    rel_tol: float = 1e-17
    max_terms: int = field(default_factory=_env_max_terms)
    min_terms: int = 0
    patience: int = 3

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ValueError("at least one tolerance must be positive")
        if self.max_terms < 1 or self.patience < 1 or self.min_terms < 0:
            raise ValueError("term counts must be positive")

    def tolerance(self, scale: float) -> float:
        return self.abs_tol + self.rel_tol * abs(scale)
