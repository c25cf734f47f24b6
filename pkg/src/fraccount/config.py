"""Truncation and accuracy knobs for every series evaluation."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConstraintError


@dataclass(frozen=True)
class SeriesConfig:
    """Controls for power-series summation.

    rel_tol     relative stopping tolerance (three consecutive terms below
                it end the sum) and the accuracy the result is certified to.
    abs_tol     absolute floor used when the partial sum is itself tiny.
    max_terms   hard cap on the number of series terms.
    z_abs_max   largest |z| accepted by the series evaluators; beyond it the
                alternating-series cancellation is not worth fighting.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-300
    max_terms: int = 2000
    z_abs_max: float = 40.0

    def __post_init__(self):
        if not self.rel_tol > 0.0:
            raise ConstraintError("rel_tol must be positive")
        if self.abs_tol < 0.0:
            raise ConstraintError("abs_tol must be non-negative")
        if self.max_terms < 8:
            raise ConstraintError("max_terms must be at least 8")
        if not self.z_abs_max > 0.0:
            raise ConstraintError("z_abs_max must be positive")


DEFAULT_CONFIG = SeriesConfig()
