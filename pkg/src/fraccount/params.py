"""Process parameters: the fractality pair (mu, beta) and the arrival rate."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConstraintError


@dataclass(frozen=True)
class FractalityParams:
    """Dimensionless exponent pair controlling memory and time-inhomogeneity.

    mu    order of the memory kernel, 0 < mu <= 1.
    beta  power-law exponent of the time-dependent rate factor,
          -mu < beta <= 1 - mu.

    The derived exponent ``rho = mu + beta`` then satisfies 0 < rho <= 1,
    which keeps every Gamma argument k*rho + beta + 1 (k >= 0) strictly
    positive, so the coefficient products are well defined.
    """

    mu: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and 0.0 < self.mu <= 1.0):
            raise ConstraintError("mu must satisfy 0 < mu <= 1")
        if not (math.isfinite(self.beta) and -self.mu < self.beta <= 1.0 - self.mu):
            raise ConstraintError("beta must satisfy -mu < beta <= 1-mu")

    @property
    def rho(self) -> float:
        """Combined exponent mu + beta (the power of t in the rate scale)."""
        return self.mu + self.beta

    @property
    def sigma(self) -> float:
        """Stretching exponent 1 + beta used by the mu = 1 special case."""
        return 1.0 + self.beta

    def is_poisson(self) -> bool:
        return self.mu == 1.0 and self.beta == 0.0


@dataclass(frozen=True)
class ProcessSpec:
    """A counting process: fractality parameters plus the arrival rate.

    ``rate`` carries units time**(-(mu+beta)).  It is the single rate
    constant multiplying t**beta in the evolution equations; the classical
    reductions reinterpret it (Poisson rate at mu=1, beta=0; fractional
    rate at beta=0; stretched rate at mu=1).
    """

    params: FractalityParams
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ConstraintError("rate must be positive")

    @property
    def rho(self) -> float:
        return self.params.rho

    def z_scale(self, t: float) -> float:
        """The series argument scale rate * t**rho at time t >= 0."""
        if t < 0.0:
            raise ConstraintError("t must be non-negative")
        if t == 0.0:
            return 0.0
        return self.rate * t ** self.rho


def make_spec(mu: float, beta: float, rate: float) -> ProcessSpec:
    """Convenience constructor used by the CLI and tests."""
    return ProcessSpec(params=FractalityParams(mu=mu, beta=beta), rate=rate)
