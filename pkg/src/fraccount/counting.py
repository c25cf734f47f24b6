"""Process-level probability apparatus for the counting process.

PMF, survival, generating functions, moments, interarrival-time density
and its Laplace transform, plus the compound-process formulas.  All the
heavy lifting is the generalized exponential series from ``specialfn``;
this module owns the probabilistic bookkeeping around it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from . import combinatorics
from .config import DEFAULT_CONFIG, SeriesConfig
from .errors import (
    AsymptoticError,
    ConstraintError,
    DegenerateDistributionError,
    DomainError,
    IntegrationError,
    PrecisionLossError,
    UnsupportedError,
)
from .params import ProcessSpec
from .specialfn import (
    kilbas_saigo,
    kilbas_saigo_deriv,
    ks_coefficients,
    max_feasible_z,
)

_NEG_CLAMP = 1e-10
_AUTO_NMAX_CAP = 500
_AUTO_DROP = 1e-12
_AUTO_RUN = 5


@dataclass(frozen=True)
class PMFTable:
    """Probabilities P(n, t) for n = 0..n_max at one (spec, t)."""

    spec: ProcessSpec
    t: float
    probs: np.ndarray
    tail_mass: float

    @property
    def n_max(self) -> int:
        return len(self.probs) - 1

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)


@dataclass(frozen=True)
class MomentSet:
    """Raw and central moments m = 1..4 plus the shape statistics."""

    raw: tuple[float, float, float, float]
    central: tuple[float, float, float, float]
    variance: float
    skewness: float
    kurtosis_excess: float


class LaplaceSeriesResult(NamedTuple):
    value: float
    error_estimate: float
    terms_used: int
    truncated_by_growth: bool


def _clamp_probability(value: float, what: str) -> float:
    if value < 0.0:
        if value < -_NEG_CLAMP:
            raise PrecisionLossError(
                f"{what} came out {value:.3e}, below the roundoff allowance"
            )
        return 0.0
    if value > 1.0:
        if value > 1.0 + _NEG_CLAMP:
            raise PrecisionLossError(f"{what} came out {value:.17g} > 1")
        return 1.0
    return value


def _check_time(t: float) -> None:
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError("t must be non-negative and finite")


def pmf(spec: ProcessSpec, t: float, n: int, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """P(n arrivals by time t); the delta at n = 0 when t = 0."""
    if n < 0:
        raise ConstraintError("n must be a non-negative integer")
    _check_time(t)
    zbar = spec.z_scale(t)
    if zbar > cfg.z_abs_max:
        raise DomainError(
            f"rate * t**rho = {zbar:.6g} exceeds the series domain "
            f"z_abs_max = {cfg.z_abs_max:.6g}"
        )
    if zbar == 0.0:
        return 1.0 if n == 0 else 0.0
    log_pre = n * math.log(zbar) - math.lgamma(n + 1.0)
    value = math.exp(log_pre) * kilbas_saigo_deriv(spec.params, n, -zbar, cfg)
    return _clamp_probability(value, f"pmf(n={n}, t={t!r})")


def pmf_table(
    spec: ProcessSpec,
    t: float,
    n_max: int | None = None,
    cfg: SeriesConfig = DEFAULT_CONFIG,
) -> PMFTable:
    """Probabilities for n = 0..n_max plus the remaining tail mass.

    With ``n_max=None`` the table grows until five consecutive
    probabilities fall below 1e-12 of the largest seen, capped at 500.
    """
    _check_time(t)
    if n_max is not None and n_max < 0:
        raise ConstraintError("n_max must be non-negative")
    if spec.z_scale(t) == 0.0:
        probs = np.zeros((n_max or 0) + 1)
        probs[0] = 1.0
        return PMFTable(spec=spec, t=t, probs=probs, tail_mass=0.0)
    values: list[float] = []
    if n_max is not None:
        for n in range(n_max + 1):
            values.append(pmf(spec, t, n, cfg))
    else:
        biggest = 0.0
        run = 0
        for n in range(_AUTO_NMAX_CAP + 1):
            p = pmf(spec, t, n, cfg)
            values.append(p)
            if p > biggest:
                biggest = p
                run = 0
            elif p < _AUTO_DROP * biggest:
                run += 1
                if run >= _AUTO_RUN:
                    break
            else:
                run = 0
    probs = np.array(values)
    tail = 1.0 - math.fsum(values)
    if tail < -1e-8:
        raise PrecisionLossError(
            f"pmf table sums to {math.fsum(values):.17g} > 1 + 1e-8"
        )
    return PMFTable(spec=spec, t=t, probs=probs, tail_mass=tail)


def survival_zero(spec: ProcessSpec, t: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """P(no arrival by t), the survival function of the first waiting time."""
    _check_time(t)
    return kilbas_saigo(spec.params, -spec.z_scale(t), cfg)


def pgf(spec: ProcessSpec, t: float, s: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """Probability generating function sum(s^n P(n, t)) for s in [0, 1]."""
    if not 0.0 <= s <= 1.0:
        raise DomainError("pgf argument s must lie in [0, 1]")
    _check_time(t)
    return kilbas_saigo(spec.params, spec.z_scale(t) * (s - 1.0), cfg)


def mgf(spec: ProcessSpec, t: float, s: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """Moment generating function sum(exp(-s n) P(n, t)) for s >= 0."""
    if s < 0.0:
        raise DomainError("mgf argument s must be non-negative")
    _check_time(t)
    return kilbas_saigo(spec.params, spec.z_scale(t) * math.expm1(-s), cfg)


def _gamma_ratio(a: float, b: float) -> float:
    return math.exp(math.lgamma(a) - math.lgamma(b))


def mean(spec: ProcessSpec, t: float) -> float:
    """First moment: Gamma(beta+1)/Gamma(mu+beta+1) * rate * t**rho."""
    _check_time(t)
    p = spec.params
    return _gamma_ratio(p.beta + 1.0, p.rho + 1.0) * spec.z_scale(t)


def raw_moment(spec: ProcessSpec, t: float, m: int) -> float:
    """m-th raw moment via the combinatorial-number expansion in rate*t**rho."""
    if not 1 <= m <= 8:
        raise UnsupportedError("raw_moment supports orders 1..8")
    _check_time(t)
    x = spec.z_scale(t)
    terms = [
        combinatorics.frac_comb_number(spec.params, m, l) * x**l
        for l in range(1, m + 1)
    ]
    return math.fsum(terms)


def _shape_ratios(spec: ProcessSpec) -> tuple[float, float, float]:
    """The ratio combinations the central-moment closed forms are built on."""
    mu, beta = spec.params.mu, spec.params.beta
    g1 = _gamma_ratio(beta + 1.0, mu + beta + 1.0)
    g2 = _gamma_ratio(mu + 2 * beta + 1.0, 2 * mu + 2 * beta + 1.0)
    g3 = _gamma_ratio(2 * mu + 3 * beta + 1.0, 3 * mu + 3 * beta + 1.0)
    g4 = _gamma_ratio(3 * mu + 4 * beta + 1.0, 4 * mu + 4 * beta + 1.0)
    d2 = g2 / g1
    d3 = g2 * g3 / g1**2
    d4 = g2 * g3 * g4 / g1**3
    return d2, d3, d4


def central_moment(spec: ProcessSpec, t: float, m: int) -> float:
    """Central moments m = 1..4 from the power-series-in-the-mean forms."""
    if not 1 <= m <= 4:
        raise UnsupportedError("central_moment supports orders 1..4")
    _check_time(t)
    if m == 1:
        return 0.0
    a = mean(spec, t)
    d2, d3, d4 = _shape_ratios(spec)
    if m == 2:
        return (2.0 * d2 - 1.0) * a**2 + a
    if m == 3:
        return (
            2.0 * (3.0 * d3 - 3.0 * d2 + 1.0) * a**3
            + 3.0 * (2.0 * d2 - 1.0) * a**2
            + a
        )
    return (
        3.0 * (8.0 * d4 - 8.0 * d3 + 4.0 * d2 - 1.0) * a**4
        + 6.0 * (6.0 * d3 - 4.0 * d2 + 1.0) * a**3
        + 2.0 * (7.0 * d2 - 2.0) * a**2
        + a
    )


def variance(spec: ProcessSpec, t: float) -> float:
    return central_moment(spec, t, 2)


def skewness(spec: ProcessSpec, t: float) -> float:
    m2 = central_moment(spec, t, 2)
    if m2 <= 0.0:
        raise DegenerateDistributionError("skewness undefined at zero variance")
    return central_moment(spec, t, 3) / m2**1.5


def kurtosis_excess(spec: ProcessSpec, t: float) -> float:
    m2 = central_moment(spec, t, 2)
    if m2 <= 0.0:
        raise DegenerateDistributionError("kurtosis undefined at zero variance")
    return central_moment(spec, t, 4) / m2**2 - 3.0


def moment_set(spec: ProcessSpec, t: float) -> MomentSet:
    raw = tuple(raw_moment(spec, t, m) for m in range(1, 5))
    central = tuple(central_moment(spec, t, m) for m in range(1, 5))
    return MomentSet(
        raw=raw,
        central=central,
        variance=central[1],
        skewness=skewness(spec, t),
        kurtosis_excess=kurtosis_excess(spec, t),
    )


def interarrival_pdf(spec: ProcessSpec, tau: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """Density of the first waiting time, -d/dtau of the survival function.

    Equals rho * rate * tau**(rho-1) times the first derivative series at
    -rate*tau**rho.
    """
    if not (math.isfinite(tau) and tau > 0.0):
        raise DomainError("tau must be positive")
    rho = spec.rho
    zbar = spec.z_scale(tau)
    if zbar > cfg.z_abs_max:
        raise DomainError(
            f"rate * tau**rho = {zbar:.6g} exceeds the series domain"
        )
    value = rho * spec.rate * tau ** (rho - 1.0) * kilbas_saigo_deriv(
        spec.params, 1, -zbar, cfg
    )
    if value < 0.0:
        if value < -_NEG_CLAMP:
            raise PrecisionLossError(f"interarrival density came out {value:.3e}")
        return 0.0
    return value


def _laplace_log_term(spec: ProcessSpec, u: float, l: int, coeffs) -> float:
    rho = spec.rho
    return (
        math.log(rho)
        + math.log1p(l)
        + (l + 1) * (math.log(spec.rate) - rho * math.log(u))
        + math.lgamma(rho * (l + 1))
        + coeffs.log_coeff(l + 1)
    )


def interarrival_laplace_series_info(
    spec: ProcessSpec, u: float, terms: int = 64
) -> LaplaceSeriesResult:
    """Asymptotic series for the Laplace transform of the waiting density.

    Sums the alternating expansion in powers of u**(-rho); stops at the
    requested number of terms or as soon as term magnitudes start to
    grow.  The returned value carries the half-last-term correction of an
    alternating truncation; the error estimate is the magnitude of the
    first omitted term.
    """
    if not (math.isfinite(u) and u > 0.0):
        raise DomainError("u must be positive")
    if terms < 1:
        raise ConstraintError("terms must be at least 1")
    coeffs = ks_coefficients(spec.params)
    total = 0.0
    prev_mag = math.inf
    used = 0
    truncated = False
    for l in range(terms):
        log_mag = _laplace_log_term(spec, u, l, coeffs)
        mag = math.exp(log_mag) if log_mag > -745.0 else 0.0
        signed = -mag if l % 2 else mag
        # strict growth beyond roundoff jitter; exact ties keep summing
        if mag > prev_mag * (1.0 + 1e-9):
            if l == 1:
                raise AsymptoticError(
                    "Laplace series terms grow from the start; u is too small "
                    "for the asymptotic expansion"
                )
            truncated = True
            break
        total += signed
        prev_mag = mag
        used = l + 1
        if mag <= 1e-16 * abs(total):
            break
    if not truncated:
        log_mag = _laplace_log_term(spec, u, used, coeffs)
        mag = math.exp(log_mag) if log_mag > -745.0 else 0.0
        signed = -mag if used % 2 else mag
    # The terms alternate strictly, so the truth sits between consecutive
    # partial sums; adding half the first omitted term centers the bracket.
    return LaplaceSeriesResult(
        value=total + 0.5 * signed,
        error_estimate=mag,
        terms_used=used,
        truncated_by_growth=truncated,
    )


def interarrival_laplace_series(spec: ProcessSpec, u: float, terms: int = 64) -> float:
    return interarrival_laplace_series_info(spec, u, terms).value


def interarrival_laplace_quadrature(
    spec: ProcessSpec, u: float, cfg: SeriesConfig = DEFAULT_CONFIG
) -> float:
    """Laplace transform of the waiting density by adaptive quadrature.

    Substituting v = tau**rho removes the endpoint singularity, leaving
    integral of rate * E'(-rate v) * exp(-u v**(1/rho)) dv over (0, inf),
    truncated where the exponential factor is negligible.
    """
    if not (math.isfinite(u) and u > 0.0):
        raise DomainError("u must be positive")
    params = spec.params
    rho = spec.rho
    lam = spec.rate
    inv_rho = 1.0 / rho
    v_needed = (709.0 / u) ** rho
    v_cap = min(cfg.z_abs_max, max_feasible_z(params, cfg)) / lam
    v_hi = min(v_needed, v_cap)

    def integrand(v: float) -> float:
        if v <= 0.0:
            return lam * kilbas_saigo_deriv(params, 1, 0.0, cfg)
        return lam * kilbas_saigo_deriv(params, 1, -lam * v, cfg) * math.exp(
            -u * v**inv_rho
        )

    value, quad_err = integrate.quad(
        integrand, 0.0, v_hi, epsabs=1e-13, epsrel=1e-11, limit=400
    )
    tail = 0.0
    if v_hi < v_needed:
        # bound: E' decreasing, and for rho <= 1 the remaining envelope
        # integral is at most rho * W**(rho-1) * exp(-u W)/u with W = v_hi**(1/rho)
        w = v_hi**inv_rho
        tail = (
            lam
            * kilbas_saigo_deriv(params, 1, -lam * v_hi, cfg)
            * rho
            * w ** (rho - 1.0)
            * math.exp(-u * w)
            / u
        )
    budget = max(5e-9 * abs(value), 1e-12)
    if quad_err > budget or tail > budget:
        raise IntegrationError(
            f"Laplace quadrature at u={u!r} could not reach the target accuracy "
            f"(quad error {quad_err:.3e}, tail bound {tail:.3e})"
        )
    return value


def rate_function(spec: ProcessSpec, t: float) -> float:
    """Instantaneous rate sigma * rate * t**(sigma-1) of the mu = 1 case."""
    if spec.params.mu != 1.0:
        raise UnsupportedError("rate_function is defined only for mu = 1")
    if not (math.isfinite(t) and t > 0.0):
        raise DomainError("t must be positive")
    sigma = spec.params.sigma
    return sigma * spec.rate * t ** (sigma - 1.0)


def cumulative_rate(spec: ProcessSpec, t: float) -> float:
    """Integrated rate rate * t**sigma of the mu = 1 case."""
    if spec.params.mu != 1.0:
        raise UnsupportedError("cumulative_rate is defined only for mu = 1")
    _check_time(t)
    return spec.rate * t ** spec.params.sigma


def compound_mgf(
    spec: ProcessSpec,
    t: float,
    jump_mgf: Callable[[float], float],
    s: float,
    cfg: SeriesConfig = DEFAULT_CONFIG,
) -> float:
    """MGF of the random sum of i.i.d. jumps driven by the counting process."""
    _check_time(t)
    g = jump_mgf(s)
    if not math.isfinite(g):
        raise DomainError("jump mgf is not finite at this argument")
    arg = spec.z_scale(t) * (g - 1.0)
    if abs(arg) > cfg.z_abs_max:
        raise DomainError(
            f"rate * t**rho * (g(s)-1) = {arg:.6g} exceeds the series domain"
        )
    return kilbas_saigo(spec.params, arg, cfg)


def compound_mean(spec: ProcessSpec, t: float, jump_mean: float) -> float:
    """Mean of the compound process: jump mean times the count mean."""
    return jump_mean * mean(spec, t)
