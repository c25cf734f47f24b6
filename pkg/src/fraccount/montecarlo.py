"""Seedable stochastic validation of the closed forms.

Fixed-t counts are drawn from the PMF table by inverse CDF; first-arrival
times invert the survival function (per-draw by bisection, in batches via
a monotone interpolation table built on exact survival evaluations).
Classical special-case paths and compound sums round out the toolkit.

Identical seeds give identical streams.  Nothing here spawns threads;
callers running batches in parallel should derive one seed per batch
(e.g. base seed plus batch index) so results stay reproducible
regardless of scheduling.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .config import DEFAULT_CONFIG, SeriesConfig
from .counting import pmf_table, survival_zero
from .errors import (
    ConstraintError,
    ConvergenceError,
    DomainError,
    InsufficientDataError,
    NumericError,
    SamplingRangeError,
    UnsupportedError,
)
from .params import ProcessSpec
from .specialfn import ks_coefficients, max_feasible_z

_TAU_HARD_CAP = 1e9
_TAU_REL_TOL = 1e-10
_SAMPLING_TAIL = 1e-9


@dataclass(frozen=True)
class RngSpec:
    """Seed plus algorithm label; identical spec means identical streams."""

    seed: int
    algorithm: str = "pcg64"


def make_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSpec):
        if rng.algorithm != "pcg64":
            raise UnsupportedError(f"unknown rng algorithm {rng.algorithm!r}")
        return np.random.Generator(np.random.PCG64(rng.seed))
    if isinstance(rng, (int, np.integer)):
        return np.random.Generator(np.random.PCG64(int(rng)))
    raise ConstraintError("rng must be a Generator, RngSpec, or integer seed")


@dataclass(frozen=True)
class SampleSummary:
    n_samples: int
    mean: float
    variance: float
    skewness: float
    kurtosis_excess: float
    se_mean: float
    se_variance: float


def _combine_moments(a, b):
    na, ma, m2a, m3a, m4a = a
    nb, mb, m2b, m3b, m4b = b
    n = na + nb
    d = mb - ma
    nanb = na * nb
    mean = ma + d * nb / n
    m2 = m2a + m2b + d * d * nanb / n
    m3 = (
        m3a
        + m3b
        + d**3 * nanb * (na - nb) / n**2
        + 3.0 * d * (na * m2b - nb * m2a) / n
    )
    m4 = (
        m4a
        + m4b
        + d**4 * nanb * (na * na - nanb + nb * nb) / n**3
        + 6.0 * d * d * (na * na * m2b + nb * nb * m2a) / n**2
        + 4.0 * d * (na * m3b - nb * m3a) / n
    )
    return n, mean, m2, m3, m4


def summarize(samples: Sequence[float] | np.ndarray) -> SampleSummary:
    """One-pass (chunked, pairwise-combined) moment accumulation.

    Sample variance uses the n-1 divisor; skewness and kurtosis are the
    plain moment estimators.  Standard errors are the usual asymptotic
    forms for the mean and the variance.
    """
    arr = np.asarray(samples, dtype=float).ravel()
    n = arr.size
    if n < 2:
        raise InsufficientDataError("summarize needs at least 2 samples")
    stats = None
    chunk = 1 << 16
    for start in range(0, n, chunk):
        part = arr[start : start + chunk]
        cmean = part.mean()
        d = part - cmean
        d2 = d * d
        cur = (
            part.size,
            float(cmean),
            float(d2.sum()),
            float((d2 * d).sum()),
            float((d2 * d2).sum()),
        )
        stats = cur if stats is None else _combine_moments(stats, cur)
    _, mean, m2s, m3s, m4s = stats
    variance = m2s / (n - 1)
    m2 = m2s / n
    m3 = m3s / n
    m4 = m4s / n
    if m2 > 0.0:
        skew = m3 / m2**1.5
        kurt = m4 / m2**2 - 3.0
    else:
        skew = math.nan
        kurt = math.nan
    return SampleSummary(
        n_samples=n,
        mean=mean,
        variance=variance,
        skewness=skew,
        kurtosis_excess=kurt,
        se_mean=math.sqrt(variance / n),
        se_variance=math.sqrt(max(m4 - m2 * m2, 0.0) / n),
    )


_cdf_cache: dict = {}
_cdf_lock = threading.Lock()


def _count_cdf(spec: ProcessSpec, t: float, cfg: SeriesConfig) -> np.ndarray:
    key = (spec.params.mu, spec.params.beta, spec.rate, t, cfg)
    with _cdf_lock:
        hit = _cdf_cache.get(key)
    if hit is not None:
        return hit
    table = pmf_table(spec, t, None, cfg)
    if table.tail_mass >= _SAMPLING_TAIL:
        raise ConvergenceError(
            f"pmf table tail mass {table.tail_mass:.3e} >= {_SAMPLING_TAIL}; "
            "cannot sample counts faithfully"
        )
    cdf = table.cdf()
    with _cdf_lock:
        _cdf_cache[key] = cdf
    return cdf


def sample_count(spec: ProcessSpec, t: float, rng, cfg: SeriesConfig = DEFAULT_CONFIG) -> int:
    """One draw of the count at time t (inverse CDF on the PMF table)."""
    gen = make_rng(rng)
    cdf = _count_cdf(spec, t, cfg)
    return int(np.searchsorted(cdf, gen.random(), side="right"))


def sample_counts(
    spec: ProcessSpec, t: float, rng, size: int, cfg: SeriesConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """Vectorized batch of count draws; same law as ``sample_count``."""
    gen = make_rng(rng)
    cdf = _count_cdf(spec, t, cfg)
    return np.searchsorted(cdf, gen.random(size), side="right")


def sample_first_arrival(spec: ProcessSpec, rng, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """Inverse-transform draw of the first waiting time.

    Brackets the root of survival(tau) = u by doubling upward (starting
    at tau = 1, or lower if the series domain forces it), then bisects
    geometrically to relative tolerance 1e-10 in tau.  Raises
    ``SamplingRangeError`` when the quantile lies beyond the largest tau
    at which the survival series can be evaluated (or past 1e9).
    """
    gen = make_rng(rng)
    u = gen.random()
    if u <= 0.0:
        u = np.nextafter(0.0, 1.0)

    def surv(tau: float) -> float:
        return survival_zero(spec, tau, cfg)

    z_start = min(cfg.z_abs_max, max_feasible_z(spec.params, cfg))
    start = min(1.0, 0.9 * (z_start / spec.rate) ** (1.0 / spec.rho))
    lo = hi = start
    if surv(start) < u:
        # root below the start: shrink the lower end until it straddles
        while surv(lo) < u:
            hi = lo
            lo *= 0.5
            if lo < 1e-300:
                return lo
    else:
        while True:
            new_hi = hi * 2.0
            if new_hi > _TAU_HARD_CAP:
                raise SamplingRangeError(
                    f"first-arrival quantile beyond tau = {_TAU_HARD_CAP:.3g}"
                )
            try:
                s_new = surv(new_hi)
            except NumericError as exc:
                raise SamplingRangeError(
                    f"survival tail not evaluable beyond tau = {hi:.6g}; "
                    f"quantile u = {u:.3e} out of reachable range"
                ) from exc
            lo = hi
            hi = new_hi
            if s_new < u:
                break
    while hi - lo > _TAU_REL_TOL * lo:
        mid = math.sqrt(lo * hi)
        if surv(mid) >= u:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


@dataclass
class SurvivalTable:
    """Monotone interpolation table for batch survival inversion.

    Interpolates log(tau) against log(-log(survival)), which is exactly
    linear in both tails, on nodes evaluated with the full series.
    ``u_floor`` is the survival value at the deepest reachable tau;
    uniform draws below it cannot be inverted and come back as +inf.
    """

    spec: ProcessSpec
    tau: np.ndarray
    surv: np.ndarray
    u_floor: float
    _interp: PchipInterpolator = field(repr=False)

    def invert(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.full(u.shape, np.inf)
        ok = u > self.u_floor
        if ok.any():
            x = np.log(-np.log(np.clip(u[ok], 1e-300, 1.0 - 1e-16)))
            x = np.clip(x, self._interp.x[0], self._interp.x[-1])
            out[ok] = np.exp(self._interp(x))
        return out


_survival_tables: dict = {}
_survival_lock = threading.Lock()


def build_survival_table(
    spec: ProcessSpec, cfg: SeriesConfig = DEFAULT_CONFIG, nodes_per_decade: int = 12
) -> SurvivalTable:
    key = (spec.params.mu, spec.params.beta, spec.rate, cfg, nodes_per_decade)
    with _survival_lock:
        hit = _survival_tables.get(key)
    if hit is not None:
        return hit
    params = spec.params
    rho = spec.rho
    lam = spec.rate
    z_hi = min(cfg.z_abs_max, max_feasible_z(params, cfg))
    k1 = math.exp(ks_coefficients(params).log_coeff(1))
    z_lo = min(1e-9 / k1, z_hi * 1e-6)
    tau_lo = (z_lo / lam) ** (1.0 / rho)
    tau_hi = (z_hi / lam) ** (1.0 / rho)
    decades = math.log10(tau_hi / tau_lo)
    n_nodes = int(min(1600, max(300, nodes_per_decade * decades)))
    grid = np.geomspace(tau_lo, tau_hi, n_nodes)
    tau_list: list[float] = []
    surv_list: list[float] = []
    for tau in grid:
        s = survival_zero(spec, float(tau), cfg)
        tau_list.append(float(tau))
        surv_list.append(s)
        if s < 1e-12:
            # deeper nodes are unreachable by any realistic draw count
            break
    taus = np.array(tau_list)
    survs = np.array(surv_list)
    # keep the strictly decreasing, strictly sub-1 part
    keep = (survs < 1.0) & (survs > 0.0)
    taus, survs = taus[keep], survs[keep]
    dec = np.minimum.accumulate(survs)
    keep = np.empty(len(survs), dtype=bool)
    keep[0] = True
    keep[1:] = survs[1:] < dec[:-1]
    taus, survs = taus[keep], survs[keep]
    x = np.log(-np.log(survs))
    interp = PchipInterpolator(x, np.log(taus), extrapolate=True)
    table = SurvivalTable(
        spec=spec, tau=taus, surv=survs, u_floor=float(survs[-1]), _interp=interp
    )
    with _survival_lock:
        _survival_tables[key] = table
    return table


def sample_first_arrivals(
    spec: ProcessSpec, size: int, rng, cfg: SeriesConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """Batch first-arrival draws; +inf marks draws censored past the table."""
    gen = make_rng(rng)
    table = build_survival_table(spec, cfg)
    return table.invert(gen.random(size))


@dataclass(frozen=True)
class KSCheck:
    statistic: float
    critical_value: float
    n_draws: int
    censored_fraction: float
    quantiles: np.ndarray
    quantile_taus: np.ndarray
    passed: bool


def first_arrival_ks_check(
    spec: ProcessSpec,
    n_draws: int,
    rng,
    cfg: SeriesConfig = DEFAULT_CONFIG,
    n_quantiles: int = 10,
    p_value: float = 1e-3,
) -> KSCheck:
    """Empirical first-arrival CDF against the exact survival series.

    The discrepancy is taken at ``n_quantiles`` theoretical quantile
    points inside the invertible range, so censoring past the series
    domain only shrinks the comparison window (the test stays valid:
    the restricted statistic is dominated by the full one).
    """
    gen = make_rng(rng)
    table = build_survival_table(spec, cfg)
    draws = table.invert(gen.random(n_draws))
    finite = np.isfinite(draws)
    censored_fraction = 1.0 - finite.mean()
    q_top = min(0.95, 1.0 - 1.5 * table.u_floor)
    if q_top <= 0.05:
        raise SamplingRangeError(
            "survival table too shallow for a quantile comparison"
        )
    qs = np.linspace(0.05, q_top, n_quantiles)
    taus = table.invert(1.0 - qs)
    f_theory = np.array(
        [1.0 - survival_zero(spec, float(tau), cfg) for tau in taus]
    )
    sorted_draws = np.sort(draws[finite])
    f_emp = np.searchsorted(sorted_draws, taus, side="right") / n_draws
    stat = float(np.max(np.abs(f_emp - f_theory)))
    critical = math.sqrt(0.5 * math.log(2.0 / p_value)) / math.sqrt(n_draws)
    return KSCheck(
        statistic=stat,
        critical_value=critical,
        n_draws=n_draws,
        censored_fraction=float(censored_fraction),
        quantiles=qs,
        quantile_taus=taus,
        passed=stat <= critical,
    )


def _check_classical(spec: ProcessSpec) -> str:
    if spec.params.mu == 1.0:
        return "nonhomogeneous"
    if spec.params.beta == 0.0:
        return "renewal"
    raise UnsupportedError(
        "path simulation is supported only for mu = 1 (time-changed "
        "homogeneous arrivals) or beta = 0 (renewal waiting times)"
    )


def simulate_path_classical(
    spec: ProcessSpec, horizon: float, rng, cfg: SeriesConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """Event times on [0, horizon] for the two classical regimes.

    mu = 1: arrivals of a unit-rate homogeneous process mapped through
    the inverse integrated rate (so the count at any t matches the pmf).
    beta = 0: renewal with i.i.d. waiting times drawn from the survival
    series, resolved only within the remaining horizon.
    """
    if not (math.isfinite(horizon) and horizon >= 0.0):
        raise DomainError("horizon must be non-negative")
    kind = _check_classical(spec)
    gen = make_rng(rng)
    times: list[float] = []
    if kind == "nonhomogeneous":
        sigma = spec.params.sigma
        lam_bar = spec.rate / sigma
        big_lambda = lam_bar * horizon**sigma
        s = 0.0
        while True:
            s += gen.exponential()
            if s > big_lambda:
                break
            times.append((s / lam_bar) ** (1.0 / sigma))
        return np.array(times)

    def surv(tau: float) -> float:
        return survival_zero(spec, tau, cfg)

    t = 0.0
    while True:
        rem = horizon - t
        if rem <= 0.0:
            break
        u = gen.random()
        if u < surv(rem):
            break
        hi = rem
        lo = min(rem, 1.0)
        while surv(lo) < u:
            hi = lo
            lo *= 0.5
            if lo < 1e-300:
                break
        while hi - lo > _TAU_REL_TOL * lo:
            mid = math.sqrt(lo * hi)
            if surv(mid) >= u:
                lo = mid
            else:
                hi = mid
        t += math.sqrt(lo * hi)
        times.append(t)
    return np.array(times)


def simulate_counts_classical(
    spec: ProcessSpec,
    horizon: float,
    n_paths: int,
    rng,
    cfg: SeriesConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Event counts at the horizon for many simulated classical paths."""
    if not (math.isfinite(horizon) and horizon >= 0.0):
        raise DomainError("horizon must be non-negative")
    kind = _check_classical(spec)
    gen = make_rng(rng)
    counts = np.zeros(n_paths, dtype=np.int64)
    if horizon == 0.0 or n_paths == 0:
        return counts
    if kind == "nonhomogeneous":
        sigma = spec.params.sigma
        lam_bar = spec.rate / sigma
        big_lambda = lam_bar * horizon**sigma
        cum = np.zeros(n_paths)
        active = np.ones(n_paths, dtype=bool)
        while active.any():
            idx = np.flatnonzero(active)
            cum[idx] += gen.exponential(size=idx.size)
            arrived = cum[idx] <= big_lambda
            counts[idx[arrived]] += 1
            active[idx[~arrived]] = False
        return counts
    table = build_survival_table(spec, cfg)
    t = np.zeros(n_paths)
    active = np.ones(n_paths, dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        taus = table.invert(gen.random(idx.size))
        t_new = t[idx] + taus
        arrived = t_new <= horizon
        t[idx[arrived]] = t_new[arrived]
        counts[idx[arrived]] += 1
        active[idx[~arrived]] = False
    return counts


@dataclass(frozen=True)
class JumpDistribution:
    """Jump law for the compound process: mgf, mean, and samplers."""

    name: str
    mean: float
    mgf: Callable[[float], float]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    batch_total: Callable[[np.random.Generator, np.ndarray], np.ndarray] | None = None


def degenerate_jump(value: float) -> JumpDistribution:
    return JumpDistribution(
        name=f"degenerate({value:g})",
        mean=value,
        mgf=lambda s: math.exp(value * s),
        sampler=lambda gen, size: np.full(size, float(value)),
        batch_total=lambda gen, counts: value * counts.astype(float),
    )


def exponential_jump(mean: float) -> JumpDistribution:
    if not mean > 0.0:
        raise ConstraintError("exponential jump mean must be positive")

    def mgf(s: float) -> float:
        if s >= 1.0 / mean:
            raise DomainError("exponential jump mgf diverges at s >= 1/mean")
        return 1.0 / (1.0 - mean * s)

    return JumpDistribution(
        name=f"exponential({mean:g})",
        mean=mean,
        mgf=mgf,
        sampler=lambda gen, size: gen.exponential(mean, size),
        batch_total=lambda gen, counts: mean * gen.standard_gamma(counts),
    )


def normal_jump(mean: float, std: float) -> JumpDistribution:
    if std < 0.0:
        raise ConstraintError("normal jump std must be non-negative")
    return JumpDistribution(
        name=f"normal({mean:g},{std:g})",
        mean=mean,
        mgf=lambda s: math.exp(mean * s + 0.5 * (std * s) ** 2),
        sampler=lambda gen, size: gen.normal(mean, std, size),
        batch_total=lambda gen, counts: gen.normal(
            counts * mean, std * np.sqrt(counts)
        ),
    )


def sample_compound(
    spec: ProcessSpec,
    t: float,
    jump: JumpDistribution,
    rng,
    cfg: SeriesConfig = DEFAULT_CONFIG,
) -> float:
    """One draw of the compound sum: count draw, then that many jumps."""
    gen = make_rng(rng)
    n = sample_count(spec, t, gen, cfg)
    if n == 0:
        return 0.0
    return float(jump.sampler(gen, n).sum())


def sample_compounds(
    spec: ProcessSpec,
    t: float,
    jump: JumpDistribution,
    rng,
    size: int,
    cfg: SeriesConfig = DEFAULT_CONFIG,
) -> np.ndarray:
    """Vectorized batch of compound-sum draws."""
    gen = make_rng(rng)
    counts = sample_counts(spec, t, gen, size, cfg)
    if jump.batch_total is not None:
        return jump.batch_total(gen, counts)
    out = np.zeros(size)
    for i, n in enumerate(counts):
        if n:
            out[i] = jump.sampler(gen, int(n)).sum()
    return out
