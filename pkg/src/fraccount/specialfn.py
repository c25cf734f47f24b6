"""Gamma-ratio coefficient products and the generalized exponential series.

Everything here is a power series sum(c_n * z**n) whose coefficients are
built from log-Gamma differences.  The double-precision path uses
compensated (Neumaier) summation and certifies its own cancellation error;
when that certificate fails the sum is redone in arbitrary precision with
just enough digits, so alternating arguments deep in the cancellation
region still come back fully accurate.
"""

from __future__ import annotations

import math
import threading

import mpmath as mp

from .config import DEFAULT_CONFIG, SeriesConfig
from .errors import (
    ConstraintError,
    ConvergenceError,
    DomainError,
    PrecisionLossError,
)
from .params import FractalityParams

_EPS = 2.220446049250313e-16
_LOG_HUGE = 700.0          # past this, exp() overflows double
_LOG_TINY = -745.0         # below this, exp() underflows to 0.0
_MP_STOP_REL = mp.mpf("1e-21")
_MP_MAX_DPS = 3300


def log_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0.

    Thin wrapper over the C library routine; the domain check is ours so
    the error message matches the rest of the package.
    """
    if not (isinstance(x, (int, float)) and math.isfinite(x) and x > 0.0):
        raise DomainError("log_gamma requires x > 0")
    return math.lgamma(x)


class KSCoefficients:
    """Memoized products K_n of Gamma ratios for one (mu, beta) pair.

    K_0 = 1 and K_{n+1} = K_n * Gamma(n*rho + beta + 1) / Gamma(n*rho + rho + 1)
    with rho = mu + beta.  Logs are accumulated with compensation so the
    ratio K_{n+1}/K_n recovered from the cumulative logs stays accurate
    out to n in the hundreds.
    """

    def __init__(self, params: FractalityParams):
        self.params = params
        self._logs = [0.0]
        self._comp = [0.0]
        self._lock = threading.Lock()
        self._mp_vals: list = []
        self._mp_dps = 0

    def _extend(self, n: int) -> None:
        with self._lock:
            beta = self.params.beta
            rho = self.params.rho
            while len(self._logs) <= n:
                k = len(self._logs) - 1
                delta = math.lgamma(k * rho + beta + 1.0) - math.lgamma(
                    k * rho + rho + 1.0
                )
                total = self._logs[-1]
                comp = self._comp[-1]
                s = total + delta
                if abs(total) >= abs(delta):
                    comp += (total - s) + delta
                else:
                    comp += (delta - s) + total
                self._logs.append(s)
                self._comp.append(comp)

    def log_coeff(self, n: int) -> float:
        """log K_n; exact 0.0 at n = 0."""
        if n < 0:
            raise ConstraintError("coefficient index must be non-negative")
        if n >= len(self._logs):
            self._extend(n)
        return self._logs[n] + self._comp[n]

    def coeff(self, n: int) -> float:
        lk = self.log_coeff(n)
        if lk < _LOG_TINY:
            return 0.0
        return math.exp(lk)

    def underflowed(self, n: int) -> bool:
        """True when K_n is positive but below the double-precision range."""
        return self.log_coeff(n) < _LOG_TINY

    def ensure_mp(self, n: int, dps: int) -> None:
        """Extend the arbitrary-precision coefficient cache to index n."""
        with self._lock:
            if dps > self._mp_dps:
                # headroom on reset, so marginal escalations reuse the build
                self._mp_vals = [None]
                self._mp_dps = max(dps + dps // 3, 30)
            if not self._mp_vals:
                self._mp_vals = [None]
            with mp.workdps(self._mp_dps):
                if self._mp_vals[0] is None:
                    self._mp_vals[0] = mp.mpf(1)
                beta = mp.mpf(self.params.beta)
                rho = mp.mpf(self.params.mu) + beta
                while len(self._mp_vals) <= n:
                    k = len(self._mp_vals) - 1
                    ratio = mp.exp(
                        mp.loggamma(k * rho + beta + 1)
                        - mp.loggamma(k * rho + rho + 1)
                    )
                    self._mp_vals.append(self._mp_vals[-1] * ratio)

    def mp_coeff(self, n: int):
        return self._mp_vals[n]


_ks_registry: dict[tuple[float, float], KSCoefficients] = {}
_ml_registry: dict[tuple, "_SeriesCoeffs"] = {}
_registry_lock = threading.Lock()


def ks_coefficients(params: FractalityParams) -> KSCoefficients:
    key = (params.mu, params.beta)
    with _registry_lock:
        entry = _ks_registry.get(key)
        if entry is None:
            entry = KSCoefficients(params)
            _ks_registry[key] = entry
    return entry


class _SeriesCoeffs:
    """Coefficient provider for one of the series families.

    kind "ks"      : c_n = K_n                      (Kilbas-Saigo)
    kind "ksderiv" : c_m = (m+r)!/m! * K_{m+r}       (order-r derivative)
    kind "ml"      : c_n = 1/Gamma(mu*n + 1)
    kind "ml2"     : c_n = 1/Gamma(mu*n + nu)
    """

    def __init__(self, kind, ks=None, order=0, mu=0.0, nu=1.0):
        self.kind = kind
        self.ks = ks
        self.order = order
        self.mu = mu
        self.nu = nu
        self._mp_vals: list = []
        self._mp_dps = 0
        self._lock = threading.Lock()

    def log_coeff(self, n: int) -> float:
        if self.kind == "ks":
            return self.ks.log_coeff(n)
        if self.kind == "ksderiv":
            r = self.order
            return (
                math.lgamma(n + r + 1.0)
                - math.lgamma(n + 1.0)
                + self.ks.log_coeff(n + r)
            )
        if self.kind == "ml":
            return -math.lgamma(self.mu * n + 1.0)
        return -math.lgamma(self.mu * n + self.nu)

    def ensure_mp(self, n: int, dps: int) -> None:
        if self.kind == "ks":
            self.ks.ensure_mp(n, dps)
            return
        if self.kind == "ksderiv":
            self.ks.ensure_mp(n + self.order, dps)
        with self._lock:
            if dps > self._mp_dps:
                self._mp_vals = []
                self._mp_dps = max(dps + dps // 3, 30)
            with mp.workdps(self._mp_dps):
                if self.kind == "ksderiv":
                    r = self.order
                    if not self._mp_vals:
                        self._mp_vals = [mp.factorial(r)]
                    while len(self._mp_vals) <= n:
                        m = len(self._mp_vals) - 1
                        nxt = self._mp_vals[-1] * (m + r + 1)
                        self._mp_vals.append(nxt / (m + 1))
                else:
                    mu = mp.mpf(self.mu)
                    nu = mp.mpf(1 if self.kind == "ml" else self.nu)
                    while len(self._mp_vals) <= n:
                        m = len(self._mp_vals)
                        self._mp_vals.append(1 / mp.gamma(mu * m + nu))

    def mp_coeff(self, n: int):
        if self.kind == "ks":
            return self.ks.mp_coeff(n)
        if self.kind == "ksderiv":
            return self._mp_vals[n] * self.ks.mp_coeff(n + self.order)
        return self._mp_vals[n]


def _get_provider(kind, params=None, order=0, mu=0.0, nu=1.0) -> _SeriesCoeffs:
    if kind in ("ks", "ksderiv"):
        key = (kind, params.mu, params.beta, order)
    else:
        key = (kind, mu, nu)
    ks = ks_coefficients(params) if params is not None else None
    with _registry_lock:
        entry = _ml_registry.get(key)
        if entry is None:
            entry = _SeriesCoeffs(kind, ks=ks, order=order, mu=mu, nu=nu)
            _ml_registry[key] = entry
    return entry


def _double_pass(provider, z: float, cfg: SeriesConfig):
    """Compensated double-precision sum of sum(c_n z^n).

    Returns (value, converged, overflowed, max_abs_partial, max_log_term,
    last_term_mag, n_used).
    """
    log_abs_z = math.log(abs(z))
    total = 0.0
    comp = 0.0
    max_abs_partial = 0.0
    max_log_term = -math.inf
    small_run = 0
    last_mag = math.inf
    negative = z < 0.0
    for n in range(cfg.max_terms):
        log_term = provider.log_coeff(n) + n * log_abs_z
        if log_term > max_log_term:
            max_log_term = log_term
        if log_term > _LOG_HUGE:
            return total + comp, False, True, max_abs_partial, max_log_term, last_mag, n
        mag = math.exp(log_term) if log_term > _LOG_TINY else 0.0
        term = -mag if (negative and n % 2 == 1) else mag
        s = total + term
        if abs(total) >= abs(term):
            comp += (total - s) + term
        else:
            comp += (term - s) + total
        total = s
        cur = abs(total + comp)
        if cur > max_abs_partial:
            max_abs_partial = cur
        last_mag = mag
        if mag <= max(cfg.rel_tol * cur, cfg.abs_tol):
            small_run += 1
            if small_run >= 3:
                return total + comp, True, False, max_abs_partial, max_log_term, last_mag, n + 1
        else:
            small_run = 0
    return total + comp, False, False, max_abs_partial, max_log_term, last_mag, cfg.max_terms


def _mp_pass(provider, z: float, cfg: SeriesConfig, dps: int):
    """Arbitrary-precision sum at a given working precision.

    Returns (value_mpf, converged, max_abs_partial, last_term_mag).
    """
    # the tighter mp stopping rule needs headroom past the double budget
    budget = cfg.max_terms + cfg.max_terms // 2
    with mp.workdps(dps):
        zm = mp.mpf(z)
        total = mp.mpf(0)
        zn = mp.mpf(1)
        max_abs_partial = mp.mpf(0)
        floor = mp.mpf(cfg.abs_tol)
        small_run = 0
        last = mp.mpf(0)
        built = 0
        for n in range(budget):
            if n >= built:
                built = min(budget, max(2 * built, 64))
                provider.ensure_mp(built - 1, dps)
            term = provider.mp_coeff(n) * zn
            total += term
            at = abs(total)
            if at > max_abs_partial:
                max_abs_partial = at
            last = abs(term)
            if last <= _MP_STOP_REL * at + floor:
                small_run += 1
                if small_run >= 3:
                    return total, True, max_abs_partial, last
            else:
                small_run = 0
            zn *= zm
        return total, False, max_abs_partial, last


def _eval_series(provider, z: float, cfg: SeriesConfig, what: str) -> float:
    """Evaluate a coefficient series at z with certified accuracy."""
    if z == 0.0:
        return math.exp(provider.log_coeff(0))
    value, converged, overflowed, max_abs, max_log, last_mag, _ = _double_pass(
        provider, z, cfg
    )
    if not overflowed:
        if not converged:
            raise ConvergenceError(
                f"{what} series did not converge within {cfg.max_terms} terms "
                f"at z={z!r} (last term magnitude {last_mag:.3e})",
                last_term=last_mag,
            )
        # Terms are built as exp(accumulated logs), so their own error is
        # eps * |log term|, not just eps; fold that into the estimate.
        est_cancel = max_abs * _EPS * (1.0 + abs(max_log))
        if value != 0.0 and est_cancel <= cfg.rel_tol * abs(value):
            return value
    # Cancellation beyond what double precision certifies: redo the sum
    # with enough digits that the rounded result is exact to double.
    # Jensen's bound log E(-x) >= -x * c_1/c_0 anchors the first guess at
    # the working precision; the accept check below escalates if short.
    max_log10 = max_log / math.log(10.0)
    ratio1 = math.exp(min(provider.log_coeff(1) - provider.log_coeff(0), 700.0))
    result_floor_log10 = -abs(z) * ratio1 / math.log(10.0)
    dps = int(max_log10 - min(result_floor_log10, 0.0)) + 30
    if value != 0.0 and not overflowed and est_cancel < 1e-6 * abs(value):
        # The double value is a sound magnitude estimate; size dps to it.
        dps = min(dps, int(max_log10 - math.log10(abs(value))) + 30)
    dps = min(max(dps, 30), _MP_MAX_DPS)
    for _ in range(6):
        total, converged, max_abs_mp, last_mp = _mp_pass(provider, z, cfg, dps)
        if not converged:
            raise ConvergenceError(
                f"{what} series did not converge within the term budget "
                f"at z={z!r} (last term magnitude {mp.nstr(last_mp, 5)})",
                last_term=float(last_mp),
            )
        err = max_abs_mp * mp.mpf(10) ** (2 - dps)
        if total == 0:
            dps = min(dps * 2, _MP_MAX_DPS)
            continue
        if err <= mp.mpf("1e-18") * abs(total):
            return float(total)
        deficit = int(mp.log10(err / (mp.mpf("1e-18") * abs(total)))) + 15
        if dps >= _MP_MAX_DPS:
            break
        # grow geometrically so garbage-magnitude totals cannot stall the climb
        dps = min(dps + max(deficit, int(0.7 * dps)), _MP_MAX_DPS)
    raise PrecisionLossError(
        f"{what} could not be evaluated to the requested accuracy at z={z!r}"
    )


def _positive_unit_guard(value: float, what: str) -> float:
    """Enforce the (0, 1] range of completely monotone values at z <= 0."""
    if value > 1.0:
        if value <= 1.0 + 1e-12:
            return 1.0
        raise PrecisionLossError(f"{what} exceeded 1 at a non-positive argument")
    if value < 0.0:
        raise PrecisionLossError(f"{what} went negative at a non-positive argument")
    return value


def _check_z(z: float, cfg: SeriesConfig) -> None:
    if not math.isfinite(z):
        raise DomainError("series argument must be finite")
    if abs(z) > cfg.z_abs_max:
        raise DomainError(
            f"|z| = {abs(z):.6g} exceeds the supported series domain "
            f"z_abs_max = {cfg.z_abs_max:.6g}"
        )


def ks_series_coeff(params: FractalityParams, n: int, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """Coefficient K_n of the generalized exponential series.

    Computed as a compensated sum of log-Gamma differences, exponentiated
    once.  Returns exactly 1.0 at n = 0 and 0.0 (with the underflow flag
    queryable via ``ks_series_coeff_underflowed``) once the log drops
    below the double-precision floor.
    """
    if n < 0:
        raise ConstraintError("n must be non-negative")
    return ks_coefficients(params).coeff(n)


def ks_series_coeff_underflowed(params: FractalityParams, n: int) -> bool:
    if n < 0:
        raise ConstraintError("n must be non-negative")
    return ks_coefficients(params).underflowed(n)


def ks_coeff_ratio_check(params: FractalityParams, n: int) -> tuple[float, float]:
    """Both sides of the coefficient recurrence at index n.

    Returns (K_{n+1}/K_n from the memoized product, the direct Gamma
    ratio Gamma(n*rho + beta + 1)/Gamma(n*rho + rho + 1)).  The two must
    agree; this is the test hook for the recurrence that defines the
    coefficients, checked without any fractional-derivative machinery.
    """
    if n < 0:
        raise ConstraintError("n must be non-negative")
    coeffs = ks_coefficients(params)
    lhs = math.exp(coeffs.log_coeff(n + 1) - coeffs.log_coeff(n))
    rho = params.rho
    rhs = math.exp(
        math.lgamma(n * rho + params.beta + 1.0)
        - math.lgamma(n * rho + rho + 1.0)
    )
    return lhs, rhs


def kilbas_saigo(params: FractalityParams, z: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """Three-parameter generalized exponential sum(K_n z^n).

    For z <= 0 the value lies in (0, 1] (complete monotonicity); a result
    of exactly 0.0 means the true value underflowed double precision.
    """
    _check_z(z, cfg)
    if z == 0.0:
        return 1.0
    value = _eval_series(_get_provider("ks", params=params), z, cfg, "kilbas_saigo")
    if z < 0.0:
        value = _positive_unit_guard(value, "kilbas_saigo")
    return value


def kilbas_saigo_deriv(
    params: FractalityParams, order: int, z: float, cfg: SeriesConfig = DEFAULT_CONFIG
) -> float:
    """Integer-order derivative of ``kilbas_saigo`` with respect to z.

    Series sum((m+order)!/m! * K_{m+order} * z^m); the factorial ratio is
    carried in log space and combined with log K before exponentiating.
    """
    if order < 0:
        raise ConstraintError("order must be non-negative")
    _check_z(z, cfg)
    provider = _get_provider("ksderiv", params=params, order=order)
    if z == 0.0:
        return math.exp(provider.log_coeff(0))
    return _eval_series(provider, z, cfg, f"kilbas_saigo_deriv(order={order})")


def mittag_leffler(mu: float, z: float, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """One-parameter generalized exponential sum(z^n / Gamma(mu n + 1))."""
    if not 0.0 < mu <= 1.0:
        raise ConstraintError("mu must satisfy 0 < mu <= 1")
    _check_z(z, cfg)
    if z == 0.0:
        return 1.0
    value = _eval_series(_get_provider("ml", mu=mu), z, cfg, "mittag_leffler")
    if z < 0.0:
        value = _positive_unit_guard(value, "mittag_leffler")
    return value


def mittag_leffler2(
    mu: float, nu: float, z: float, cfg: SeriesConfig = DEFAULT_CONFIG
) -> float:
    """Two-parameter variant sum(z^n / Gamma(mu n + nu)), mu > 0, nu > 0."""
    if not mu > 0.0:
        raise ConstraintError("mu must be positive")
    if not nu > 0.0:
        raise ConstraintError("nu must be positive")
    _check_z(z, cfg)
    provider = _get_provider("ml2", mu=mu, nu=nu)
    if z == 0.0:
        return math.exp(provider.log_coeff(0))
    return _eval_series(provider, z, cfg, "mittag_leffler2")


def max_feasible_z(params: FractalityParams, cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    """Largest |z| at which the series converges within cfg.max_terms.

    Found by scanning the log-term profile (no summation): the series is
    usable at z when the terms fall 50 e-folds below their peak before the
    term budget runs out.  Used by tail machinery (survival tables,
    quadrature cutoffs) to know how deep it can reach.
    """
    coeffs = ks_coefficients(params)

    def converges(zabs: float) -> bool:
        log_z = math.log(zabs)
        peak = -math.inf
        for n in range(cfg.max_terms):
            lt = coeffs.log_coeff(n) + n * log_z
            if lt > peak:
                peak = lt
            elif lt < peak - 50.0 and lt < -50.0:
                return True
        return False

    lo, hi = 0.0, cfg.z_abs_max
    if converges(hi):
        return hi
    lo = 1e-6
    if not converges(lo):
        return lo
    for _ in range(40):
        mid = math.sqrt(lo * hi)
        if converges(mid):
            lo = mid
        else:
            hi = mid
    return lo
