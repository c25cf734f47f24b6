"""Stirling numbers, their fractional generalization, and identity checks.

Stirling tables are exact integers built by the classic recurrences.  The
fractional combinatorial numbers scale Stirling numbers of the second
kind by l! times the Gamma-ratio product K_l; the polynomials built from
them expand the process moments in powers of rate * t**rho.

The identity checks against Stirling numbers of the first kind involve
violently alternating integer weights, so their inner sums run in
arbitrary precision and only the final values are returned as floats.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp

from .config import DEFAULT_CONFIG, SeriesConfig
from .errors import ConstraintError, ConvergenceError, UnsupportedError
from .params import FractalityParams
from .specialfn import kilbas_saigo, ks_coefficients

DEFAULT_CAP = 30


@lru_cache(maxsize=8)
def _stirling2_table(cap: int) -> tuple[tuple[int, ...], ...]:
    rows = [[1] + [0] * cap]
    for m in range(1, cap + 1):
        prev = rows[-1]
        row = [0] * (cap + 1)
        for l in range(1, m + 1):
            row[l] = l * prev[l] + prev[l - 1]
        rows.append(row)
    return tuple(tuple(r) for r in rows)


@lru_cache(maxsize=8)
def _stirling1_table(cap: int) -> tuple[tuple[int, ...], ...]:
    rows = [[1] + [0] * cap]
    for m in range(1, cap + 1):
        prev = rows[-1]
        row = [0] * (cap + 1)
        for l in range(1, m + 1):
            row[l] = prev[l - 1] - (m - 1) * prev[l]
        rows.append(row)
    return tuple(tuple(r) for r in rows)


def _check_indices(m: int, l: int, cap: int) -> None:
    if m < 0 or l < 0:
        raise ConstraintError("Stirling indices must be non-negative")
    if m > cap or l > cap:
        raise UnsupportedError(
            f"index {max(m, l)} exceeds the table cap {cap}; pass a larger cap"
        )


def stirling2(m: int, l: int, cap: int = DEFAULT_CAP) -> int:
    """Stirling number of the second kind, exact."""
    _check_indices(m, l, cap)
    if l > m:
        return 0
    return _stirling2_table(cap)[m][l]


def stirling1_signed(m: int, l: int, cap: int = DEFAULT_CAP) -> int:
    """Signed Stirling number of the first kind, exact."""
    _check_indices(m, l, cap)
    if l > m:
        return 0
    return _stirling1_table(cap)[m][l]


def frac_comb_number(
    params: FractalityParams, m: int, l: int, cap: int = DEFAULT_CAP
) -> float:
    """Fractional combinatorial number l! * K_l * S(m, l).

    Reduces to the plain Stirling number of the second kind at
    mu = 1, beta = 0 where l! * K_l = 1.
    """
    _check_indices(m, l, cap)
    if l > m:
        return 0.0
    if l == 0:
        return 1.0 if m == 0 else 0.0
    s = stirling2(m, l, cap)
    scale = math.exp(math.lgamma(l + 1.0) + ks_coefficients(params).log_coeff(l))
    return scale * s


def frac_polynomial(
    params: FractalityParams, x: float, m: int, cap: int = DEFAULT_CAP
) -> float:
    """Degree-m moment polynomial sum_l S_frac(m, l) x**l."""
    if m < 0:
        raise ConstraintError("m must be non-negative")
    if m > cap:
        raise UnsupportedError(f"m = {m} exceeds the table cap {cap}")
    if m == 0:
        return 1.0
    return math.fsum(
        frac_comb_number(params, m, l, cap) * x**l for l in range(1, m + 1)
    )


def frac_number(params: FractalityParams, m: int, cap: int = DEFAULT_CAP) -> float:
    """The polynomial at x = 1; generalizes the Bell numbers."""
    return frac_polynomial(params, 1.0, m, cap)


def poly_genfun(
    params: FractalityParams, s: float, x: float, cfg: SeriesConfig = DEFAULT_CONFIG
) -> float:
    """Exponential generating function of the moment polynomials in s."""
    return kilbas_saigo(params, x * math.expm1(s), cfg)


def _mp_frac_numbers(params: FractalityParams, m_max: int) -> list:
    """B(0..m_max) as mpf values at the current working precision."""
    ks = ks_coefficients(params)
    ks.ensure_mp(m_max, mp.mp.dps)
    s2 = _stirling2_table(max(m_max, DEFAULT_CAP))
    facts = [mp.mpf(1)]
    for r in range(1, m_max + 1):
        facts.append(facts[-1] * r)
    out = []
    for l in range(m_max + 1):
        total = mp.mpf(1) if l == 0 else mp.mpf(0)
        for r in range(1, l + 1):
            total += facts[r] * ks.mp_coeff(r) * s2[l][r]
        out.append(total)
    return out


def ks_via_stirling(
    params: FractalityParams, z: float, m_max: int = 20, cap: int | None = None
) -> float:
    """The generalized exponential rebuilt from first-kind Stirling numbers.

    Sums z**m / m! times sum_l s(m, l) B(l) up to m_max.  Raises when the
    truncated double sum has not stabilized by the last term.
    """
    cap = m_max if cap is None else cap
    if m_max < 0:
        raise ConstraintError("m_max must be non-negative")
    if m_max > cap:
        raise UnsupportedError(f"m_max = {m_max} exceeds the table cap {cap}")
    if z == 0.0:
        return 1.0
    s1 = _stirling1_table(max(m_max, DEFAULT_CAP))
    s2 = _stirling2_table(max(m_max, DEFAULT_CAP))
    ks = ks_coefficients(params)
    dps = 60 + 3 * m_max
    with mp.workdps(dps):
        ks.ensure_mp(m_max, mp.mp.dps)
        facts = [mp.mpf(1)]
        bnums = [mp.mpf(1)]
        zm = mp.mpf(z)
        zp = mp.mpf(1)
        fact = mp.mpf(1)
        total = mp.mpf(0)
        tail: list = []
        for m in range(m_max + 1):
            if m > 0:
                zp *= zm
                fact *= m
                facts.append(facts[-1] * m)
                b = mp.mpf(0)
                for r in range(1, m + 1):
                    b += facts[r] * ks.mp_coeff(r) * s2[m][r]
                bnums.append(b)
            inner = mp.mpf(0)
            for l in range(m + 1):
                c = s1[m][l]
                if c:
                    inner += c * bnums[l]
            term = zp / fact * inner
            total += term
            tail.append(abs(term))
            if len(tail) > 2:
                tail.pop(0)
            if len(tail) == 2 and max(tail) <= mp.mpf("1e-13") * abs(total):
                return float(total)
        if max(tail) > mp.mpf("1e-9") * abs(total):
            raise ConvergenceError(
                f"Stirling-form series not stabilized by m_max={m_max} "
                f"(last term {mp.nstr(tail[-1], 5)})",
                last_term=float(tail[-1]),
            )
        return float(total)


def ks_identity_sides(
    params: FractalityParams,
    m: int,
    variant: str = "numbers",
    cap: int = DEFAULT_CAP,
) -> tuple[float, float]:
    """Both sides of the first-kind-Stirling identity at order m.

    Left side: sum_l s(m, l) B(l) (variant "numbers") or the double sum
    sum_l sum_r s(m, l) S_frac(l, r) (variant "combinatorial").  Right
    side: m! * K_m.  The two must agree.
    """
    if m < 0:
        raise ConstraintError("m must be non-negative")
    if m > cap:
        raise UnsupportedError(f"m = {m} exceeds the table cap {cap}")
    if variant not in ("numbers", "combinatorial"):
        raise ConstraintError("variant must be 'numbers' or 'combinatorial'")
    s1 = _stirling1_table(max(m, DEFAULT_CAP))
    ks = ks_coefficients(params)
    with mp.workdps(60 + 3 * m):
        if variant == "numbers":
            bnums = _mp_frac_numbers(params, m)
            lhs = mp.mpf(0)
            for l in range(m + 1):
                if s1[m][l]:
                    lhs += s1[m][l] * bnums[l]
        else:
            ks.ensure_mp(m, mp.mp.dps)
            s2 = _stirling2_table(max(m, DEFAULT_CAP))
            facts = [mp.mpf(1)]
            for r in range(1, m + 1):
                facts.append(facts[-1] * r)
            lhs = mp.mpf(0)
            for l in range(m + 1):
                c = s1[m][l]
                if not c:
                    continue
                inner = mp.mpf(1) if l == 0 else mp.mpf(0)
                for r in range(1, l + 1):
                    inner += facts[r] * ks.mp_coeff(r) * s2[l][r]
                lhs += c * inner
        lhs_f = float(lhs)
    rhs = math.exp(math.lgamma(m + 1.0) + ks.log_coeff(m))
    return lhs_f, rhs
