"""Brute-force arbitrary-precision oracles, independent of the package.

Everything here recomputes values straight from the defining series with
mpmath Gamma calls and generous working precision, sharing no code with
the library paths it is used to check.
"""

from __future__ import annotations

import mpmath as mp


def _sum_until_stable(term_fn, dps, max_terms=300000):
    """Adaptive-precision brute sum with a cancellation certificate."""
    work = dps + 25
    for _ in range(8):
        with mp.workdps(work):
            total = mp.mpf(0)
            peak = mp.mpf(0)
            small = 0
            done = False
            for n in range(max_terms):
                t = term_fn(n)
                total += t
                if abs(total) > peak:
                    peak = abs(total)
                if abs(t) <= mp.mpf(10) ** (-work + 5) * (abs(total) + 1):
                    small += 1
                    if small >= 4:
                        done = True
                        break
                else:
                    small = 0
            if not done:
                raise RuntimeError("oracle series did not stabilize")
            err = peak * mp.mpf(10) ** (-work + 5)
            if total != 0 and err <= mp.mpf(10) ** (-dps) * abs(total):
                return total
            gap = mp.log10(err / abs(total)) if total != 0 else mp.mpf(20)
            work = int(work + max(float(gap) + dps + 20, work * 0.5))
    raise RuntimeError("oracle precision escalation failed")


def oracle_kilbas_saigo(mu: float, beta: float, z: float, dps: int = 60) -> float:
    """Direct product-form sum of the generalized exponential series.

    The working precision escalates until the cancellation error is
    certified below 10**-dps of the result.
    """
    work = dps + 25
    for _ in range(8):
        with mp.workdps(work):
            mub = mp.mpf(mu)
            be = mp.mpf(beta)
            rho = mub + be
            zm = mp.mpf(z)
            total = mp.mpf(1)
            peak = mp.mpf(1)
            coeff = mp.mpf(1)
            zn = mp.mpf(1)
            small = 0
            done = False
            for k in range(300000):
                coeff *= mp.gamma(k * rho + be + 1) / mp.gamma(k * rho + rho + 1)
                zn *= zm
                t = coeff * zn
                total += t
                if abs(total) > peak:
                    peak = abs(total)
                if abs(t) <= mp.mpf(10) ** (-work + 5) * (abs(total) + peak * mp.mpf(10) ** (-work + 5)):
                    small += 1
                    if small >= 4:
                        done = True
                        break
                else:
                    small = 0
            if not done:
                raise RuntimeError("oracle series did not stabilize")
            err = peak * mp.mpf(10) ** (-work + 5)
            if total != 0 and err <= mp.mpf(10) ** (-dps) * abs(total):
                return float(total)
            # escalate by the measured deficit
            gap = mp.log10(err / abs(total)) if total != 0 else mp.mpf(20)
            work = int(work + max(float(gap) + dps + 20, work * 0.5))
    raise RuntimeError("oracle precision escalation failed")


def oracle_mittag_leffler(mu: float, z: float, dps: int = 60) -> float:
    f = lambda n: mp.mpf(z) ** n / mp.gamma(mp.mpf(mu) * n + 1)
    return float(_sum_until_stable(f, dps))


def oracle_mittag_leffler2(mu: float, nu: float, z: float, dps: int = 60) -> float:
    f = lambda n: mp.mpf(z) ** n / mp.gamma(mp.mpf(mu) * n + mp.mpf(nu))
    return float(_sum_until_stable(f, dps))


def oracle_pmf(mu: float, beta: float, lam: float, t: float, n: int, dps: int = 60) -> float:
    """Probability by the raw double-product series at one n."""
    with mp.workdps(dps + 30):
        mub, be = mp.mpf(mu), mp.mpf(beta)
        rho = mub + be
        x = mp.mpf(lam) * mp.mpf(t) ** rho
        pre = x**n / mp.factorial(n)
        prod = mp.mpf(1)
        for k in range(n):
            prod *= mp.gamma(k * rho + be + 1) / mp.gamma(k * rho + rho + 1)
        total = mp.mpf(0)
        fact = mp.factorial(n)  # (m+n)!/m! running, m = 0 start
        ratio = fact
        small = 0
        for m in range(200000):
            if m > 0:
                ratio = ratio * (m + n) / m
                prod *= mp.gamma(
                    (m + n - 1) * rho + be + 1
                ) / mp.gamma((m + n - 1) * rho + rho + 1)
            t_m = ratio * (-x) ** m * prod
            total += t_m
            if abs(t_m) <= mp.mpf(10) ** (-dps) * (abs(total) + 1):
                small += 1
                if small >= 4:
                    return float(pre * total)
            else:
                small = 0
    raise RuntimeError("oracle pmf did not stabilize")


def oracle_frac_polynomial(
    mu: float, beta: float, x: float, m: int, dps: int = 50
) -> float:
    """Moment polynomial by the infinite double series (weights times n^m)."""
    with mp.workdps(dps + 30):
        mub, be = mp.mpf(mu), mp.mpf(beta)
        rho = mub + be
        xm = mp.mpf(x)
        total = mp.mpf(0)
        # outer n: weight x^n/n! * E^(n)(-x); inner r: derivative series
        prod_n = mp.mpf(1)  # coefficient product with n factors
        small = 0
        for n in range(0, 100000):
            if n > 0:
                prod_n *= mp.gamma((n - 1) * rho + be + 1) / mp.gamma(
                    (n - 1) * rho + rho + 1
                )
            inner = mp.mpf(0)
            ratio = mp.factorial(n)
            prod = prod_n
            small_i = 0
            for r in range(200000):
                if r > 0:
                    ratio = ratio * (r + n) / r
                    prod *= mp.gamma((r + n - 1) * rho + be + 1) / mp.gamma(
                        (r + n - 1) * rho + rho + 1
                    )
                t_r = ratio * (-xm) ** r * prod
                inner += t_r
                if abs(t_r) <= mp.mpf(10) ** (-dps - 10) * (abs(inner) + 1):
                    small_i += 1
                    if small_i >= 4:
                        break
                else:
                    small_i = 0
            term = mp.mpf(n) ** m * xm**n / mp.factorial(n) * inner
            total += term
            if abs(term) <= mp.mpf(10) ** (-dps) * (abs(total) + 1) and n > 2:
                small += 1
                if small >= 4:
                    return float(total)
            else:
                small = 0
    raise RuntimeError("oracle polynomial did not stabilize")
