"""Character counting and the Dirichlet-series layer of the heuristics.

F-tilde_d(m) counts all primitive characters mod m of order dividing d
(multiplicative in m); f_exact counts even primitive characters of exact
order d.  On top of these sit the Euler-factor identities, the expectation
sums E_d(X), their asymptotic regime classification, and the convergent
double sum with explicit tail bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import exp, gcd, log, sqrt

import numpy as np

from .characters import enumerate_characters
from .ntheory import divisors, euler_phi, factorize, mobius, spf_sieve


class CensusError(ValueError):
    pass


# -- local character counts ---------------------------------------------------


@lru_cache(maxsize=None)
def _order_div_count(p: int, k: int, d: int) -> int:
    """Characters of (Z/p^k)^x of order dividing d."""
    if k == 0:
        return 1
    if p == 2:
        if k == 1:
            return 1
        if k == 2:
            return gcd(d, 2)
        return gcd(d, 2) * gcd(d, 2 ** (k - 2))
    return gcd(d, p ** (k - 1) * (p - 1))


@lru_cache(maxsize=None)
def _local_primitive_count(p: int, k: int, d: int) -> int:
    return _order_div_count(p, k, d) - _order_div_count(p, k - 1, d)


def f_tilde(d: int, m: int) -> int:
    """Primitive Dirichlet characters mod m of order dividing d."""
    if d < 1 or m < 1:
        raise CensusError("d and m must be positive")
    out = 1
    for p, k in factorize(m).items():
        out *= _local_primitive_count(p, k, d)
        if out == 0:
            return 0
    return out


@lru_cache(maxsize=None)
def _parity_sum_level(p: int, k: int, t: int) -> int:
    """sum of chi(-1) over characters of (Z/p^k)^x of order dividing t."""
    if k == 0:
        return 1
    if p == 2:
        if k == 1:
            return 1
        if k == 2:
            return 1 - (1 if t % 2 == 0 else 0)
        eps_sum = 0 if t % 2 == 0 else 1
        return eps_sum * gcd(t, 2 ** (k - 2))
    n = p ** (k - 1) * (p - 1)
    g = gcd(t, n)
    step = n // g
    if step % 2 == 0:
        return g
    return 1 if g % 2 else 0


@lru_cache(maxsize=None)
def _local_parity_sum(p: int, k: int, t: int) -> int:
    return _parity_sum_level(p, k, t) - _parity_sum_level(p, k - 1, t)


def g_tilde(t: int, m: int) -> int:
    """sum of chi(-1) over primitive characters mod m of order dividing t."""
    out = 1
    for p, k in factorize(m).items():
        out *= _local_parity_sum(p, k, t)
        if out == 0:
            return 0
    return out


def f_exact(d: int, m: int, parity: int | None = 1) -> int:
    """Even (by default) primitive characters of exact order d, conductor m.

    Counts by direct enumeration of the character group; parity=None drops
    the parity condition.
    """
    if d < 1:
        raise CensusError("d must be positive")
    if m < 1:
        raise CensusError("m must be positive")
    if m == 1:
        return 1 if d == 1 else 0
    return sum(1 for _ in enumerate_characters(m, d, exact_order=True, parity=parity))


def f_even_fast(d: int, m: int) -> int:
    """F_d(m): even primitive characters of exact order d, multiplicatively."""
    total = 0
    for t in divisors(d):
        mu = mobius(d // t)
        if mu == 0:
            continue
        total += mu * (f_tilde(t, m) + g_tilde(t, m))
    assert total % 2 == 0
    return total // 2


def f_even_sieve(d: int, X: int) -> np.ndarray:
    """F_d(m) for every m <= X via smallest-prime-factor factorization."""
    spf = spf_sieve(X)
    out = np.zeros(X + 1, dtype=np.int64)
    terms = [(mobius(d // t), t) for t in divisors(d) if mobius(d // t) != 0]
    for m in range(3, X + 1):
        fac = {}
        n = m
        while n > 1:
            p = spf[n]
            fac[p] = fac.get(p, 0) + 1
            n //= p
        total = 0
        for mu, t in terms:
            ft = 1
            gt = 1
            for p, k in fac.items():
                ft *= _local_primitive_count(p, k, t)
                gt *= _local_parity_sum(p, k, t)
                if ft == 0 and gt == 0:
                    break
            total += mu * (ft + gt)
        out[m] = total // 2
    return out


# -- Euler factors ------------------------------------------------------------


@dataclass
class EulerFactorReport:
    d: int
    p: int
    s: float
    l_factor: float
    l_factor_from_counts: float
    z_inverse_factor: float
    z_inverse_from_zeta: float
    product_deviation: float  # |L * Z_inv - 1|, should be O(p^-2s)
    exponent_identity: bool  # sum_{t|d, t|p-1} phi(t) == gcd(d, p-1)

    @property
    def formula_residual(self) -> float:
        return max(
            abs(self.l_factor - self.l_factor_from_counts),
            abs(self.z_inverse_factor - self.z_inverse_from_zeta),
        )


def _multiplicative_order(p: int, t: int) -> int:
    if t == 1:
        return 1
    n = 1
    x = p % t
    while x != 1:
        x = x * p % t
        n += 1
    return n


def euler_factors_check(d: int, p: int, s: float) -> EulerFactorReport:
    """Evaluate both Euler factors at a good prime p (p not dividing d)."""
    if p % 1 or d < 1:
        raise CensusError("bad arguments")
    if d % p == 0:
        raise CensusError(f"p={p} divides d={d}; excluded case")
    if s <= 0.5:
        raise CensusError("need s > 1/2")
    g = gcd(d, p - 1)
    ps = float(p) ** (-s)
    l_factor = 1 + (g - 1) * ps
    # from the primitive counts at prime powers
    l_counts = 0.0
    k = 0
    while True:
        c = _local_primitive_count(p, k, d) if k > 0 else 1
        l_counts += c * float(p) ** (-k * s)
        k += 1
        if k > _vp(d, p) + 4:
            break
    # regrouped form: (1-p^-s)^(gcd-1) times factors at n = order of p mod t
    groups: dict[int, int] = {}
    for t in divisors(d):
        if t == 1:
            continue
        f = _multiplicative_order(p, t)
        groups[f] = groups.get(f, 0) + euler_phi(t) // f
    z_inv = (1 - ps) ** (g - 1)
    for n, e in sorted(groups.items()):
        if n == 1:
            continue  # folded into the (1-p^-s)^(gcd-1) factor
        z_inv *= (1 - float(p) ** (-n * s)) ** e
    # straight from the Dedekind zeta factors of Z_d(s)^-1
    z_direct = 1.0
    for t in divisors(d):
        if t == 1:
            continue
        f = _multiplicative_order(p, t)
        z_direct *= (1 - float(p) ** (-f * s)) ** (euler_phi(t) // f)
    ident = sum(euler_phi(t) for t in divisors(d) if (p - 1) % t == 0) == g
    return EulerFactorReport(
        d=d,
        p=p,
        s=s,
        l_factor=l_factor,
        l_factor_from_counts=l_counts,
        z_inverse_factor=z_inv,
        z_inverse_from_zeta=z_direct,
        product_deviation=abs(l_factor * z_inv - 1.0),
        exponent_identity=ident,
    )


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# -- expectation sums ----------------------------------------------------------


@dataclass
class HeuristicParams:
    B_E: float = 1.0
    alpha: dict[int, float] = field(default_factory=dict)
    beta: dict[int, float] = field(default_factory=dict)
    M: float = 1.0
    t: dict[int, float] = field(default_factory=dict)
    sigma: dict[int, float] = field(default_factory=dict)
    tau: dict[int, float] = field(default_factory=dict)

    def alpha_d(self, d: int) -> float:
        return self.alpha.get(d, 0.0)

    def beta_d(self, d: int) -> float:
        return self.beta.get(d, 0.0)

    def t_d(self, d: int) -> float:
        return self.t.get(d, euler_phi(d) / 4.0)

    def sigma_d(self, d: int) -> float:
        return self.sigma.get(d, 0.0)

    def tau_d(self, d: int) -> float:
        return self.tau.get(d, 0.0)

    @classmethod
    def from_dict(cls, data: dict) -> "HeuristicParams":
        def intkeys(x):
            return {int(k): float(v) for k, v in x.items()} if x else {}

        p = cls(
            B_E=float(data.get("B_E", 1.0)),
            alpha=intkeys(data.get("alpha")),
            beta=intkeys(data.get("beta")),
            M=float(data.get("M", 1.0)),
            t=intkeys(data.get("t")),
            sigma=intkeys(data.get("sigma")),
            tau=intkeys(data.get("tau")),
        )
        if p.B_E <= 0:
            raise CensusError("B_E must be positive")
        return p


def expectation_sum(
    params: HeuristicParams, d: int, X: int, f_counts: np.ndarray | None = None
) -> tuple[float, np.ndarray]:
    """E_d(X) and the full vector of partial sums E_d(3..X)."""
    if d < 3:
        raise CensusError("d must be >= 3")
    if X < 3:
        raise CensusError("X must be >= 3")
    if f_counts is None:
        f_counts = f_even_sieve(d, X)
    alpha, beta = params.alpha_d(d), params.beta_d(d)
    expo = euler_phi(d) / 4.0
    phi = _phi_sieve(X)
    ms = np.arange(X + 1, dtype=np.float64)
    terms = np.zeros(X + 1)
    mask = (f_counts[: X + 1] > 0) & (np.arange(X + 1) >= 3)
    mm = ms[mask]
    logs = np.log(mm)
    base = (
        params.B_E**2 * d * mm ** (2 * alpha) / (phi[mask] * logs ** (1 - 2 * beta))
    )
    terms[mask] = f_counts[: X + 1][mask] * base**expo
    partial = np.cumsum(terms)
    return float(partial[X]), partial


@lru_cache(maxsize=8)
def _phi_sieve_cached(X: int) -> np.ndarray:
    phi = np.arange(X + 1, dtype=np.float64)
    for p in range(2, X + 1):
        if phi[p] == p:  # p prime
            phi[p::p] *= 1 - 1 / p
    return phi


def _phi_sieve(X: int) -> np.ndarray:
    return _phi_sieve_cached(X)


@dataclass
class RegimeResult:
    p: int
    sigma: float
    tau: float
    label: str  # finite | loglog | log_power | power | unclassified
    growth_exponent: float | None = None  # 1 - sigma for the power case
    log_exponent: float | None = None


def regime_classify(p: int, alpha_p: float, beta_p: float) -> RegimeResult:
    """Asymptotic regime of E_p(X) from sigma = (1-2a)(p-1)/4, tau = b(p-1)/2."""
    if p < 3:
        raise CensusError("p must be an odd prime")
    sigma = (1 - 2 * alpha_p) * (p - 1) / 4.0
    tau = beta_p * (p - 1) / 2.0
    if sigma <= 0:
        return RegimeResult(p, sigma, tau, "unclassified")
    if sigma > 1 or (sigma == 1 and tau < -1):
        return RegimeResult(p, sigma, tau, "finite")
    if sigma == 1 and tau == -1:
        return RegimeResult(p, sigma, tau, "loglog")
    if sigma == 1:
        return RegimeResult(p, sigma, tau, "log_power", log_exponent=tau + 1)
    return RegimeResult(
        p, sigma, tau, "power", growth_exponent=1 - sigma, log_exponent=tau
    )


def hw_constant(X: int) -> float:
    """max over 3 <= m <= X of m / (phi(m) loglog m)."""
    if X < 3:
        raise CensusError("X must be >= 3")
    phi = _phi_sieve(X)
    ms = np.arange(3, X + 1, dtype=np.float64)
    vals = ms / (phi[3:] * np.log(np.log(ms)))
    return float(vals.max())


@dataclass
class TailReport:
    d_max: int
    partial_sum: float
    per_d: list[tuple[int, float]]
    d_star: int | None  # increments below 1e-12 from here on
    analytic_tail: float
    hw_c: float


def lemprop2_tail(
    params: HeuristicParams, d_max: int, increment_threshold: float = 1e-12
) -> TailReport:
    """Evaluate the double sum over {d : t(d)(1 - sigma_d) > 1} with inner
    sums truncated by the explicit phi(m) loglog(m) > m/C tail bound."""
    hw_c = hw_constant(10**6)
    sup_tsigma = max(
        (abs(params.t_d(d) * params.sigma_d(d)) for d in range(3, d_max + 1)),
        default=0.0,
    )
    if sup_tsigma > 50:
        raise CensusError("t(d) sigma_d is not bounded on the supplied range")
    tail_tau = max(
        (abs(params.tau_d(d)) for d in range(max(3, d_max // 2), d_max + 1)),
        default=0.0,
    )
    if tail_tau > 0.5:
        raise CensusError("tau_d does not tend to zero on the supplied range")

    per_d: list[tuple[int, float]] = []
    total = 0.0
    d_star = None
    for d in range(3, d_max + 1):
        t_d = params.t_d(d)
        sigma_d = params.sigma_d(d)
        tau_d = params.tau_d(d)
        if t_d * (1 - sigma_d) <= 1:
            continue
        t_val = _inner_sum(params.M, d, t_d, sigma_d, tau_d, hw_c)
        per_d.append((d, t_val))
        total += t_val
        if d_star is None and t_val < increment_threshold:
            if all(v < increment_threshold for _, v in per_d[-3:]):
                d_star = d
    analytic_tail = _analytic_tail(params, d_max, sup_tsigma, hw_c)
    return TailReport(
        d_max=d_max,
        partial_sum=total,
        per_d=per_d,
        d_star=d_star,
        analytic_tail=analytic_tail,
        hw_c=hw_c,
    )


def _inner_sum(M, d, t_d, sigma_d, tau_d, hw_c) -> float:
    if M == 0:
        return 0.0
    total = 0.0
    counts = f_even_sieve(d, min(4 * d + 400, 4000))
    m_hi = len(counts) - 1
    for m in range(3, m_hi + 1):
        fm = int(counts[m])
        if fm == 0:
            continue
        lm = log(m)
        term = fm * (
            M * d * m**sigma_d * lm**tau_d / (euler_phi(m) * lm)
        ) ** t_d
        total += term
    # tail over m > m_hi: F_d(m) < m and phi(m) loglog(m) > m/C
    expo = t_d * (1 - sigma_d)
    if expo > 2:
        k = m_hi + 1
        lk = log(k)
        sv = (M * d * hw_c * log(lk) * lk ** (tau_d - 1)) ** t_d
        total += sv * k ** (2 - expo) / (expo - 2)
    else:
        # fall back to direct extension; convergent but slow decay
        for m in range(m_hi + 1, 10**5):
            lm = log(m)
            term = m * (M * d * hw_c * log(lm) / (m ** (1 - sigma_d) * lm ** (1 - tau_d))) ** t_d
            total += term
            if term < 1e-18:
                break
    return total


def _analytic_tail(params: HeuristicParams, d_max: int, b: float, hw_c: float) -> float:
    """Numeric estimate of sum_{d > d_max} (M C loglog d / sqrt(log d))^t(d) d^(2+b)."""
    total = 0.0
    for d in range(d_max + 1, 40 * d_max):
        t_d = params.t_d(d)
        base = params.M * hw_c * log(log(d)) / sqrt(log(d))
        term = base**t_d * d ** (2 + b)
        total += term
        if term < 1e-30 and d > 2 * d_max:
            break
    return total


@dataclass
class CensusRow:
    X: int
    n_d: int
    e_d: float


def empirical_vs_expected(
    scan: list[tuple[int, bool]],
    d: int,
    X: int,
    params: HeuristicParams,
) -> list[CensusRow]:
    """Tabulate n_d(X) (phi(d) characters per vanishing orbit) against E_d(X).

    scan: (conductor, vanishes) per enumerated orbit, from the vanishing scan.
    """
    if not scan and X >= 3:
        pass
    _, partial = expectation_sum(params, d, X)
    grid = sorted({m for m, _ in scan} | {X})
    rows = []
    phid = euler_phi(d)
    for x in grid:
        if x > X:
            continue
        n = phid * sum(1 for m, v in scan if v and m <= x)
        rows.append(CensusRow(X=x, n_d=n, e_d=float(partial[x])))
    return rows
