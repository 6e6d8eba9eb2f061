"""Independent numerical oracle: Gauss sums and twisted central L-values.

Everything here is floating point (mpmath, extended precision) and is used
to cross-validate the exact modular-symbol side, never to feed it, except
for the one-time exactification of the period normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import mpmath as mp

from .characters import CyclicFieldSpec, enumerate_characters
from .curves import CurveData


class OracleError(RuntimeError):
    pass


@dataclass
class CharacterValueTable:
    """A primitive Dirichlet character with explicit complex values."""

    m: int
    d: int
    values: dict[int, mp.mpc]  # a (unit mod m) -> d-th root of unity
    parity: int

    def __call__(self, n: int) -> mp.mpc:
        if self.m == 1:
            return mp.mpc(1)
        n %= self.m
        return self.values.get(n, mp.mpc(0))

    def conjugate(self) -> "CharacterValueTable":
        return CharacterValueTable(
            m=self.m,
            d=self.d,
            values={a: mp.conj(v) for a, v in self.values.items()},
            parity=self.parity,
        )


def character_table(spec: CyclicFieldSpec) -> CharacterValueTable:
    """Complex values of the orbit representative of a field spec."""
    if spec.m == 1:
        return CharacterValueTable(m=1, d=1, values={}, parity=1)
    import numpy as np

    units = np.array([a for a in range(1, spec.m) if gcd(a, spec.m) == 1])
    logs = spec.gamma_array(units)
    zeta = [mp.expjpi(mp.mpf(2 * k) / spec.d) for k in range(spec.d)]
    values = {int(a): zeta[int(g)] for a, g in zip(units, logs)}
    return CharacterValueTable(m=spec.m, d=spec.d, values=values, parity=spec.parity)


def trivial_character() -> CharacterValueTable:
    return CharacterValueTable(m=1, d=1, values={}, parity=1)


def gauss_sum(chi: CharacterValueTable) -> mp.mpc:
    """tau(chi) = sum_a chi(a) e^(2 pi i a / m)."""
    if chi.m == 1:
        return mp.mpc(1)
    return mp.fsum(
        (v * mp.expjpi(mp.mpf(2 * a) / chi.m) for a, v in chi.values.items()),
        absolute=False,
    )


def root_number(curve: CurveData) -> int:
    """Sign of the functional equation of L(E,s), computed numerically.

    Uses L(E,1) = F(t) + eps*F(1/t) for every t > 0, with
    F(t) = sum a_n/n e^(-2 pi n t / sqrt(N)); two values of t determine eps.
    """
    if getattr(curve, "_root_number", None) is not None:
        return curve._root_number
    with mp.workdps(30):
        sqrt_n = mp.sqrt(curve.N)
        t1, t2 = mp.mpf("1.1"), mp.mpf("1.3")
        k = int(mp.ceil(40 / (2 * mp.pi / (t2 * sqrt_n)))) + 10
        an = curve.an_vector(k)

        def f(t):
            c = 2 * mp.pi * t / sqrt_n
            return mp.fsum(
                mp.mpf(a) / n * mp.exp(-c * n) for n, a in enumerate(an, start=1) if a
            )

        num = f(t1) - f(t2)
        den = f(1 / t2) - f(1 / t1)
        eps = num / den
    if abs(eps - 1) < 1e-8:
        val = 1
    elif abs(eps + 1) < 1e-8:
        val = -1
    else:
        raise OracleError(f"functional-equation sign did not resolve: {eps}")
    curve._root_number = val
    return val


def _series_terms(c: mp.mpf, tol: mp.mpf) -> int:
    # tail sum_{n>K} e^(-cn) <= e^(-cK)/(e^c - 1) <= tol/4  (|a_n| <= n by Hasse)
    k = int(mp.ceil(mp.log(4 / (tol * (1 - mp.exp(-c)))) / c)) + 4
    return max(k, 8)


def twisted_lvalue(curve: CurveData, chi: CharacterValueTable, tol: float = 1e-10) -> mp.mpc:
    """L(E,chi,1) by the exponentially convergent symmetric series.

    Requires gcd(m, N) = 1; the twisted root number is
    eps_chi = eps_E * chi(N) * tau(chi)^2 / m.
    """
    m = chi.m
    if gcd(m, curve.N) != 1:
        raise OracleError(f"twist conductor {m} shares a factor with N={curve.N}")
    if tol <= 0:
        raise OracleError("tol must be positive")
    dps = max(25, int(-mp.log10(tol)) + 15)
    with mp.workdps(dps):
        c = 2 * mp.pi / (m * mp.sqrt(curve.N))
        k = _series_terms(c, mp.mpf(tol))
        an = curve.an_vector(k)
        eps_chi = root_number(curve) * chi(curve.N) * gauss_sum(chi) ** 2 / m
        s1 = mp.mpc(0)
        s2 = mp.mpc(0)
        for n, a in enumerate(an, start=1):
            if a == 0:
                continue
            chi_n = chi(n)
            if chi_n == 0:
                continue
            w = mp.mpf(a) / n * mp.exp(-c * n)
            s1 += w * chi_n
            s2 += w * mp.conj(chi_n)
        return s1 + eps_chi * s2


@dataclass
class BirchStevensReport:
    m: int
    d: int
    parity: int
    lhs: mp.mpc
    rhs: mp.mpc
    difference: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.difference < self.tol


def birch_stevens_check(space, chi: CharacterValueTable, tol: float = 1e-6) -> BirchStevensReport:
    """Compare sum_a chi(a) [a/m]^eps with tau(chi) L(E,bar(chi),1) / Omega^eps."""
    m = chi.m
    eps = chi.parity
    curve = space.curve
    with mp.workdps(max(25, int(-mp.log10(tol)) + 15)):
        if m == 1:
            lhs = mp.mpc(_to_mpf(space.modsym(0, eps)))
        else:
            table = space.symbol_table(m)
            vals = table.plus if eps == 1 else table.minus
            lhs = mp.fsum((chi(a) * _to_mpf(v) for a, v in vals.items()), absolute=False)
        lv = twisted_lvalue(curve, chi.conjugate(), tol=tol * 1e-2)
        omega_plus, omega_minus_im = curve.periods(128)
        omega = omega_plus if eps == 1 else mp.mpc(0, 1) * omega_minus_im
        rhs = gauss_sum(chi) * lv / omega
        diff = float(abs(lhs - rhs))
    return BirchStevensReport(
        m=m, d=chi.d, parity=eps, lhs=lhs, rhs=rhs, difference=diff, tol=tol
    )


def _to_mpf(q) -> mp.mpf:
    return mp.mpf(q.numerator) / q.denominator


def primitive_characters(m: int, parity: int | None = None):
    """All primitive characters mod m as value tables (every order)."""
    from .characters import unit_group

    group = unit_group(m)
    ex = 1
    for s in group.orders:
        ex = ex * s // gcd(ex, s)
    out = []
    seen: set[tuple[int, ...]] = set()
    for exps in enumerate_characters(m, ex, exact_order=False, parity=parity):
        if exps in seen:
            continue
        seen.add(exps)
        d = max(1, _order(ex, exps))
        # renormalize images from Z/ex to Z/d
        exps_d = tuple(x * d // ex for x in exps)
        spec = CyclicFieldSpec(m=m, d=d, exps=exps_d, parity=_parity(group, ex, exps))
        out.append(character_table(spec))
    return out


def _order(d, exps):
    from .characters import order_of_exps

    return order_of_exps(d, exps)


def _parity(group, d, exps):
    from .characters import parity_of_exps

    return parity_of_exps(group, d, exps)
