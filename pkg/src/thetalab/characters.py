"""Dirichlet characters through the cyclic decomposition of (Z/mZ)^x.

The unit group is split into cyclic factors (odd prime powers are cyclic;
the 2-part contributes <-1> x <5>).  A character of order dividing d is a
tuple of images in Z/dZ, one per factor, and everything (order, parity,
conductor, evaluation) is computed from those images and per-factor
discrete-log tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, lcm

import numpy as np

from .ntheory import factorize, primitive_root_mod_prime_power


@dataclass(frozen=True)
class UnitFactor:
    prime: int
    power: int  # the factor lives mod prime**power
    order: int  # cyclic order s_i
    kind: str  # "odd", "four", "minus", "five"


@dataclass(frozen=True)
class UnitGroup:
    m: int
    factors: tuple[UnitFactor, ...]

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(f.order for f in self.factors)

    def exponent(self) -> int:
        return lcm(1, *self.orders) if self.factors else 1

    def dlog_vector(self, a: int) -> tuple[int, ...]:
        """Exponents of a on each cyclic factor; a must be a unit mod m."""
        if gcd(a, self.m) != 1:
            raise ValueError(f"{a} is not a unit mod {self.m}")
        return tuple(
            int(_dlog_table(f.prime, f.power, f.kind)[a % self.prime_power(f)])
            for f in self.factors
        )

    @staticmethod
    def prime_power(f: UnitFactor) -> int:
        return f.prime**f.power


@lru_cache(maxsize=256)
def unit_group(m: int) -> UnitGroup:
    if m < 1:
        raise ValueError("modulus must be positive")
    factors: list[UnitFactor] = []
    for p, k in factorize(m).items():
        if p == 2:
            if k == 1:
                continue  # trivial factor
            if k == 2:
                factors.append(UnitFactor(2, 2, 2, "four"))
            else:
                factors.append(UnitFactor(2, k, 2, "minus"))
                factors.append(UnitFactor(2, k, 2 ** (k - 2), "five"))
        else:
            factors.append(UnitFactor(p, k, p ** (k - 1) * (p - 1), "odd"))
    return UnitGroup(m=m, factors=tuple(factors))


@lru_cache(maxsize=64)
def _dlog_table(p: int, k: int, kind: str) -> np.ndarray:
    """dlog of every residue mod p^k on the requested cyclic factor.

    Non-units get -1.  For kind "minus"/"five" the table gives the exponent
    of -1 resp. 5 in a = (-1)^e * 5^f (mod 2^k).
    """
    q = p**k
    table = np.full(q, -1, dtype=np.int64)
    if kind == "odd":
        g = primitive_root_mod_prime_power(p, k)
        x = 1
        for e in range(p ** (k - 1) * (p - 1)):
            table[x] = e
            x = x * g % q
    elif kind == "four":
        table[1], table[3] = 0, 1
    elif kind == "minus":
        x = 1
        for _ in range(2 ** (k - 2)):
            table[x] = 0
            table[q - x] = 1
            x = x * 5 % q
    elif kind == "five":
        x = 1
        for f in range(2 ** (k - 2)):
            table[x] = f
            table[q - x] = f
            x = x * 5 % q
    else:
        raise ValueError(kind)
    return table


# -- characters as image tuples ----------------------------------------------


def order_of_exps(d: int, exps: tuple[int, ...]) -> int:
    """Order of the character with the given images in Z/dZ."""
    return lcm(1, *(d // gcd(d, x) for x in exps)) if exps else 1


def parity_of_exps(group: UnitGroup, d: int, exps: tuple[int, ...]) -> int:
    """chi(-1) as +-1, from the dlog of -1 on each factor."""
    if group.m <= 2:
        return 1
    log_m1 = group.dlog_vector(group.m - 1)
    t = sum(e * x for e, x in zip(log_m1, exps)) % d
    if t == 0:
        return 1
    if 2 * t % d == 0:
        return -1
    raise AssertionError("chi(-1) must be +-1")


def conductor_of_exps(group: UnitGroup, d: int, exps: tuple[int, ...]) -> int:
    """Conductor of the character; multiplicative over the prime factors."""
    cond = 1
    by_prime: dict[int, list[tuple[UnitFactor, int]]] = {}
    for f, x in zip(group.factors, exps):
        by_prime.setdefault(f.prime, []).append((f, x))
    for p, parts in by_prime.items():
        if p != 2:
            (f, x) = parts[0]
            t = d // gcd(d, x)
            if t > 1:
                a = 0
                tt = t
                while tt % p == 0:
                    tt //= p
                    a += 1
                cond *= p ** (a + 1)
        else:
            if parts[0][0].kind == "four":
                if parts[0][1] % d != 0:
                    cond *= 4
            else:
                (fm, xm), (f5, x5) = parts
                t5 = d // gcd(d, x5)
                if t5 > 1:
                    cond *= 4 * t5
                elif xm % d != 0:
                    cond *= 4
    return cond


def enumerate_characters(
    m: int, d: int, exact_order: bool = True, parity: int | None = None
):
    """Yield image tuples of primitive characters mod m of order (dividing) d.

    Deterministic order: lexicographic in the image tuples.
    """
    group = unit_group(m)
    choices = []
    for f in group.factors:
        g = gcd(d, f.order)
        step = d // g
        choices.append([step * j for j in range(g)])
    for exps in itertools.product(*choices):
        if exact_order and order_of_exps(d, exps) != d:
            continue
        if conductor_of_exps(group, d, exps) != m:
            continue
        if parity is not None and parity_of_exps(group, d, exps) != parity:
            continue
        yield exps


def galois_orbit_key(d: int, exps: tuple[int, ...]) -> tuple[int, ...]:
    """Lexicographically least twist t*exps over t coprime to d."""
    best = None
    for t in range(1, d):
        if gcd(t, d) != 1:
            continue
        cand = tuple(t * x % d for x in exps)
        if best is None or cand < best:
            best = cand
    assert best is not None
    return best


# -- cyclic field specs -------------------------------------------------------


@dataclass(frozen=True)
class CyclicFieldSpec:
    """A cyclic extension of Q of degree d, given as a Galois orbit of
    primitive order-d characters; exps is the canonical orbit representative."""

    m: int
    d: int
    exps: tuple[int, ...]
    parity: int = 1

    def chi_log(self, a: int) -> int:
        group = unit_group(self.m)
        logv = group.dlog_vector(a)
        return sum(e * x for e, x in zip(logv, self.exps)) % self.d

    def gamma_array(self, residues: np.ndarray) -> np.ndarray:
        """chi_log of each residue (all must be units), vectorized."""
        group = unit_group(self.m)
        out = np.zeros(len(residues), dtype=np.int64)
        for f, x in zip(group.factors, self.exps):
            if x % self.d == 0:
                continue
            q = f.prime**f.power
            table = _dlog_table(f.prime, f.power, f.kind)
            out += table[residues % q] * x
        return out % self.d

    def orbit_key(self) -> str:
        return "c" + ".".join(str(x) for x in self.exps)

    def validate(self) -> None:
        group = unit_group(self.m)
        assert order_of_exps(self.d, self.exps) == self.d
        assert conductor_of_exps(group, self.d, self.exps) == self.m
        assert parity_of_exps(group, self.d, self.exps) == self.parity
        if self.parity == 1:
            assert self.m <= 2 or self.chi_log(self.m - 1) == 0


def enumerate_fields(
    d: int, X: int, parity: int = 1, spf: list[int] | None = None
) -> list[CyclicFieldSpec]:
    """One spec per Galois orbit of primitive order-d characters of the given
    parity and conductor <= X, ordered by conductor then orbit key."""
    if d < 3:
        raise ValueError("degree must be >= 3")
    if parity == -1 and d % 2 == 1:
        return []  # odd-order characters are all even
    out: list[CyclicFieldSpec] = []
    for m in range(3, int(X) + 1):
        if not _may_admit_order(m, d, spf):
            continue
        seen: set[tuple[int, ...]] = set()
        orbits = []
        for exps in enumerate_characters(m, d, exact_order=True, parity=parity):
            key = galois_orbit_key(d, exps)
            if key not in seen:
                seen.add(key)
                orbits.append(key)
        for key in sorted(orbits):
            out.append(CyclicFieldSpec(m=m, d=d, exps=key, parity=parity))
    return out


def _may_admit_order(m: int, d: int, spf: list[int] | None) -> bool:
    """Cheap necessary test: lcm of gcd(d, s_i) over the factor orders is d."""
    if spf is not None:
        fac: dict[int, int] = {}
        n = m
        while n > 1:
            p = spf[n]
            fac[p] = fac.get(p, 0) + 1
            n //= p
    else:
        fac = factorize(m)
    acc = 1
    for p, k in fac.items():
        if p == 2:
            if k >= 2:
                acc = lcm(acc, gcd(d, 2))
            if k >= 3:
                acc = lcm(acc, gcd(d, 2 ** (k - 2)))
        else:
            acc = lcm(acc, gcd(d, p ** (k - 1) * (p - 1)))
    return acc % d == 0


def quadratic_characters(parity: int, coprime_to: int = 1):
    """Primitive quadratic characters of the given parity, by conductor.

    Yields (m, chi) with chi a dict a -> +-1 on the units mod m.
    """
    m = 2
    while True:
        m += 1
        if gcd(m, coprime_to) != 1:
            continue
        for exps in enumerate_characters(m, 2, exact_order=True, parity=parity):
            spec = CyclicFieldSpec(m=m, d=2, exps=exps, parity=parity)
            units = np.array([a for a in range(1, m) if gcd(a, m) == 1])
            logs = spec.gamma_array(units)
            chi = {int(a): (1 if g == 0 else -1) for a, g in zip(units, logs)}
            yield m, chi
