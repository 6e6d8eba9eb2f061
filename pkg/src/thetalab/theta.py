"""Theta-elements of real cyclic fields and their coefficient statistics.

For a field F of degree d and conductor m (an orbit of primitive order-d
characters), the theta-coefficient at gamma in Z/dZ is delta_E times the sum
of [a/m] over the units a whose character-log is gamma.  The Atkin-Lehner
involution iota(gamma) = -gamma - gamma_F pairs coefficients with sign w_F.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, log, sqrt

import numpy as np

from .characters import CyclicFieldSpec
from .ntheory import cyclotomic_polynomial, euler_phi, poly_rem_mod


class ThetaError(ValueError):
    pass


GENERIC = "generic"
SPECIAL_PLUS = "special+"
SPECIAL_MINUS = "special-"


@dataclass
class ThetaElement:
    field: CyclicFieldSpec
    curve: str
    coeffs: dict[int, int]
    gamma_f: int
    w_f: int
    classes: dict[int, str]
    delta: int
    sign: int = 1

    @property
    def m(self) -> int:
        return self.field.m

    @property
    def d(self) -> int:
        return self.field.d

    def iota(self, gamma: int) -> int:
        shift = 0 if self.field.parity == 1 else self.field.chi_log(self.m - 1)
        return (shift - gamma - self.gamma_f) % self.d


def theta_element(space, field: CyclicFieldSpec, sign: int = 1) -> ThetaElement:
    """Integer theta-coefficients of the curve over the field, exactly."""
    m, d = field.m, field.d
    N = space.N
    f = gcd(m, N)
    e = N // f
    if gcd(e, m) != 1:
        raise ThetaError(
            f"N/gcd(m,N) = {e} is not coprime to m = {m}; "
            "theta-elements need squarefree level or a compatible conductor"
        )
    units = np.array([a for a in range(1, m) if gcd(a, m) == 1], dtype=np.int64)
    gammas = field.gamma_array(units)
    nums, den = space.eval_many(m, units, sign)
    delta = space.delta
    sums = [0] * d
    for g, x in zip(gammas, nums):
        sums[int(g)] += int(x)
    coeffs: dict[int, int] = {}
    for g in range(d):
        c = Fraction(delta * sums[g], den)
        if c.denominator != 1:
            raise ThetaError(f"non-integral theta-coefficient at gamma={g}")
        coeffs[g] = int(c)

    gamma_f = field.chi_log(e % m)
    w_e = space.atkin_lehner_sign(e)
    w_f = -w_e
    theta = ThetaElement(
        field=field,
        curve=space.curve.label,
        coeffs=coeffs,
        gamma_f=gamma_f,
        w_f=w_f,
        classes={},
        delta=delta,
        sign=sign,
    )
    fixed = 0
    for g in range(d):
        ig = theta.iota(g)
        if ig == g:
            fixed += 1
            theta.classes[g] = SPECIAL_PLUS if w_f == 1 else SPECIAL_MINUS
        else:
            theta.classes[g] = GENERIC
        if coeffs[ig] != w_f * coeffs[g]:
            raise ThetaError(
                f"Atkin-Lehner symmetry fails at gamma={g} (m={m}, d={d})"
            )
    for g, cls in theta.classes.items():
        if cls == SPECIAL_MINUS and coeffs[g] != 0:
            raise ThetaError(f"special- coefficient nonzero at gamma={g}")
    if field.parity == 1:
        if d % 2 == 1 and fixed != 1:
            raise ThetaError(f"odd degree must have one fixed class, got {fixed}")
        if d % 2 == 0 and fixed not in (0, 2):
            raise ThetaError(f"even degree must have 0 or 2 fixed classes")
    return theta


def vanishing_test(theta: ThetaElement) -> bool:
    """Exact test of chi(theta) = 0: reduce sum c_g T^g modulo Phi_d(T).

    For prime d this is equivalent to all coefficients being equal; both
    routes are evaluated and must agree.
    """
    d = theta.d
    poly = [theta.coeffs[g] for g in range(d)]
    rem = poly_rem_mod(poly, cyclotomic_polynomial(d))
    vanishes = not rem
    if _is_prime(d):
        equal = len(set(theta.coeffs.values())) == 1
        if equal != vanishes:
            raise ThetaError("cyclotomic and equal-coefficient tests disagree")
    return vanishes


def invariant_basis_support(theta: ThetaElement) -> list[int]:
    """G_0: all special+ classes plus one member of each generic iota-pair."""
    out = []
    for g in range(theta.d):
        cls = theta.classes[g]
        if cls == SPECIAL_PLUS:
            out.append(g)
        elif cls == GENERIC and g <= theta.iota(g):
            out.append(g)
    return out


def decompose_invariant(theta: ThetaElement) -> dict[int, int]:
    """Coefficients of theta on the basis {v_g : g in G_0} with
    v_g = g + w_F iota(g) (generic), g (special+), 0 (special-);
    verifies the exact round trip."""
    support = invariant_basis_support(theta)
    coefs = {g: theta.coeffs[g] for g in support}
    recon = [0] * theta.d
    for g, c in coefs.items():
        if theta.classes[g] == GENERIC:
            recon[g] += c
            recon[theta.iota(g)] += theta.w_f * c
        else:
            recon[g] += c
    if recon != [theta.coeffs[g] for g in range(theta.d)]:
        raise ThetaError("invariant decomposition failed to reconstruct theta")
    return coefs


def r_chi(d: int, m: int) -> float:
    """Discretization width sqrt(d) / sqrt(phi(m) log m)."""
    if m < 3:
        raise ThetaError("conductor must be >= 3")
    return sqrt(d) / sqrt(euler_phi(m) * log(m))


def normalized_coefficients(theta: ThetaElement) -> dict[int, float]:
    """c-tilde: coefficients scaled by sqrt(d)/sqrt(phi(m) log m)."""
    width = r_chi(theta.d, theta.m)
    return {g: c * width for g, c in theta.coeffs.items()}


def _is_prime(n: int) -> bool:
    from .ntheory import is_prime

    return is_prime(n)
