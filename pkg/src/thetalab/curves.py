"""Elliptic curves over Q: bundled table, Fourier coefficients, periods.

A curve is given by a global minimal Weierstrass model (a1,a2,a3,a4,a6) and
its conductor N.  Conductors are accepted as input and cross-checked against
the discriminant valuations (full conductor computation from scratch is out
of scope); a_p comes from counting projective points of the reduced cubic,
which gives p + 1 - #C(F_p) uniformly for good, multiplicative and additive
primes.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from importlib import resources
from math import gcd

import mpmath as mp
import numpy as np

from .ntheory import factorize, is_prime, spf_sieve


class CurveError(ValueError):
    pass


@dataclass
class CurveData:
    label: str
    weierstrass: tuple[int, int, int, int, int]
    N: int
    semistable: bool
    manin_c: int = 1
    delta: int | None = None  # set by the modular-symbol engine
    an_cache: dict[int, int] = field(default_factory=dict)
    al_signs: dict[int, int] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _omega: tuple[mp.mpf, mp.mpf] | None = field(default=None, repr=False)

    # -- invariants of the Weierstrass model -------------------------------

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.weierstrass
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c_invariants(self) -> tuple[int, int]:
        b2, b4, b6, _ = self.b_invariants
        c4 = b2 * b2 - 24 * b4
        c6 = -b2**3 + 36 * b2 * b4 - 216 * b6
        return c4, c6

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def validate(self) -> None:
        disc = self.discriminant
        if disc == 0:
            raise CurveError(f"{self.label}: singular Weierstrass model")
        c4, _ = self.c_invariants
        n_fac = factorize(self.N)
        if self.semistable != all(e == 1 for e in n_fac.values()):
            raise CurveError(f"{self.label}: semistable flag contradicts N")
        d_fac = factorize(abs(disc))
        for p in d_fac:
            if self.N % p != 0:
                # good reduction at p | disc would force a non-minimal model
                if not (d_fac[p] >= 12 and c4 % p**4 == 0):
                    raise CurveError(
                        f"{self.label}: p={p} divides the discriminant but not N"
                    )
        for p, e in n_fac.items():
            if d_fac.get(p, 0) == 0:
                raise CurveError(f"{self.label}: p={p} | N but p does not divide disc")
            if e == 1 and c4 % p == 0:
                raise CurveError(
                    f"{self.label}: p={p} || N requires multiplicative reduction"
                )
            if e >= 2 and c4 % p != 0:
                raise CurveError(
                    f"{self.label}: p^2 | N requires additive reduction at {p}"
                )

    # -- point counts and Fourier coefficients -----------------------------

    def ap(self, p: int) -> int:
        """a_p = p + 1 - #C(F_p), counting the (possibly singular) cubic.

        The projective count gives the standard values in every case:
        good p, +/-1 at multiplicative p (split/nonsplit), 0 at additive p.
        """
        if not is_prime(p):
            raise CurveError(f"ap expects a prime, got {p}")
        with self._lock:
            cached = self.an_cache.get(p)
        if cached is not None:
            return cached
        val = p + 1 - self._count_points(p)
        with self._lock:
            self.an_cache[p] = val
        return val

    def _count_points(self, p: int) -> int:
        a1, a2, a3, a4, a6 = (a % p for a in self.weierstrass)
        if p == 2:
            count = 1  # point at infinity
            for x in (0, 1):
                for y in (0, 1):
                    if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % 2 == 0:
                        count += 1
            return count
        # odd p: complete the square, #points = p + 1 + sum_x chi(rhs(x))
        b2 = (a1 * a1 + 4 * a2) % p
        b4 = (2 * a4 + a1 * a3) % p
        b6 = (a3 * a3 + 4 * a6) % p
        if p < 64:
            total = 0
            for x in range(p):
                rhs = (4 * x**3 + b2 * x * x + 2 * b4 * x + b6) % p
                if rhs != 0:
                    total += 1 if pow(rhs, (p - 1) // 2, p) == 1 else -1
            return p + 1 + total
        x = np.arange(p, dtype=np.int64)
        rhs = (4 * x * x % p * x + b2 * x * x + 2 * b4 * x + b6) % p
        chi = np.full(p, -1, dtype=np.int64)
        chi[np.unique(x * x % p)] = 1
        chi[0] = 0
        return int(p + 1 + chi[rhs].sum())

    def an_vector(self, n_max: int) -> list[int]:
        """a_1..a_{n_max} by multiplicativity and the Hecke recurrence."""
        if n_max < 1:
            raise CurveError("n_max must be >= 1")
        spf = spf_sieve(n_max)
        an = [0] * (n_max + 1)
        an[1] = 1
        for n in range(2, n_max + 1):
            p = spf[n]
            m = n // p
            if n == p:
                an[n] = self.ap(p)
            elif m % p != 0:
                an[n] = an[p] * an[m]
            elif self.N % p == 0:
                an[n] = an[p] * an[m]
            else:
                an[n] = an[p] * an[m] - p * an[m // p]
        with self._lock:
            for n in range(1, n_max + 1):
                self.an_cache.setdefault(n, an[n])
        return an[1:]

    # -- periods ------------------------------------------------------------

    def periods(self, precision: int = 128) -> tuple[mp.mpf, mp.mpf]:
        """(Omega_plus, |Omega_minus|/i) of the Neron lattice via the AGM.

        Omega_plus integrates the Neron differential over the full real
        locus (both components when disc > 0); the minus value is the
        positive generator of the purely imaginary sublattice, divided by i.
        """
        if precision < 64:
            raise CurveError("periods need precision >= 64 bits")
        b2, b4, b6, _ = self.b_invariants
        disc = self.discriminant
        with mp.workprec(precision + 48):
            roots = mp.polyroots([4, b2, 2 * b4, b6], maxsteps=200, extraprec=120)
            if disc > 0:
                e1, e2, e3 = sorted((mp.re(r) for r in roots), reverse=True)
                w_real = mp.pi / mp.agm(mp.sqrt(e1 - e3), mp.sqrt(e1 - e2))
                w_imag = mp.pi / mp.agm(mp.sqrt(e1 - e3), mp.sqrt(e2 - e3))
                omega_plus = 2 * w_real
                omega_minus_im = w_imag
            else:
                e1 = next(mp.re(r) for r in roots if abs(mp.im(r)) < mp.mpf(2) ** (-20))
                ec = next(r for r in roots if mp.im(r) > mp.mpf(2) ** (-20))
                # one AGM step by hand turns the conjugate pair real
                a, b = mp.sqrt(e1 - ec), mp.sqrt(e1 - mp.conj(ec))
                w_real = mp.pi / mp.agm(mp.re(a + b) / 2, mp.sqrt(abs(e1 - ec)))
                a, b = mp.sqrt(ec - e1), mp.sqrt(mp.conj(ec) - e1)
                w_imag = mp.pi / mp.agm(mp.re(a + b) / 2, mp.sqrt(abs(ec - e1)))
                omega_plus = w_real
                omega_minus_im = w_imag
            result = (+omega_plus, +omega_minus_im)
        self._omega = result
        return result


# -- curve table ------------------------------------------------------------


def _bundled_table() -> dict[str, dict]:
    text = resources.files("thetalab.data").joinpath("curves.json").read_text()
    table = {}
    for rec in json.loads(text):
        table[rec["label"].lower()] = rec
    return table


def load_curve(source, conductor: int | None = None) -> CurveData:
    """Build CurveData from a bundled label or five Weierstrass integers.

    Raw coefficients need the conductor supplied alongside (conductor
    computation from scratch is out of scope).
    """
    if isinstance(source, str):
        rec = _bundled_table().get(source.lower())
        if rec is None:
            raise CurveError(f"unknown curve label {source!r}")
        ainvs = tuple(int(a) for a in rec["ainvs"])
        n = int(rec["conductor"])
    else:
        ainvs = tuple(int(a) for a in source)
        if len(ainvs) != 5:
            raise CurveError("expected five Weierstrass coefficients")
        if conductor is None:
            raise CurveError("raw coefficients require conductor=")
        n = int(conductor)
    label = source if isinstance(source, str) else f"custom-{n}"
    semistable = all(e == 1 for e in factorize(n).values())
    curve = CurveData(label=label, weierstrass=ainvs, N=n, semistable=semistable)
    curve.validate()
    return curve


def atkin_lehner_from_ap(curve: CurveData, e: int) -> int:
    """w_e from the U_p eigenvalues, valid for exact divisors of squarefree N.

    For p || N the newform has w_p = -a_p; w is multiplicative in e.
    """
    if e == 1:
        return 1
    if curve.N % e != 0 or gcd(e, curve.N // e) != 1:
        raise CurveError(f"{e} is not an exact divisor of N={curve.N}")
    w = 1
    for p, k in factorize(e).items():
        if k != 1:
            raise CurveError("ap-based Atkin-Lehner signs need squarefree e")
        ap = curve.ap(p)
        if ap not in (1, -1):
            raise CurveError(f"p={p} is not multiplicative for {curve.label}")
        w *= -ap
    return w
