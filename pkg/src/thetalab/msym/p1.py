"""The projective line P^1(Z/NZ) and the right actions used by Manin symbols.

A point is a class (c:d) with gcd(c,d,N) = 1 under simultaneous scaling by
units.  The canonical representative has c = gcd(c,N) (a divisor of N) and
the least admissible d.
"""

from __future__ import annotations

from math import gcd

import numpy as np

from ..ntheory import divisors, inverse_mod


class P1List:
    def __init__(self, N: int):
        if N < 1:
            raise ValueError("N must be positive")
        self.N = N
        self.reps: list[tuple[int, int]] = []
        self._index: dict[tuple[int, int], int] = {}
        self._enumerate()
        # first coordinate of every canonical rep divides N, so scanning
        # (c, d) for c | N and all d hits every class
        expected = N
        for p in set(self._prime_divisors()):
            expected = expected // p * (p + 1)
        if len(self.reps) != expected:
            raise AssertionError(
                f"P1(Z/{N}) enumeration produced {len(self.reps)} != {expected}"
            )

    def _prime_divisors(self):
        from ..ntheory import factorize

        return list(factorize(self.N)) if self.N > 1 else []

    def _enumerate(self) -> None:
        N = self.N
        if N == 1:
            self.reps = [(0, 0)]
            self._index[(0, 0)] = 0
            return
        for c in divisors(N):
            c %= N
            for d in range(N):
                if gcd(gcd(c, d), N) != 1:
                    continue
                key = self.normalize(c, d)
                if key not in self._index:
                    self._index[key] = len(self.reps)
                    self.reps.append(key)

    def normalize(self, c: int, d: int) -> tuple[int, int]:
        N = self.N
        if N == 1:
            return (0, 0)
        c %= N
        d %= N
        if c == 0:
            if gcd(d, N) != 1:
                raise ValueError(f"({c}:{d}) is not a point of P1(Z/{N})")
            return (0, 1)
        g = gcd(c, N)
        if gcd(g, gcd(d, N)) != 1:
            raise ValueError(f"({c}:{d}) is not a point of P1(Z/{N})")
        # scale by a unit u with u*c = g (mod N)
        u = inverse_mod(c // g, N // g)
        while gcd(u, N) != 1:
            u += N // g
        d = d * u % N
        if g == 1:
            return (1, d)
        # residual scaling freedom: units v = 1 (mod N/g)
        best = d
        v = 1
        for _ in range(g - 1):
            v = (v + N // g) % N
            if gcd(v, N) == 1:
                dv = d * v % N
                if dv < best:
                    best = dv
        return (g, best)

    def index(self, c: int, d: int) -> int:
        return self._index[self.normalize(c, d)]

    def __len__(self) -> int:
        return len(self.reps)

    # -- the three involutions/actions on indices ---------------------------

    def sigma_perm(self) -> list[int]:
        """Right action of S = [0,-1;1,0]: (c:d) -> (d:-c)."""
        return [self.index(d, -c) for c, d in self.reps]

    def tau_perm(self) -> list[int]:
        """Right action of the order-3 matrix [0,-1;1,-1]: (c:d) -> (d:-c-d)."""
        return [self.index(d, -c - d) for c, d in self.reps]

    def eta_perm(self) -> list[int]:
        """Star involution on Manin symbols: (c:d) -> (-c:d)."""
        return [self.index(-c, d) for c, d in self.reps]

    def lift_to_sl2z(self, i: int) -> tuple[int, int, int, int]:
        """A matrix [a,b;c,d] in SL_2(Z) whose bottom row reduces to reps[i]."""
        c, d = self.reps[i]
        N = self.N
        if N == 1:
            return (1, 0, 0, 1)
        if c == 0:
            c = N
        d0 = d
        while gcd(c, d0) != 1:
            d0 += N
        # a*d0 - b*c = 1
        g, x, y = _egcd(d0, c)
        assert g == 1
        return (x, -y, c, d0)

    def dense_lookup(self) -> np.ndarray:
        """Index table L[c, d] for vectorized evaluation (small N only)."""
        N = self.N
        lut = np.full((N, N), -1, dtype=np.int32)
        for c in range(N):
            for d in range(N):
                if gcd(gcd(c, d), N) == 1:
                    lut[c, d] = self.index(c, d)
        return lut


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0
