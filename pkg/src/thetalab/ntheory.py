"""Elementary number theory helpers shared across the package.

Everything here is exact integer arithmetic; no floats.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd, isqrt


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b)."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def inverse_mod(a: int, m: int) -> int:
    g, x, _ = egcd(a % m, m)
    if g != 1:
        raise ValueError(f"{a} is not invertible mod {m}")
    return x % m


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, v in enumerate(sieve) if v]


def spf_sieve(n: int) -> list[int]:
    """Smallest-prime-factor table for 0..n."""
    spf = list(range(n + 1))
    for i in range(2, isqrt(n) + 1):
        if spf[i] == i:
            for j in range(i * i, n + 1, i):
                if spf[j] == j:
                    spf[j] = i
    return spf


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; the witness set covers all n < 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    # Brent's cycle variant; deterministic seeds keep runs reproducible.
    if n % 2 == 0:
        return 2
    for c in range(1, 50):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"rho failed on {n}")


def factorize(n: int) -> dict[int, int]:
    """Prime factorization as {p: exponent}; n >= 1."""
    if n < 1:
        raise ValueError("factorize expects n >= 1")
    out: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = m
        while d == m:
            d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return dict(sorted(out.items()))


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n).items():
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def euler_phi(n: int) -> int:
    out = n
    for p in factorize(n):
        out -= out // p
    return out


def mobius(n: int) -> int:
    mu = 1
    for _, e in factorize(n).items():
        if e > 1:
            return 0
        mu = -mu
    return mu


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int]:
    """Combine x = r1 (mod m1), x = r2 (mod m2) for coprime moduli."""
    g, u, _ = egcd(m1, m2)
    if g != 1:
        raise ValueError("crt_pair needs coprime moduli")
    m = m1 * m2
    return (r1 + (r2 - r1) * u % m2 * m1) % m, m


def primitive_root_mod_prime_power(p: int, k: int) -> int:
    """Generator of (Z/p^k)^x for odd prime p (or p=2, k<=2)."""
    if p == 2:
        if k == 1:
            return 1
        if k == 2:
            return 3
        raise ValueError("(Z/2^k)^x is not cyclic for k >= 3")
    fac = factorize(p - 1)
    g = None
    for cand in range(2, p):
        if all(pow(cand, (p - 1) // q, p) != 1 for q in fac):
            g = cand
            break
    assert g is not None
    if k == 1:
        return g
    # lift: g works mod p^k unless g^(p-1) = 1 mod p^2
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


@lru_cache(maxsize=None)
def cyclotomic_polynomial(d: int) -> tuple[int, ...]:
    """Coefficients (low degree first) of Phi_d over Z, via exact division."""
    if d == 1:
        return (-1, 1)
    # x^d - 1 divided by prod of Phi_t for proper divisors t
    poly = [0] * (d + 1)
    poly[0], poly[d] = -1, 1
    for t in divisors(d):
        if t == d:
            continue
        phi_t = cyclotomic_polynomial(t)
        poly = _poly_divide_exact(poly, list(phi_t))
    return tuple(poly)


def _poly_divide_exact(num: list[int], den: list[int]) -> list[int]:
    """Exact division of integer polynomials (low degree first)."""
    num = list(num)
    dn, dd = len(num) - 1, len(den) - 1
    out = [0] * (dn - dd + 1)
    for i in range(dn - dd, -1, -1):
        q, r = divmod(num[i + dd], den[dd])
        assert r == 0, "non-exact polynomial division"
        out[i] = q
        for j, c in enumerate(den):
            num[i + j] -= q * c
    assert all(c == 0 for c in num), "non-exact polynomial division"
    return out


def poly_rem_mod(poly: list[int], mod_poly: tuple[int, ...]) -> list[int]:
    """Remainder of an integer polynomial modulo a monic integer polynomial."""
    rem = list(poly)
    dd = len(mod_poly) - 1
    assert mod_poly[dd] == 1
    for i in range(len(rem) - 1, dd - 1, -1):
        c = rem[i]
        if c == 0:
            continue
        for j in range(dd + 1):
            rem[i - dd + j] -= c * mod_poly[j]
    while rem and rem[-1] == 0:
        rem.pop()
    return rem


def rational_reconstruct(a: int, m: int) -> tuple[int, int] | None:
    """Find n/d = a (mod m) with |n|, d <= sqrt(m/2), via half-gcd (Wang).

    Returns (n, d) with d > 0 and gcd(d, m) = 1, or None.
    """
    a %= m
    bound = isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    n, d = r1, s1
    if d < 0:
        n, d = -n, -d
    if d == 0 or abs(n) > bound or d > bound or gcd(n, d) != 1:
        return None
    if gcd(d, m) != 1:
        return None
    return n, d
