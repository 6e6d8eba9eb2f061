"""Quotient of the free module on P^1(Z/N) by the 2- and 3-term relations.

The 2-term relations x + xS = 0 pair generators up to sign; the 3-term
relations x + xT + xT^2 = 0 then form a sparse integer matrix in which every
column lies in at most two rows (each generator belongs to exactly one
T-orbit).  Eliminating by merging the two rows sharing a pivot column keeps
that structure, so the reduction runs in near-linear time with exact
rational arithmetic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..ntheory import inverse_mod


class BadPrime(ArithmeticError):
    """Raised when a working prime divides a denominator it must not."""


@dataclass
class Quotient:
    n_points: int
    rep: list[int]  # generator -> paired representative
    sign: list[int]  # +1/-1, or 0 when the generator is forced to vanish
    free_cols: list[int]  # representatives that remain free coordinates
    free_pos: dict[int, int]
    retired: list[tuple[int, dict[int, Fraction]]]  # elimination trail
    relation_rows: list[dict[int, int]]  # original 3-term rows, for checking

    @property
    def rank(self) -> int:
        return len(self.free_cols)

    # -- exact value propagation -------------------------------------------

    def values_from_free(self, free_values: list[Fraction]) -> list[Fraction]:
        """Extend values on the free coordinates to all of P^1, exactly."""
        val: dict[int, Fraction] = {
            c: Fraction(free_values[k]) for c, k in self.free_pos.items()
        }
        for c, row in reversed(self.retired):
            acc = Fraction(0)
            for c2, coef in row.items():
                if c2 != c:
                    acc += coef * val[c2]
            val[c] = -acc / row[c]
        zero = Fraction(0)
        return [
            zero if self.sign[i] == 0 else self.sign[i] * val[self.rep[i]]
            for i in range(self.n_points)
        ]

    # -- mod-p expression matrix --------------------------------------------

    def expressions_mod_p(self, p: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(Q, rep_row, rep_sign): value of generator i mod p is
        rep_sign[i] * Q[rep_row[i]] . phi  for phi on the free coordinates."""
        cols = sorted(set(self.free_cols) | {c for c, _ in self.retired})
        col_pos = {c: k for k, c in enumerate(cols)}
        n_free = len(self.free_cols)
        Q = np.zeros((len(cols), n_free), dtype=np.int64)
        for c, k in self.free_pos.items():
            Q[col_pos[c], k] = 1
        for c, row in reversed(self.retired):
            acc = np.zeros(n_free, dtype=np.int64)
            for c2, coef in row.items():
                if c2 == c:
                    continue
                acc += _frac_mod(coef, p) * Q[col_pos[c2]]
            pivot = _frac_mod(row[c], p)
            if pivot == 0:
                raise BadPrime(p)
            Q[col_pos[c]] = (-acc % p) * inverse_mod(pivot, p) % p
        rep_row = np.zeros(self.n_points, dtype=np.int64)
        rep_sign = np.zeros(self.n_points, dtype=np.int64)
        for i in range(self.n_points):
            if self.sign[i] != 0:
                rep_row[i] = col_pos[self.rep[i]]
                rep_sign[i] = self.sign[i]
        return Q, rep_row, rep_sign


def _frac_mod(x: Fraction, p: int) -> int:
    den = x.denominator % p
    if den == 0:
        raise BadPrime(p)
    return x.numerator % p * inverse_mod(den, p) % p


def reduce_relations(sigma: list[int], tau: list[int]) -> Quotient:
    n = len(sigma)
    rep = list(range(n))
    sign = [1] * n
    for i in range(n):
        j = sigma[i]
        if j == i:
            sign[i] = 0  # x + xS = 2x = 0
        elif j > i:
            rep[j] = i
            sign[j] = -1

    rows: list[dict[int, int]] = []
    seen = [False] * n
    for i in range(n):
        if seen[i]:
            continue
        orbit = [i, tau[i], tau[tau[i]]]
        for o in orbit:
            seen[o] = True
        if orbit[1] == i:
            orbit = [i]  # T-fixed point: 3x = 0
        row: dict[int, int] = {}
        for o in orbit:
            if sign[o] == 0:
                continue
            r = rep[o]
            row[r] = row.get(r, 0) + sign[o]
        row = {k: v for k, v in row.items() if v != 0}
        if row:
            rows.append(row)

    # sparse elimination by row merging
    active: dict[int, dict[int, Fraction]] = {
        rid: {c: Fraction(v) for c, v in row.items()} for rid, row in enumerate(rows)
    }
    col2rows: dict[int, set[int]] = {}
    for rid, row in active.items():
        for c in row:
            col2rows.setdefault(c, set()).add(rid)
    heap = [(len(row), rid) for rid, row in active.items()]
    heapq.heapify(heap)
    retired: list[tuple[int, dict[int, Fraction]]] = []

    while heap:
        length, rid = heapq.heappop(heap)
        row = active.get(rid)
        if row is None or len(row) != length:
            continue  # stale heap entry
        # pivot on the column whose partner row is cheapest to update
        pivot_col = None
        best_cost = None
        for c in row:
            others = col2rows[c] - {rid}
            cost = sum(len(active[r]) for r in others)
            if best_cost is None or cost < best_cost or (cost == best_cost and c < pivot_col):
                best_cost, pivot_col = cost, c
        del active[rid]
        for c in row:
            col2rows[c].discard(rid)
        partners = list(col2rows[pivot_col])
        for rid2 in partners:
            row2 = active[rid2]
            coef = row2[pivot_col] / row[pivot_col]
            for c, v in row.items():
                new = row2.get(c, Fraction(0)) - coef * v
                if new == 0:
                    if c in row2:
                        del row2[c]
                        col2rows[c].discard(rid2)
                else:
                    if c not in row2:
                        col2rows.setdefault(c, set()).add(rid2)
                    row2[c] = new
            if row2:
                heapq.heappush(heap, (len(row2), rid2))
            else:
                del active[rid2]
        retired.append((pivot_col, row))

    pivoted = {c for c, _ in retired}
    all_cols = sorted({rep[i] for i in range(n) if sign[i] != 0})
    free_cols = [c for c in all_cols if c not in pivoted]
    free_pos = {c: k for k, c in enumerate(free_cols)}
    return Quotient(
        n_points=n,
        rep=rep,
        sign=sign,
        free_cols=free_cols,
        free_pos=free_pos,
        retired=retired,
        relation_rows=rows,
    )
