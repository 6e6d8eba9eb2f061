"""Variance statistics of symbol tables, regressions, and sweep datasets.

The regression targets are the slope/intercept of Var(m) against log(m)
restricted to gcd(m, N) = kappa, optionally phi-weighted; sweep datasets
collect normalized theta-coefficients (generic and special+ rows only) for
histograms and interval-density tests.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from math import erf, gcd, log, sqrt

from .msym.space import ManinSymbolSpace, SymbolTable
from .theta import GENERIC, SPECIAL_PLUS, normalized_coefficients, theta_element


class StatsError(ValueError):
    pass


def variance_of_table(table: SymbolTable) -> tuple[Fraction, float]:
    """Var(m) = (1/phi(m)) sum_a ([a/m]^+)^2, exact and as a float."""
    vals = list(table.plus.values())
    if not vals:
        raise StatsError("empty symbol table")
    var = sum(v * v for v in vals) / len(vals)
    return var, float(var)


@dataclass
class RegressionResult:
    kappa: int
    C_hat: float
    D_hat: float
    weighting: str
    m_min: int
    m_max: int
    stderr: float
    n_points: int


def var_regression(
    space: ManinSymbolSpace,
    kappa: int,
    m_range: tuple[int, int],
    weighting: str = "uniform",
    variances: dict[int, float] | None = None,
) -> RegressionResult:
    """Least-squares fit Var(m) ~ C log(m) + D over {m : gcd(m,N) = kappa}.

    weighting="phi-weighted" uses phi(m) weights; precomputed variances may
    be passed to avoid rebuilding tables.
    """
    if weighting not in ("uniform", "phi-weighted"):
        raise StatsError(f"unknown weighting {weighting!r}")
    m_min, m_max = m_range
    ms = [m for m in range(m_min, m_max + 1) if gcd(m, space.N) == kappa and m >= 3]
    if len(ms) < 10:
        raise StatsError(f"only {len(ms)} admissible m in range; need >= 10")
    xs, ys, ws = [], [], []
    for m in ms:
        if variances is not None and m in variances:
            v = variances[m]
        else:
            v = variance_of_table(space.symbol_table(m))[1]
        xs.append(log(m))
        ys.append(v)
        ws.append(float(_phi(m)) if weighting == "phi-weighted" else 1.0)
    c_hat, d_hat, stderr = _weighted_fit(xs, ys, ws)
    return RegressionResult(
        kappa=kappa,
        C_hat=c_hat,
        D_hat=d_hat,
        weighting=weighting,
        m_min=m_min,
        m_max=m_max,
        stderr=stderr,
        n_points=len(ms),
    )


def _weighted_fit(xs, ys, ws) -> tuple[float, float, float]:
    sw = sum(ws)
    mx = sum(w * x for w, x in zip(ws, xs)) / sw
    my = sum(w * y for w, y in zip(ws, ys)) / sw
    sxx = sum(w * (x - mx) ** 2 for w, x in zip(ws, xs))
    sxy = sum(w * (x - mx) * (y - my) for w, x, y in zip(ws, xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    n = len(xs)
    if n > 2:
        ss_res = sum(
            w * (y - slope * x - intercept) ** 2 for w, x, y in zip(ws, xs, ys)
        )
        stderr = sqrt(ss_res / (n - 2) / sxx)
    else:
        stderr = float("nan")
    return slope, intercept, stderr


def _phi(n: int) -> int:
    from .ntheory import euler_phi

    return euler_phi(n)


@dataclass
class SweepRecord:
    m: int
    orbit: str
    gamma: int
    cls: str
    c: int
    value: float  # c-tilde * m^alpha * log(m)^beta


@dataclass
class SweepDataset:
    curve: str
    d: int
    alpha: float
    beta: float
    X: int
    records: list[SweepRecord]
    delta: int
    sign: int = 1

    def values(self) -> list[float]:
        return [r.value for r in self.records]


def sigma_dataset(
    space: ManinSymbolSpace,
    d: int,
    alpha: float,
    beta: float,
    X: int,
    sign: int = 1,
    fields=None,
    max_records: int | None = None,
) -> SweepDataset:
    """One record per (field of degree d, conductor <= X, generic/special+
    gamma), in deterministic (conductor, orbit, gamma) order."""
    from .characters import enumerate_fields

    if d < 3:
        raise StatsError("degree must be >= 3")
    parity = 1 if sign == 1 else -1
    if fields is None:
        fields = enumerate_fields(d, X, parity=parity)
    records: list[SweepRecord] = []
    for spec in fields:
        theta = theta_element(space, spec, sign=sign)
        tilde = normalized_coefficients(theta)
        scale = spec.m**alpha * log(spec.m) ** beta
        for g in range(d):
            cls = theta.classes[g]
            if cls not in (GENERIC, SPECIAL_PLUS):
                continue
            records.append(
                SweepRecord(
                    m=spec.m,
                    orbit=spec.orbit_key(),
                    gamma=g,
                    cls=cls,
                    c=theta.coeffs[g],
                    value=tilde[g] * scale,
                )
            )
        if max_records is not None and len(records) >= max_records:
            break
    return SweepDataset(
        curve=space.curve.label,
        d=d,
        alpha=alpha,
        beta=beta,
        X=X,
        records=records,
        delta=space.delta,
        sign=sign,
    )


def interval_density(dataset: SweepDataset, a: float, b: float) -> float:
    """Fraction of records with value in the open interval (a, b)."""
    if not a < b:
        raise StatsError("need a < b")
    vals = dataset.values()
    if not vals:
        raise StatsError("empty dataset")
    return sum(1 for v in vals if a < v < b) / len(vals)


def histogram_emit(
    dataset: SweepDataset, bins: int, overlay_variance: float | None = None
) -> str:
    """CSV histogram: bin_lo,bin_hi,count,density,overlay_density.

    Equal-width bins over [min, max]; the overlay column is the average
    density over each bin of a centered normal with the given variance.
    """
    if bins < 1:
        raise StatsError("bins must be >= 1")
    vals = dataset.values()
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["bin_lo", "bin_hi", "count", "density", "overlay_density"])
    if not vals:
        for i in range(bins):
            writer.writerow([_fmt(i), _fmt(i + 1), 0, _fmt(0.0), _fmt(0.0)])
        return out.getvalue()
    lo, hi = min(vals), max(vals)
    if lo == hi:
        hi = lo + 1.0
    width = (hi - lo) / bins
    counts = [0] * bins
    for v in vals:
        k = min(int((v - lo) / width), bins - 1)
        counts[k] += 1
    total = len(vals)
    for i in range(bins):
        b_lo = lo + i * width
        b_hi = b_lo + width
        density = counts[i] / (total * width)
        if overlay_variance and overlay_variance > 0:
            s = sqrt(2 * overlay_variance)
            mass = 0.5 * (erf(b_hi / s) - erf(b_lo / s))
            overlay = mass / width
        else:
            overlay = 0.0
        writer.writerow([_fmt(b_lo), _fmt(b_hi), counts[i], _fmt(density), _fmt(overlay)])
    return out.getvalue()


def _fmt(x: float) -> str:
    return "%.17g" % float(x)
