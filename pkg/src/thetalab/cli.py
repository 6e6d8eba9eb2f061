"""Command-line surface: deterministic experiment orchestration.

Data goes to stdout or files under --out-dir; progress goes to stderr.
Floats print with 17 significant digits, exact values as num/den strings,
so identical configurations give byte-identical outputs.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from fractions import Fraction
from math import gcd
from pathlib import Path

import click

from . import cache as cachemod
from .census import (
    HeuristicParams,
    empirical_vs_expected,
    euler_factors_check,
    expectation_sum,
    f_even_sieve,
    lemprop2_tail,
    regime_classify,
)
from .characters import enumerate_fields
from .config import load_config
from .curves import load_curve
from .lvalues import (
    OracleError,
    birch_stevens_check,
    character_table,
    primitive_characters,
    twisted_lvalue,
)
from .msym.space import partial_sum_profile, verify_relations
from .stats import histogram_emit, sigma_dataset, var_regression, variance_of_table
from .theta import normalized_coefficients, theta_element, vanishing_test


def _fmt(x) -> str:
    return "%.17g" % float(x)


def _rat(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _err(*args) -> None:
    print(*args, file=sys.stderr, flush=True)


def _emit(ctx, name: str, text: str) -> Path | None:
    out_dir = ctx.obj["out_dir"]
    if out_dir is None:
        sys.stdout.write(text)
        return None
    path = Path(out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    _err(f"wrote {path}")
    return path


def _space(ctx, label: str, hecke_bound: int | None = None):
    curve = load_curve(label)
    return cachemod.get_space(
        curve, cache_dir=ctx.obj["cache_dir"], hecke_bound=hecke_bound
    )


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="key = value config file supplying flag defaults")
@click.option("--cache-dir", type=click.Path(), default=None,
              help="cache root (default $THETALAB_CACHE or ~/.cache/thetalab)")
@click.option("--out-dir", type=click.Path(), default=None,
              help="directory for output files (default: stdout)")
@click.option("--threads", type=int, default=1, show_default=True,
              help="worker threads for sweeps (outputs are order-independent)")
@click.option("--offline", is_flag=True, help="fail instead of computing on cache miss")
@click.pass_context
def main(ctx, config_path, cache_dir, out_dir, threads, offline):
    """Exact modular-symbol and theta-coefficient laboratory."""
    defaults = load_config(config_path) if config_path else {}
    cache_dir = cache_dir or defaults.get("cache_dir")
    out_dir = out_dir if out_dir is not None else defaults.get("out_dir")
    ctx.obj = {
        "cache_dir": Path(cache_dir) if cache_dir else cachemod.default_cache_dir(),
        "out_dir": out_dir,
        "threads": threads or int(defaults.get("threads", 1)),
        "offline": offline or bool(defaults.get("offline", False)),
        "defaults": defaults,
    }


# -- curve ---------------------------------------------------------------------


@main.group()
def curve():
    """Curve-level data."""


@curve.command("info")
@click.option("--curve", "label", required=True)
@click.option("--precision", type=int, default=128, show_default=True)
@click.pass_context
def curve_info(ctx, label, precision):
    c = load_curve(label)
    omega_plus, omega_minus = c.periods(precision)
    payload = {
        "label": c.label,
        "ainvs": list(c.weierstrass),
        "conductor": c.N,
        "semistable": c.semistable,
        "discriminant": c.discriminant,
        "c4": c.c_invariants[0],
        "c6": c.c_invariants[1],
        "a_p": {str(p): c.ap(p) for p in (2, 3, 5, 7, 11, 13)},
        "omega_plus": _fmt(omega_plus),
        "omega_minus_im": _fmt(omega_minus),
        "omega_convention": "full real locus; Omega_minus = i * omega_minus_im",
    }
    _emit(ctx, f"{c.label}-info.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


# -- symbols --------------------------------------------------------------------


@main.command()
@click.option("--curve", "label", required=True)
@click.option("--m", "m", required=True, type=int)
@click.pass_context
def symbols(ctx, label, m):
    """Compute (and cache) the exact symbol table at level m."""
    space = _space(ctx, label)
    table = cachemod.get_table(
        space, m, cache_dir=ctx.obj["cache_dir"], offline=ctx.obj["offline"]
    )
    path = cachemod.save_table(ctx.obj["cache_dir"], table)
    _err(f"delta = {table.delta}")
    click.echo(str(path))


# -- checks ---------------------------------------------------------------------


@main.group()
def check():
    """Exact and numeric consistency checks."""


@check.command("relations")
@click.option("--curve", "label", required=True)
@click.option("--m", "m", required=True, type=int)
@click.option("--which", type=click.Choice(["all", "gamma0", "atkin_lehner", "hecke"]),
              default="all", show_default=True)
@click.option("--ell", type=int, default=None, help="prime for the hecke family")
@click.pass_context
def check_relations(ctx, label, m, which, ell):
    space = _space(ctx, label)
    families = ["gamma0", "atkin_lehner", "hecke"] if which == "all" else [which]
    rows = []
    ok = True
    for fam in families:
        ells = [ell] if fam != "hecke" else ([ell] if ell else [2, 3, 5, 7])
        for l2 in ells if fam == "hecke" else [None]:
            rep = verify_relations(space, m, fam, ell=l2)
            ok = ok and rep.passed
            rows.append(
                {
                    "which": fam + (f"({l2})" if l2 else ""),
                    "m": m,
                    "passed": rep.passed,
                    "checked": rep.checked,
                    "skipped": rep.skipped,
                    "counterexample": rep.counterexample,
                }
            )
    _emit(ctx, f"{label}-relations-m{m}.json",
          json.dumps(rows, indent=2, sort_keys=True, default=str) + "\n")
    if not ok:
        raise SystemExit(1)


@check.command("birch-stevens")
@click.option("--curve", "label", required=True)
@click.option("--max-cond", type=int, default=30, show_default=True)
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.pass_context
def check_birch_stevens(ctx, label, max_cond, tol):
    space = _space(ctx, label)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["m", "order", "parity", "difference", "passed"])
    worst = 0.0
    ok = True
    for m in range(3, max_cond + 1):
        if gcd(m, space.N) != 1:
            continue  # oracle precondition; exact side needs no restriction
        for chi in primitive_characters(m):
            rep = birch_stevens_check(space, chi, tol=tol)
            worst = max(worst, rep.difference)
            ok = ok and rep.passed
            writer.writerow([m, chi.d, chi.parity, _fmt(rep.difference), rep.passed])
    _emit(ctx, f"{label}-birch-stevens.csv", out.getvalue())
    _err(f"worst residual {worst:.3e}")
    if not ok:
        raise SystemExit(1)


# -- theta ----------------------------------------------------------------------


def theta_sweep_rows(space, d, max_cond, sign=1):
    parity = 1 if sign == 1 else -1
    rows = []
    for spec in enumerate_fields(d, max_cond, parity=parity):
        theta = theta_element(space, spec, sign=sign)
        tilde = normalized_coefficients(theta)
        vanishes = vanishing_test(theta)
        for g in range(d):
            rows.append(
                {
                    "curve": space.curve.label,
                    "m": spec.m,
                    "d": d,
                    "orbit": spec.orbit_key(),
                    "gamma": g,
                    "class": theta.classes[g],
                    "c": theta.coeffs[g],
                    "ctilde": tilde[g],
                    "wF": theta.w_f,
                    "gammaF": theta.gamma_f,
                    "vanishes": vanishes,
                }
            )
    return rows


@main.group()
def theta():
    """Theta-element sweeps."""


@theta.command("sweep")
@click.option("--curve", "label", required=True)
@click.option("--d", "d", required=True, type=int)
@click.option("--max-cond", required=True, type=int)
@click.option("--sign", type=click.Choice(["plus", "minus"]), default="plus",
              show_default=True)
@click.pass_context
def theta_sweep(ctx, label, d, max_cond, sign):
    """One CSV row per (field, gamma): curve,m,d,orbit,gamma,class,c,ctilde,..."""
    space = _space(ctx, label)
    rows = theta_sweep_rows(space, d, max_cond, sign=1 if sign == "plus" else -1)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["curve", "m", "d", "orbit", "gamma", "class", "c", "ctilde", "wF",
         "gammaF", "vanishes"]
    )
    for r in rows:
        writer.writerow(
            [r["curve"], r["m"], r["d"], r["orbit"], r["gamma"], r["class"], r["c"],
             _fmt(r["ctilde"]), r["wF"], r["gammaF"], str(r["vanishes"]).lower()]
        )
    _emit(ctx, f"{label}-theta-d{d}-X{max_cond}.csv", out.getvalue())


# -- vanishing scan ---------------------------------------------------------------


def vanishing_scan_rows(space, d, max_cond, oracle=True, tol=1e-3):
    rows = []
    for spec in enumerate_fields(d, max_cond):
        theta = theta_element(space, spec)
        exact = vanishing_test(theta)
        row = {
            "m": spec.m,
            "orbit": spec.orbit_key(),
            "vanishes": exact,
            "abs_l": None,
            "agree": None,
        }
        if oracle and gcd(spec.m, space.N) == 1:
            lv = twisted_lvalue(space.curve, character_table(spec), tol=tol * 1e-3)
            row["abs_l"] = abs(lv)
            row["agree"] = (abs(lv) < tol) == exact
        rows.append(row)
    return rows


@main.group()
def scan():
    """Vanishing censuses."""


@scan.command("vanishing")
@click.option("--curve", "label", required=True)
@click.option("--d", "d", required=True, type=int)
@click.option("--max-cond", required=True, type=int)
@click.option("--oracle/--no-oracle", default=True, show_default=True)
@click.option("--tol", type=float, default=1e-3, show_default=True)
@click.pass_context
def scan_vanishing(ctx, label, d, max_cond, oracle, tol):
    """Exact vanishing test per orbit, cross-checked against |L(E,chi,1)|."""
    space = _space(ctx, label)
    rows = vanishing_scan_rows(space, d, max_cond, oracle=oracle, tol=tol)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["curve", "d", "m", "orbit", "vanishes", "abs_l", "agree"])
    n_hits = 0
    for r in rows:
        if r["vanishes"]:
            n_hits += 1
        writer.writerow(
            [label, d, r["m"], r["orbit"], str(r["vanishes"]).lower(),
             "" if r["abs_l"] is None else _fmt(r["abs_l"]),
             "" if r["agree"] is None else str(r["agree"]).lower()]
        )
    _emit(ctx, f"{label}-vanishing-d{d}-X{max_cond}.csv", out.getvalue())
    _err(f"{n_hits} vanishing orbit(s) of degree {d} with conductor <= {max_cond}")
    if any(r["agree"] is False for r in rows):
        raise SystemExit(1)


# -- stats ------------------------------------------------------------------------


@main.group()
def stats():
    """Variance statistics and distributions."""


@stats.command("var-regression")
@click.option("--curve", "label", required=True)
@click.option("--kappa", type=int, default=1, show_default=True)
@click.option("--m-min", type=int, default=100, show_default=True)
@click.option("--m-max", type=int, default=1000, show_default=True)
@click.option("--weighting", type=click.Choice(["uniform", "phi-weighted"]),
              default="uniform", show_default=True)
@click.pass_context
def stats_var_regression(ctx, label, kappa, m_min, m_max, weighting):
    space = _space(ctx, label)
    res = var_regression(space, kappa, (m_min, m_max), weighting)
    payload = {
        "kappa": res.kappa,
        "C_hat": _fmt(res.C_hat),
        "D_hat": _fmt(res.D_hat),
        "weighting": res.weighting,
        "m_min": res.m_min,
        "m_max": res.m_max,
        "stderr": _fmt(res.stderr),
    }
    _emit(ctx, f"{label}-var-regression-k{kappa}.json",
          json.dumps(payload, indent=2, sort_keys=True) + "\n")


@stats.command("histogram")
@click.option("--curve", "label", required=True)
@click.option("--d", "d", required=True, type=int)
@click.option("--alpha", type=float, default=0.0, show_default=True)
@click.option("--beta", type=float, default=0.0, show_default=True)
@click.option("--max-cond", required=True, type=int)
@click.option("--bins", type=int, default=81, show_default=True)
@click.option("--overlay", type=click.Choice(["none", "generic", "special+"]),
              default="none", show_default=True)
@click.option("--c-e", type=float, default=None,
              help="user-supplied C_E for the overlay (default: regressed)")
@click.pass_context
def stats_histogram(ctx, label, d, alpha, beta, max_cond, bins, overlay, c_e):
    space = _space(ctx, label)
    dataset = sigma_dataset(space, d, alpha, beta, max_cond)
    overlay_var = None
    if overlay != "none":
        if c_e is None:
            c_e = var_regression(space, 1, (100, 1000)).C_hat
        mult = 2 if overlay == "generic" else 4
        overlay_var = mult * space.delta**2 * c_e
    text = histogram_emit(dataset, bins, overlay_var)
    _emit(ctx, f"{label}-hist-d{d}.csv", text)
    _err(f"{len(dataset.records)} records")


# -- census -------------------------------------------------------------------------


def _load_params(path) -> HeuristicParams:
    if path is None:
        return HeuristicParams()
    return HeuristicParams.from_dict(json.loads(Path(path).read_text()))


@main.group()
def census():
    """Expectation sums and analytic counting."""


@census.command("expect")
@click.option("--curve", "label", default=None,
              help="run the exact vanishing scan for the n_d column")
@click.option("--d", "d", required=True, type=int)
@click.option("--max-cond", "max_cond", required=True, type=int)
@click.option("--params", "params_path", type=click.Path(), default=None)
@click.option("--scan-file", type=click.Path(), default=None,
              help="reuse a scan vanishing CSV instead of recomputing")
@click.pass_context
def census_expect(ctx, label, d, max_cond, params_path, scan_file):
    """CSV X,E_d,n_d comparing the heuristic bound with the exact census."""
    params = _load_params(params_path)
    if scan_file:
        scan = []
        with open(scan_file) as fh:
            for row in csv.DictReader(fh):
                scan.append((int(row["m"]), row["vanishes"] == "true"))
    elif label:
        space = _space(ctx, label)
        scan = [
            (r["m"], r["vanishes"])
            for r in vanishing_scan_rows(space, d, max_cond, oracle=False)
        ]
    else:
        raise click.UsageError("census expect needs --curve or --scan-file")
    rows = empirical_vs_expected(scan, d, max_cond, params)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["X", "E_d", "n_d"])
    for row in rows:
        writer.writerow([row.X, _fmt(row.e_d), row.n_d])
    _emit(ctx, f"census-expect-d{d}.csv", out.getvalue())


@census.command("euler")
@click.option("--d", "d", required=True, type=int)
@click.option("--p", "p", required=True, type=int)
@click.option("--s", "s", required=True, type=float)
@click.pass_context
def census_euler(ctx, d, p, s):
    rep = euler_factors_check(d, p, s)
    payload = {
        "d": rep.d,
        "p": rep.p,
        "s": rep.s,
        "l_factor": _fmt(rep.l_factor),
        "l_factor_from_counts": _fmt(rep.l_factor_from_counts),
        "z_inverse_factor": _fmt(rep.z_inverse_factor),
        "z_inverse_from_zeta": _fmt(rep.z_inverse_from_zeta),
        "product_deviation": _fmt(rep.product_deviation),
        "exponent_identity": rep.exponent_identity,
    }
    _emit(ctx, f"euler-d{d}-p{p}.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


@census.command("regime")
@click.option("--p", "p", required=True, type=int)
@click.option("--alpha", type=float, default=0.0, show_default=True)
@click.option("--beta", type=float, default=0.0, show_default=True)
@click.pass_context
def census_regime(ctx, p, alpha, beta):
    r = regime_classify(p, alpha, beta)
    payload = {
        "p": r.p, "sigma": _fmt(r.sigma), "tau": _fmt(r.tau), "label": r.label,
        "growth_exponent": None if r.growth_exponent is None else _fmt(r.growth_exponent),
        "log_exponent": None if r.log_exponent is None else _fmt(r.log_exponent),
    }
    _emit(ctx, f"regime-p{p}.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


@census.command("tail")
@click.option("--d-max", type=int, default=200, show_default=True)
@click.option("--params", "params_path", type=click.Path(), default=None)
@click.pass_context
def census_tail(ctx, d_max, params_path):
    """Convergent double-sum evaluation with its analytic tail bound."""
    params = _load_params(params_path)
    rep = lemprop2_tail(params, d_max)
    payload = {
        "d_max": rep.d_max,
        "partial_sum": _fmt(rep.partial_sum),
        "d_star": rep.d_star,
        "analytic_tail": _fmt(rep.analytic_tail),
        "hw_constant": _fmt(rep.hw_c),
        "per_d": [[d, _fmt(v)] for d, v in rep.per_d],
    }
    _emit(ctx, "lemprop2-tail.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


# -- partial sums ---------------------------------------------------------------------


@main.command()
@click.option("--curve", "label", required=True)
@click.option("--m", "m", required=True, type=int)
@click.option("--x", "x", required=True, type=str, help="rational in (0,1), e.g. 1/3")
@click.option("--terms", type=int, default=10**4, show_default=True)
@click.pass_context
def dhkl(ctx, label, m, x, terms):
    """Partial-sum profile: (1/m) sum_(a<=mx) [a/m] against the sine series."""
    space = _space(ctx, label)
    num, den = (x.split("/") + ["1"])[:2]
    xq = Fraction(int(num), int(den))
    lhs, rhs = partial_sum_profile(space, m, xq, terms)
    payload = {
        "curve": label,
        "m": m,
        "x": _rat(xq),
        "lhs_exact": _rat(lhs),
        "lhs": _fmt(lhs),
        "rhs": _fmt(rhs),
        "difference": _fmt(abs(float(lhs) - float(rhs))),
        "terms": terms,
    }
    _emit(ctx, f"{label}-dhkl-m{m}.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


# -- cache ------------------------------------------------------------------------------


@main.group(name="cache")
def cache_group():
    """Cache maintenance."""


@cache_group.command("gc")
@click.option("--max-bytes", required=True, type=int)
@click.pass_context
def cache_gc_cmd(ctx, max_bytes):
    rep = cachemod.cache_gc(ctx.obj["cache_dir"], max_bytes)
    payload = {
        "examined": rep.examined,
        "evicted": rep.evicted,
        "bytes_before": rep.bytes_before,
        "bytes_after": rep.bytes_after,
    }
    _emit(ctx, "cache-gc.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
