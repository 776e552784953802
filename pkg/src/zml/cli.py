"""Operator batch interface: caches, verifications, JSON and CSV reports.

One subcommand per job.  Reports go to stdout as JSON and, with --out,
into files; series data lands in CSV next to them.  Exit status is 0
when every asserted invariant passed, 1 with a failure JSON naming the
first violated invariant, and 2 for configuration problems.

Output is deterministic for a fixed config and cache: keys are sorted,
floats use shortest round-trip repr, and the only run-dependent field
is the timestamp.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:          # 3.10 ships without it
    import tomli as tomllib

import numpy as np

from .cache import ZeroCache, cache_io
from .ddmath import ExtReal
from .formulas import DirichletCoefficients, landau_gonek_check, mvt_check
from .ladder import (InfeasibleLadderError, kirila_decomposition_check,
                     make_ladder, validate_ladder)
from .mertens import MertensTables, mertens_M, wmc_integral
from .stats import (FamilySpec, conjecture_fit, discrete_moment,
                    family_filter, gonek_ratio, s_max_scan,
                    zero_sum_partial)
from .arith import sieve_tables
from .zeros import build_cache

_OK, _FAIL, _CONFIG = 0, 1, 2


class ConfigError(ValueError):
    """Bad flags, bad config file, or a missing cache."""


class InvariantFailure(RuntimeError):
    """An asserted invariant failed; name travels in .invariant."""

    def __init__(self, invariant: str, detail: str):
        super().__init__(detail)
        self.invariant = invariant


# -- parsing helpers ----------------------------------------------------

def _float_list(text: str):
    try:
        vals = [float(tok) for tok in str(text).split(",") if tok]
    except ValueError as e:
        raise ConfigError(f"bad number list {text!r}: {e}") from None
    if not vals:
        raise ConfigError(f"empty number list {text!r}")
    return vals


def _fraction_list(text: str):
    try:
        return [Fraction(tok) for tok in str(text).split(",") if tok]
    except ValueError as e:
        raise ConfigError(f"bad fraction list {text!r}: {e}") from None


def _index_range(text: str):
    """'7' -> [7]; '5:20' -> [5..20] inclusive."""
    text = str(text)
    try:
        if ":" in text:
            lo, hi = (int(t) for t in text.split(":", 1))
        else:
            lo = hi = int(text)
    except ValueError as e:
        raise ConfigError(f"bad index range {text!r}: {e}") from None
    if hi < lo:
        raise ConfigError(f"index range {text!r} is not well-ordered")
    return list(range(lo, hi + 1))


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None


def _opt(args, section, key, default=None):
    """Flag wins over config file wins over default."""
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    return section.get(key, default)


def _cache_path(args, cfg):
    path = _opt(args, cfg, "cache")
    if path is not None:
        return Path(path)
    return Path(os.environ.get("ZML_CACHE_DIR", ".")) / "zeros.zcache"


def _load_cache(args, cfg) -> ZeroCache:
    path = _cache_path(args, cfg)
    if not path.exists():
        raise ConfigError(f"no zero cache at {path}; run `zeros` first")
    return cache_io(path, "read")


# -- output plumbing ----------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, ExtReal):
        return float(obj)
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _emit_json(args, name: str, payload: dict) -> None:
    body = dict(payload)
    body["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    text = json.dumps(body, indent=2, sort_keys=True, default=_jsonable)
    out = getattr(args, "out", None)
    if out:
        directory = Path(out)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / f"{name}.json").write_text(text + "\n")
    print(text)


def _emit_csv(args, name: str, header, rows) -> None:
    out = getattr(args, "out", None)
    if not out:
        return
    directory = Path(out)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / f"{name}.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# -- subcommands --------------------------------------------------------

def _cmd_zeros(args, cfg):
    sec = cfg.get("zeros", {})
    to = _opt(args, sec, "to")
    if to is None:
        raise ConfigError("zeros needs --to (or [zeros] to in the config)")
    threads = int(_opt(args, cfg, "threads", 1))
    cache, report = build_cache(float(to), threads=threads)
    if not report.certified:
        raise InvariantFailure("turing-certification",
                               "; ".join(report.messages))
    path = _cache_path(args, cfg)
    path.parent.mkdir(parents=True, exist_ok=True)
    cache_io(path, "write", cache)
    return "zeros", {
        "cache": str(path),
        "cache_crc": cache.content_crc(),
        "height_hi": float(cache.height_hi),
        "zeros": len(cache.index),
        "threads": threads,
        "turing": asdict(report),
    }


def _gap_floor(spec: FamilySpec, given) -> float:
    """Window lower endpoint: gap families need padding and a reference
    height above the scan floor, so they start at 20 unless told."""
    if given is not None:
        return float(given)
    return 0.0 if spec.kind == "full" else 20.0


def _interior_top(cache: ZeroCache) -> float:
    """A height strictly between the last two cached zeros, so windows
    ending there keep one zero of padding above."""
    gam = cache.gamma_hi[-2:] + cache.gamma_lo[-2:]
    return float(0.5 * (gam[0] + gam[1]))


def _moment_rows(cache, ks, ts, spec, window_kind, lo=0.0):
    rows = []
    for k_cli in ks:
        k = -float(k_cli)  # exponent of |Z'|^2 is -k_cli, see stats
        expo = (k - 1.0) ** 2
        for t in ts:
            win = (lo, t) if window_kind == "cumulative" else (t, 2.0 * t)
            rep = discrete_moment(cache, k, win, spec)
            row = {
                "k": float(k_cli), "T": t, "J": float(rep.J),
                "normalized": float(rep.J) / (t * math.log(t) ** expo),
                "used": rep.zero_count_used,
                "excluded": rep.zero_count_excluded,
            }
            if k_cli == -1.0 and window_kind == "cumulative":
                row["gonek_ratio"] = gonek_ratio(cache, t)
            rows.append(row)
    return rows


def _cmd_moments(args, cfg):
    sec = cfg.get("moments", {})
    ks = _float_list(_opt(args, sec, "k", ""))
    ts = _float_list(_opt(args, sec, "T", ""))
    if sorted(ts) != ts:
        raise ConfigError("T grid must be increasing")
    spec = _family_spec(args, sec)
    window_kind = _opt(args, sec, "window", "cumulative")
    lo = _gap_floor(spec, _opt(args, sec, "from", None))
    cache = _load_cache(args, cfg)
    rows = _moment_rows(cache, ks, ts, spec, window_kind, lo)
    _emit_csv(args, "moments",
              ["k", "T", "J", "normalized", "used", "excluded"],
              [[r["k"], r["T"], r["J"], r["normalized"], r["used"],
                r["excluded"]] for r in rows])
    return "moments", {
        "cache_crc": cache.content_crc(),
        "family": asdict(spec),
        "window": window_kind,
        "rows": rows,
    }


def _family_spec(args, section) -> FamilySpec:
    kind = _opt(args, section, "family", "full")
    c_gap = float(_opt(args, section, "c-gap", 1.0))
    f_choice = _opt(args, section, "f-choice", "logloglog")
    try:
        return FamilySpec(kind, c_gap, f_choice)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _family_rows(cache, t, specs, lo_gap=20.0):
    rows = []
    for spec in specs:
        lo = 0.0 if spec.kind == "full" else lo_gap
        split = family_filter(cache, spec, (lo, t))
        total = len(split.included) + len(split.excluded)
        rows.append({
            "kind": spec.kind, "c_gap": spec.c_gap,
            "f_choice": spec.f_choice, "threshold": split.threshold,
            "included": len(split.included),
            "excluded": len(split.excluded),
            "fraction_excluded": len(split.excluded) / max(total, 1),
        })
    return rows


def _cmd_families(args, cfg):
    sec = cfg.get("families", {})
    cache = _load_cache(args, cfg)
    t = float(_opt(args, sec, "T", _interior_top(cache)))
    lo_gap = float(_opt(args, sec, "from", 20.0))
    if getattr(args, "family", None) or "family" in sec:
        specs = [_family_spec(args, sec)]
    else:
        specs = [FamilySpec("full"),
                 *(FamilySpec("F", c) for c in (0.25, 0.5, 1.0, 2.0)),
                 FamilySpec("F_enl")]
    rows = _family_rows(cache, t, specs, lo_gap)
    _emit_csv(args, "families",
              ["kind", "c_gap", "f_choice", "threshold", "included",
               "excluded", "fraction_excluded"],
              [[r["kind"], r["c_gap"], r["f_choice"], r["threshold"],
                r["included"], r["excluded"], r["fraction_excluded"]]
               for r in rows])
    return "families", {
        "cache_crc": cache.content_crc(), "T": t, "rows": rows,
    }


def _coeffs_by_name(name: str, x: int) -> DirichletCoefficients:
    if name == "unit":
        return DirichletCoefficients.unit(max(x, 2))
    if name == "ones":
        return DirichletCoefficients.ones(x)
    if name == "mobius":
        return DirichletCoefficients.mobius(x, sieve_tables(max(x, 2)))
    raise ConfigError(f"unknown coefficient preset {name!r}")


def _cmd_verify_mvt(args, cfg):
    sec = cfg.get("verify_mvt", {})
    x = int(_opt(args, sec, "x", 50))
    name = _opt(args, sec, "coeffs", "ones")
    cache = _load_cache(args, cfg)
    t = float(_opt(args, sec, "T", float(cache.height_hi)))
    tables = sieve_tables(max(x, 2))
    rep = mvt_check(_coeffs_by_name(name, x), t, cache, tables)
    if rep.ratio > 1.0:
        raise InvariantFailure(
            "mvt-error-budget",
            f"residual {rep.residual:.6g} exceeds budget "
            f"{rep.error_budget:.6g} (ratio {rep.ratio:.3f})")
    return "verify-mvt", {
        "cache_crc": cache.content_crc(), "x": x, "coeffs": name,
        "T": t, "report": rep.as_dict(),
    }


def _cmd_verify_lg(args, cfg):
    sec = cfg.get("verify_landau_gonek", {})
    ys = _fraction_list(_opt(args, sec, "y", "2,3,5/2"))
    if not ys:
        raise ConfigError("need at least one y")
    cache = _load_cache(args, cfg)
    t = float(_opt(args, sec, "T", float(cache.height_hi)))
    rows = []
    for y in ys:
        rep = landau_gonek_check(y, t, cache)
        if rep.ratio > 1.0:
            raise InvariantFailure(
                "landau-gonek-error-budget",
                f"y={y}: residual {rep.residual:.6g} exceeds budget "
                f"{rep.error_budget:.6g}")
        rows.append({"y": str(y), "report": rep.as_dict()})
    return "verify-landau-gonek", {
        "cache_crc": cache.content_crc(), "T": t, "rows": rows,
    }


def _cmd_kirila(args, cfg):
    sec = cfg.get("kirila", {})
    ns = _index_range(_opt(args, sec, "n", "1:100"))
    h = float(_opt(args, sec, "H", 50.0))
    cache = _load_cache(args, cfg)
    rows = []
    worst = 0.0
    for n in ns:
        rep = kirila_decomposition_check(n, cache, H=h)
        if abs(rep.discrepancy) > 10.0:
            raise InvariantFailure(
                "kirila-discrepancy",
                f"zero {n}: |D| = {abs(rep.discrepancy):.3f} > 10")
        if rep.m1_count > 5:
            raise InvariantFailure(
                "kirila-near-pairs",
                f"zero {n}: {rep.m1_count} ordinates within 1/log T")
        worst = max(worst, abs(rep.discrepancy))
        rows.append(asdict(rep))
    return "kirila", {
        "cache_crc": cache.content_crc(), "H": h,
        "max_abs_discrepancy": worst, "rows": rows,
    }


def _cmd_ladder(args, cfg):
    sec = cfg.get("ladder", {})
    k = _opt(args, sec, "k")
    eps = _opt(args, sec, "eps")
    if k is None or eps is None:
        raise ConfigError("ladder needs --k and --eps")
    delta = float(_opt(args, sec, "delta", 1.0))
    t = float(_opt(args, sec, "T", 1.0e6))
    try:
        params = make_ladder(float(k), float(eps), delta, t)
    except InfeasibleLadderError as e:
        raise InvariantFailure("ladder-feasibility", str(e)) from None
    report = validate_ladder(params)
    if not report.ok:
        first = next(c for c in report.checks if c.asserted and not c.ok)
        raise InvariantFailure("ladder-constraints",
                              f"{first.name}: value {first.value:.6g} "
                              f"exceeds bound {first.bound:.6g}")
    return "ladder", {
        "params": params.as_dict(),
        "checks": [asdict(c) for c in report.checks],
    }


def _cmd_mertens(args, cfg):
    sec = cfg.get("mertens", {})
    x = int(float(_opt(args, sec, "x", 1.0e6)))
    grid_text = _opt(args, sec, "grid")
    grid = ([int(v) for v in _float_list(grid_text)] if grid_text
            else [10 ** e for e in range(3, int(math.log10(x)) + 1)])
    if max(grid) > x:
        raise ConfigError("grid exceeds --x")
    tables = MertensTables(sieve_tables(x))
    rows = []
    for X in grid:
        rep = wmc_integral(X, tables)
        if rep.ratio is not None and rep.ratio > 0.5:
            raise InvariantFailure(
                "wmc-growth",
                f"integral/log X = {rep.ratio:.4f} > 0.5 at X={X}")
        rows.append({"X": X, "M": mertens_M(X, tables),
                     "integral": float(rep.integral), "ratio": rep.ratio})
    _emit_csv(args, "mertens", ["X", "M", "integral", "ratio"],
              [[r["X"], r["M"], r["integral"], r["ratio"]] for r in rows])
    return "mertens", {"x": x, "rows": rows}


def _cmd_report(args, cfg):
    sec = cfg.get("report", {})
    cache = _load_cache(args, cfg)
    top = float(cache.height_hi)
    t = float(_opt(args, sec, "T", top))
    if not 0.0 < t <= top:
        raise ConfigError(f"reference height {t} outside cache (0, {top}]")

    sections = {}
    sections["cache"] = {
        "height_hi": top, "zeros": len(cache.index),
        "certified": cache.certified,
    }

    ks = _float_list(_opt(args, sec, "k", "-1,1"))
    decades = [10.0 ** e for e in range(3, int(math.log10(t)) + 1)] or [t]
    grid = [g for g in decades if g <= t]
    rows = _moment_rows(cache, ks, grid, FamilySpec(), "cumulative")
    sections["moments"] = rows
    _emit_csv(args, "moments",
              ["k", "T", "J", "normalized", "used", "excluded"],
              [[r["k"], r["T"], r["J"], r["normalized"], r["used"],
                r["excluded"]] for r in rows])
    if len(grid) >= 3:
        fit = conjecture_fit(cache, 1.0, grid)
        sections["fit"] = asdict(fit)

    fam_rows = _family_rows(cache, min(t, _interior_top(cache)),
                            [FamilySpec("full"),
                             *(FamilySpec("F", c) for c in (0.5, 1.0, 2.0)),
                             FamilySpec("F_enl")])
    sections["families"] = fam_rows
    _emit_csv(args, "families",
              ["kind", "c_gap", "f_choice", "threshold", "included",
               "excluded", "fraction_excluded"],
              [[r["kind"], r["c_gap"], r["f_choice"], r["threshold"],
                r["included"], r["excluded"], r["fraction_excluded"]]
               for r in fam_rows])

    # S(t) envelope over dyadic strips, and partial zero sums by decade
    strips = []
    lo = 10.0
    while lo < t:
        hi = min(2.0 * lo, t)
        scan = s_max_scan(lo, hi, cache)
        strips.append([lo, hi, scan.max_abs_s, scan.argmax,
                       scan.ratio_to_sqrt_envelope,
                       scan.ratio_to_littlewood_envelope])
        lo = hi
    sections["s_envelope"] = [
        {"t_lo": s[0], "t_hi": s[1], "max_abs_s": s[2],
         "ratio_sqrt": s[4], "ratio_littlewood": s[5]} for s in strips]
    _emit_csv(args, "s_envelope",
              ["t_lo", "t_hi", "max_abs_s", "argmax", "ratio_sqrt",
               "ratio_littlewood"], strips)
    sections["zero_sums"] = [
        {"T": g, "partial_sum": float(zero_sum_partial(cache, g))}
        for g in grid]

    ys = _fraction_list(_opt(args, sec, "y", "2,3,5/2"))
    sections["landau_gonek"] = [
        {"y": str(y), "report": landau_gonek_check(y, t, cache).as_dict()}
        for y in ys]

    x = int(_opt(args, sec, "x", 50))
    tables = sieve_tables(max(x, 2))
    sections["mvt"] = mvt_check(
        DirichletCoefficients.ones(x), t, cache, tables).as_dict()

    for name, rep in (("mvt", sections["mvt"]),
                      *((f"lg[{row['y']}]", row["report"])
                        for row in sections["landau_gonek"])):
        if rep["ratio"] > 1.0:
            raise InvariantFailure(
                "explicit-formula-budget",
                f"{name}: ratio {rep['ratio']:.3f} > 1")

    return "report", {"cache_crc": cache.content_crc(),
                      "T": t, "sections": sections}


# -- argument wiring ----------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="zml",
        description="zero caches, moment statistics, and formula checks")
    # the shared flags parse in either position; after the subcommand
    # they must not clobber values parsed before it
    common = argparse.ArgumentParser(add_help=False)
    for parser in (top, common):
        suppress = {} if parser is top else {"default": argparse.SUPPRESS}
        parser.add_argument("--config", **suppress,
                            help="TOML config; flags override it")
        parser.add_argument("--cache", **suppress, help="zero cache path "
                            "(default $ZML_CACHE_DIR/zeros.zcache)")
        parser.add_argument("--out", **suppress,
                            help="directory for JSON/CSV artifacts")
        parser.add_argument("--threads", type=int, **suppress,
                            help="worker thread count")
    sub = top.add_subparsers(dest="command", required=True,
                             parser_class=lambda **kw: argparse.ArgumentParser(
                                 parents=[common], **kw))

    p = sub.add_parser("zeros", help="compute, certify, and persist zeros")
    p.add_argument("--to", help="isolate zeros up to this height")

    p = sub.add_parser("moments", help="discrete moments over a T grid")
    p.add_argument("--k", help="comma list; negative k for negative moments")
    p.add_argument("--T", help="comma list of heights")
    p.add_argument("--family", help="full, F, or F_enl")
    p.add_argument("--c-gap", type=float)
    p.add_argument("--f-choice")
    p.add_argument("--window", choices=("cumulative", "dyadic"))
    p.add_argument("--from", type=float,
                   help="window lower endpoint (gap families default to 20)")

    p = sub.add_parser("families", help="inclusion/exclusion statistics")
    p.add_argument("--T", type=float)
    p.add_argument("--from", type=float,
                   help="window lower endpoint for gap families")
    p.add_argument("--family")
    p.add_argument("--c-gap", type=float)
    p.add_argument("--f-choice")

    p = sub.add_parser("verify-mvt", help="discrete mean-value check")
    p.add_argument("--x", type=int)
    p.add_argument("--coeffs", help="unit, ones, or mobius")
    p.add_argument("--T", type=float)

    p = sub.add_parser("verify-landau-gonek", help="prime-power sum check")
    p.add_argument("--y", help="comma list of rationals, e.g. 2,3,5/2")
    p.add_argument("--T", type=float)

    p = sub.add_parser("kirila", help="derivative decomposition residuals")
    p.add_argument("--n", help="zero index or inclusive range lo:hi")
    p.add_argument("--H", type=float, help="pair-sum truncation window")

    p = sub.add_parser("ladder", help="build and validate a parameter ladder")
    p.add_argument("--k", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--T", type=float)

    p = sub.add_parser("mertens", help="Mertens sums and the WMC integral")
    p.add_argument("--x", type=float, help="sieve limit")
    p.add_argument("--grid", help="comma list of X values")

    p = sub.add_parser("report", help="bundle every check into one summary")
    p.add_argument("--T", type=float)
    p.add_argument("--k", help="moment k list")
    p.add_argument("--y", help="prime-power y list")
    p.add_argument("--x", type=int, help="mean-value length bound")

    return top


_DISPATCH = {
    "zeros": _cmd_zeros,
    "moments": _cmd_moments,
    "families": _cmd_families,
    "verify-mvt": _cmd_verify_mvt,
    "verify-landau-gonek": _cmd_verify_lg,
    "kirila": _cmd_kirila,
    "ladder": _cmd_ladder,
    "mertens": _cmd_mertens,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        name, payload = _DISPATCH[args.command](args, cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return _CONFIG
    except InvariantFailure as e:
        _emit_json(args, "failure", {
            "status": "failed", "invariant": e.invariant, "detail": str(e)})
        return _FAIL
    except (ValueError, RuntimeError) as e:
        _emit_json(args, "failure", {
            "status": "failed", "invariant": type(e).__name__,
            "detail": str(e)})
        return _FAIL
    payload = {"status": "ok", "command": name, **payload}
    _emit_json(args, name.replace("-", "_"), payload)
    return _OK


if __name__ == "__main__":
    sys.exit(main())
