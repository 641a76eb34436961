"""Command-line front door: ``kloostrace verify`` and ``kloostrace compute``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on a usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from kloostrace import harness, hecke, kloosterman, special, zagier
from kloostrace.arith import SSet
from kloostrace.suites import SUITES, RunConfig, run_suite

log = logging.getLogger("kloostrace")

CONFIG_KEYS = {"suite", "s_primes", "xmax", "weight", "n", "s", "tolerance", "grid", "workers", "out"}
CSV_COLUMNS = ("id", "anchor", "pass", "expected", "observed", "abs_err", "seconds")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def parse_complex(text: str) -> complex:
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise UsageError(f"cannot parse complex number {text!r}") from exc


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(float(t)) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"cannot parse integer list {text!r}") from exc


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse rational {text!r}") from exc


def read_config(path: str) -> dict[str, str]:
    """Plain key=value lines; '#' starts a comment; keys may use '-' or '_'."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, val = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = val
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    """Config file values first, then any flag given on the command line."""
    raw: dict[str, Any] = read_config(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            raw[key] = v
    kw: dict[str, Any] = {}
    try:
        if "suite" in raw:
            kw["suite"] = str(raw["suite"])
        if "s_primes" in raw:
            kw["s_primes"] = parse_int_list(str(raw["s_primes"]))
        for key in ("xmax", "weight", "n", "workers"):
            if key in raw:
                kw[key] = int(float(raw[key]))
        if "s" in raw:
            kw["s"] = parse_complex(str(raw["s"]))
        if "tolerance" in raw:
            kw["tolerance"] = float(raw["tolerance"])
        if "grid" in raw:
            kw["grid"] = parse_int_list(str(raw["grid"]))
        if "out" in raw:
            kw["out"] = str(raw["out"])
        kw["timings"] = bool(getattr(args, "timings", False))
        return RunConfig(**kw)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Report output
# ---------------------------------------------------------------------------


def jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        return f if math.isfinite(f) else repr(f)
    if isinstance(x, (complex, np.complexfloating)):
        return f"{x.real!r}{x.imag:+.17g}i"
    if isinstance(x, Fraction):
        return str(x)
    return x if x is None or isinstance(x, str) else str(x)


def _cell(x: Any) -> str:
    x = jsonable(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (list, dict)):
        return json.dumps(x, sort_keys=True)
    return "" if x is None else str(x)


def _abs_err(expected: Any, observed: Any) -> str:
    def num(v):
        if isinstance(v, Fraction):
            return float(v)
        if isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool):
            return float(v)
        return None

    a, b = num(expected), num(observed)
    return "" if a is None or b is None else repr(abs(a - b))


def summary_csv(reports, timings: bool = False) -> str:
    """CSV summary; seconds are left blank unless timings are requested so reruns are byte-identical."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([
            r.id,
            r.anchor,
            "pass" if r.passed else "FAIL",
            _cell(r.expected),
            _cell(r.observed),
            _abs_err(r.expected, r.observed),
            f"{r.seconds:.3f}" if timings else "",
        ])
    return buf.getvalue()


def write_reports(reports, out: str | None, timings: bool) -> None:
    if out is None:
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "report.jsonl", "w") as fh:
        for r in reports:
            fh.write(json.dumps(jsonable(r.record()), sort_keys=True) + "\n")
    (d / "summary.csv").write_text(summary_csv(reports, timings))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_verify(cfg: RunConfig) -> int:
    reports = run_suite(cfg.suite, cfg)
    write_reports(reports, cfg.out, cfg.timings)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.id:22s} observed={_cell(r.observed)[:70]}  ({r.seconds:.1f}s)")
    failed = [r.id for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    return 1 if failed else 0


def _fmt(z: complex) -> str:
    return f"{z.real!r},{z.imag!r}"


def cmd_compute(obj: str, args: argparse.Namespace, cfg: RunConfig) -> int:
    S = cfg.S
    if obj == "klhat":
        if args.k is None:
            raise UsageError("klhat needs --k")
        f = args.f if args.f is not None else 1
        xi = parse_rational(args.xi or "0")
        alpha = parse_rational(args.alpha or "1")
        try:
            v = kloosterman.global_klhat_closed(S, args.k, f, xi, alpha)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        print("re,im")
        print(_fmt(v.value))
    elif obj == "zagier-l":
        sigma = parse_rational(args.sigma or "1")
        try:
            d = zagier.SquareDiscriminant.of(S, sigma)
            v = zagier.zagier_LS(S, cfg.s, d)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        print("re,im")
        print(_fmt(v.value))
    elif obj == "mellin-f":
        try:
            v = special.mellin_F(cfg.s)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        print("re,im")
        print(_fmt(v.value))
    elif obj == "v-fn":
        eps = parse_int_list(args.eps) if args.eps else (0,) * S.r
        x = float(args.x) if args.x is not None else 1.0
        try:
            v = special.V_value(args.iota, list(eps), x, S)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        print("re,im")
        print(_fmt(v.value))
    elif obj == "hecke-trace":
        try:
            r = hecke.hecke_trace(hecke.TraceQuery(cfg.weight, cfg.n, args.level))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        print("m,N,n,trace,normalized,experimental")
        print(f"{cfg.weight},{args.level},{cfg.n},{r.exact},{r.normalized!r},{r.experimental}")
    elif obj == "trace-sum":
        xmax = args.xmax if args.xmax is not None else 100_000
        if xmax > harness.TRACE_X_CAP:
            raise UsageError(f"xmax exceeds cap {harness.TRACE_X_CAP}")
        grid = cfg.grid or tuple(harness.dense_geometric_grid(max(10, xmax / 100), xmax, 6))
        grid = tuple(g for g in grid if g <= xmax)
        try:
            T = harness.trace_partial_sums(S, cfg.weight, max(grid), args.level)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        print("X,S(X)")
        for g in grid:
            print(f"{g},{float(T[g])!r}")
    else:
        raise UsageError(f"unknown object {obj}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file; flags override it")
    common.add_argument("--s-primes", dest="s_primes", help="finite primes of S, comma separated, must include 2")
    common.add_argument("--xmax", type=int)
    common.add_argument("--weight", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--s", help="complex argument, e.g. 1.5+2i")
    common.add_argument("--tolerance", type=float)
    common.add_argument("--grid", help="comma separated X values")
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="directory for report.jsonl and summary.csv")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="kloostrace", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("suite_pos", nargs="?", choices=(*SUITES, "all"), metavar="SUITE")
    v.add_argument("--suite", choices=(*SUITES, "all"))
    v.add_argument("--timings", action="store_true", help="write runtimes into the CSV summary")
    c = sub.add_parser("compute", parents=[common], help="evaluate a single object")
    c.add_argument("object", choices=("klhat", "zagier-l", "mellin-f", "v-fn", "hecke-trace", "trace-sum"))
    c.add_argument("--k", type=int)
    c.add_argument("--f", type=int)
    c.add_argument("--xi")
    c.add_argument("--alpha")
    c.add_argument("--sigma")
    c.add_argument("--iota", type=int, default=0)
    c.add_argument("--eps")
    c.add_argument("--x")
    c.add_argument("--level", type=int, default=1)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "verify":
            if args.suite is None and args.suite_pos is not None:
                args.suite = args.suite_pos
            cfg = build_config(args)
            return cmd_verify(cfg)
        args.suite = None
        cfg = build_config(args)
        return cmd_compute(args.object, args, cfg)
    except UsageError as exc:
        print(f"kloostrace: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
