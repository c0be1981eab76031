"""Command-line experiment driver.

    vatsim gen     write trace files
    vatsim run     simulate and emit one CSV row per run
    vatsim bounds  evaluate the matching closed forms, row for row with run
    vatsim verify  run the invariant suites; exit 0 iff all pass

Exit statuses: 0 success, 1 verification failure, 2 usage or configuration
error, 3 I/O error (including unreadable trace files).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import logging
import sys
from pathlib import Path
from typing import Optional

from . import bounds as bd
from .addrmodel import AddressSpaceConfig
from .errors import TraceFormatError, VatError
from .simulator import EMConfig, normalized_fault_rate, run_vat
from .tc import PolicyKind
from .traceio import read_trace, write_trace
from .verify import policy_chain, run_suite
from .workloads import Trace, WorkloadKind, gen

log = logging.getLogger("vatsim")

RUN_COLUMNS = ["workload", "n", "k", "p", "d", "W", "tau", "policy", "total_faults",
               "vat_cost", "em_block_faults", "normalized_rate", "seed"]
BOUND_COLUMNS = ["workload", "n", "k", "p", "d", "W", "tau", "policy", "seed",
                 "lower_bound", "upper_bound", "bound_name", "clamped"]

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def n_sweep(n_min: int, n_max: Optional[int], ratio: float) -> list[int]:
    """Geometric sizes ``round(n_min * ratio**i)`` up to ``n_max``."""
    if n_min < 1:
        raise UsageError("--n-min must be at least 1")
    n_max = n_min if n_max is None else n_max
    if n_max < n_min:
        raise UsageError("--n-max is below --n-min")
    if ratio <= 1 and n_max > n_min:
        raise UsageError("--n-ratio must exceed 1 for a sweep")
    sizes, i = [], 0
    while True:
        n = round(n_min * ratio ** i)
        if n > n_max:
            break
        if not sizes or n != sizes[-1]:
            sizes.append(n)
        if n_max == n_min:
            break
        i += 1
    return sizes


def _add_workload_args(ap):
    ap.add_argument("--workload", help="workload kind, e.g. RandomScan")
    ap.add_argument("--n-min", type=int, default=None)
    ap.add_argument("--n-max", type=int, default=None)
    ap.add_argument("--n-ratio", type=float, default=1.4)
    ap.add_argument("--seed", type=int, action="append", help="repeatable")
    ap.add_argument("--stride", type=int, default=None)
    ap.add_argument("--queries", type=int, default=None)
    ap.add_argument("--base", type=int, default=0)
    ap.add_argument("--element-size", type=int, default=1)
    ap.add_argument("--trace-in", action="append", default=[],
                    help="replay trace file(s) instead of generating")


def _add_config_args(ap, W_default):
    ap.add_argument("--k", type=int, nargs="+", default=[1])
    ap.add_argument("--p", type=int, nargs="+", default=[3])
    ap.add_argument("--d", type=int, nargs="+", default=None,
                    help="depth; by default the smallest covering the trace")
    ap.add_argument("--W", type=int, nargs="+", default=W_default)
    ap.add_argument("--tau", type=int, nargs="+", default=[1])


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="vatsim", description="Virtual address translation cost simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write trace files")
    _add_workload_args(g)
    g.add_argument("--out", default=".", help="output directory")
    g.add_argument("--trace-out", default=None, help="exact output path (single trace)")
    g.add_argument("--binary", action="store_true")

    for name in ("run", "bounds"):
        r = sub.add_parser(name, help=f"{name} over a parameter sweep, CSV out")
        _add_workload_args(r)
        _add_config_args(r, [64])
        r.add_argument("--policy", action="append", help="repeatable; default LRU")
        r.add_argument("--out", default="-", help="CSV path, - for stdout")
        r.add_argument("--format", choices=["csv"], default="csv")
        if name == "run":
            r.add_argument("--em", action="store_true",
                           help="also run the EM baseline with B = P, M = W*P")
            r.add_argument("--trace-out", default=None,
                           help="directory to save the simulated traces")

    v = sub.add_parser("verify", help="run the invariant suites")
    _add_config_args(v, [8, 16, 32])
    v.add_argument("--policy", action="append", help="policies whose preconditions "
                   "are checked; the chain always compares all four")
    v.add_argument("--seed", type=int, action="append")
    v.add_argument("--traces", type=int, default=200, help="random trace count")
    v.add_argument("--length", type=int, default=2000, help="accesses per trace")
    v.add_argument("--trace-in", action="append", default=[])
    return ap


# -- trace sources ---------------------------------------------------------------


def _traces(args) -> list[Trace]:
    if args.trace_in:
        return [read_trace(p) for p in args.trace_in]
    if not args.workload or args.n_min is None:
        raise UsageError("--workload and --n-min are required without --trace-in")
    kind = WorkloadKind.parse(args.workload)
    seeds = args.seed or [0]
    out = []
    for n in n_sweep(args.n_min, args.n_max, args.n_ratio):
        for seed in seeds:
            out.append(gen(kind, n, seed, args.base, args.element_size,
                           stride=args.stride, queries=args.queries))
    return out


def _name(t: Trace) -> str:
    return t.kind.value if t.kind else "external"


def _configs(args, trace: Trace):
    ds = args.d if args.d is not None else [None]
    for k, p, d, W, tau in itertools.product(args.k, args.p, ds, args.W, args.tau):
        if d is None:
            yield trace.config(p, k, W, tau)
        else:
            yield AddressSpaceConfig(p=p, k=k, d=d, W=W, tau=tau)


def _points(args):
    policies = [PolicyKind.parse(p) for p in (args.policy or ["LRU"])]
    for t in _traces(args):
        for cfg in _configs(args, t):
            if t.footprint > cfg.size:
                raise VatError(f"trace footprint {t.footprint} exceeds range of {cfg}")
            for pol in policies:
                if pol.isp and cfg.W <= cfg.d:
                    raise VatError(f"{pol.name} needs W > d (W={cfg.W}, d={cfg.d})")
                yield t, cfg, pol


def _key(row):
    return (row["workload"], row["n"], row["policy"], row["seed"],
            row["k"], row["p"], row["d"], row["W"], row["tau"])


def _base_row(t, cfg, pol):
    return {"workload": _name(t), "n": t.n, "k": cfg.k, "p": cfg.p, "d": cfg.d,
            "W": cfg.W, "tau": cfg.tau, "policy": pol.name, "seed": t.seed}


def _write_csv(rows, columns, out):
    rows = sorted(rows, key=_key)
    if out == "-":
        w = csv.DictWriter(sys.stdout, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


# -- commands ---------------------------------------------------------------------


def cmd_gen(args) -> int:
    traces = _traces(args)
    if args.trace_out:
        if len(traces) != 1:
            raise UsageError("--trace-out names one file; the sweep has several traces")
        write_trace(args.trace_out, traces[0], binary=args.binary)
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suffix = ".bin" if args.binary else ".trace"
    for t in traces:
        write_trace(out / f"{_name(t)}_n{t.n}_s{t.seed}{suffix}", t, binary=args.binary)
    return EXIT_OK


def cmd_run(args) -> int:
    rows = []
    saved = set()
    for t, cfg, pol in _points(args):
        if args.trace_out and id(t) not in saved:
            saved.add(id(t))
            Path(args.trace_out).mkdir(parents=True, exist_ok=True)
            write_trace(Path(args.trace_out) / f"{_name(t)}_n{t.n}_s{t.seed}.trace", t)
        em = EMConfig(M=cfg.W * cfg.P, B=cfg.P) if args.em else None
        r = run_vat(cfg, pol, t, em=em)
        row = _base_row(t, cfg, pol)
        row.update(total_faults=r.total_faults, vat_cost=r.vat_cost,
                   em_block_faults="" if r.em_block_faults is None else r.em_block_faults,
                   normalized_rate=(repr(normalized_fault_rate(r, t.kind, t.n))
                                    if t.kind else ""))
        rows.append(row)
    _write_csv(rows, RUN_COLUMNS, args.out)
    return EXIT_OK


def trace_bound(t: Trace, cfg: AddressSpaceConfig) -> tuple:
    """(lower, upper, name, clamped) for the workload of ``t``; missing
    sides are None."""
    n, tau, K = t.n, cfg.tau, cfg.K
    kind = t.kind
    if kind is WorkloadKind.SEQUENTIAL and t.element_size == 1:
        return None, tau * bd.seq_bound(n, cfg).upper_exact, "seq_bound", False
    if kind is WorkloadKind.JUMPING and t.params.get("stride", 0) * t.element_size >= cfg.P:
        return None, tau * (n * (1 + 1 / (K - 1)) + 2 * (cfg.d + 1)), "jumping_scan", False
    if kind is WorkloadKind.RANDOM_SCAN and t.element_size == 1:
        b = bd.random_scan_bounds(n, cfg)
        return b.lower, b.upper, "random_scan", b.clamped
    if kind is WorkloadKind.BINARY_SEARCH and t.element_size == 1:
        b = bd.binary_search_bounds(n, cfg)
        q = t.params["queries"]
        return q * b.lower, q * b.upper, "binary_search", b.clamped
    if kind is WorkloadKind.HEAPIFY and n >= 2:
        b = bd.heapify_bound(n, cfg)
        return None, b.value, f"heapify(const={b.const})", b.clamped
    if kind is WorkloadKind.HEAPSORT and n >= 2:
        h, s = bd.heapify_bound(n, cfg), bd.heapsort_sorting_bound(n, cfg)
        return None, h.value + s.value, "heapify+heapsort_sorting", s.clamped
    if kind is WorkloadKind.QUICKSORT and cfg.W >= cfg.d:
        v = tau * float(bd.em_to_vat(bd.quicksort_io, n, cfg))
        return None, v, "em_to_vat(quicksort)", False
    if kind is WorkloadKind.TRANSPOSE_ROW_MAJOR:
        b = bd.transpose_row_major_estimate(n, cfg)
        return b.value, None, "transpose_row_major", b.clamped
    if kind is WorkloadKind.TRANSPOSE_RECURSIVE and cfg.W >= cfg.d:
        v = tau * bd.em_to_vat(bd.recursive_transpose_io, n, cfg)
        return None, v, "em_to_vat(recursive_transpose)", False
    if kind is WorkloadKind.VEB_SEARCH and cfg.P >= 2 and n > cfg.P:
        v = tau * t.params["queries"] * bd.veb_search_vat_bound(n, cfg)
        return None, v, "veb_search", False
    return None, None, "none", False


def cmd_bounds(args) -> int:
    rows = []
    for t, cfg, pol in _points(args):
        lo, hi, name, clamped = trace_bound(t, cfg)
        row = _base_row(t, cfg, pol)
        row.update(lower_bound="" if lo is None else repr(float(lo)),
                   upper_bound="" if hi is None else repr(float(hi)),
                   bound_name=name, clamped=str(bool(clamped)).lower())
        rows.append(row)
    _write_csv(rows, BOUND_COLUMNS, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    policies = [PolicyKind.parse(p) for p in (args.policy or [p.name for p in PolicyKind])]
    seeds = args.seed or [0]
    ok = True
    for k, p, d, tau in itertools.product(args.k, args.p, args.d or [5], args.tau):
        cfg = AddressSpaceConfig(p=p, k=k, d=d, W=max(args.W), tau=tau)
        for pol in policies:
            for W in args.W:
                if pol.isp and W <= d:
                    raise VatError(f"{pol.name} needs W > d (W={W}, d={d})")
        for seed in seeds:
            if args.trace_in:
                traces = [read_trace(f).addresses for f in args.trace_in]
                tally = policy_chain(cfg, args.W, traces)
                checks = [("policy chain", tally.chain == 0),
                          ("LRU(W) <= 2 MIN(W/2)", tally.augmentation == 0),
                          ("ISMIN(W+d) <= MIN(W), LRU(W+d) <= ISLRU(W)",
                           tally.isp_augmented == 0),
                          ("LRU miss-layer law", tally.miss_layer == 0)]
                checks = [(name, passed, "") for name, passed in checks]
            else:
                checks = run_suite(cfg, args.W, args.traces, args.length, seed)
            for name, passed, detail in checks:
                ok &= passed
                print(f"{'PASS' if passed else 'FAIL'}  k={k} p={p} d={d} seed={seed}  "
                      f"{name}  {detail}".rstrip())
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "bounds": cmd_bounds, "verify": cmd_verify}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"vatsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"vatsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TraceFormatError, OSError) as exc:
        print(f"vatsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except VatError as exc:
        print(f"vatsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
