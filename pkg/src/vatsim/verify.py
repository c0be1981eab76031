"""Invariant suites: the policy inequality chain with its augmented
variants, the LRU miss-layer law, and measured-versus-bound bands."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .addrmodel import AddressSpaceConfig
from .bounds import (binary_search_bounds, heapify_bound, random_scan_bounds,
                     seq_bound)
from .errors import ConfigError
from .tc import PolicyKind, SimResult, run_trace
from .workloads import SplitMix64, WorkloadKind, gen

__all__ = ["Check", "ChainTally", "random_traces", "miss_layer_violations",
           "policy_chain", "bound_bands", "run_suite"]


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


def random_traces(count: int, n: int, cfg: AddressSpaceConfig, seed: int = 0) -> list:
    """``count`` traces of ``n`` uniform addresses over the whole range;
    trace ``i`` uses seed ``seed + i``."""
    return [SplitMix64(seed + i).below(np.full(n, cfg.size)) for i in range(count)]


def miss_layer_violations(result: SimResult) -> int:
    """Translations whose LRU fault count is not one more than the highest
    missing layer (or zero when nothing was missing)."""
    expect = np.where(result.highest_missing >= 0, result.highest_missing + 1, 0)
    return int((result.faults != expect).sum())


@dataclass
class ChainTally:
    traces: int = 0
    chain: int = 0  # MIN <= ISMIN <= ISLRU <= LRU
    augmentation: int = 0  # LRU(W) <= 2 MIN(W/2)
    isp_augmented: int = 0  # ISMIN(W+d) <= MIN(W) and LRU(W+d) <= ISLRU(W)
    miss_layer: int = 0
    translations_checked: int = 0
    examples: list = field(default_factory=list)

    def note(self, what: str, seed: int, W: int, counts: dict):
        if len(self.examples) < 5:
            self.examples.append((what, seed, W, counts))


def policy_chain(cfg: AddressSpaceConfig, Ws: Sequence[int], traces) -> ChainTally:
    """Run every policy the chain needs on every trace and count violations."""
    d = cfg.d
    for W in Ws:
        if W <= d:
            raise ConfigError(f"W={W} must exceed d={d} for the ISP policies")
    tally = ChainTally()
    for seed, trace in enumerate(traces):
        tally.traces += 1
        addrs = trace.tolist() if isinstance(trace, np.ndarray) else list(trace)
        memo = {}

        def faults(policy, W):
            key = (policy, W)
            if key not in memo:
                r = run_trace(cfg.replace(W=W), policy, addrs)
                if policy is PolicyKind.LRU:
                    tally.miss_layer += miss_layer_violations(r)
                    tally.translations_checked += r.ram_ops
                memo[key] = r.total_faults
            return memo[key]

        for W in Ws:
            c = {p.name: faults(p, W) for p in PolicyKind}
            if not c["MIN"] <= c["ISMIN"] <= c["ISLRU"] <= c["LRU"]:
                tally.chain += 1
                tally.note("chain", seed, W, c)
            if W // 2 >= 1 and c["LRU"] > 2 * faults(PolicyKind.MIN, W // 2):
                tally.augmentation += 1
                tally.note("augmentation", seed, W, c)
            if (faults(PolicyKind.ISMIN, W + d) > c["MIN"]
                    or faults(PolicyKind.LRU, W + d) > c["ISLRU"]):
                tally.isp_augmented += 1
                tally.note("isp_augmented", seed, W, c)
    return tally


def bound_bands(p: int = 3, k: int = 1, seed: int = 0, scale: int = 12) -> list[Check]:
    """Measured LRU faults against the closed forms at a small scale."""
    checks = []
    n = 1 << scale

    t = gen(WorkloadKind.SEQUENTIAL, n, seed)
    cfg = t.config(p, k, W=64)
    f = run_trace(cfg, PolicyKind.LRU, t).total_faults
    ub = seq_bound(n, cfg).upper_exact
    checks.append(Check("sequential <= upper_exact", f <= ub, f"{f} <= {ub}"))

    t = gen(WorkloadKind.RANDOM_SCAN, n, seed)
    cfg = t.config(p, k, W=64)
    f = run_trace(cfg, PolicyKind.LRU, t).total_faults
    band = random_scan_bounds(n, cfg)
    lo, hi = band.lower - n, band.upper + n
    checks.append(Check("random scan in band", lo <= f <= hi,
                        f"{lo:.0f} <= {f} <= {hi:.0f}"))

    t = gen(WorkloadKind.BINARY_SEARCH, n, seed)
    cfg = t.config(p, k, W=96)
    f = run_trace(cfg, PolicyKind.LRU, t).total_faults / n
    band = binary_search_bounds(n, cfg)
    checks.append(Check("binary search in band", band.lower / 2 <= f <= 2 * band.upper,
                        f"{band.lower / 2:.2f} <= {f:.2f} <= {2 * band.upper:.2f}"))

    t = gen(WorkloadKind.HEAPIFY, n, seed)
    probe = t.config(p, k, W=1)
    levels = math.floor(math.log2(n / probe.P) / k)
    cfg = probe.replace(W=2 * probe.d + 2 * (probe.d + 1) * levels)
    f = run_trace(cfg, PolicyKind.LRU, t).total_faults
    ub = heapify_bound(n, cfg).value
    checks.append(Check("heapify <= 4(d + n p/P)", f <= ub, f"{f} <= {ub:.0f}"))
    return checks


def run_suite(cfg: AddressSpaceConfig, Ws: Sequence[int], count: int, n: int,
              seed: int = 0) -> list[Check]:
    tally = policy_chain(cfg, Ws, random_traces(count, n, cfg, seed))
    checks = [
        Check("policy chain", tally.chain == 0, f"{tally.chain} violations"),
        Check("LRU(W) <= 2 MIN(W/2)", tally.augmentation == 0,
              f"{tally.augmentation} violations"),
        Check("ISMIN(W+d) <= MIN(W), LRU(W+d) <= ISLRU(W)", tally.isp_augmented == 0,
              f"{tally.isp_augmented} violations"),
        Check("LRU miss-layer law", tally.miss_layer == 0,
              f"{tally.miss_layer} violations in {tally.translations_checked} translations"),
    ]
    return checks + bound_bands(cfg.p, cfg.k, seed)
