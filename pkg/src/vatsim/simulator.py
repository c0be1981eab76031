"""End-to-end runs: VAT simulation, the EM block-cache baseline, nested
(guest over host) translation, and derived metrics."""

from __future__ import annotations

from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional

import numpy as np

from .addrmodel import AddressSpaceConfig
from .errors import ConfigError
from .tc import SimResult, as_addresses, node_keys, run_trace, _LB, _LMASK
from .workloads import ram_complexity

__all__ = [
    "EMConfig",
    "NestedResult",
    "run_vat",
    "run_em",
    "run_nested_vat",
    "guest_node_addresses",
    "normalized_fault_rate",
    "sweep",
]


@dataclass(frozen=True)
class EMConfig:
    """External-memory cache of ``M`` cells in blocks of ``B`` cells."""

    M: int
    B: int

    def __post_init__(self):
        if self.B < 1:
            raise ConfigError(f"block size B={self.B}: need B >= 1")
        if self.M < self.B:
            raise ConfigError(f"cache size M={self.M} smaller than block size B={self.B}")

    @property
    def blocks(self) -> int:
        return self.M // self.B


def run_em(emcfg: EMConfig, trace) -> int:
    """Misses of a cold, fully associative LRU cache of ``M // B`` blocks."""
    addrs = np.asarray(as_addresses(trace), dtype=np.int64)
    cache: OrderedDict = OrderedDict()
    cap = emcfg.blocks
    misses = 0
    for b in (addrs // emcfg.B).tolist():
        if b in cache:
            cache.move_to_end(b)
            continue
        misses += 1
        if len(cache) >= cap:
            cache.popitem(last=False)
        cache[b] = None
    return misses


def run_vat(cfg: AddressSpaceConfig, policy, trace, *, pin_internal: bool = False,
            em: Optional[EMConfig] = None) -> SimResult:
    """VAT run of ``trace``; with ``em`` the EM baseline is attached too."""
    result = run_trace(cfg, policy, trace, pin_internal=pin_internal)
    if em is not None:
        result.em_block_faults = run_em(em, trace)
    kind = getattr(trace, "kind", None)
    if kind is not None:
        result.extra["workload"] = kind.value
    return result


class NestedResult(NamedTuple):
    guest: SimResult
    host: SimResult
    combined_cost: float


def guest_node_addresses(addresses, guest: AddressSpaceConfig) -> np.ndarray:
    """Host virtual addresses touched by the guest walks, root first.

    Guest nodes are stored contiguously by rank: all layer-0 pages first, then
    layer 1, and so on up to the root, each occupying ``P`` host cells.  An
    internal node is touched at the entry selecting the next digit; a data
    page at the accessed offset.
    """
    addrs = np.asarray(addresses, dtype=np.int64)
    keys = node_keys(addrs, guest)  # (N, d+1), root first
    layers = keys & _LMASK
    numbers = keys >> _LB
    offsets = np.zeros(guest.d + 2, dtype=np.int64)
    for layer in range(guest.d + 1):
        offsets[layer + 1] = offsets[layer] + (1 << (guest.k * (guest.d - layer)))
    rank = offsets[layers] + numbers
    pages = addrs >> guest.p
    entry = np.empty_like(keys)
    entry[:, -1] = addrs & (guest.P - 1)
    for col in range(guest.d):
        layer = guest.d - col
        digit = (pages >> (guest.k * (layer - 1))) & (guest.K - 1)
        entry[:, col] = (digit * guest.P) >> guest.k
    return (rank * guest.P + entry).ravel()


def guest_table_cells(guest: AddressSpaceConfig) -> int:
    nodes = sum(1 << (guest.k * i) for i in range(guest.d + 1))
    return nodes * guest.P


def run_nested_vat(guest_cfg: AddressSpaceConfig, host_cfg: AddressSpaceConfig,
                   guest_policy, host_policy, trace) -> NestedResult:
    """Two-level translation: every guest node access, hit or miss, is itself
    a host translation of that node's host address."""
    need = guest_table_cells(guest_cfg)
    if need > host_cfg.size:
        raise ConfigError(
            f"host range {host_cfg.size} cells cannot hold guest tables of {need} cells")
    addresses = as_addresses(trace)
    guest = run_trace(guest_cfg, guest_policy, addresses)
    host = run_trace(host_cfg, host_policy, guest_node_addresses(addresses, guest_cfg))
    return NestedResult(guest, host, guest.vat_cost + host.vat_cost)


def normalized_fault_rate(result: SimResult, kind, n: Optional[int] = None) -> float:
    """Total faults divided by the workload's RAM complexity at ``n``."""
    n = result.n if n is None else n
    if n is None:
        raise ConfigError("problem size n unknown for this result")
    return result.total_faults / ram_complexity(kind, n)


def sweep(func: Callable, params: Iterable[tuple], max_workers: int = 1) -> list:
    """Evaluate ``func(*param)`` for every parameter tuple and return
    ``(param, result)`` pairs ordered by parameter, whatever the completion
    order.  ``func`` must be picklable when ``max_workers > 1``."""
    params = sorted(params)
    if max_workers <= 1:
        results = [func(*p) for p in params]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(func, *zip(*params))) if params else []
    return list(zip(params, results))
