"""Seeded address-trace generators for the canonical workloads.

A trace records *element indices*; the address of access ``j`` is
``base + accesses[j] * element_size``.  Reads and writes are not
distinguished.

Randomness comes from SplitMix64 used as a counter-based stream: output
``i`` (0-based) of seed ``s`` is ``mix(s + (i + 1) * 0x9E3779B97F4A7C15)``
with the standard SplitMix64 finalizer.  Bounded draws use ``u % bound``.
Every generator consumes the stream in a fixed, documented order, so traces
are reproducible bit for bit on any platform.

Heap workloads use a 1-based layout (slot 0 unused); keep ``base`` page
aligned so that siblings ``2i`` and ``2i+1`` share a page whenever P >= 2.

The vEB search tree of height ``h`` stores its top ``ceil(h/2)`` levels
first, recursively in the same layout, followed by the bottom subtrees from
left to right, each again recursively laid out.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .addrmodel import AddressSpaceConfig
from .errors import ConfigError

__all__ = [
    "SplitMix64",
    "SHIPPED_SEEDS",
    "WorkloadKind",
    "Trace",
    "TraceStats",
    "gen",
    "trace_stats",
    "ram_complexity",
    "binary_search_probes",
    "veb_positions",
    "morton",
]

GENERATOR = "splitmix64"
SHIPPED_SEEDS = (0, 1, 2, 3, 4)  # seeds used by the shipped experiments
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


class SplitMix64:
    """Counter-based SplitMix64 stream."""

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.counter = 0

    def next_u64(self, count: int) -> np.ndarray:
        i = np.arange(self.counter + 1, self.counter + 1 + count, dtype=np.uint64)
        self.counter += count
        with np.errstate(over="ignore"):
            z = np.uint64(self.seed) + i * _GAMMA
            z = (z ^ (z >> np.uint64(30))) * _M1
            z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))

    def below(self, bounds) -> np.ndarray:
        """One draw in ``[0, b)`` for every entry of ``bounds``."""
        bounds = np.asarray(bounds, dtype=np.uint64)
        return (self.next_u64(bounds.size) % bounds).astype(np.int64)


class WorkloadKind(enum.Enum):
    SEQUENTIAL = "Sequential"
    JUMPING = "Jumping"
    RANDOM_SCAN = "RandomScan"
    PERMUTE = "Permute"
    BINARY_SEARCH = "BinarySearch"
    HEAPIFY = "Heapify"
    HEAPSORT = "Heapsort"
    QUICKSORT = "Quicksort"
    TRANSPOSE_ROW_MAJOR = "MatrixTransposeRowMajor"
    TRANSPOSE_RECURSIVE = "MatrixTransposeRecursive"
    VEB_SEARCH = "VebSearch"

    @classmethod
    def parse(cls, value) -> "WorkloadKind":
        if isinstance(value, cls):
            return value
        text = str(value).replace("_", "").replace("-", "").lower()
        for kind in cls:
            if kind.value.lower() == text or kind.name.replace("_", "").lower() == text:
                return kind
        raise ConfigError(f"unknown workload {value!r}")


_NLOGN = {WorkloadKind.BINARY_SEARCH, WorkloadKind.HEAPSORT,
          WorkloadKind.QUICKSORT, WorkloadKind.VEB_SEARCH}


def ram_complexity(kind, n: int) -> float:
    """RAM operation count used to normalize fault counts: ``n`` for scans,
    permute, heapify and transposes; ``n log2 n`` for sorts and searches."""
    kind = WorkloadKind.parse(kind)
    if kind in _NLOGN:
        return n * math.log2(n) if n > 1 else 1.0
    return float(n)


@dataclass
class Trace:
    kind: Optional[WorkloadKind]  # None for traces of unknown origin
    n: int
    seed: int
    base: int
    element_size: int
    accesses: np.ndarray
    params: dict = field(default_factory=dict)
    generator: str = GENERATOR

    @property
    def addresses(self) -> np.ndarray:
        return self.base + self.accesses.astype(np.int64) * self.element_size

    @property
    def footprint(self) -> int:
        """One past the highest address touched."""
        if len(self.accesses) == 0:
            return self.base
        return self.base + (int(self.accesses.max()) + 1) * self.element_size

    def __len__(self) -> int:
        return len(self.accesses)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (self.kind == other.kind and self.n == other.n
                and self.seed == other.seed and self.base == other.base
                and self.element_size == other.element_size
                and self.params == other.params
                and self.generator == other.generator
                and np.array_equal(self.accesses, other.accesses))

    def config(self, p: int, k: int, W: int, tau: float = 1) -> AddressSpaceConfig:
        """Config whose tree just covers this trace's footprint."""
        return AddressSpaceConfig.for_footprint(max(self.footprint, 1), p, k, W, tau)


# -- generators --------------------------------------------------------------


def _permutation(rng: SplitMix64, n: int) -> np.ndarray:
    # Fisher-Yates: for i = n-1 .. 1 swap slot i with slot u_i % (i+1)
    draws = rng.below(np.arange(n, 1, -1)).tolist()
    perm = list(range(n))
    for i, j in zip(range(n - 1, 0, -1), draws):
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=np.int64)


def _permute(rng: SplitMix64, n: int) -> np.ndarray:
    j = np.arange(n - 1, -1, -1, dtype=np.int64)
    i = rng.below(j + 1)
    return np.stack([i, j], axis=1).ravel()


def binary_search_probes(n: int, target: int) -> list[int]:
    """Midpoints probed when searching position ``target`` in ``n`` sorted
    elements, stopping when the midpoint is the target."""
    lo, hi = 0, n - 1
    probes = []
    while lo <= hi:
        mid = (lo + hi) // 2
        probes.append(mid)
        if mid == target:
            break
        if target < mid:
            hi = mid - 1
        else:
            lo = mid + 1
    return probes


def _binary_searches(targets: np.ndarray, n: int) -> np.ndarray:
    # all searches advance in lock step; -1 marks finished searches
    q = len(targets)
    steps = max(1, n.bit_length())
    out = np.full((q, steps), -1, dtype=np.int64)
    lo = np.zeros(q, dtype=np.int64)
    hi = np.full(q, n - 1, dtype=np.int64)
    active = np.ones(q, dtype=bool)
    for s in range(steps):
        if not active.any():
            break
        mid = (lo + hi) // 2
        out[active, s] = mid[active]
        found = mid == targets
        left = targets < mid
        hi = np.where(active & left & ~found, mid - 1, hi)
        lo = np.where(active & ~left & ~found, mid + 1, lo)
        active &= ~found
    flat = out.ravel()
    return flat[flat >= 0]


def _sift(a: list, i: int, n: int, out: list):
    # 1-based sift-down; emits the read of slot i, both children per level,
    # the move into the vacated slot, and the final store
    z = a[i]
    out.append(i)
    while 2 * i <= n:
        c = 2 * i
        out.append(c)
        if c + 1 <= n:
            out.append(c + 1)
            if a[c + 1] < a[c]:
                c += 1
        if a[c] < z:
            a[i] = a[c]
            out.append(i)
            i = c
        else:
            break
    a[i] = z
    out.append(i)


def _heap_values(rng: SplitMix64, n: int) -> list:
    return [0] + rng.next_u64(n).tolist()


def _heapify(a: list, n: int, out: list):
    for i in range(n // 2, 0, -1):
        _sift(a, i, n, out)


def _heapsort(a: list, n: int, out: list):
    _heapify(a, n, out)
    for m in range(n, 1, -1):
        out.append(1)
        out.append(m)
        a[1], a[m] = a[m], a[1]
        _sift(a, 1, m - 1, out)


def _quicksort(rng: SplitMix64, n: int) -> np.ndarray:
    a = rng.next_u64(n).tolist()
    pivots = rng.next_u64(n).tolist()  # at most n - 1 partitions
    used = 0
    out = []
    stack = [(0, n - 1)]
    while stack:
        lo, hi = stack.pop()
        if lo >= hi:
            continue
        p = lo + pivots[used] % (hi - lo + 1)
        used += 1
        out += (p, hi)
        a[p], a[hi] = a[hi], a[p]
        pivot = a[hi]
        i = lo
        for j in range(lo, hi):
            out.append(j)
            if a[j] < pivot:
                out += (i, j)
                a[i], a[j] = a[j], a[i]
                i += 1
        out += (i, hi)
        a[i], a[hi] = a[hi], a[i]
        stack.append((i + 1, hi))
        stack.append((lo, i - 1))
    return np.array(out, dtype=np.int64)


def morton(row: np.ndarray, col: np.ndarray, bits: int) -> np.ndarray:
    """Z-order index with the row bit above the column bit at each level."""
    z = np.zeros_like(row)
    for b in range(bits):
        z |= ((row >> b) & 1) << (2 * b + 1)
        z |= ((col >> b) & 1) << (2 * b)
    return z


def _square_side(n: int) -> int:
    side = math.isqrt(n)
    if side * side != n:
        raise ConfigError(f"matrix workloads need a perfect square n, got {n}")
    return side


def _transpose_row_major(n: int) -> np.ndarray:
    side = _square_side(n)
    idx = np.arange(n, dtype=np.int64)
    r, c = idx // side, idx % side
    writes = n + c * side + r
    return np.stack([idx, writes], axis=1).ravel()


def _transpose_recursive(n: int) -> np.ndarray:
    side = _square_side(n)
    if side & (side - 1):
        raise ConfigError(
            f"recursive layout needs a power-of-two dimension, got {side}")
    bits = side.bit_length() - 1
    z = np.arange(n, dtype=np.int64)
    r = np.zeros_like(z)
    c = np.zeros_like(z)
    for b in range(bits):
        r |= ((z >> (2 * b + 1)) & 1) << b
        c |= ((z >> (2 * b)) & 1) << b
    writes = n + morton(c, r, bits)
    return np.stack([z, writes], axis=1).ravel()


@functools.lru_cache(maxsize=32)
def _veb_order(h: int) -> np.ndarray:
    """1-based BFS indices of a height-``h`` complete tree, in vEB order."""
    if h == 1:
        return np.array([1], dtype=np.int64)
    top_h = (h + 1) // 2
    bot_h = h - top_h
    top = _veb_order(top_h)
    bot = _veb_order(bot_h)
    depth = np.floor(np.log2(bot)).astype(np.int64)
    offs = bot - (np.int64(1) << depth)
    roots = np.arange(1 << top_h, 1 << (top_h + 1), dtype=np.int64)
    lower = (roots[:, None] << depth[None, :]) | offs[None, :]
    return np.concatenate([top, lower.ravel()])


def veb_positions(h: int) -> np.ndarray:
    """``pos[v]`` = storage slot of BFS node ``v`` (1-based; slot 0 unused
    in the index, slots are 0-based)."""
    order = _veb_order(h)
    pos = np.empty(len(order) + 1, dtype=np.int64)
    pos[0] = -1
    pos[order] = np.arange(len(order), dtype=np.int64)
    return pos


def _veb_search(rng: SplitMix64, n: int, q: int) -> np.ndarray:
    h = max(1, n.bit_length())  # complete tree with 2^h - 1 >= n slots
    pos = veb_positions(h)
    targets = rng.below(np.full(q, n))
    size = (1 << h) - 1
    steps = h
    out = np.full((q, steps), -1, dtype=np.int64)
    lo = np.zeros(q, dtype=np.int64)
    hi = np.full(q, size - 1, dtype=np.int64)
    v = np.ones(q, dtype=np.int64)
    active = np.ones(q, dtype=bool)
    for s in range(steps):
        mid = (lo + hi) // 2
        out[active, s] = pos[v[active]]
        found = mid == targets
        left = targets < mid
        go = active & ~found
        hi = np.where(go & left, mid - 1, hi)
        lo = np.where(go & ~left, mid + 1, lo)
        v = np.where(go, 2 * v + (~left).astype(np.int64), v)
        active = go
    flat = out.ravel()
    return flat[flat >= 0]


def gen(kind, n: int, seed: int = 0, base: int = 0, element_size: int = 1,
        *, stride: Optional[int] = None, queries: Optional[int] = None) -> Trace:
    """Generate the access trace of workload ``kind`` on problem size ``n``.

    ``stride`` is required for Jumping; ``queries`` defaults to ``n`` for the
    search workloads.  Matrix workloads take ``n`` = number of elements of
    one matrix; the transposed copy follows it in memory.
    """
    kind = WorkloadKind.parse(kind)
    n = int(n)
    if n < 1:
        raise ConfigError("problem size n must be at least 1")
    if element_size < 1:
        raise ConfigError("element_size must be at least 1")
    if base < 0:
        raise ConfigError("base must be nonnegative")
    rng = SplitMix64(seed)
    params = {}
    if kind is WorkloadKind.SEQUENTIAL:
        acc = np.arange(n, dtype=np.int64)
    elif kind is WorkloadKind.JUMPING:
        if stride is None or stride < 1:
            raise ConfigError("Jumping needs a positive stride")
        params["stride"] = int(stride)
        acc = np.arange(n, dtype=np.int64) * stride
    elif kind is WorkloadKind.RANDOM_SCAN:
        acc = _permutation(rng, n)
    elif kind is WorkloadKind.PERMUTE:
        acc = _permute(rng, n)
    elif kind in (WorkloadKind.BINARY_SEARCH, WorkloadKind.VEB_SEARCH):
        q = n if queries is None else int(queries)
        if q < 1:
            raise ConfigError("queries must be positive")
        params["queries"] = q
        if kind is WorkloadKind.BINARY_SEARCH:
            acc = _binary_searches(rng.below(np.full(q, n)), n)
        else:
            acc = _veb_search(rng, n, q)
    elif kind in (WorkloadKind.HEAPIFY, WorkloadKind.HEAPSORT):
        a = _heap_values(rng, n)
        out: list = []
        (_heapify if kind is WorkloadKind.HEAPIFY else _heapsort)(a, n, out)
        acc = np.array(out, dtype=np.int64)
    elif kind is WorkloadKind.QUICKSORT:
        acc = _quicksort(rng, n)
    elif kind is WorkloadKind.TRANSPOSE_ROW_MAJOR:
        acc = _transpose_row_major(n)
    else:
        acc = _transpose_recursive(n)
    return Trace(kind=kind, n=n, seed=int(seed), base=int(base),
                 element_size=int(element_size), accesses=acc, params=params)


# -- statistics ----------------------------------------------------------------


class TraceStats(NamedTuple):
    pages_touched: int
    mean_accesses_per_page: float
    monotone: bool
    max_gap: int  # largest page distance between consecutive accesses
    page_span: int  # pages from the lowest to the highest touched, inclusive
    accesses: int


def _pages(trace, cfg: AddressSpaceConfig) -> np.ndarray:
    addrs = trace.addresses if hasattr(trace, "addresses") else np.asarray(trace)
    return np.asarray(addrs, dtype=np.int64) >> cfg.p


def trace_stats(trace, cfg: AddressSpaceConfig) -> TraceStats:
    pages = _pages(trace, cfg)
    if len(pages) == 0:
        return TraceStats(0, 0.0, True, 0, 0, 0)
    touched = len(np.unique(pages))
    steps = np.diff(pages)
    monotone = bool((steps >= 0).all() or (steps <= 0).all())
    max_gap = int(np.abs(steps).max()) if len(steps) else 0
    span = int(pages.max() - pages.min()) + 1
    return TraceStats(touched, len(pages) / touched, monotone, max_gap, span,
                      len(pages))
