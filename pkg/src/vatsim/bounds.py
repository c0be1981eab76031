"""Closed-form cost formulas for the VAT and EM models, and the CAT trace
classifier.

Logarithm bases: ``log_K x`` is ``log2(x) / k``; ``log`` without a base is
``log2``; ``ln`` appears only in the vEB search bound.  Logarithms whose
argument is at most 1 are clamped to 0 and the result carries
``clamped=True``.  O-form bounds take an explicit ``const`` and report it.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

from .addrmodel import AddressSpaceConfig
from .errors import ConfigError, PreconditionError
from .workloads import trace_stats

__all__ = [
    "Band",
    "Bound",
    "SeqBound",
    "FunnelBound",
    "MatrixBounds",
    "MemoryHierarchyLevel",
    "CatResult",
    "MACHINE_LEVELS",
    "seq_bound",
    "random_scan_bounds",
    "binary_search_bounds",
    "heapify_bound",
    "heapsort_sorting_bound",
    "em_to_vat",
    "scan_io",
    "quicksort_io",
    "veb_search_io",
    "recursive_transpose_io",
    "veb_search_vat_bound",
    "matrix_multiply_bound",
    "transpose_row_major_estimate",
    "matrix_recursive_bound",
    "funnel_sort_bound",
    "em_random_scan_expected",
    "cat_classify",
]


class Band(NamedTuple):
    lower: float
    upper: float
    clamped: bool = False


class Bound(NamedTuple):
    value: float
    const: float = 1
    clamped: bool = False


class SeqBound(NamedTuple):
    upper_exact: int
    upper_closed: float


def _clog(x: float) -> tuple[float, bool]:
    """log2 clamped at 0, with the clamp flag."""
    if x <= 1:
        return 0.0, True
    return math.log2(x), False


def _pow2_exponent(x) -> Optional[int]:
    """Exponent e with x == 2**e for positive rationals, else None."""
    x = Fraction(x)
    if x <= 0:
        return None
    num, den = x.numerator, x.denominator
    if num & (num - 1) or den & (den - 1):
        return None
    return num.bit_length() - den.bit_length()


# -- VAT bounds for specific programs -------------------------------------------


def seq_bound(n: int, cfg: AddressSpaceConfig) -> SeqBound:
    """Fault bound for a sequential scan of ``n`` cells from a cold cache."""
    if n < 1:
        raise PreconditionError("sequential bound needs n >= 1")
    exact = 2 * cfg.d + sum(-(-n // (cfg.P * cfg.K ** i)) for i in range(cfg.d + 1))
    closed = 2 * cfg.d + cfg.K / (cfg.K - 1) * n / cfg.P
    return SeqBound(exact, closed)


def random_scan_bounds(n: int, cfg: AddressSpaceConfig) -> Band:
    """Total cost band ``[tau n log_K(n/(PW)), tau n log_K(2n/P)]``."""
    lo, c1 = _clog(n / (cfg.P * cfg.W))
    hi, c2 = _clog(2 * n / cfg.P)
    return Band(cfg.tau * n * lo / cfg.k, cfg.tau * n * hi / cfg.k, c1 or c2)


def binary_search_bounds(n: int, cfg: AddressSpaceConfig) -> Band:
    """Per-search cost band for ``n`` random binary searches in an array of
    ``n`` cells."""
    ku, c1 = _clog(2 * n / cfg.P)
    lu, c2 = _clog(2 * n * cfg.d / cfg.W)
    x, c3 = _clog(2 * n * cfg.d / (cfg.P * cfg.W))
    upper = cfg.tau * (ku / cfg.k) * lu
    lower = cfg.tau / 4 * (x / cfg.k) * x
    return Band(lower, upper, c1 or c2 or c3)


def heapify_bound(n: int, cfg: AddressSpaceConfig, const: float = 4) -> Bound:
    """``const * tau * (d + n p / P)``."""
    if n < 2:
        raise PreconditionError("heapify bound needs n >= 2")
    return Bound(const * cfg.tau * (cfg.d + n * cfg.p / cfg.P), const)


def heapsort_sorting_bound(n: int, cfg: AddressSpaceConfig) -> Bound:
    """Sorting phase: ``tau n log_K(2n/P) log(4n/W)``."""
    a, c1 = _clog(2 * n / cfg.P)
    b, c2 = _clog(4 * n / cfg.W)
    return Bound(cfg.tau * n * (a / cfg.k) * b, 1, c1 or c2)


# -- translating EM complexities into VAT bounds ---------------------------------


def em_to_vat(C: Callable, n: int, cfg: AddressSpaceConfig):
    """``sum_{i=0}^{d} C(a K^i P, K^i P, n)`` with ``a = floor(W/d)``.

    With ``d = 0`` there is a single layer and ``a = W``.  Exact when ``C``
    returns integers or Fractions.
    """
    a = cfg.W // cfg.d if cfg.d else cfg.W
    if a < 1:
        raise ConfigError(f"W={cfg.W} < d={cfg.d}: no room for a per-layer cache")
    total = 0
    for i in range(cfg.d + 1):
        B = cfg.K ** i * cfg.P
        total += C(a * B, B, n)
    return total


def scan_io(M: int, B: int, n: int) -> int:
    """Linear scan of ``n`` cells: ``2 + floor(n/B)``."""
    return 2 + n // B


def quicksort_io(M: int, B: int, n: int):
    """``(n/B) log(n/B)``, clamped at 0; a Fraction when ``n/B`` is a power
    of two."""
    r = Fraction(n, B)
    if r <= 1:
        return Fraction(0)
    e = _pow2_exponent(r)
    if e is not None:
        return r * e
    return float(r) * math.log2(float(r))


def veb_search_io(M: int, B: int, n: int):
    """``log_B n``; a Fraction when ``n`` and ``B`` are powers of two.  A
    block of one cell costs one transfer per tree level, ``log n``."""
    en, eb = _pow2_exponent(n), _pow2_exponent(B)
    if B == 1:
        return Fraction(en) if en is not None else math.log2(n)
    if en is not None and eb is not None:
        return Fraction(en, eb)
    return math.log(n) / math.log(B)


def recursive_transpose_io(M: int, B: int, n: int) -> int:
    """Transfers of an LRU cache while transposing an ``n``-element matrix
    into a second one, both in the recursive (Z-order) layout.

    One block holds everything when ``B >= 2n``.  Otherwise each source
    block maps onto at most two destination blocks, so three resident
    blocks suffice to fetch each block at most once per source block:
    ``3 ceil(n/B)``.  With fewer than three blocks every access may miss.
    """
    if B >= 2 * n:
        return 1
    if M >= 3 * B:
        return 3 * -(-n // B)
    return 2 * n


def veb_search_vat_bound(n: int, cfg: AddressSpaceConfig) -> float:
    """``log_P n + log_K n * ln(log_P(4n))`` per search."""
    if cfg.P < 2 or n <= cfg.P:
        raise PreconditionError(f"vEB bound needs P >= 2 and n > P (n={n}, P={cfg.P})")
    log_p = lambda x: math.log2(x) / cfg.p
    return log_p(n) + math.log2(n) / cfg.k * math.log(log_p(4 * n))


def _per_layer_a(cfg: AddressSpaceConfig) -> int:
    a = cfg.W // cfg.d if cfg.d else cfg.W
    if a < 1:
        raise ConfigError(f"W={cfg.W} < d={cfg.d}: a = floor(W/d) is 0")
    return a


def matrix_multiply_bound(dim: int, cfg: AddressSpaceConfig, const: float = 1) -> Bound:
    """Recursive-layout multiply of ``dim x dim`` matrices:
    ``const * K^1.5/(K^1.5 - 1) * dim^3 / (a^0.5 P^1.5)``."""
    a = _per_layer_a(cfg)
    g = cfg.K ** 1.5
    return Bound(const * cfg.tau * g / (g - 1) * dim ** 3 / (a ** 0.5 * cfg.P ** 1.5), const)


def transpose_row_major_estimate(n: int, cfg: AddressSpaceConfig) -> Bound:
    """Row-major transpose of ``n`` elements: ``tau n (d - log_K W)``."""
    lw = math.log2(cfg.W) / cfg.k
    return Bound(cfg.tau * n * max(0.0, cfg.d - lw), 1, cfg.d <= lw)


class MatrixBounds(NamedTuple):
    factor: float
    multiply: Bound
    transpose_row_major: Bound


def matrix_recursive_bound(dim: int, cfg: AddressSpaceConfig, const: float = 1) -> MatrixBounds:
    """Both matrix estimates for dimension ``dim`` (``dim**2`` elements)."""
    g = cfg.K ** 1.5
    return MatrixBounds(g / (g - 1), matrix_multiply_bound(dim, cfg, const),
                        transpose_row_major_estimate(dim * dim, cfg))


class FunnelBound(NamedTuple):
    value: float
    const: float
    tall_cache: bool
    boundary: bool  # the pass count was raised to its minimum of one


def funnel_sort_bound(n: int, item_size: int, cache_cells: int, P: int,
                      cfg: AddressSpaceConfig, const: float = 1) -> FunnelBound:
    """Funnel sort of ``n`` items of ``item_size`` cells with a cache of
    ``cache_cells`` cells: ``const * 4n/B * ceil(log(4n/M) / log(M/(4dB)))``
    where ``M = cache_cells/item_size`` and ``B = P/item_size``, with the
    tall-cache requirement ``(B log_K(2n/P))^2 <= M/4`` reported."""
    M = cache_cells / item_size
    B = P / item_size
    if B < 1:
        raise ConfigError(f"B = P/a = {B} < 1")
    denom = M / (4 * max(cfg.d, 1) * B)
    if denom <= 1:
        raise PreconditionError("funnel bound needs M > 4dB")
    passes = math.ceil(math.log2(4 * n / M) / math.log2(denom)) if 4 * n > M else 0
    boundary = passes < 1
    passes = max(passes, 1)
    lk, _ = _clog(2 * n / P)
    tall = (B * lk / cfg.k) ** 2 <= M / 4
    return FunnelBound(const * 4 * n / B * passes, const, tall, boundary)


# -- EM model of a random scan on a memory hierarchy ------------------------------


class MemoryHierarchyLevel(NamedTuple):
    size: float  # elements; math.inf for main memory
    cost: float  # time per access served by this level


# 64-bit elements on the measured machine; access times in picoseconds
MACHINE_LEVELS = (
    MemoryHierarchyLevel(32 * 2 ** 10 // 8, 4080),
    MemoryHierarchyLevel(256 * 2 ** 10 // 8, 4575),
    MemoryHierarchyLevel(12 * 2 ** 20 // 8, 9937),
    MemoryHierarchyLevel(math.inf, 38746),
)


def em_random_scan_expected(n: int, levels: Sequence[MemoryHierarchyLevel] = MACHINE_LEVELS):
    """Expected cost of a random scan of ``n`` elements:
    ``n c_{l+1} - sum_{i<=l} s_i (c_{i+1} - c_i)`` for ``s_l < n <= s_{l+1}``
    (levels numbered from 0, ``s_{-1} = 0``)."""
    if not levels:
        raise ConfigError("empty memory hierarchy")
    sizes = [lv.size for lv in levels]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError("level sizes must increase strictly")
    if n < 0 or n > sizes[-1]:
        raise PreconditionError(f"n={n} exceeds the hierarchy")
    j = 0  # level l+1 holding the array
    while n > sizes[j]:
        j += 1
    total = n * levels[j].cost
    for i in range(j):
        total -= levels[i].size * (levels[i + 1].cost - levels[i].cost)
    return total


# -- CAT classifier -------------------------------------------------------------


class CatResult(NamedTuple):
    is_cat: bool
    violated: list
    vacuous: list


CAT_CONDITIONS = ("length", "density", "monotone", "gap")


def cat_classify(trace, cfg: AddressSpaceConfig, min_len_mult: float = 1,
                 min_density: float = 1, max_gap: Optional[int] = None) -> CatResult:
    """Check a trace against the four conditions for a sequence of
    consecutive address translations.

    * length: ``|trace| >= min_len_mult * tau * d``
    * density: accesses per page over the touched page range (lowest to
      highest page) ``>= min_density * tau``
    * monotone: the page sequence never changes direction
    * gap: at most ``max_gap`` other operations between accesses; traces
      carry no other operations, so this always holds and is reported as
      vacuous
    """
    stats = trace_stats(trace, cfg)
    length = stats.accesses
    violated = []
    if length < min_len_mult * cfg.tau * cfg.d or length == 0:
        violated.append("length")
    if stats.page_span and length / stats.page_span < min_density * cfg.tau:
        violated.append("density")
    if not stats.monotone:
        violated.append("monotone")
    return CatResult(not violated, violated, ["gap"])
