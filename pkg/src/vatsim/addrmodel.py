"""Virtual address decomposition and translation-tree geometry.

Addresses are cell indices.  A configuration with page size ``P = 2**p``,
fanout ``K = 2**k`` and depth ``d`` translates the range ``[0, K**d * P)``.
The index part of an address is split into ``d`` digits of ``k`` bits each;
the walk from the root ``(d, 0)`` follows those digits down to the data page
``(0, addr // P)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .errors import AddressRangeError, ConfigError

log = logging.getLogger(__name__)

__all__ = [
    "AddressSpaceConfig",
    "NodeId",
    "TranslationPath",
    "decompose",
    "recompose",
    "translation_path",
    "path_divergence",
    "validate_order_assumptions",
]


@dataclass(frozen=True)
class AddressSpaceConfig:
    """Model parameters: page exponent ``p``, fanout exponent ``k``, depth
    ``d``, translation cache size ``W`` (nodes) and fault cost ``tau``."""

    p: int
    k: int
    d: int
    W: int
    tau: float = 1

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"fanout exponent k={self.k}: need K >= 2")
        if self.p < 0:
            raise ConfigError(f"page exponent p={self.p} is negative")
        if self.d < 0:
            raise ConfigError(f"depth d={self.d} is negative")
        if self.W < 1:
            raise ConfigError(f"cache size W={self.W}: need W >= 1")
        if self.tau < 1:
            raise ConfigError(f"fault cost tau={self.tau}: need tau >= 1")

    @property
    def P(self) -> int:
        return 1 << self.p

    @property
    def K(self) -> int:
        return 1 << self.k

    @property
    def size(self) -> int:
        """Number of translatable cells, ``K**d * P``."""
        return 1 << (self.k * self.d + self.p)

    @property
    def max_address(self) -> int:
        return self.size - 1

    @property
    def n_pages(self) -> int:
        return 1 << (self.k * self.d)

    def replace(self, **changes) -> "AddressSpaceConfig":
        fields = dict(p=self.p, k=self.k, d=self.d, W=self.W, tau=self.tau)
        fields.update(changes)
        return AddressSpaceConfig(**fields)

    @classmethod
    def for_footprint(cls, m: int, p: int, k: int, W: int, tau: float = 1):
        """Smallest depth whose tree covers ``m`` cells, i.e. the ``d`` with
        ``m/P <= K**d < K*m/P`` (which gives ``K**d <= 2m/P`` when K = 2)."""
        if m < 1:
            raise ConfigError("footprint must be at least one cell")
        pages = -(-m >> p)  # ceil(m / P)
        d = 0
        while (1 << (k * d)) < pages:
            d += 1
        return cls(p=p, k=k, d=d, W=W, tau=tau)

    def check(self, addr: int) -> int:
        addr = int(addr)
        if addr < 0 or addr >= self.size:
            raise AddressRangeError(addr, self.max_address)
        return addr


class NodeId(NamedTuple):
    """A translation-tree node; layer 0 holds the data pages."""

    layer: int
    number: int

    def parent(self, k: int) -> "NodeId":
        return NodeId(self.layer + 1, self.number >> k)

    def children(self, k: int) -> list["NodeId"]:
        if self.layer == 0:
            return []
        base = self.number << k
        return [NodeId(self.layer - 1, base + a) for a in range(1 << k)]


@dataclass(frozen=True)
class TranslationPath:
    """Nodes ``v_d, ..., v_0`` visited when translating one address."""

    nodes: tuple

    def __iter__(self) -> Iterator[NodeId]:
        return iter(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, j) -> NodeId:
        return self.nodes[j]

    @property
    def root(self) -> NodeId:
        return self.nodes[0]

    @property
    def leaf(self) -> NodeId:
        return self.nodes[-1]


def decompose(addr: int, cfg: AddressSpaceConfig) -> tuple[list[int], int]:
    """Split ``addr`` into index digits (most significant first) and the
    page offset."""
    addr = cfg.check(addr)
    offset = addr & (cfg.P - 1)
    page = addr >> cfg.p
    mask = cfg.K - 1
    segments = [(page >> (cfg.k * i)) & mask for i in range(cfg.d - 1, -1, -1)]
    return segments, offset


def recompose(segments, offset: int, cfg: AddressSpaceConfig) -> int:
    page = 0
    for x in segments:
        page = page * cfg.K + x
    return page * cfg.P + offset


def translation_path(addr: int, cfg: AddressSpaceConfig) -> TranslationPath:
    segments, _ = decompose(addr, cfg)
    node = NodeId(cfg.d, 0)
    nodes = [node]
    for x in segments:
        node = NodeId(node.layer - 1, node.number * cfg.K + x)
        nodes.append(node)
    return TranslationPath(tuple(nodes))


def path_divergence(a: int, b: int, cfg: AddressSpaceConfig) -> int:
    """Number of trailing nodes in which the translation paths of ``a`` and
    ``b`` differ.  Paths share a prefix and then split for good, so this is
    the number of layers whose node numbers differ."""
    pa = cfg.check(a) >> cfg.p
    pb = cfg.check(b) >> cfg.p
    count = 0
    for layer in range(cfg.d + 1):
        if (pa >> (cfg.k * layer)) == (pb >> (cfg.k * layer)):
            break
        count += 1
    return count


def validate_order_assumptions(cfg: AddressSpaceConfig, m: int) -> list[str]:
    """Return the order relations between model parameters that ``cfg``
    violates for a footprint of ``m`` cells; empty when all hold.

    ``W < m**theta`` has no fixed exponent, so it is only logged.
    """
    if m < 1:
        raise ConfigError("footprint m must be at least 1")
    violated = []
    td = cfg.tau * cfg.d
    if td < 1:
        violated.append("1 <= tau*d")
    if td > cfg.P:
        violated.append("tau*d <= P")
    if cfg.K < 2:
        violated.append("K >= 2")
    # m/P <= K^d <= 2m/P, compared without division
    span = cfg.n_pages * cfg.P
    if span < m:
        violated.append("m/P <= K^d")
    if span > 2 * m:
        violated.append("K^d <= 2m/P")
    if cfg.d > cfg.W:
        violated.append("d <= W")
    log.info("W < m^theta: W=%d, log_m(W)=%.3f (theta unspecified)",
             cfg.W, math.log(cfg.W) / math.log(m) if m > 1 else math.inf)
    return violated
