"""Translation cache (TC) simulation.

A TC stores up to ``W`` translation-tree nodes, data pages included.  Every
translation accesses the whole path root-first; a missing node is inserted
at the moment it is accessed (one fault) and a victim is evicted only when
the cache is full.  Four replacement policies are provided:

LRU
    evict the least recently accessed node.
ISLRU
    evict the lowest resident descendant of the least recently accessed
    node, which keeps the cached set parent-closed.
MIN
    Belady's clairvoyant rule over the expanded node-access sequence.
ISMIN
    the clairvoyant rule restricted to nodes that are off the current path
    and have no resident children.

Offline policies get the whole trace up front.  Among nodes that are never
used again (the only possible ties) the deeper node goes first, then the one
with the larger number.
"""

from __future__ import annotations

import enum
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .addrmodel import AddressSpaceConfig, NodeId
from .errors import AddressRangeError, ConfigError, SequencingError

__all__ = [
    "PolicyKind",
    "TranslationStats",
    "TranslationCache",
    "SimResult",
    "new_cache",
    "run_trace",
    "isp_holds",
    "node_keys",
    "as_addresses",
]

_LB = 6  # bits reserved for the layer in an encoded node key
_LMASK = (1 << _LB) - 1
NEVER = 1 << 62


class PolicyKind(enum.Enum):
    LRU = "LRU"
    ISLRU = "ISLRU"
    MIN = "MIN"
    ISMIN = "ISMIN"

    @property
    def offline(self) -> bool:
        return self in (PolicyKind.MIN, PolicyKind.ISMIN)

    @property
    def isp(self) -> bool:
        return self in (PolicyKind.ISLRU, PolicyKind.ISMIN)

    @classmethod
    def parse(cls, value) -> "PolicyKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigError(f"unknown policy {value!r}") from None


class TranslationStats(NamedTuple):
    faults: int
    highest_missing_layer: int  # -1 when the whole path was resident


def _encode(node: NodeId) -> int:
    return (node.number << _LB) | node.layer


def _decode(key: int) -> NodeId:
    return NodeId(key & _LMASK, key >> _LB)


def as_addresses(trace) -> list[int]:
    """Plain list of int addresses from a Trace or any iterable."""
    if hasattr(trace, "addresses"):
        trace = trace.addresses
    if isinstance(trace, np.ndarray):
        return trace.astype(np.int64).tolist()
    return [int(a) for a in trace]


def node_keys(addresses, cfg: AddressSpaceConfig) -> np.ndarray:
    """Encoded path keys, shape ``(len(addresses), d+1)``, root first."""
    pages = np.asarray(addresses, dtype=np.int64) >> cfg.p
    layers = np.arange(cfg.d, -1, -1, dtype=np.int64)
    numbers = pages[:, None] >> (cfg.k * layers)[None, :]
    return (numbers << _LB) | layers[None, :]


def _next_use(keys: np.ndarray) -> np.ndarray:
    """For each position of the flattened access sequence, the position of
    the next access to the same node, or NEVER."""
    flat = keys.ravel()
    order = np.argsort(flat, kind="stable")
    nxt = np.full(flat.shape, NEVER, dtype=np.int64)
    same = flat[order[1:]] == flat[order[:-1]]
    nxt[order[:-1][same]] = order[1:][same]
    return nxt


def _never_order(key: int):
    return -(key & _LMASK), key >> _LB


def _furthest(candidates, nu: dict) -> int:
    """Candidate with the furthest next use; among never-used-again nodes
    the deepest, then the highest-numbered."""
    victim = max(candidates, key=nu.__getitem__)
    if nu[victim] == NEVER:
        victim = max((c for c in candidates if nu[c] == NEVER),
                     key=_never_order)
    return victim


class TranslationCache:
    """A TC of ``cfg.W`` nodes under one replacement policy.

    ``pin_internal`` (LRU only) gives every internal node free, permanent
    residency so that only data pages compete for the ``W`` slots; this turns
    the TC into a plain page cache for comparison with the EM model.
    """

    def __init__(self, cfg: AddressSpaceConfig, policy, trace=None,
                 *, pin_internal: bool = False):
        policy = PolicyKind.parse(policy)
        if cfg.d > _LMASK:
            raise ConfigError(f"depth d={cfg.d} exceeds {_LMASK}")
        if policy.offline and trace is None:
            raise ConfigError(f"offline policy {policy.value} requires trace")
        if policy.isp and cfg.W <= cfg.d:
            raise ConfigError(
                f"{policy.value} needs W > d for the initial segment "
                f"property (W={cfg.W}, d={cfg.d})")
        if pin_internal and policy is not PolicyKind.LRU:
            raise ConfigError("pin_internal is only defined for LRU")
        self.cfg = cfg
        self.policy = policy
        self.pin_internal = pin_internal
        self.insertions = 0
        self.evictions = 0
        self._t = 0
        self._od: OrderedDict = OrderedDict()  # LRU, ISLRU
        self._nu: dict = {}  # MIN, ISMIN: key -> next use
        self._nkids: dict = {}  # ISMIN: key -> number of resident children
        self._leaves: set = set()  # ISMIN: resident nodes without resident children
        self._res = self._nu.keys() if policy.offline else self._od.keys()
        if policy.offline:
            self._addresses = as_addresses(trace)
            for a in self._addresses:
                if a < 0 or a >= cfg.size:
                    raise AddressRangeError(a, cfg.max_address)
            keys = node_keys(self._addresses, cfg)
            self._next = _next_use(keys).tolist() if len(keys) else []
        else:
            self._addresses = None
            self._next = None
        self._translate = {
            PolicyKind.LRU: self._translate_lru,
            PolicyKind.ISLRU: self._translate_islru,
            PolicyKind.MIN: self._translate_min,
            PolicyKind.ISMIN: self._translate_ismin,
        }[policy]

    # -- inspection ---------------------------------------------------------

    def _resident_keys(self):
        return self._res

    @property
    def resident(self) -> frozenset:
        return frozenset(_decode(key) for key in self._resident_keys())

    def __len__(self) -> int:
        return len(self._resident_keys())

    def __contains__(self, node: NodeId) -> bool:
        return _encode(node) in self._resident_keys()

    @property
    def position(self) -> int:
        """Number of translations performed so far."""
        return self._t

    # -- translation ----------------------------------------------------------

    def translate(self, addr: int) -> TranslationStats:
        addr = self.cfg.check(addr)
        if self._addresses is not None:
            if self._t >= len(self._addresses):
                raise SequencingError(
                    f"trace exhausted after {self._t} translations")
            if addr != self._addresses[self._t]:
                raise SequencingError(
                    f"translation {self._t}: got address {addr}, trace has "
                    f"{self._addresses[self._t]}")
        return TranslationStats(*self._step(addr))

    def _step(self, addr: int) -> tuple[int, int]:
        cfg = self.cfg
        page = addr >> cfg.p
        k = cfg.k
        if self.pin_internal:
            keys = [(page << _LB)]
        else:
            keys = [((page >> (k * l)) << _LB) | l for l in range(cfg.d, -1, -1)]
        return self._apply(keys)

    def _apply(self, keys) -> tuple[int, int]:
        # Nothing changes before the first miss of a walk, so the first
        # missing node met is the highest one missing at translation start.
        faults, hml = self._translate(keys)
        self._t += 1
        self.insertions += faults
        return faults, hml

    def _parent(self, key: int) -> int:
        return ((key >> _LB >> self.cfg.k) << _LB) | ((key & _LMASK) + 1)

    def _translate_lru(self, keys) -> int:
        od = self._od
        W = self.cfg.W
        faults = 0
        hml = -1
        for key in keys:
            if key in od:
                od.move_to_end(key)
            else:
                if not faults:
                    hml = key & _LMASK
                faults += 1
                if len(od) >= W:
                    od.popitem(last=False)
                    self.evictions += 1
                od[key] = None
        return faults, hml

    def _translate_islru(self, keys) -> tuple[int, int]:
        # The resident descendants of the least recently used node u were
        # all touched in u's last walk, right after u, and never since: they
        # directly follow u in recency order as a parent-child chain.
        od = self._od
        W = self.cfg.W
        k = self.cfg.k
        faults = 0
        hml = -1
        for key in keys:
            if key in od:
                od.move_to_end(key)
                continue
            if not faults:
                hml = key & _LMASK
            faults += 1
            if len(od) >= W:
                it = iter(od)
                victim = next(it)
                for nxt in it:
                    if ((nxt >> _LB >> k) << _LB) | ((nxt & _LMASK) + 1) != victim:
                        break
                    victim = nxt
                del od[victim]
                self.evictions += 1
            od[key] = None
        return faults, hml

    def _translate_min(self, keys) -> tuple[int, int]:
        nu = self._nu
        nxt = self._next
        W = self.cfg.W
        pos = self._t * len(keys)
        faults = 0
        hml = -1
        for key in keys:
            if key not in nu:
                if not faults:
                    hml = key & _LMASK
                faults += 1
                if len(nu) >= W:
                    del nu[_furthest(nu, nu)]
                    self.evictions += 1
            nu[key] = nxt[pos]
            pos += 1
        return faults, hml

    def _translate_ismin(self, keys) -> tuple[int, int]:
        # Under ISP the only path node that can be a childless resident
        # while a path node is missing is the missing node's parent.
        nu = self._nu
        nk = self._nkids
        leaves = self._leaves
        nxt = self._next
        W = self.cfg.W
        d = self.cfg.d
        k = self.cfg.k
        pos = self._t * len(keys)
        faults = 0
        hml = -1
        parent = None
        for key in keys:
            if key not in nu:
                if not faults:
                    hml = key & _LMASK
                faults += 1
                if len(nu) >= W:
                    if parent in leaves:
                        leaves.discard(parent)
                        victim = _furthest(leaves, nu)
                        leaves.add(parent)
                    else:
                        victim = _furthest(leaves, nu)
                    leaves.discard(victim)
                    del nu[victim]
                    del nk[victim]
                    layer = victim & _LMASK
                    if layer < d:
                        up = ((victim >> _LB >> k) << _LB) | (layer + 1)
                        nk[up] -= 1
                        if not nk[up]:
                            leaves.add(up)
                    self.evictions += 1
                nk[key] = 0
                leaves.add(key)
                if parent is not None:
                    nk[parent] += 1
                    leaves.discard(parent)
            nu[key] = nxt[pos]
            parent = key
            pos += 1
        return faults, hml

    def isp_holds(self) -> bool:
        return isp_holds(self)


def new_cache(cfg: AddressSpaceConfig, policy, trace=None,
              **kwargs) -> TranslationCache:
    return TranslationCache(cfg, policy, trace, **kwargs)


def isp_holds(cache_or_nodes, d: Optional[int] = None,
              k: Optional[int] = None) -> bool:
    """True iff the resident set is empty or a parent-closed set containing
    the root.  Accepts a TranslationCache, or a set of NodeId with ``d`` and
    ``k`` given explicitly."""
    if isinstance(cache_or_nodes, TranslationCache):
        nodes = cache_or_nodes.resident
        d, k = cache_or_nodes.cfg.d, cache_or_nodes.cfg.k
    else:
        nodes = set(cache_or_nodes)
        if d is None or k is None:
            raise TypeError("d and k are required for a bare node set")
    if not nodes:
        return True
    if NodeId(d, 0) not in nodes:
        return False
    return all(v.layer == d or v.parent(k) in nodes for v in nodes)


@dataclass
class SimResult:
    """Outcome of translating a whole trace from a cold cache."""

    cfg: AddressSpaceConfig
    policy: PolicyKind
    faults: np.ndarray  # per translation
    highest_missing: np.ndarray  # per translation, -1 if none
    evictions: int = 0
    em_block_faults: Optional[int] = None
    n: Optional[int] = None
    pinned_internal: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def total_faults(self) -> int:
        return int(self.faults.sum())

    @property
    def insertions(self) -> int:
        return self.total_faults

    @property
    def vat_cost(self):
        return self.cfg.tau * self.total_faults

    @property
    def ram_ops(self) -> int:
        return len(self.faults)

    @property
    def per_translation(self) -> list[TranslationStats]:
        return [TranslationStats(int(f), int(h))
                for f, h in zip(self.faults, self.highest_missing)]


def run_trace(cfg: AddressSpaceConfig, policy, trace, *,
              pin_internal: bool = False) -> SimResult:
    """Translate every address of ``trace`` in order from a cold cache."""
    addresses = as_addresses(trace)
    if addresses:
        lo, hi = min(addresses), max(addresses)
        if lo < 0:
            raise AddressRangeError(lo, cfg.max_address)
        if hi >= cfg.size:
            raise AddressRangeError(hi, cfg.max_address)
    cache = TranslationCache(cfg, policy, addresses, pin_internal=pin_internal)
    if pin_internal:
        rows = [[(a >> cfg.p) << _LB] for a in addresses]
    else:
        rows = node_keys(addresses, cfg).tolist() if addresses else []
    stats = np.array(list(map(cache._apply, rows)), dtype=np.int32)
    stats = stats.reshape(len(rows), 2)
    faults, highest = stats[:, 0].copy(), stats[:, 1].copy()
    return SimResult(cfg=cfg, policy=cache.policy, faults=faults,
                     highest_missing=highest, evictions=cache.evictions,
                     n=getattr(trace, "n", None), pinned_internal=pin_internal)
