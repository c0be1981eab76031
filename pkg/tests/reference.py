"""Slow, literal reference implementations used as test oracles."""

from functools import lru_cache

from vatsim.addrmodel import NodeId, translation_path


def node_sequence(addresses, cfg):
    """Every node access of the trace, root first within each walk."""
    seq = []
    for a in addresses:
        seq.extend(translation_path(a, cfg).nodes)
    return seq


def _children(node, resident, k):
    return [c for c in node.children(k) if c in resident]


def _never_key(node):
    # among nodes never used again: deeper layer first, then larger number
    return (-node.layer, node.number)


def _next_use(seq, pos, node):
    for j in range(pos, len(seq)):
        if seq[j] == node:
            return j
    return None


def _furthest(cands, seq, pos):
    never = [c for c in cands if _next_use(seq, pos, c) is None]
    if never:
        return max(never, key=_never_key)
    return max(cands, key=lambda c: _next_use(seq, pos, c))


def simulate(addresses, cfg, policy):
    """Per-translation fault counts under ``policy``, written for clarity."""
    seq = node_sequence(addresses, cfg)
    resident = set()
    last = {}
    out = []
    pos = 0
    for a in addresses:
        path = translation_path(a, cfg).nodes
        faults = 0
        for node in path:
            pos += 1  # seq[pos:] is the future after this access
            if node not in resident:
                faults += 1
                if len(resident) >= cfg.W:
                    resident.discard(_victim(policy, resident, last, cfg, seq, pos, path))
                resident.add(node)
            last[node] = pos
        out.append(faults)
    return out


def _victim(policy, resident, last, cfg, seq, pos, path):
    if policy == "LRU":
        return min(resident, key=last.__getitem__)
    if policy == "ISLRU":
        v = min(resident, key=last.__getitem__)
        while True:
            kids = _children(v, resident, cfg.k)
            if not kids:
                return v
            assert len(kids) == 1, "the LRU node has a single resident child"
            v = kids[0]
    if policy == "MIN":
        return _furthest(resident, seq, pos)
    if policy == "ISMIN":
        cands = [r for r in resident
                 if r not in path and not _children(r, resident, cfg.k)]
        return _furthest(cands, seq, pos)
    raise ValueError(policy)


def exhaustive_min(addresses, cfg):
    """Fewest faults over every demand eviction schedule, by memoized search
    over (position, resident set)."""
    seq = tuple(node_sequence(addresses, cfg))
    W = cfg.W

    @lru_cache(maxsize=None)
    def best(i, resident):
        if i == len(seq):
            return 0
        x = seq[i]
        if x in resident:
            return best(i + 1, resident)
        if len(resident) < W:
            return 1 + best(i + 1, resident | {x})
        return 1 + min(best(i + 1, (resident - {y}) | {x}) for y in resident)

    return best(0, frozenset())


def is_parent_closed(nodes, d, k):
    nodes = set(nodes)
    if not nodes:
        return True
    if NodeId(d, 0) not in nodes:
        return False
    return all(n.layer == d or n.parent(k) in nodes for n in nodes)
