import math

import numpy as np
import pytest

from vatsim.addrmodel import AddressSpaceConfig
from vatsim.errors import ConfigError
from vatsim.workloads import (SplitMix64, WorkloadKind, binary_search_probes, gen,
                              morton, ram_complexity, trace_stats, veb_positions)

W = WorkloadKind


def splitmix64_scalar(seed, count):
    """Textbook sequential SplitMix64."""
    mask = (1 << 64) - 1
    state, out = seed, []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out


class TestGenerator:
    def test_matches_sequential_reference(self):
        rng = SplitMix64(1234567)
        assert rng.next_u64(5).tolist() + rng.next_u64(3).tolist() == \
            splitmix64_scalar(1234567, 8)

    def test_known_value(self):
        # first output for seed 0, widely published
        assert SplitMix64(0).next_u64(1)[0] == 0xE220A8397B1DCDAF

    def test_below(self):
        draws = SplitMix64(9).below(np.arange(1, 200))
        assert (draws >= 0).all() and (draws < np.arange(1, 200)).all()


class TestExamples:
    def test_sequential(self):
        assert gen(W.SEQUENTIAL, 4).accesses.tolist() == [0, 1, 2, 3]

    def test_jumping(self):
        assert gen(W.JUMPING, 3, stride=4).accesses.tolist() == [0, 4, 8]

    def test_binary_search_target_five(self):
        assert binary_search_probes(7, 5) == [3, 5]
        # seed 14 draws target 5 for n = 7
        assert gen(W.BINARY_SEARCH, 7, seed=14, queries=1).accesses.tolist() == [3, 5]

    def test_addresses_use_base_and_element_size(self):
        t = gen(W.SEQUENTIAL, 3, base=64, element_size=8)
        assert t.addresses.tolist() == [64, 72, 80]
        assert t.footprint == 88


class TestDeterminism:
    @pytest.mark.parametrize("kind", list(W))
    def test_same_seed_same_trace(self, kind):
        kw = dict(stride=3) if kind is W.JUMPING else {}
        n = 64
        a, b = gen(kind, n, seed=5, **kw), gen(kind, n, seed=5, **kw)
        assert a == b and len(a) > 0

    def test_different_seed_differs(self):
        assert gen(W.RANDOM_SCAN, 256, seed=1) != gen(W.RANDOM_SCAN, 256, seed=2)


class TestPatterns:
    def test_random_scan_is_permutation(self):
        t = gen(W.RANDOM_SCAN, 1000, seed=3)
        assert sorted(t.accesses.tolist()) == list(range(1000))

    def test_permute_pattern(self):
        acc = gen(W.PERMUTE, 50, seed=4).accesses.reshape(-1, 2)
        assert acc[:, 1].tolist() == list(range(49, -1, -1))
        assert ((acc[:, 0] >= 0) & (acc[:, 0] <= acc[:, 1])).all()

    def test_binary_search_probe_count(self):
        for n in (1, 2, 7, 100, 1023, 1024):
            limit = math.ceil(math.log2(n + 1))
            for target in range(n):
                probes = binary_search_probes(n, target)
                assert probes[-1] == target and len(probes) <= limit

    def test_vectorized_binary_search_matches_scalar(self):
        n, q = 1000, 300
        t = gen(W.BINARY_SEARCH, n, seed=8, queries=q)
        targets = SplitMix64(8).below(np.full(q, n)).tolist()
        expect = [p for x in targets for p in binary_search_probes(n, x)]
        assert t.accesses.tolist() == expect

    @pytest.mark.parametrize("n", [2, 3, 10, 1000, 4097])
    def test_heapify_length_and_child_rule(self, n):
        acc = gen(W.HEAPIFY, n, seed=1).accesses.tolist()
        assert len(acc) <= 6 * n
        assert all(1 <= a <= n for a in acc)
        self._check_sift_child_rule(acc, n)

    @staticmethod
    def _check_sift_child_rule(acc, n):
        # parse the trace as sift(i) for i = n//2 .. 1: read i, then per level
        # probe 2i and 2i+1, and either move into i and descend or store at i
        pos = 0
        for start in range(n // 2, 0, -1):
            assert acc[pos] == start
            pos += 1
            i = start
            while 2 * i <= n:
                assert acc[pos] == 2 * i
                pos += 1
                if 2 * i + 1 <= n:
                    assert acc[pos] == 2 * i + 1
                    pos += 1
                assert acc[pos] == i
                pos += 1
                nxt = acc[pos] if pos < len(acc) else None
                moved = [c for c in (2 * i, 2 * i + 1) if c <= n
                         and nxt == (2 * c if 2 * c <= n else c)]
                if not moved:
                    break
                i = moved[0]
            else:
                assert acc[pos] == i
                pos += 1
        assert pos == len(acc)

    def test_heapify_produces_a_heap(self):
        # replay the recorded pattern on the same data
        from vatsim.workloads import _heap_values, _heapify
        n = 500
        a = _heap_values(SplitMix64(2), n)
        out = []
        _heapify(a, n, out)
        assert all(a[i // 2] <= a[i] for i in range(2, n + 1))
        assert out == gen(W.HEAPIFY, n, seed=2).accesses.tolist()

    def test_heapsort_extends_heapify(self):
        n = 300
        h = gen(W.HEAPIFY, n, seed=6).accesses.tolist()
        s = gen(W.HEAPSORT, n, seed=6).accesses.tolist()
        assert s[:len(h)] == h and len(s) > len(h)

    def test_heapsort_sorts(self):
        from vatsim.workloads import _heap_values, _heapsort
        n = 200
        a = _heap_values(SplitMix64(1), n)
        expect = sorted(a[1:], reverse=True)  # min-heap sorts descending
        _heapsort(a, n, [])
        assert a[1:] == expect

    def test_quicksort_in_range_and_n_log_n(self):
        n = 2000
        acc = gen(W.QUICKSORT, n, seed=3).accesses
        assert acc.min() >= 0 and acc.max() < n
        assert n * math.log2(n) / 2 < len(acc) < 6 * n * math.log2(n)

    @pytest.mark.parametrize("kind", [W.TRANSPOSE_ROW_MAJOR, W.TRANSPOSE_RECURSIVE])
    def test_transposes_touch_2n_cells(self, kind):
        n = 64 * 64
        acc = gen(kind, n).accesses
        assert len(np.unique(acc)) == 2 * n == len(acc)
        assert acc[0::2].max() < n <= acc[1::2].min()

    def test_row_major_write_stride(self):
        acc = gen(W.TRANSPOSE_ROW_MAJOR, 16 * 16).accesses
        assert (np.diff(acc[1::2][:15]) == 16).all()

    def test_recursive_transpose_is_a_transpose(self):
        side = 16
        acc = gen(W.TRANSPOSE_RECURSIVE, side * side).accesses.reshape(-1, 2)
        r = np.arange(side).repeat(side)
        c = np.tile(np.arange(side), side)
        src = dict(zip(morton(r, c, 4).tolist(), zip(r.tolist(), c.tolist())))
        dst = dict(zip((side * side + morton(r, c, 4)).tolist(), zip(r.tolist(), c.tolist())))
        for s, d in acc.tolist():
            (i, j), (x, y) = src[s], dst[d]
            assert (x, y) == (j, i)

    def test_matrix_needs_square(self):
        with pytest.raises(ConfigError):
            gen(W.TRANSPOSE_ROW_MAJOR, 15)
        with pytest.raises(ConfigError):
            gen(W.TRANSPOSE_RECURSIVE, 36)

    def test_zero_n(self):
        with pytest.raises(ConfigError):
            gen(W.SEQUENTIAL, 0)


class TestVebLayout:
    def test_small_layouts(self):
        assert veb_positions(3)[1:].tolist() == list(range(7))
        # height 4: top tree {1,2,3}, then subtrees rooted at 4, 5, 6, 7
        order = [1, 2, 3, 4, 8, 9, 5, 10, 11, 6, 12, 13, 7, 14, 15]
        pos = veb_positions(4)
        assert [int(np.where(pos == s)[0][0]) for s in range(15)] == order

    def test_positions_are_a_permutation(self):
        pos = veb_positions(11)[1:]
        assert sorted(pos.tolist()) == list(range(2 ** 11 - 1))

    def test_search_follows_bst_order(self):
        h = 5
        pos = veb_positions(h)
        inv = {int(p): v for v, p in enumerate(pos) if v}
        t = gen(W.VEB_SEARCH, 31, seed=4, queries=40)
        nodes = [inv[a] for a in t.accesses.tolist()]
        assert nodes[0] == 1
        for a, b in zip(nodes, nodes[1:]):
            assert b in (2 * a, 2 * a + 1) or b == 1


class TestStats:
    def test_sequential(self):
        s = trace_stats(gen(W.SEQUENTIAL, 16), AddressSpaceConfig(p=2, k=1, d=2, W=4))
        assert (s.pages_touched, s.mean_accesses_per_page, s.monotone) == (4, 4.0, True)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_scan_not_monotone(self, seed):
        s = trace_stats(gen(W.RANDOM_SCAN, 16, seed=seed), AddressSpaceConfig(p=2, k=1, d=2, W=4))
        assert not s.monotone

    def test_jumping_one_per_page(self):
        c = AddressSpaceConfig(p=2, k=1, d=3, W=4)
        s = trace_stats(gen(W.JUMPING, 8, stride=c.P), c)
        assert (s.mean_accesses_per_page, s.monotone, s.max_gap) == (1.0, True, 1)


def test_ram_complexity():
    assert ram_complexity(W.SEQUENTIAL, 1024) == 1024
    assert ram_complexity("Quicksort", 1024) == 10240
