"""Row-major versus recursive (Z-order) matrix transpose under LRU.

The recursive layout wins by an order of magnitude while the translation cache
can hold both the source and destination paths.  Once 2d + 1 exceeds the
cache, every alternation between the two matrices evicts the other path and
both layouts pay d + 1 faults per access.  The last column shows the same
workload with room for exactly two paths.
"""

from vatsim import WorkloadKind, gen, run_trace

print(f"{'dim':>5} {'d':>3} {'row W=32':>10} {'rec W=32':>10} {'ratio':>6} {'ratio W=2d+2':>13}")
for e in range(6, 10):
    n = 4 ** e
    row = gen(WorkloadKind.TRANSPOSE_ROW_MAJOR, n)
    rec = gen(WorkloadKind.TRANSPOSE_RECURSIVE, n)
    cfg = row.config(p=3, k=1, W=32)
    fr = run_trace(cfg, "LRU", row).total_faults
    fc = run_trace(cfg, "LRU", rec).total_faults
    wide = cfg.replace(W=2 * cfg.d + 2)
    ratio = run_trace(wide, "LRU", rec).total_faults / run_trace(wide, "LRU", row).total_faults
    print(f"{2 ** e:>5} {cfg.d:>3} {fr:>10} {fc:>10} {fc / fr:>6.3f} {ratio:>13.3f}")
