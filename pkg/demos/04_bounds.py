"""Measured fault counts next to the analytic bands.

Random scans should grow by about 1/k faults per access each time n doubles;
sequential scans stay under the exact per-layer page count.
"""

from vatsim import WorkloadKind, gen, run_trace
from vatsim import bounds

for e in range(12, 18, 2):
    n = 2 ** e
    t = gen(WorkloadKind.RANDOM_SCAN, n, seed=0)
    cfg = t.config(p=3, k=1, W=64)
    band = bounds.random_scan_bounds(n, cfg)
    f = run_trace(cfg, "LRU", t).total_faults
    print(f"random n=2^{e}: {band.lower:>9.0f} <= {f:>8} <= {band.upper:>9.0f}")
    s = gen(WorkloadKind.SEQUENTIAL, n)
    f = run_trace(cfg, "LRU", s).total_faults
    print(f"sequential n=2^{e}: {f} <= {bounds.seq_bound(n, cfg).upper_exact}")
