"""Two traces that look the same to a block cache but not to address translation.

Both touch every page exactly once.  The jumping scan walks pages in order, so
consecutive translations share all but the bottom of their paths.  The random
scan visits pages in a shuffled order and pays for a fresh upper path almost
every time.  An external-memory cache with page-sized blocks sees one miss per
access in both.
"""

from vatsim import EMConfig, WorkloadKind, gen, run_em, run_trace

n, p, W = 2 ** 15, 3, 64
P = 2 ** p
jump = gen(WorkloadKind.JUMPING, n, stride=P)
rand = gen(WorkloadKind.RANDOM_SCAN, n, seed=0, element_size=P)
cfg = jump.config(p=p, k=1, W=W)
em = EMConfig(M=W * P, B=P)
for name, t in (("jumping", jump), ("random", rand)):
    r = run_trace(cfg, "LRU", t)
    print(f"{name:>8}: {r.total_faults:>8} translation faults "
          f"({r.total_faults / n:.2f} per access), {run_em(em, t):>6} block misses")
