"""Compare the four replacement policies on one random scan.

The offline policies (MIN, ISMIN) see the whole trace; the online ones (LRU,
ISLRU) do not.  Inclusive policies keep every resident node's parent resident,
which costs a few extra faults but lets a translation start below the root.
"""

from vatsim import gen, run_trace, WorkloadKind

trace = gen(WorkloadKind.RANDOM_SCAN, 2 ** 13, seed=0)
print(f"{'W':>4} " + " ".join(f"{p:>8}" for p in ("MIN", "ISMIN", "ISLRU", "LRU")))
for W in (16, 32, 64, 128):
    cfg = trace.config(p=3, k=1, W=W)
    faults = [run_trace(cfg, pol, trace).total_faults for pol in ("MIN", "ISMIN", "ISLRU", "LRU")]
    print(f"{W:>4} " + " ".join(f"{f:>8}" for f in faults))
