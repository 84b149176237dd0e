"""Compare the compiled and pure-Python difference-bound kernels.

Runs the same random workload (incremental edge insertions, copies and
meets) against both classes, then times one end-to-end verification with
each kernel selected through CPVERIFY_PURE.

    python3 benchmarks/bench_dbm.py [--nodes 40] [--edges 4000] [--repeat 3]
"""
import argparse
import os
import random
import subprocess
import sys
import time

from cpverify.solver import _dbm_py

try:
    from cpverify.solver import _dbm_ext
except ImportError:
    _dbm_ext = None


def workload(cls, nodes, edges, seed):
    rng = random.Random(seed)
    d = cls(nodes)
    snapshots = []
    failures = 0
    for step in range(edges):
        i, j = rng.randrange(nodes), rng.randrange(nodes)
        if i == j:
            continue
        if d.add_edge(i, j, rng.randint(-3, 40)) < 0:
            failures += 1
            d = snapshots[-1].copy() if snapshots else cls(nodes)
        if step % 50 == 0:
            snapshots.append(d.copy())
        if step % 200 == 199 and len(snapshots) > 1:
            other = snapshots[-2].copy()
            if other.meet_with(d) < 0:
                failures += 1
            else:
                d = other
    return failures, [d.get(0, k) for k in range(nodes)]


def time_kernel(cls, args):
    best = float("inf")
    out = None
    for _ in range(args.repeat):
        t = time.perf_counter()
        out = workload(cls, args.nodes, args.edges, args.seed)
        best = min(best, time.perf_counter() - t)
    return best, out


def end_to_end(pure: bool) -> float:
    env = dict(os.environ, CPVERIFY_PURE="1" if pure else "0")
    cmd = [sys.executable, "-m", "cpverify", "verify", "binary_search.cpv", "--param", "N=16"]
    t = time.perf_counter()
    subprocess.run(cmd, env=env, check=True, stdout=subprocess.DEVNULL)
    return time.perf_counter() - t


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=40)
    ap.add_argument("--edges", type=int, default=4000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    t_py, out_py = time_kernel(_dbm_py.DBM, args)
    print(f"python kernel:   {t_py * 1000:9.1f} ms")
    if _dbm_ext is None:
        print("compiled kernel: not built")
        return
    t_c, out_c = time_kernel(_dbm_ext.DBM, args)
    print(f"compiled kernel: {t_c * 1000:9.1f} ms  ({t_py / t_c:.1f}x)")
    print("same results:", out_py == out_c)
    print(f"verify binary_search N=16, python:   {end_to_end(True):.2f} s")
    print(f"verify binary_search N=16, compiled: {end_to_end(False):.2f} s")


if __name__ == "__main__":
    main()
