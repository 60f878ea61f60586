"""Compare the numba kernels with the pure-numpy fallback.

Kernel timings call both implementations in-process. End-to-end timings
run each workload in a fresh interpreter with UNISTAB_NUMBA set, because
the backend is picked once at import time.

    python benchmarks/bench_kernels.py [--repeat 5] [--skip-e2e]
"""

import argparse
import itertools
import json
import os
import subprocess
import sys
import time

import numpy as np

from unistab import _kernels
from unistab.group import PointConfiguration
from unistab.numerics import DEFAULT_TOLERANCE
from unistab.stabilizer import _entry_labels, _refine


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cell24():
    # vertices of the 24-cell: permutations of (+-1, +-1, 0, 0)
    pts = set()
    for i, j in itertools.combinations(range(4), 2):
        for a, b in itertools.product((1, -1), repeat=2):
            v = [0, 0, 0, 0]
            v[i], v[j] = a, b
            pts.add(tuple(v))
    return PointConfiguration.from_points(sorted(pts))


def backtrack_inputs(p):
    labels = _entry_labels(p.gram, DEFAULT_TOLERANCE)
    colors = _refine(labels)
    sizes = np.bincount(colors)
    order = np.lexsort((np.arange(len(colors)), colors, sizes[colors]))
    cand = colors[:, None] == colors[None, :]
    return labels, cand, order


def kernel_workloads():
    rng = np.random.default_rng(0)
    # flattened 3x3 matrices, as the membership index stores them
    stack = rng.standard_normal((20000, 9)) + 1j * rng.standard_normal((20000, 9))
    target = stack[12345].copy()
    values = rng.standard_normal(4000) + 1j * rng.standard_normal(4000)
    labels, cand, order = backtrack_inputs(cell24())
    return {
        "max_entry_dist 20000x3x3": ("max_entry_dist", (stack, target)),
        "min_pairwise_gap 4000": ("min_pairwise_gap", (values,)),
        "backtrack 24-cell (1152 perms)": ("backtrack", (labels, cand, order, 10000)),
    }


E2E_SCRIPT = r"""
import json, sys, time
import numpy as np
from unistab import BACKEND, close, orbit, setwise_stabilizer, sample
k = int(sys.argv[1])
w = np.exp(2j * np.pi / k)
t0 = time.perf_counter()
g = close([np.diag([w, 1]), np.diag([1, w])], max_order=k * k + 1)
t_close = time.perf_counter() - t0
x = np.array([0.8 + 0.1j, 0.3 - 0.5j])
t0 = time.perf_counter()
res = setwise_stabilizer(orbit(g, x), cap=100000)
t_stab = time.perf_counter() - t0
t0 = time.perf_counter()
rep = sample(g, 20, 0)
t_sample = time.perf_counter() - t0
print(json.dumps({"backend": BACKEND, "order": g.order, "stab": res.order,
                  "close": t_close, "stabilizer": t_stab, "sample20": t_sample}))
"""


def run_e2e(backend, k):
    env = dict(os.environ, UNISTAB_NUMBA="1" if backend == "numba" else "0")
    out = subprocess.run([sys.executable, "-c", E2E_SCRIPT, str(k)], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--k", type=int, default=20, help="end-to-end group is C_k x C_k (order k^2)")
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args(argv)

    backends = [b for b in ("numpy", "numba") if b in _kernels.IMPLEMENTATIONS]
    print(f"kernels (best of {args.repeat}, seconds)")
    print(f"{'workload':34s}" + "".join(f"{b:>12s}" for b in backends))
    for name, (kernel, inputs) in kernel_workloads().items():
        results, row = [], []
        for b in backends:
            fn = _kernels.IMPLEMENTATIONS[b][kernel]
            results.append(fn(*inputs))  # also triggers compilation
            row.append(best_of(lambda: fn(*inputs), args.repeat))
        if kernel == "backtrack":
            assert all(np.array_equal(np.sort(r[0], axis=0), np.sort(results[0][0], axis=0)) for r in results)
        else:
            assert all(np.allclose(r, results[0]) for r in results)
        print(f"{name:34s}" + "".join(f"{t:12.5f}" for t in row))

    if args.skip_e2e:
        return 0
    print(f"\nend to end, C_{args.k} x C_{args.k} in U(2), fresh process per backend (seconds)")
    print(f"{'backend':10s}{'close':>10s}{'stabilizer':>12s}{'sample20':>10s}   orders")
    for b in backends:
        r = run_e2e(b, args.k)
        print(f"{r['backend']:10s}{r['close']:10.3f}{r['stabilizer']:12.3f}{r['sample20']:10.3f}   |G|={r['order']} |U(Gx)|={r['stab']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
