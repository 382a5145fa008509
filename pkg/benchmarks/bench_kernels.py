"""Compiled vs pure-Python hot kernels.

Times flooding BP (``bp_run``) and the per-edge shortest-cycle search
(``edge_girth``) on a GF(8) EPR code, checks both backends agree, and
prints one line per kernel::

    python benchmarks/bench_kernels.py [--n 400] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from eprldpc._kernels import BACKENDS
from eprldpc.decoders.base import BPState
from eprldpc.fixtures import ordering_codes
from eprldpc.graph import TannerGraph


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_bp(m, backend: str, iters: int, repeat: int):
    rng = np.random.default_rng(0)
    llr = rng.normal(1.5, 2.0, m.n_cols)

    def run():
        st = BPState(m, llr, backend)
        st.run(iters, early_stop=False)
        return st

    return best_of(run, repeat), run().post


def bench_girth(m, backend: str, cap: int, repeat: int, n_edges: int):
    tg = TannerGraph(m)
    edges = np.stack([tg.edge_chk[:n_edges], tg.chk_var[:n_edges]], axis=1)
    return best_of(lambda: tg.edge_girth(cap, edges, backend), repeat), tg.edge_girth(cap, edges, backend)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=400, help="symbols of the GF(8) test code")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--iters", type=int, default=20, help="BP iterations per run")
    ap.add_argument("--edges", type=int, default=300, help="edges probed by edge_girth")
    args = ap.parse_args(argv)

    if "cython" not in BACKENDS:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
        return 1
    m = ordering_codes(args.n)[0].omega_e.matrix
    print(f"Omega^e: {m.n_rows} x {m.n_cols}, {m.nnz} edges")

    t_py, post_py = bench_bp(m, "python", args.iters, args.repeat)
    t_c, post_c = bench_bp(m, "cython", args.iters, args.repeat)
    same = np.allclose(post_py, post_c, atol=1e-9)
    print(f"bp_run      {args.iters} its: python {t_py * 1e3:9.1f} ms  cython {t_c * 1e3:8.1f} ms  "
          f"speedup {t_py / t_c:6.1f}x  agree={same}")

    t_py, out_py = bench_girth(m, "python", 8, args.repeat, args.edges)
    t_c, out_c = bench_girth(m, "cython", 8, args.repeat, args.edges)
    same = np.array_equal(out_py[0], out_c[0]) and np.allclose(out_py[1], out_c[1])
    print(f"edge_girth  {args.edges} edges: python {t_py * 1e3:9.1f} ms  cython {t_c * 1e3:8.1f} ms  "
          f"speedup {t_py / t_c:6.1f}x  agree={same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
