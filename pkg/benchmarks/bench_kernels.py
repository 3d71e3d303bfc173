#!/usr/bin/env python3
"""Time the numba kernels against their numpy fallbacks.

Covers the Feynman-Kac walk weights and the cluster labelling. Both paths
are also checked for agreement, so a speedup never hides a wrong answer.

Usage:
    python benchmarks/bench_kernels.py [--walks N] [--R R] [--repeat K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pamlab.percolation.clusters import label_clusters
from pamlab.potential.distributions import BernoulliTrap, StretchedTail
from pamlab.potential.field import sample_field
from pamlab.potential.lattice import LatticeBox
from pamlab.solver.walks import fk_weights


def best_of(fn, repeat):
    fn()  # warm-up (jit compile / cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_fk(n_walks, repeat):
    f = sample_field(StretchedTail(1.0, 0.5), LatticeBox(2, 20), 1)
    args = (f.values, f.trap, f.box.R, 20, 4.0, 5.0, np.zeros(2, dtype=np.int64), n_walks, 3)
    t_nb, w_nb = best_of(lambda: fk_weights(*args, use_numba=True), repeat)
    t_np, w_np = best_of(lambda: fk_weights(*args, use_numba=False), repeat)
    same = np.allclose(w_nb, w_np, rtol=1e-12, atol=0)
    return "fk_weights", f"{n_walks} walks, d=2, t=5", t_nb, t_np, same


def bench_clusters(R, repeat):
    f = sample_field(BernoulliTrap(0.6), LatticeBox(2, R), 2)
    t_nb, a = best_of(lambda: label_clusters(f, use_numba=True), repeat)
    t_np, b = best_of(lambda: label_clusters(f, use_numba=False), repeat)
    same = np.array_equal(a.labels, b.labels)
    return "label_clusters", f"{f.box.n_sites} sites, d=2, p=0.6", t_nb, t_np, same


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--walks", type=int, default=20_000)
    ap.add_argument("--R", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"{'kernel':<16}{'workload':<28}{'numba s':>10}{'numpy s':>10}{'speedup':>9}  agree")
    for name, work, t_nb, t_np, same in (bench_fk(args.walks, args.repeat), bench_clusters(args.R, args.repeat)):
        print(f"{name:<16}{work:<28}{t_nb:>10.4f}{t_np:>10.4f}{t_np / t_nb:>8.1f}x  {same}")


if __name__ == "__main__":
    main()
