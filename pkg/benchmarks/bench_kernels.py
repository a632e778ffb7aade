"""Time the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py --n 8,12,16 --count 50 --repeat 3

For each size it times spectrum enumeration, one full p=n circuit, and a
batched evaluation of ``count`` instances, then checks that both backends
agree on the batched success probabilities.
"""

import argparse
import time

import numpy as np

from fpqaoa import _kernels
from fpqaoa.encoding import FourierParams, decode
from fpqaoa.normalization import rescale
from fpqaoa.qubo import NormKind, child_seed, generate_normal


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_size(n, count, repeat, backends):
    insts = [rescale(generate_normal(n, child_seed(7, k)), NormKind.FROBENIUS) for k in range(count)]
    stack = np.stack([inst.s for inst in insts])
    sch = decode(FourierParams.sincos(2.09, -0.477), n)
    results = {}
    for name in backends:
        kb = _kernels.get_backend(name)
        costs = kb.cost_tables(stack)
        thr = costs.min(axis=1, keepdims=True) + 0.05 * np.ptp(costs, axis=1, keepdims=True)
        masks = costs <= thr
        psi0 = np.full(1 << n, 2 ** (-n / 2), dtype=np.complex128)
        # first calls compile the numba kernels; keep them out of the timings
        kb.evolve(psi0.copy(), costs[0], sch.gamma, sch.beta, n)
        kb.evaluate_batch(costs[:1], masks[:1], sch.gamma, sch.beta, n)
        t_cost = best_of(lambda: kb.cost_tables(stack), repeat)
        t_one = best_of(lambda: kb.evolve(psi0.copy(), costs[0], sch.gamma, sch.beta, n), repeat)
        t_batch = best_of(lambda: kb.evaluate_batch(costs, masks, sch.gamma, sch.beta, n), repeat)
        p, _, _ = kb.evaluate_batch(costs, masks, sch.gamma, sch.beta, n)
        results[name] = (t_cost, t_one, t_batch, p)
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", default="8,10,12,14", help="comma-separated sizes")
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--backends", default=",".join(sorted(_kernels.BACKENDS)))
    args = ap.parse_args(argv)
    sizes = [int(t) for t in args.n.split(",")]
    backends = [b.strip() for b in args.backends.split(",")]

    print(f"{'n':>3} {'backend':>8} {'spectra s':>10} {'circuit ms':>11} {'batch s':>9} {'per inst ms':>12}")
    for n in sizes:
        res = bench_size(n, args.count, args.repeat, backends)
        for name, (t_cost, t_one, t_batch, _) in res.items():
            print(f"{n:>3} {name:>8} {t_cost:>10.4f} {1e3 * t_one:>11.3f} {t_batch:>9.4f} "
                  f"{1e3 * t_batch / args.count:>12.3f}")
        if len(res) > 1:
            ps = [r[3] for r in res.values()]
            diff = max(float(np.max(np.abs(ps[0] - q))) for q in ps[1:])
            line = f"    max |P difference| across backends = {diff:.2e}"
            if {"numba", "numpy"} <= res.keys():
                line += f"; numba batch speedup over numpy {res['numpy'][2] / res['numba'][2]:.1f}x"
            print(line)


if __name__ == "__main__":
    main()
