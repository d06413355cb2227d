"""Compare the compiled and pure-Python proposal kernels.

    python3 benchmarks/bench_kernels.py [--sizes 10000 100000 1000000] [--repeat 3]

Times only the kernel calls on prebuilt CSR arrays, so instance parsing and
validation are excluded. Also checks that both backends return identical
results.
"""

from __future__ import annotations

import argparse
import time

from stalloc import _kernels, generate_instance

SHAPES = {10**4: (200, 50), 10**5: (1000, 100), 10**6: (2000, 500)}


def best_of(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=sorted(SHAPES), choices=sorted(SHAPES))
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--max-capacity", type=int, default=20)
    args = ap.parse_args()

    backends = sorted(_kernels.BACKENDS)
    print(f"backends: {', '.join(backends)} (default {_kernels.BACKEND})")
    header = f"{'edges':>9} {'kernel':>12}" + "".join(f" {b:>10}" for b in backends)
    if len(backends) > 1:
        header += f" {'speedup':>8}"
    print(header)
    for edges in args.sizes:
        nj, nm = SHAPES[edges]
        c = generate_instance(nj, nm, 5, args.max_capacity, 1.0, seed=edges).csr
        calls = {
            "reversed_gs": lambda k: k.reversed_gs(c.sizes, c.caps, c.m_ptr, c.m_adj, c.m_jrank),
            "job_gs": lambda k: k.job_gs(c.sizes, c.caps, c.m_ptr, c.m_adj, c.j_ptr, c.j_adj, c.j_mpos),
        }
        for name, call in calls.items():
            timed = {b: best_of(lambda: call(_kernels.get(b)), args.repeat) for b in backends}
            outs = {repr(o) for _, o in timed.values()}
            if len(outs) != 1:
                raise SystemExit(f"backends disagree on {name} at {edges} edges")
            row = f"{edges:>9} {name:>12}" + "".join(f" {timed[b][0] * 1e3:>8.1f}ms" for b in backends)
            if len(backends) > 1:
                row += f" {timed['python'][0] / timed['cython'][0]:>7.1f}x"
            print(row)


if __name__ == "__main__":
    main()
