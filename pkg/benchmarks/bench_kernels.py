"""Time the compiled and pure-Python kernels on the same inputs.

    python benchmarks/bench_kernels.py [--assets 75] [--bins 400] [--repeat 3]
"""

import argparse
import time

import numpy as np

from fxcluster import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--assets", type=int, default=75)
    parser.add_argument("--bins", type=int, default=400)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    probs = rng.dirichlet(np.ones(args.bins), size=args.assets) * (rng.random((args.assets, args.bins)) > 0.5)
    probs[:, 0] += 1e-3
    probs = np.ascontiguousarray(probs / probs.sum(axis=1, keepdims=True))
    dist = np.sqrt(_kernels.python_backend.js_matrix(probs))

    backends = {"python": _kernels.python_backend}
    if _kernels.compiled_backend is not None:
        backends["cython"] = _kernels.compiled_backend
    else:
        print("compiled kernels not built; timing the fallback only")

    print(f"N={args.assets} bins={args.bins} (best of {args.repeat})")
    print(f"{'kernel':<22}" + "".join(f"{name:>12}" for name in backends))
    rows = [("js_matrix", lambda b: b.js_matrix(probs))]
    rows += [(f"agglomerate/{m}", lambda b, i=i: b.agglomerate(dist, i)) for i, m in enumerate(("single", "complete", "average"))]
    for label, call in rows:
        cells = [best_of(lambda b=b: call(b), args.repeat) for b in backends.values()]
        line = f"{label:<22}" + "".join(f"{t * 1e3:>10.2f}ms" for t in cells)
        if len(cells) == 2:
            line += f"   x{cells[0] / cells[1]:.1f}"
        print(line)


if __name__ == "__main__":
    main()
