"""Time the SGL prox: compiled kernel against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--N 1000] [--G 10] [--batch 100] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from complexamp import _kernels_py

try:
    from complexamp import _kernels
except ImportError:
    _kernels = None


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--G", type=int, default=10)
    p.add_argument("--batch", type=int, default=100)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args()

    rng = np.random.default_rng(0)
    shape = (args.batch, args.N)
    r = np.ascontiguousarray((rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2))
    S = args.N // args.G
    backends = {"numpy": _kernels_py}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("compiled kernel not built; timing the fallback only")

    print(f"N={args.N} G={args.G} batch={args.batch}")
    base = None
    for name, mod in backends.items():
        t = min(timeit.repeat(lambda: mod.sgl_prox(r, S, 0.2, 0.8), number=1, repeat=args.repeat))
        base = base or t
        print(f"{name:>7}: {t * 1e3:8.3f} ms per call  ({base / t:5.1f}x)")


if __name__ == "__main__":
    main()
