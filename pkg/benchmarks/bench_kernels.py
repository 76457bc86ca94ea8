"""Time the compiled steering kernel against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py [--antennas 256] [--columns 1536] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from polarce import _steering_py
from polarce.array_channel import ArrayGeometry

try:
    from polarce import _steering as compiled
except ImportError:
    compiled = None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--antennas", type=int, default=256)
    ap.add_argument("--columns", type=int, default=1536)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    geom = ArrayGeometry(args.antennas, 0.003)
    rng = np.random.default_rng(0)
    th = rng.uniform(-1, 1, args.columns)
    u = rng.uniform(0, 1 / 3, args.columns)
    call = (geom.positions, th, u, geom.wavenumber)

    impls = {"python": _steering_py}
    if compiled is not None:
        impls["cython"] = compiled
    else:
        print("compiled extension not built; timing the fallback only")

    ref = _steering_py.steering_with_derivatives(*call)
    print(f"N={args.antennas} columns={args.columns} repeat={args.repeat}")
    print(f"{'backend':8s} {'kernel':26s} {'ms/call':>10s} {'max|diff|':>10s}")
    for name, mod in impls.items():
        for kernel in ("steering_matrix", "steering_with_derivatives"):
            fn = getattr(mod, kernel)
            t = min(timeit.repeat(lambda: fn(*call), number=1, repeat=args.repeat))
            got = fn(*call)
            if kernel == "steering_matrix":
                got, want = (got,), ref[:1]
            else:
                want = ref
            diff = max(float(np.max(np.abs(a - b))) for a, b in zip(got, want))
            print(f"{name:8s} {kernel:26s} {t * 1e3:10.3f} {diff:10.2e}")


if __name__ == "__main__":
    main()
