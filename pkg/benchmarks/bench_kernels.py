"""Compare the compiled and pure-Python kernel backends.

Run with ``python3 benchmarks/bench_kernels.py``. Each case calls the backend
module directly so both are timed in the same process.
"""
import argparse
import math
import timeit

import numpy as np

from gridsim import _pykernels, pv

try:
    from gridsim import _ckernels
except ImportError:
    _ckernels = None


def cases():
    params = pv.load_pv_params()
    g, t = 800.0, 315.0
    model = pv._model(params, g, t)
    volts = np.linspace(0.0, 30.0, 200)
    inv = (0.0, 1e-5, 2000, 1.0, 1 / (100 * math.pi), 100 * math.pi, 330.0, 0.05, 311.0, 0.0)

    def iv_scan(mod):
        return lambda: mod.pv_solve_many(volts, *model, 1e-9, 100)

    def tracking(mod):
        def run():
            i = 0.0
            for _ in range(20):
                i = mod.rl_period(i, *inv[1:])[0]
        return run

    return [("I-V scan, 200 points", iv_scan), ("RL circuit, 20 periods", tracking)]


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"{'case':<26}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, make in cases():
        t_py = best_of(make(_pykernels), args.repeat, args.number)
        if _ckernels is None:
            print(f"{name:<26}{t_py * 1e3:>14.3f}{'n/a':>14}{'n/a':>10}")
            continue
        t_c = best_of(make(_ckernels), args.repeat, args.number)
        print(f"{name:<26}{t_py * 1e3:>14.3f}{t_c * 1e3:>14.3f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
