"""Time the compiled and numpy kernels on the same workloads.

    python benchmarks/bench_kernels.py [--nodes 2001] [--steps 2000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from cfwave import _pykernels, kernels
from cfwave.potential import cofactor_coeffs, preset
from cfwave.profile import _to_long


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def pde_case(backend, model, nodes, steps, fp):
    x = np.linspace(-20, 20, nodes)
    dx = x[1] - x[0]
    conserved = model in (kernels.MODIFIED_CH, kernels.CLASSIC_CH)
    dt = (0.05 * dx**4 if conserved else 0.2 * dx**2) / 2

    def go():
        v = np.tanh(x / np.sqrt(2))
        backend.advance(v, model, 0.0 if conserved else 0.2, dx, dt, steps, fp, 0.0)

    return go


def profile_case(backend, n):
    w = preset("quartic")
    cof = np.array([_to_long(q) for q in cofactor_coeffs(w)])
    fp = np.asarray(w.deriv_coeffs(1), dtype=np.longdouble)

    def go():
        backend.rk4_profile(w.v_star, np.longdouble(1e-3), n, cof, fp, w.v_plus, w.v_minus, w.m1, w.m2)

    return go


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=2001)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--profile-steps", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = kernels.backends()
    if "compiled" not in backends:
        print("compiled extension not built; only the numpy backend is available")
    fp = preset("quartic").deriv_coeffs(1)
    names = {kernels.MODIFIED_AC: "modified_ac", kernels.CLASSIC_AC: "classic_ac",
             kernels.MODIFIED_CH: "modified_ch", kernels.CLASSIC_CH: "classic_ch"}

    print(f"{'workload':<28}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for code, name in names.items():
        row = {b: best_of(pde_case(mod, code, args.nodes, args.steps, fp), args.repeat) / args.steps
               for b, mod in backends.items()}
        _print(f"{name} step ({args.nodes} nodes)", row)
    row = {b: best_of(profile_case(mod, args.profile_steps), args.repeat) / args.profile_steps
           for b, mod in backends.items()}
    _print("rk4 profile step", row)


def _print(label, row):
    cells = "".join(f"{t * 1e6:>11.2f} us" for t in row.values())
    speed = f"{row['python'] / row['compiled']:>9.1f}x" if "compiled" in row else ""
    print(f"{label:<28}{cells}{speed}")


if __name__ == "__main__":
    main()
