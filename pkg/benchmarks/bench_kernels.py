"""Timing comparison of the numba kernels against the numpy fallback.

Run:  python benchmarks/bench_kernels.py

The polynomial kernels sit inside every Newton residual evaluation
(perturbation value and gradient on the whole circle grid), so they
dominate the solve and family-dimension timings.  The same benchmark
also times one full solver residual under each backend; select the
fallback for the library itself with STATDISC_NO_NUMBA=1.
"""

import time

import numpy as np

from statdisc import _kernels


def timeit(fn, *args, repeat=200):
    fn(*args)  # warm (and JIT-compile)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_poly():
    rng = np.random.default_rng(0)
    print(f"active backend: {_kernels.backend()}")
    print()
    print(f"{'case':<28} {'numba-path':>12} {'numpy-path':>12} {'speedup':>8}")
    for points, terms, nvars in ((128, 4, 4), (256, 8, 6), (256, 24, 8), (1024, 24, 8)):
        x = np.ascontiguousarray(rng.normal(size=(points, nvars)))
        powers = rng.integers(0, 4, size=(terms, nvars)).astype(np.int64)
        coeffs = rng.normal(size=terms)
        for name, accel, plain in (
            ("eval", _kernels.poly_eval, _kernels.poly_eval_numpy),
            ("grad", _kernels.poly_grad, _kernels.poly_grad_numpy),
        ):
            ta = timeit(accel, x, powers, coeffs)
            tp = timeit(plain, x, powers, coeffs)
            label = f"{name} P={points} T={terms} D={nvars}"
            print(f"{label:<28} {ta * 1e6:>10.1f}us {tp * 1e6:>10.1f}us {tp / ta:>7.1f}x")


def bench_residual():
    from statdisc import DiscParams, Hyperquadric, PerturbedHypersurface, SolveConfig
    from statdisc.rh_solver import _DiscSystem, params_to_coeffs

    q = Hyperquadric(n=2, A=np.diag([1.0, 1.5]))
    m = PerturbedHypersurface(
        base=q, epsilon=1e-3, terms={(0, 0, 4, 0, 0, 0): 1.0, (0, 2, 0, 1, 0, 0): -0.4}
    )
    cfg = SolveConfig(N=256, M=32)
    system = _DiscSystem(m, cfg)
    p = DiscParams(y0=0.0, v=[0, 0], w=[1.0, 0.3 - 0.1j], a=0.2)
    x = system.pack(params_to_coeffs(q, p, cfg.M))
    t = timeit(system.residual, x, repeat=100)
    print()
    print(f"solver residual (n=2, N=256, M=32): {t * 1e3:.2f} ms per evaluation")
    print(f"-> one central-difference Jacobian: ~{2 * x.size * t:.2f} s")


if __name__ == "__main__":
    bench_poly()
    bench_residual()
