"""Hot numeric kernels: real-polynomial evaluation and gradients on grids.

These sit in the innermost loop of the Newton solver (every residual
evaluation sweeps the perturbation polynomial and its gradient over the
whole circle grid). Each kernel ships in two equivalent versions:

* a numba ``@njit`` version, used when numba imports cleanly and the
  environment variable ``STATDISC_NO_NUMBA`` is unset or "0";
* a pure-numpy broadcast version, used otherwise.

``benchmarks/bench_kernels.py`` compares the two paths.
"""

import os

import numpy as np


def _numba_wanted():
    flag = os.environ.get("STATDISC_NO_NUMBA", "0").strip().lower()
    return flag in ("", "0", "false", "no")


_HAVE_NUMBA = False
if _numba_wanted():
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        _HAVE_NUMBA = False


def _poly_eval_np(x, powers, coeffs):
    """Evaluate sum_t c_t * prod_d x_d^p_td at each row of x.

    x: (P, D) float64, powers: (T, D) int64, coeffs: (T,) float64.
    """
    mono = np.prod(x[:, None, :] ** powers[None, :, :], axis=2)
    return mono @ coeffs


def _poly_grad_np(x, powers, coeffs):
    """All partial derivatives of the polynomial at each row of x: (P, D)."""
    P, D = x.shape
    out = np.zeros((P, D))
    for d in range(D):
        pd = powers[:, d]
        active = pd > 0
        if not active.any():
            continue
        shifted = powers[active].copy()
        shifted[:, d] -= 1
        mono = np.prod(x[:, None, :] ** shifted[None, :, :], axis=2)
        out[:, d] = mono @ (coeffs[active] * pd[active])
    return out


if _HAVE_NUMBA:

    @njit(cache=True)
    def _poly_eval_nb(x, powers, coeffs):
        P = x.shape[0]
        D = x.shape[1]
        T = powers.shape[0]
        out = np.zeros(P)
        for p in range(P):
            acc = 0.0
            for t in range(T):
                m = coeffs[t]
                for d in range(D):
                    e = powers[t, d]
                    xv = x[p, d]
                    for _ in range(e):
                        m *= xv
                acc += m
            out[p] = acc
        return out

    @njit(cache=True)
    def _poly_grad_nb(x, powers, coeffs):
        P = x.shape[0]
        D = x.shape[1]
        T = powers.shape[0]
        out = np.zeros((P, D))
        for p in range(P):
            for t in range(T):
                for d in range(D):
                    e = powers[t, d]
                    if e == 0:
                        continue
                    m = coeffs[t] * e
                    for dd in range(D):
                        ee = powers[t, dd]
                        if dd == d:
                            ee -= 1
                        xv = x[p, dd]
                        for _ in range(ee):
                            m *= xv
                    out[p, d] += m
        return out

    poly_eval = _poly_eval_nb
    poly_grad = _poly_grad_nb
else:
    poly_eval = _poly_eval_np
    poly_grad = _poly_grad_np

# Fallbacks are kept importable under both backends so the benchmark and
# the equivalence tests can always reach them.
poly_eval_numpy = _poly_eval_np
poly_grad_numpy = _poly_grad_np


def backend():
    """Name of the active kernel backend: "numba" or "numpy"."""
    return "numba" if _HAVE_NUMBA else "numpy"


def warmup():
    """Trigger JIT compilation once so timed sections stay honest."""
    x = np.zeros((2, 4))
    powers = np.array([[1, 0, 2, 0], [0, 3, 0, 1]], dtype=np.int64)
    coeffs = np.array([1.0, -0.5])
    poly_eval(x, powers, coeffs)
    poly_grad(x, powers, coeffs)
