import numpy as np
import pytest

from statdisc import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile the jitted kernels once so timed tests stay honest
    _kernels.warmup()


def random_hermitian_quadric(rng, n, definite=None):
    """Non-degenerate Hermitian model with eigenvalues in +-[0.5, 2]."""
    from statdisc import Hyperquadric

    if definite == "positive":
        signs = np.ones(n)
    elif definite == "negative":
        signs = -np.ones(n)
    else:
        signs = rng.choice([-1.0, 1.0], n)
    ev = rng.uniform(0.5, 2.0, n) * signs
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, _ = np.linalg.qr(H)
    A = Q @ np.diag(ev) @ Q.conj().T
    return Hyperquadric(n=n, A=0.5 * (A + A.conj().T))


def random_disc_params(rng, n, a_max=0.6, centered=False):
    from statdisc import DiscParams

    w = rng.normal(size=n) + 1j * rng.normal(size=n)
    while np.linalg.norm(w) < 0.3:
        w = rng.normal(size=n) + 1j * rng.normal(size=n)
    a = a_max * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
    v = np.zeros(n, dtype=complex)
    if not centered:
        v = 0.7 * (rng.normal(size=n) + 1j * rng.normal(size=n))
    return DiscParams(y0=float(rng.normal()), v=v, w=w, a=a)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
