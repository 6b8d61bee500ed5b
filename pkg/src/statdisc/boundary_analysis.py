"""Spectral machinery on the unit circle.

Grid functions live on the equispaced nodes zeta_k = exp(2 pi i k / N)
with N a power of two and a multiple of 4.  Fourier coefficients use the
analyst's normalization c_m = (1/N) sum_k f(zeta_k) zeta_k^{-m}, so the
function zeta -> zeta has c_1 = 1.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidInputError,
    LiftConstructionError,
    ResolutionError,
    WindingUndefinedError,
)

GRID_DEFAULT = 256
GRID_MAX = 4096


def default_grid():
    """Default circle grid size; honors the STATDISC_GRID env override."""
    raw = os.environ.get("STATDISC_GRID", "")
    if raw.strip():
        try:
            return validate_grid(int(raw))
        except (ValueError, InvalidInputError):
            raise InvalidInputError(f"bad STATDISC_GRID value {raw!r}")
    return GRID_DEFAULT


def validate_grid(N):
    N = int(N)
    if N < 8 or N & (N - 1) or N % 4:
        raise InvalidInputError("grid size must be a power of two, multiple of 4, >= 8")
    return N


def circle_nodes(N):
    """zeta_k = exp(2 pi i k / N) for k = 0..N-1."""
    return np.exp(2j * np.pi * np.arange(N) / N)


@dataclass
class BoundaryFunction:
    """Sampled function on the circle grid with a lazy spectral view.

    values has shape (..., N); leading axes hold components. Instances
    are immutable: arrays are frozen at construction and coefficients
    are cached on first use.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        validate_grid(v.shape[-1])
        if not (np.all(np.isfinite(v.real)) and np.all(np.isfinite(v.imag))):
            raise InvalidInputError("non-finite boundary samples")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_coeffs", None)

    @property
    def N(self):
        return self.values.shape[-1]

    @property
    def coeffs(self):
        """Fourier coefficients in numpy fft ordering (m = 0..N/2-1, -N/2..-1)."""
        if self._coeffs is None:
            c = np.fft.fft(self.values, axis=-1) / self.N
            c.flags.writeable = False
            object.__setattr__(self, "_coeffs", c)
        return self._coeffs

    def coeff(self, m):
        """Coefficient c_m, |m| <= N/2."""
        if not -self.N // 2 <= m < self.N // 2:
            raise InvalidInputError(f"mode {m} outside [-N/2, N/2)")
        return self.coeffs[..., m % self.N]

    def nodes(self):
        return circle_nodes(self.N)

    @classmethod
    def from_callable(cls, fn, N=None):
        N = validate_grid(N or default_grid())
        return cls(np.asarray(fn(circle_nodes(N)), dtype=complex))


def fourier(bf):
    """Forward transform of a BoundaryFunction (or raw samples)."""
    if not isinstance(bf, BoundaryFunction):
        bf = BoundaryFunction(np.asarray(bf, dtype=complex))
    return np.array(bf.coeffs)


def synth(coeffs, N=None):
    """Inverse of :func:`fourier`; resamples onto an N grid if larger."""
    coeffs = np.asarray(coeffs, dtype=complex)
    M = coeffs.shape[-1]
    validate_grid(M)
    if N is None or N == M:
        return BoundaryFunction(np.fft.ifft(coeffs * M, axis=-1))
    N = validate_grid(N)
    if N < M:
        raise InvalidInputError("cannot shrink a spectrum in synth")
    padded = np.zeros(coeffs.shape[:-1] + (N,), dtype=complex)
    padded[..., : M // 2] = coeffs[..., : M // 2]
    padded[..., -M // 2 :] = coeffs[..., -M // 2 :]
    return BoundaryFunction(np.fft.ifft(padded * N, axis=-1))


def modes(N):
    """Signed mode numbers in numpy fft ordering."""
    return np.fft.fftfreq(N, 1.0 / N).astype(np.int64)


def hilbert_transform(g):
    """Harmonic-conjugate operator T on real grid functions.

    Fixed by T(cos m t) = sin m t, T(sin m t) = -cos m t (m >= 1) and
    T(1) = 0; the Fourier multiplier is -i sign(m) with the mean (and
    the unpaired Nyquist mode) killed. With this convention, U = -T(g)
    makes U + i g the boundary value of a holomorphic function.
    """
    if isinstance(g, BoundaryFunction):
        vals = g.values
    else:
        vals = np.asarray(g, dtype=complex)
    if np.abs(vals.imag).max(initial=0.0) > 1e-13 * (1.0 + np.abs(vals).max(initial=0.0)):
        raise InvalidInputError("Hilbert transform input must be real valued")
    vals = vals.real
    N = validate_grid(vals.shape[-1])
    c = np.fft.fft(vals, axis=-1)
    m = modes(N)
    mult = -1j * np.sign(m)
    mult[0] = 0.0
    mult[N // 2] = 0.0
    out = np.fft.ifft(c * mult, axis=-1).real
    if isinstance(g, BoundaryFunction):
        return BoundaryFunction(out.astype(complex))
    return out


def holomorphic_defect(bf):
    """Relative l2 mass of the negative Fourier modes.

    Zero (to truncation) exactly when the samples are boundary values of
    a function holomorphic on the disc.
    """
    if not isinstance(bf, BoundaryFunction):
        bf = BoundaryFunction(np.asarray(bf, dtype=complex))
    c = bf.coeffs
    m = modes(bf.N)
    total = np.linalg.norm(c, axis=-1)
    neg = np.linalg.norm(np.where(m < 0, c, 0.0), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(total > 0, neg / np.where(total > 0, total, 1.0), 0.0)
    return float(out) if out.ndim == 0 else out


def winding_number(bf, min_modulus=1e-8, max_step=0.9 * np.pi):
    """Winding of a nonvanishing scalar grid function around 0.

    Sums phase increments along the grid, each taken in (-pi, pi]. A
    grid value too close to 0 raises WindingUndefinedError; a phase step
    near pi raises ResolutionError (the grid cannot certify the count).
    """
    vals = bf.values if isinstance(bf, BoundaryFunction) else np.asarray(bf, dtype=complex)
    if vals.ndim != 1:
        raise InvalidInputError("winding_number expects a scalar function")
    if np.abs(vals).min() <= min_modulus:
        raise WindingUndefinedError("function vanishes (numerically) on the grid")
    ratios = np.roll(vals, -1) / vals
    steps = np.angle(ratios)
    if np.abs(steps).max() >= max_step:
        raise ResolutionError("phase step close to pi; increase the grid size")
    total = steps.sum() / (2.0 * np.pi)
    wind = int(np.rint(total))
    if abs(total - wind) > 0.1:
        raise ResolutionError(f"winding sum {total} is not an integer")
    return wind


def _halfplane_margin(vals, directions=1024):
    """max over unit directions of min_k Re(conj(dir) * vals_k).

    Positive exactly when the convex hull of the samples stays in an
    open half-plane not containing 0.
    """
    th = np.exp(-1j * np.linspace(0.0, 2.0 * np.pi, directions, endpoint=False))
    proj = (vals[None, :] * th[:, None]).real.min(axis=1)
    k = int(np.argmax(proj))
    # local refinement around the best direction
    best = proj[k]
    ang = np.angle(th[k].conj())
    for width in (np.pi / directions, np.pi / directions / 8):
        loc = np.exp(-1j * (ang + np.linspace(-width, width, 17)))
        p = (vals[None, :] * loc[:, None]).real.min(axis=1)
        j = int(np.argmax(p))
        if p[j] > best:
            best = p[j]
            ang = np.angle(loc[j].conj())
    return float(best)


@dataclass(frozen=True)
class RegularLift:
    """Output of construct_regular_lift."""

    lam: np.ndarray
    h_star: np.ndarray
    phi: np.ndarray
    defects: np.ndarray


def construct_regular_lift(m, h_samples, pad_tol=1e-8):
    """Positive boundary factor lam with lam * (d rho / d z) o h a lift.

    h_samples has shape (n+1, N). phi(zeta) = zeta * (d rho/d z_n)(h)
    must stay in an open half-plane avoiding 0 (checked on the padded
    convex hull); then psi = log phi along the continuous grid branch,
    U = -T(Im psi) and lam = exp(U - Re psi) > 0 make zeta * lam * phi_j
    extend holomorphically for every component j.
    """
    h = np.asarray(h_samples, dtype=complex)
    if h.ndim != 2 or h.shape[0] != m.n + 1:
        raise InvalidInputError(f"expected (n+1, N) samples, got {h.shape}")
    N = validate_grid(h.shape[1])
    zeta = circle_nodes(N)
    grad = m.grad_rho_many(h.T)  # (N, n+1)
    phi = zeta * grad[:, m.n]
    scale = np.abs(phi).max()
    if scale == 0.0 or _halfplane_margin(phi) <= pad_tol * scale:
        raise LiftConstructionError(
            "phi values do not avoid 0 in an open half-plane; "
            "the samples are too far from a stationary disc"
        )
    psi = np.log(np.abs(phi)) + 1j * np.unwrap(np.angle(phi))
    U = -hilbert_transform(psi.imag)
    lam = np.exp(U - psi.real)
    h_star = lam[None, :] * grad.T  # (n+1, N)
    defects = holomorphic_defect(BoundaryFunction(zeta[None, :] * h_star))
    return RegularLift(lam=lam, h_star=h_star, phi=phi, defects=np.atleast_1d(defects))
