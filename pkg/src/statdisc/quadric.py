"""Hyperquadrics, their polynomial perturbations, and centered-disc existence.

The model hypersurface is Q = {r = 0} with

    r(z) = Re z0 - conj(z_a) . (A z_a),   z = (z0, z_a) in C^(n+1),

for a non-degenerate Hermitian n x n matrix A.  Perturbed hypersurfaces
are {rho = 0} with rho = r + eps * s, where s is a real polynomial in the
2n+2 real coordinates (Re z0, Im z0, Re z1, Im z1, ...).

Holomorphic derivative convention throughout the package:
d/dz = (d/dx - i d/dy) / 2, so grad r(z) = (1/2, -conj(z_a)^T A).
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidInputError

HERMITIAN_TOL = 1e-14
COND_BOUND_DEFAULT = 1e12


def _as_complex_vector(z, length=None):
    z = np.asarray(z, dtype=complex)
    if z.ndim != 1:
        raise InvalidInputError(f"expected a vector, got shape {z.shape}")
    if length is not None and z.shape[0] != length:
        raise InvalidInputError(f"expected length {length}, got {z.shape[0]}")
    if not (np.all(np.isfinite(z.real)) and np.all(np.isfinite(z.imag))):
        raise InvalidInputError("non-finite entries in input vector")
    return z


@dataclass(frozen=True)
class Hyperquadric:
    """Non-degenerate Hermitian model hypersurface in C^(n+1).

    n is the complex tangent dimension; A the Hermitian form. A is
    symmetrized on construction and rejected when non-Hermitian beyond
    1e-14 entrywise or when its condition number exceeds cond_bound.
    """

    n: int
    A: np.ndarray
    cond_bound: float = COND_BOUND_DEFAULT

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError("n must be a positive integer")
        A = np.asarray(self.A, dtype=complex)
        if A.shape != (self.n, self.n):
            raise InvalidInputError(f"A must be {self.n}x{self.n}, got {A.shape}")
        if not (np.all(np.isfinite(A.real)) and np.all(np.isfinite(A.imag))):
            raise InvalidInputError("A has non-finite entries")
        scale = max(1.0, float(np.abs(A).max()))
        if np.abs(A - A.conj().T).max() > HERMITIAN_TOL * scale:
            raise InvalidInputError("A is not Hermitian to 1e-14")
        A = 0.5 * (A + A.conj().T)
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[-1] == 0.0 or sv[0] / sv[-1] > self.cond_bound:
            raise InvalidInputError("A is degenerate or too ill-conditioned")
        A.flags.writeable = False
        object.__setattr__(self, "A", A)

    # -- evaluation ---------------------------------------------------

    def eval_r(self, z):
        """r(z) for a single point z in C^(n+1)."""
        z = _as_complex_vector(z, self.n + 1)
        return float(self.eval_r_many(z[None, :])[0])

    def eval_r_many(self, z):
        """r at each row of z, shape (P, n+1) -> (P,)."""
        z = np.asarray(z, dtype=complex)
        za = z[:, 1:]
        quad = np.einsum("pi,ij,pj->p", za.conj(), self.A, za)
        bad = np.abs(quad.imag) > 1e-12 * (1.0 + np.abs(quad))
        if bad.any():
            raise InvalidInputError("Hermitian form returned a non-real value")
        return z[:, 0].real - quad.real

    def grad_r(self, z):
        """(1/2, -conj(z_a)^T A) at a single point."""
        z = _as_complex_vector(z, self.n + 1)
        return self.grad_r_many(z[None, :])[0]

    def grad_r_many(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.empty_like(z)
        out[:, 0] = 0.5
        out[:, 1:] = -(z[:, 1:].conj() @ self.A)
        return out

    def eigen_split(self):
        """Eigenvalues (ascending) and eigenvectors of A."""
        return np.linalg.eigh(self.A)

    def definiteness(self):
        """"positive-definite", "negative-definite" or "indefinite"."""
        w, _ = self.eigen_split()
        if w[0] > 0:
            return "positive-definite"
        if w[-1] < 0:
            return "negative-definite"
        return "indefinite"

    # -- serialization ------------------------------------------------

    def to_json(self):
        return {
            "n": self.n,
            "A": [[float(v.real), float(v.imag)] for v in self.A.reshape(-1)],
        }

    @classmethod
    def from_json(cls, obj):
        n = int(obj["n"])
        flat = np.array([complex(re, im) for re, im in obj["A"]], dtype=complex)
        if flat.size != n * n:
            raise InvalidInputError("A must hold n*n row-major entries")
        return cls(n=n, A=flat.reshape(n, n))


def eval_r(q, z):
    return q.eval_r(z)


def grad_r(q, z):
    return q.grad_r(z)


@dataclass(frozen=True)
class PointEval:
    """Defining function and gradient at one ambient point."""

    z: np.ndarray
    value: float
    gradient: np.ndarray


def z_to_real_coords(z):
    """(...,n+1) complex -> (...,2n+2) real: (Re z0, Im z0, Re z1, ...)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


@dataclass(frozen=True)
class PerturbedHypersurface:
    """rho = r + eps * s with s a real polynomial in the real coordinates.

    terms maps a multi-index over the 2n+2 real coordinates to its real
    coefficient. eps = 0 reproduces the quadric along the identical code
    path (the polynomial is never touched).
    """

    base: Hyperquadric
    epsilon: float = 0.0
    terms: dict = field(default_factory=dict)
    max_degree: int = 6

    def __post_init__(self):
        d = 2 * (self.base.n + 1)
        powers = []
        coeffs = []
        clean = {}
        for mi, c in sorted(self.terms.items()):
            mi = tuple(int(m) for m in mi)
            if len(mi) != d or any(m < 0 for m in mi):
                raise InvalidInputError(f"bad multi-index {mi}")
            if sum(mi) > self.max_degree:
                raise InvalidInputError(f"term degree {sum(mi)} exceeds {self.max_degree}")
            c = float(c)
            if not np.isfinite(c):
                raise InvalidInputError("non-finite coefficient")
            if c != 0.0:
                powers.append(mi)
                coeffs.append(c)
                clean[mi] = c
        object.__setattr__(self, "terms", clean)
        powers = np.array(powers, dtype=np.int64).reshape(len(coeffs), d)
        coeffs = np.array(coeffs, dtype=float)
        powers.flags.writeable = False
        coeffs.flags.writeable = False
        object.__setattr__(self, "_powers", powers)
        object.__setattr__(self, "_coeffs", coeffs)

    @property
    def n(self):
        return self.base.n

    def _is_pure_quadric(self):
        return self.epsilon == 0.0 or self._coeffs.size == 0

    def eval_rho(self, z):
        z = _as_complex_vector(z, self.n + 1)
        return float(self.eval_rho_many(z[None, :])[0])

    def eval_rho_many(self, z):
        base = self.base.eval_r_many(z)
        if self._is_pure_quadric():
            return base
        x = np.ascontiguousarray(z_to_real_coords(z))
        s = _kernels.poly_eval(x, self._powers, self._coeffs)
        return base + self.epsilon * s

    def grad_rho(self, z):
        z = _as_complex_vector(z, self.n + 1)
        return self.grad_rho_many(z[None, :])[0]

    def grad_rho_many(self, z):
        base = self.base.grad_r_many(z)
        if self._is_pure_quadric():
            return base
        x = np.ascontiguousarray(z_to_real_coords(z))
        g = _kernels.poly_grad(x, self._powers, self._coeffs)
        # d/dz_j = (d/dx_j - i d/dy_j) / 2 applied to the real polynomial
        return base + self.epsilon * 0.5 * (g[:, 0::2] - 1j * g[:, 1::2])

    def point_eval(self, z):
        z = _as_complex_vector(z, self.n + 1)
        return PointEval(z=z, value=self.eval_rho(z), gradient=self.grad_rho(z))

    def c3_size(self, radius=1.0, samples=512, seed=0):
        """Sampled C^3 size of eps*s on the real ball of given radius.

        Maximum of |d^beta (eps s)| over all |beta| <= 3 and a seeded
        sample of the ball (plus its center). Finite by construction.
        """
        if self._is_pure_quadric():
            return 0.0
        d = 2 * (self.n + 1)
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(samples, d))
        pts *= (radius * rng.random(samples) ** (1.0 / d) / np.linalg.norm(pts, axis=1))[:, None]
        pts = np.vstack([np.zeros(d), pts])
        best = 0.0
        for beta in _multi_indices_upto(d, 3):
            powers, coeffs = _derive_poly(self._powers, self._coeffs, beta)
            if coeffs.size == 0:
                continue
            vals = _kernels.poly_eval(np.ascontiguousarray(pts), powers, coeffs)
            best = max(best, float(np.abs(vals).max()))
        return abs(self.epsilon) * best

    def to_json(self):
        obj = self.base.to_json()
        obj["epsilon"] = float(self.epsilon)
        obj["terms"] = [
            {"multi_index": list(mi), "coeff": float(c)} for mi, c in sorted(self.terms.items())
        ]
        return obj

    @classmethod
    def from_json(cls, obj):
        base = Hyperquadric.from_json(obj)
        terms = {}
        for t in obj.get("terms", []):
            terms[tuple(int(m) for m in t["multi_index"])] = float(t["coeff"])
        return cls(base=base, epsilon=float(obj.get("epsilon", 0.0)), terms=terms)


def _multi_indices_upto(d, order):
    """All multi-indices beta over d variables with 0 <= |beta| <= order."""
    out = [np.zeros(d, dtype=np.int64)]
    frontier = [np.zeros(d, dtype=np.int64)]
    for _ in range(order):
        nxt = []
        seen = set()
        for b in frontier:
            for j in range(d):
                bb = b.copy()
                bb[j] += 1
                key = tuple(bb)
                if key not in seen:
                    seen.add(key)
                    nxt.append(bb)
        out.extend(nxt)
        frontier = nxt
    return out


def _derive_poly(powers, coeffs, beta):
    """Coefficient-wise multi-derivative of a polynomial in array form."""
    keep = np.all(powers >= beta[None, :], axis=1)
    if not keep.any():
        return powers[:0], coeffs[:0]
    p = powers[keep].copy()
    c = coeffs[keep].copy()
    for j, bj in enumerate(beta):
        for _ in range(int(bj)):
            c *= p[:, j]
            p[:, j] -= 1
    return np.ascontiguousarray(p), np.ascontiguousarray(c)


def satisfies_condition_star(q, p0):
    """Whether the center (p0, 0, ..., 0) is admissible for q.

    Requires the point off Q (Re p0 != 0) and, for definite forms, the
    sign of Re p0 matching the definiteness.
    """
    p0 = complex(p0)
    kind = q.definiteness()
    if p0.real == 0.0:
        return False
    if kind == "positive-definite":
        return p0.real > 0
    if kind == "negative-definite":
        return p0.real < 0
    return True


@dataclass(frozen=True)
class ExistenceResult:
    exists: bool
    witness: np.ndarray | None
    case: str
    condition_star: bool | None


def exists_disc_centered(q, p):
    """Existence of a non-constant stationary disc of Q centered at p.

    Discs centered at p exist iff some w != 0 satisfies
    conj(w)^T A w = x0 := r(p).  Definite forms therefore require
    sign(x0) to match the definiteness (and x0 != 0); an indefinite form
    succeeds for every p.  Returns an explicit witness w when it exists.

    Note the related printed statement elsewhere carries the opposite
    sign for the definite cases; the sign used here is forced by the
    positivity of the form on nonzero vectors and is the one consistent
    with the admissible-center condition (satisfies_condition_star).
    """
    p = _as_complex_vector(p, q.n + 1)
    x0 = q.eval_r(p)
    kind = q.definiteness()
    w_eig, v_eig = q.eigen_split()
    is_center_form = bool(np.all(p[1:] == 0))
    cond = satisfies_condition_star(q, p[0]) if is_center_form else None

    if kind == "positive-definite":
        if x0 <= 0:
            return ExistenceResult(False, None, kind, cond)
        lam, u = w_eig[-1], v_eig[:, -1]
        return ExistenceResult(True, np.sqrt(x0 / lam) * u, kind, cond)
    if kind == "negative-definite":
        if x0 >= 0:
            return ExistenceResult(False, None, kind, cond)
        lam, u = w_eig[0], v_eig[:, 0]
        return ExistenceResult(True, np.sqrt(x0 / lam) * u, kind, cond)

    # Indefinite: mix one positive and one negative eigenvector.
    lam_neg, u_neg = w_eig[0], v_eig[:, 0]
    lam_pos, u_pos = w_eig[-1], v_eig[:, -1]
    beta2 = (1.0 + abs(x0)) / (-lam_neg)
    alpha2 = (x0 - lam_neg * beta2) / lam_pos
    w = np.sqrt(alpha2) * u_pos + np.sqrt(beta2) * u_neg
    return ExistenceResult(True, w, kind, cond)
