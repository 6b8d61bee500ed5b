"""Boundary matrix symbols and their factorization invariants.

The conormal projectivization of the hyperquadric is cut out by 2n+1
real equations; along a projectivized lift f their conjugate-gradient
matrix G(zeta) induces the symbol -conj(G)^{-1} G whose Birkhoff
factorization exponents (partial indices) and determinant winding
(Maslov index) control the deformation theory of the disc.

Partial indices are computed exactly: the symbol is turned into a
matrix Laurent polynomial (closed-form clearing of the known
denominators, or a defect-checked Fourier truncation), interior
determinant zeros are pushed to the origin, and a lowest-degree column
reduction over the Laurent ring finishes once the per-column bottom
degrees sum to the determinant's order at the origin.  A truncated
block Toeplitz kernel count serves as an independent test oracle,
never as the primary path.
"""

from dataclasses import dataclass

import numpy as np

from .boundary_analysis import circle_nodes, validate_grid, winding_number
from .disc import LiftParams, ProjectivizedLift, projectivize_lift
from .errors import (
    ApproximationError,
    FactorizationError,
    InvalidInputError,
    InvalidParamsError,
    ReductionMismatchError,
    SymbolSingularError,
)

DET_MIN = 1e-10
LAURENT_MATCH_TOL = 1e-12
SNAP_REL = 1e-11


# ---------------------------------------------------------------------------
# Laurent polynomial matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaurentMatrix:
    """Matrix Laurent polynomial sum_m C_m zeta^m, m = lo .. lo+K-1.

    coeffs has shape (K, s, s).
    """

    coeffs: np.ndarray
    lo: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise InvalidInputError(f"bad Laurent coefficient shape {c.shape}")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "lo", int(self.lo))

    @property
    def size(self):
        return self.coeffs.shape[1]

    @property
    def hi(self):
        return self.lo + self.coeffs.shape[0] - 1

    def eval(self, zeta):
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        out = np.zeros(zeta.shape + (self.size, self.size), dtype=complex)
        for k in range(self.coeffs.shape[0] - 1, -1, -1):
            out *= zeta[..., None, None]
            out += self.coeffs[k]
        return out * (zeta[..., None, None] ** self.lo)

    def trimmed(self, rel=SNAP_REL):
        return LaurentMatrix(*_trim(self.coeffs, self.lo, rel))


def _trim(coeffs, lo, rel=SNAP_REL):
    mags = np.abs(coeffs).max(axis=(1, 2))
    scale = mags.max(initial=0.0)
    if scale == 0.0:
        return np.zeros((1,) + coeffs.shape[1:], dtype=complex), 0
    keep = np.nonzero(mags > rel * scale)[0]
    return np.ascontiguousarray(coeffs[keep[0] : keep[-1] + 1]), lo + int(keep[0])


def _snap_columns(coeffs, rel=1e-10):
    """Zero out sub-threshold entries, per column, in place.

    The reduction's degree bookkeeping reads lowest nonzero coefficients;
    roundoff spread by the constant mixes must not masquerade as one.
    """
    scale = np.abs(coeffs).max(axis=(0, 1))  # per column j
    mask = np.abs(coeffs) < rel * scale[None, None, :]
    coeffs[mask] = 0.0
    return coeffs


def laurent_from_fft_samples(samples, lo, hi, tol=1e-11):
    """Interpolate grid samples (N, s, s) into a Laurent matrix.

    The true symbol must be supported in [lo, hi]; mass outside that
    envelope certifies failure and raises ApproximationError.
    """
    N = samples.shape[0]
    if hi - lo + 1 > N:
        raise ApproximationError("grid too small for the requested envelope")
    c = np.fft.fft(samples, axis=0) / N
    m = np.fft.fftfreq(N, 1.0 / N).astype(int)
    inside = (m >= lo) & (m <= hi)
    total = np.linalg.norm(c)
    if total > 0 and np.linalg.norm(c[~inside]) > tol * total:
        raise ApproximationError("samples carry mass outside the Laurent envelope")
    K = hi - lo + 1
    out = np.zeros((K, samples.shape[1], samples.shape[2]), dtype=complex)
    for k in range(N):
        if inside[k]:
            out[m[k] - lo] = c[k]
    return LaurentMatrix(*_trim(out, lo))


def laurent_det(lm, grid=None):
    """Determinant of a Laurent matrix, again as (coeffs, lo)."""
    s = lm.size
    span = s * (lm.coeffs.shape[0] - 1)
    N = 1
    while N < span + 2:
        N *= 2
    N = max(N, 8)
    zeta = circle_nodes(N)
    vals = np.linalg.det(lm.eval(zeta))
    c = np.fft.fft(vals / (zeta ** (s * lm.lo)), axis=0) / N
    # a polynomial of degree <= span < N: coefficient d sits in bin d mod N
    coeffs = np.array([c[d % N] for d in range(span + 1)])
    return coeffs, s * lm.lo


def _poly_trim(coeffs, lo, rel=SNAP_REL):
    mags = np.abs(coeffs)
    scale = mags.max(initial=0.0)
    if scale == 0.0:
        return np.zeros(1, dtype=complex), 0
    keep = np.nonzero(mags > rel * scale)[0]
    return coeffs[keep[0] : keep[-1] + 1], lo + int(keep[0])


# ---------------------------------------------------------------------------
# Matrix symbols on the circle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexEquivalentForm:
    """Laurent matrix with the same partial indices as a sampled symbol,
    up to a uniform integer shift of every index.

    candidate_roots lists the only places (besides the origin) where
    the determinant can vanish, when that is known analytically; the
    factorization then extracts multiple zeros at their exact
    positions instead of trusting a scattered eigenvalue cloud.
    """

    laurent: LaurentMatrix
    offset: int = 0
    candidate_roots: tuple = ()


@dataclass(frozen=True)
class MatrixSymbol:
    """Matrix-valued function on the circle grid.

    samples has shape (N, s, s).  laurent, when present, is an exact
    representation of the samples; reduced, when present, is an
    index-equivalent Laurent form used by the factorization.
    """

    samples: np.ndarray
    laurent: LaurentMatrix | None = None
    reduced: IndexEquivalentForm | None = None

    def __post_init__(self):
        smp = np.asarray(self.samples, dtype=complex)
        if smp.ndim != 3 or smp.shape[1] != smp.shape[2]:
            raise InvalidInputError(f"bad sample shape {smp.shape}")
        validate_grid(smp.shape[0])
        det = np.linalg.det(smp)
        if np.abs(det).min() <= DET_MIN:
            raise SymbolSingularError("symbol determinant vanishes on the grid")
        smp = smp.copy()
        smp.flags.writeable = False
        object.__setattr__(self, "samples", smp)
        if self.laurent is not None:
            vals = self.laurent.eval(circle_nodes(smp.shape[0]))
            err = np.abs(vals - smp).max()
            if err > LAURENT_MATCH_TOL * max(1.0, np.abs(smp).max()):
                raise InvalidInputError(f"laurent form deviates from samples by {err}")

    @property
    def size(self):
        return self.samples.shape[1]

    @property
    def N(self):
        return self.samples.shape[0]

    def det_samples(self):
        return np.linalg.det(self.samples)


@dataclass(frozen=True)
class PartialIndices:
    """kappa_1 >= ... >= kappa_s and their sum."""

    kappa: tuple
    total: int

    @classmethod
    def from_values(cls, values):
        kappa = tuple(sorted((int(v) for v in values), reverse=True))
        return cls(kappa=kappa, total=int(sum(kappa)))

    def to_json(self):
        return {"kappa": list(self.kappa), "total": self.total}


def maslov_index(symbol):
    """Winding of det(symbol) around 0; the total index."""
    return winding_number(symbol.det_samples())


# ---------------------------------------------------------------------------
# Symbol constructors: conormal gradient matrix and conjugation symbol
# ---------------------------------------------------------------------------


def _gradient_rows(q, z, t):
    """G(zeta) rows at sampled (z, t): shape (N, 2n+1, 2n+1).

    Row order: [r; 2Re e_j (j=1..n-1); 2Re e_0; -2Im e_j; -2Im e_0],
    column order: [zbar_0, zbar_1..zbar_n, tbar_0, tbar_1..tbar_{n-1}],
    where e_j = (dr/dz_n) t_j - dr/dz_j.
    """
    n = q.n
    N = z.shape[0]
    s = 2 * n + 1
    A = q.A
    Abar = A.conj()
    za = z[:, 1:]
    Az = za @ A.T  # (N, n): rows A @ z_alpha
    Ln_z = Az[:, n - 1]
    G = np.zeros((N, s, s), dtype=complex)
    G[:, 0, 0] = 0.5
    G[:, 0, 1 : n + 1] = -Az
    for j in range(1, n):
        row_z = -Abar[n - 1][None, :] * t[:, j, None] + Abar[j - 1][None, :]
        G[:, j, 1 : n + 1] = row_z
        G[:, j, n + 1 + j] = -Ln_z
        G[:, n + j, 1 : n + 1] = 1j * row_z
        G[:, n + j, n + 1 + j] = 1j * Ln_z
    row0_z = -Abar[n - 1][None, :] * t[:, 0, None]
    G[:, n, 1 : n + 1] = row0_z
    G[:, n, n + 1] = -Ln_z
    G[:, 2 * n, 1 : n + 1] = 1j * row0_z
    G[:, 2 * n, n + 1] = 1j * Ln_z
    return G


def build_G(q, f):
    """Conjugate-gradient matrix of the 2n+1 defining equations along f."""
    if isinstance(f, ProjectivizedLift):
        q = f.quadric
        f = f.values
    f = np.asarray(f, dtype=complex)
    if f.ndim != 2 or f.shape[0] != 2 * q.n + 1:
        raise InvalidInputError(f"expected (2n+1, N) samples, got {f.shape}")
    z = f[: q.n + 1].T
    t = f[q.n + 1 :].T
    return MatrixSymbol(samples=_gradient_rows(q, z, t))


def _closed_form_B_samples(q, params, zeta):
    """The displayed conjugation symbol of the projectivized conormal
    bundle along a centered disc: entries 1, zeta^2, zeta and first-row
    rationals in (a, w, A)."""
    n, A = q.n, q.A
    a = params.a
    w = params.w
    alpha = float(np.real(w.conj() @ A @ w))
    N = zeta.shape[0]
    s = 2 * n + 1
    sig = 1.0 - a * zeta
    tau = 1.0 - np.conj(a) / zeta
    mod2 = sig * tau  # |1 - a zeta|^2 on the circle
    B = np.zeros((N, s, s), dtype=complex)
    B[:, 0, 0] = 1.0
    B[:, 0, 1] = 2.0 * alpha * zeta / (mod2 * tau)
    B[:, 0, 2] = -2.0 * alpha * zeta / (mod2 * sig)
    B[:, 1, 2] = zeta**2
    B[:, 2, 1] = zeta**2
    for j in range(1, n):
        B[:, 0, 2 * j + 1] = zeta * w[j - 1] / mod2
        B[:, 0, 2 * j + 2] = -np.conj(w[j - 1]) / mod2
        B[:, 2 * j + 1, 2 * j + 2] = zeta
        B[:, 2 * j + 2, 2 * j + 1] = zeta
    return B


def _closed_form_B_reduced(q, params):
    """Index-equivalent Laurent polynomial for the closed-form symbol.

    Left factor diag((1-a z)^2, 1, ..., 1) is invertible on the closed
    disc, right factor diag(1, tau^2, tau, ..., tau) with
    tau = 1 - conj(a)/z is invertible outside; both clear the
    |1-a zeta|^2 denominators without moving any partial index, and
    both have determinant winding zero.
    """
    n, A = q.n, q.A
    a = params.a
    ab = np.conj(a)
    w = params.w
    alpha = float(np.real(w.conj() @ A @ w))
    s = 2 * n + 1
    C = np.zeros((3, s, s), dtype=complex)
    C[:, 0, 0] = [1.0, -2.0 * a, a**2]
    C[:, 0, 1] = [0.0, 2.0 * alpha, -2.0 * alpha * a]
    C[:, 0, 2] = [0.0, -2.0 * alpha, 0.0]
    C[:, 1, 2] = [0.0, -ab, 1.0]
    C[:, 2, 1] = [ab**2, -2.0 * ab, 1.0]
    for j in range(1, n):
        C[:, 0, 2 * j + 1] = [0.0, w[j - 1], -a * w[j - 1]]
        C[:, 0, 2 * j + 2] = [-np.conj(w[j - 1]), a * np.conj(w[j - 1]), 0.0]
        C[:, 2 * j + 1, 2 * j + 2] = [-ab, 1.0, 0.0]
        C[:, 2 * j + 2, 2 * j + 1] = [-ab, 1.0, 0.0]
    cands = (np.conj(a), 1.0 / a) if a != 0 else ()
    return IndexEquivalentForm(
        laurent=LaurentMatrix(C, 0).trimmed(), offset=0, candidate_roots=cands
    )


def _gradient_reduced(q, params):
    """Index-equivalent Laurent form for -conj(G)^{-1} G.

    Scaling G by the disc factor (1 - a zeta) multiplies the symbol by
    an index-zero scalar and makes the pair exactly rational with poles
    only at conj(a) (inside) and 1/a (outside).  Multiplying by
    [(1 - a zeta)(1 - conj(a)/zeta)]^m, itself an index-zero scalar,
    clears those poles for a small m found adaptively; the interpolation
    envelope certifies the clearing.
    """
    n = q.n
    s = 2 * n + 1
    a = params.a
    Ns = 128
    zeta = circle_nodes(Ns)
    lift = projectivize_lift(q, LiftParams(disc=params, b=1.0), N=Ns)
    fv = lift.values
    G = _gradient_rows(q, fv[: n + 1].T, fv[n + 1 :].T)
    Gs = (1.0 - a * zeta)[:, None, None] * G
    conjGs = np.conj(Gs)
    if np.abs(np.linalg.det(conjGs)).min() < DET_MIN:
        raise SymbolSingularError("gradient matrix is singular on the circle")
    V = -np.linalg.solve(conjGs, Gs)
    clear = (1.0 - a * zeta) * (1.0 - np.conj(a) / zeta)
    cands = (np.conj(a), 1.0 / a) if a != 0 else ()
    last_err = None
    for m in range(0, 2 * s + 3):
        try:
            # exact clearing leaves machine-level mass outside the envelope;
            # a pole tail that is merely small cannot pass this gate before
            # the true pole order is reached
            lm = laurent_from_fft_samples(V, lo=-(m + 3), hi=m + 3, tol=1e-12)
            return IndexEquivalentForm(laurent=lm, offset=0, candidate_roots=cands)
        except ApproximationError as err:
            last_err = err
        V = clear[:, None, None] * V
    raise ApproximationError(f"could not clear the gradient symbol poles: {last_err}")


def build_B(q, params, source="closed_form", N=None):
    """Conjugation symbol along the centered disc with parameters params.

    source "closed_form" emits the displayed matrix with its exact
    cleared Laurent form; source "gradient" computes -conj(G)^{-1} G
    pointwise from the defining equations, with an exact adjugate-based
    index-equivalent form.
    """
    N = validate_grid(N or 256)
    if np.linalg.norm(params.v) != 0.0:
        raise InvalidParamsError("conjugation symbols assume a centered disc (v = 0)")
    zeta = circle_nodes(N)
    if source in ("closed_form", "closed-form"):
        samples = _closed_form_B_samples(q, params, zeta)
        return MatrixSymbol(samples=samples, reduced=_closed_form_B_reduced(q, params))
    if source in ("gradient", "G", "g_based", "G-based"):
        lift = projectivize_lift(q, LiftParams(disc=params, b=1.0), N=N)
        G = build_G(lift.quadric, lift)
        conjG = np.conj(G.samples)
        samples = -np.linalg.solve(conjG, G.samples)
        reduced = _gradient_reduced(lift.quadric, lift.params)
        return MatrixSymbol(samples=samples, reduced=reduced)
    raise InvalidInputError(f"unknown source {source!r}")


# ---------------------------------------------------------------------------
# Exact Birkhoff factorization of Laurent matrix polynomials
# ---------------------------------------------------------------------------


def _poly_roots(coeffs):
    """Roots of sum_k coeffs[k] zeta^k (ascending order coefficients)."""
    c, _ = _poly_trim(np.asarray(coeffs, dtype=complex), 0)
    if c.size <= 1:
        return np.array([], dtype=complex)
    return np.roots(c[::-1])


def _cluster_roots(roots, coeffs=None, rel_radius=0.15, abs_radius=1e-9):
    """Greedy clustering of a root cloud into (centroid, multiplicity).

    A root of multiplicity m comes out of the companion eigensolve as a
    cloud of radius about eps^(1/m).  The centroid is polished by
    Newton iteration on the (m-1)-th derivative of the polynomial,
    where the root is simple; if that leaves a larger residual than the
    raw members carry (the cloud was really distinct simple roots), the
    members are returned individually.
    """
    out = []
    left = list(roots)
    while left:
        seed = left.pop()
        members = [seed]
        changed = True
        while changed:
            changed = False
            center = np.mean(members)
            rest = []
            for r in left:
                if abs(r - center) <= rel_radius * max(abs(r), abs(center)) + abs_radius:
                    members.append(r)
                    changed = True
                else:
                    rest.append(r)
            left = rest
        center = np.mean(members)
        m = len(members)
        if coeffs is not None and m >= 2:
            d = np.asarray(coeffs, dtype=complex)
            pall = d
            for _ in range(m - 1):
                d = d[1:] * np.arange(1, d.size)
            for _ in range(8):
                val = np.polyval(d[::-1], center)
                der = np.polyval((d[1:] * np.arange(1, d.size))[::-1], center)
                if der == 0:
                    break
                step = val / der
                center -= step
                if abs(step) < 1e-15 * max(1.0, abs(center)):
                    break
            res_refined = abs(np.polyval(pall[::-1], center))
            res_members = max(abs(np.polyval(pall[::-1], r)) for r in members)
            if res_refined > 100.0 * res_members + 1e-300:
                out.extend((r, 1) for r in members)
                continue
        out.append((center, m))
    return out


def _unitary_with_first_column(u):
    s = u.shape[0]
    k = int(np.argmax(np.abs(u)))
    cols = [u / np.linalg.norm(u)]
    for j in range(s):
        if j != k:
            cols.append(np.eye(s, dtype=complex)[:, j])
    Qm, _ = np.linalg.qr(np.column_stack(cols))
    # QR may flip the first column by a phase; undo it.
    phase = (u / np.linalg.norm(u)) @ np.conj(Qm[:, 0])
    Qm[:, 0] *= np.conj(phase) / abs(phase) if abs(phase) else 1.0
    Qm[:, 0] = u / np.linalg.norm(u)
    return Qm


def _poly_matrix_eval(coeffs, z):
    """Evaluate the polynomial part sum_k C_k z^k (Horner), one point."""
    out = np.zeros(coeffs.shape[1:], dtype=complex)
    for k in range(coeffs.shape[0] - 1, -1, -1):
        out *= z
        out += coeffs[k]
    return out


def _divide_column_by_root(colv, mu, rel_tol=1e-7):
    """Divide a polynomial column (K, s) by (zeta - mu); check remainders.

    Runs the synthetic division top-down for |mu| < 1 and bottom-up for
    |mu| >= 1; each direction keeps its error recurrence contractive.
    """
    K = colv.shape[0]
    out = np.zeros_like(colv)
    rem = np.zeros(colv.shape[1], dtype=complex)
    if abs(mu) < 1.0:
        for i in range(colv.shape[1]):
            carry = 0.0 + 0.0j
            for k in range(K - 1, 0, -1):
                carry = colv[k, i] + mu * carry
                out[k - 1, i] = carry
            rem[i] = colv[0, i] + mu * carry
    else:
        for i in range(colv.shape[1]):
            carry = 0.0 + 0.0j  # q_{-1}
            for k in range(K - 1):
                carry = (carry - colv[k, i]) / mu
                out[k, i] = carry
            rem[i] = colv[K - 1, i] - carry
    scale = np.abs(colv).max()
    if scale > 0 and np.abs(rem).max() > rel_tol * scale:
        raise FactorizationError("root extraction left a large remainder")
    return out


def _extract_one_root(coeffs, root):
    """Push one interior determinant zero (|root| < 1) to the origin.

    Mix its null vector into column 0 by a constant unitary, divide the
    column by (zeta - root) and re-insert one zeta; the net change is a
    minus-side Blaschke-type factor, so no partial index moves.
    """
    Pmu = _poly_matrix_eval(coeffs, root)
    _, _, vh = np.linalg.svd(Pmu)
    u = np.conj(vh[-1])
    mixed = np.einsum("kij,jl->kil", coeffs, _unitary_with_first_column(u))
    divided = _divide_column_by_root(mixed[:, :, 0], root)
    grown = np.zeros((mixed.shape[0] + 1,) + mixed.shape[1:], dtype=complex)
    grown[:-1] = mixed
    grown[:, :, 0] = 0.0
    grown[1:, :, 0] = divided
    return grown


def _inside_det_roots(lm, candidate_roots):
    """Interior determinant zeros (off the origin) with assignments.

    Zeros in the ambiguity band around the circle raise; far zeros and
    zeros outside are irrelevant to the reduction (their polynomial
    factor stays invertible on the closed disc and folds into the plus
    factor).  Zeros matching a candidate are reported at the exact
    candidate position: a high-multiplicity zero scatters its
    eigenvalue cloud too widely for centroids.
    """
    inner_cut, outer_cut = 0.999, 1.001
    dcoef, _dlo = _poly_trim(*laurent_det(lm))
    roots = _poly_roots(dcoef)
    queue = []
    loose = []
    for r in roots:
        host = None
        for cand in candidate_roots:
            if abs(cand) < 1.0 and abs(r - cand) <= 0.2 * max(1.0, abs(cand)):
                host = cand
                break
        if host is not None:
            queue.append(host)
        elif abs(r) < inner_cut:
            loose.append(r)
        elif abs(r) <= outer_cut:
            raise FactorizationError("determinant root too close to the unit circle")
    for center, mult in _cluster_roots(np.array(loose, dtype=complex), dcoef):
        queue.extend([center] * mult)
    return queue


def _extract_det_roots(coeffs, lo, candidate_roots=()):
    """Push every interior determinant zero to the origin.

    The zeros are located and polished once per pass from the current
    determinant and consumed in a batch; division dust can surface as
    fresh tiny zeros, which the next pass sweeps.
    """
    for _pass in range(5):
        lm = LaurentMatrix(coeffs, lo).trimmed()
        coeffs, lo = lm.coeffs, lm.lo
        queue = _inside_det_roots(lm, candidate_roots)
        if not queue:
            return coeffs, lo
        for center in queue:
            coeffs = _snap_columns(np.ascontiguousarray(coeffs))
            coeffs = _extract_one_root(coeffs, center)
        coeffs = _snap_columns(np.ascontiguousarray(coeffs))
        candidate_roots = ()
    lm = LaurentMatrix(coeffs, lo).trimmed()
    if _inside_det_roots(lm, ()):
        raise FactorizationError("interior determinant zeros survived extraction")
    return lm.coeffs, lm.lo


def _bottom_degrees(coeffs, lo, rel=SNAP_REL):
    K, s, _ = coeffs.shape
    bots = np.full(s, -1, dtype=int)
    betas = np.zeros((s, s), dtype=complex)
    for j in range(s):
        col = coeffs[:, :, j]
        scale = np.abs(col).max()
        if scale == 0.0:
            raise FactorizationError("zero column in reduction")
        mags = np.abs(col).max(axis=1)
        k0 = int(np.nonzero(mags > rel * scale)[0][0])
        bots[j] = lo + k0
        betas[:, j] = col[k0]
    return bots, betas


def birkhoff_partial_indices(lm, candidate_roots=(), max_rounds=None):
    """Partial indices of a Laurent matrix polynomial, exactly.

    After interior-root extraction the determinant is c zeta^K times a
    polynomial invertible on the closed disc; then whenever the
    per-column bottom coefficient vectors are dependent, the dependency
    is resolved into the column of lowest bottom degree using only
    nonpositive powers of zeta (legal right-side operations), raising
    that bottom degree strictly.  The sum of bottoms is bounded by the
    determinant's order K at the origin, so the loop terminates with an
    invertible bottom matrix, and the bottoms are the indices: the
    remaining factor has unit-invertible values on the closed disc.
    """
    lm = lm.trimmed()
    coeffs, lo = _extract_det_roots(lm.coeffs, lm.lo, candidate_roots)
    _dcoef, K = _poly_trim(*laurent_det(LaurentMatrix(coeffs, lo)), rel=1e-8)
    s = coeffs.shape[1]
    if max_rounds is None:
        max_rounds = 4 * (abs(K) + s * coeffs.shape[0] + 4)
    for _ in range(max_rounds):
        coeffs = _snap_columns(np.ascontiguousarray(coeffs))
        lmt = LaurentMatrix(coeffs, lo).trimmed()
        coeffs, lo = lmt.coeffs, lmt.lo
        bots, betas = _bottom_degrees(coeffs, lo)
        colnorms = np.linalg.norm(betas, axis=0)
        u, sv, vh = np.linalg.svd(betas / colnorms[None, :])
        if int(bots.sum()) == K:
            # sum of bottoms = monomial degree certifies independence:
            # a dependency would push ord_0(det) above K
            if sv[-1] < 1e-10 * sv[0]:
                raise FactorizationError("degenerate bottom matrix at full degree sum")
            return np.sort(bots)[::-1]
        if int(bots.sum()) > K:
            raise FactorizationError(
                f"bottom degrees overshoot: sum {bots.sum()} vs det degree {K}"
            )
        if sv[-1] > 1e-6 * sv[0]:
            raise FactorizationError(
                "bottom matrix numerically independent below the degree sum"
            )
        x = np.conj(vh[-1]) / colnorms
        participants = np.nonzero(np.abs(x) > 1e-10 * np.abs(x).max())[0]
        bmin = bots[participants].min()
        cands = participants[bots[participants] == bmin]
        j0 = cands[np.argmax(np.abs(x[cands]) * colnorms[cands])]
        # col_j0 += sum_j (x_j/x_j0) zeta^(b_j0 - b_j) col_j, exponents <= 0
        K0, s_, _ = coeffs.shape
        pad = int((bots - bmin).max())
        new = np.zeros((K0 + pad, s_, s_), dtype=complex)
        new[pad:] = coeffs
        new_lo = lo - pad
        for j in participants:
            if j == j0:
                continue
            shift = int(bots[j0] - bots[j])  # <= 0
            fac = x[j] / x[j0]
            sl = pad + shift
            new[sl : sl + K0, :, j0] += fac * coeffs[:, :, j]
        # the mix cancels everything at and below the pivot bottom degree:
        # enforce the designed zeros so roundoff cannot masquerade as a bottom
        cut = int(bots[j0] - new_lo)
        new[: cut + 1, :, j0] = 0.0
        norm = np.abs(new[:, :, j0]).max()
        if norm == 0.0:
            raise FactorizationError("column reduction annihilated a column")
        new[:, :, j0] /= norm
        coeffs, lo = _snap_columns(new), new_lo
    raise FactorizationError("column reduction exceeded its round budget")


def partial_indices(symbol, defect_tol=1e-10, envelope=None):
    """Partial indices of a sampled symbol via exact Birkhoff reduction.

    Uses, in order of preference: the index-equivalent reduced form,
    the exact Laurent form, or a defect-checked Fourier truncation of
    the samples.  The result always satisfies sum(kappa) = winding of
    det(samples); a mismatch is an internal failure.
    """
    candidates = ()
    if symbol.reduced is not None:
        lm, offset = symbol.reduced.laurent, symbol.reduced.offset
        candidates = symbol.reduced.candidate_roots
    elif symbol.laurent is not None:
        lm, offset = symbol.laurent, 0
    else:
        lm, offset = _truncate_symbol(symbol, defect_tol, envelope), 0
    kappa = birkhoff_partial_indices(lm, candidates) + offset
    wind = winding_number(symbol.det_samples())
    if int(kappa.sum()) != wind:
        raise FactorizationError(
            f"partial index sum {int(kappa.sum())} != det winding {wind}"
        )
    return PartialIndices.from_values(kappa)


def _truncate_symbol(symbol, defect_tol, envelope=None):
    c = np.fft.fft(symbol.samples, axis=0) / symbol.N
    m = np.fft.fftfreq(symbol.N, 1.0 / symbol.N).astype(int)
    total = np.linalg.norm(c)
    dmax = envelope if envelope is not None else symbol.N // 2 - 1
    for d in range(1, dmax + 1):
        tail = np.linalg.norm(c[np.abs(m) > d])
        if tail <= defect_tol * total:
            if d * symbol.size > 400:
                raise ApproximationError("adequate truncation degree is too large")
            K = 2 * d + 1
            out = np.zeros((K, symbol.size, symbol.size), dtype=complex)
            for k in range(symbol.N):
                if abs(m[k]) <= d:
                    out[m[k] + d] = c[k]
            return LaurentMatrix(out, -d).trimmed()
    raise ApproximationError(f"no Laurent truncation reaches defect {defect_tol}")


# ---------------------------------------------------------------------------
# Toeplitz kernel oracle
# ---------------------------------------------------------------------------


def toeplitz_kernel_indices(symbol, order=64, sv_tol=1e-6, max_scan=64):
    """Partial indices read from truncated block-Toeplitz kernel counts.

    The kernel-dimension formula dim ker T_V = sum max(-nu_j, 0) holds
    for factorizations with the minus factor on the left; transposing
    swaps the factor order while keeping the exponents, so the oracle
    works on the transposed symbol to measure the same (plus-first)
    indices the factorization code produces.  For the transposed symbol
    shifted by zeta^{-m} the kernel dimension is
    h(m) = sum_j max(m - kappa_j, 0).

    Restricting inputs to polynomial degree <= order while keeping
    every output mode (a tall section) represents the operator without
    finite-section reflection artifacts; kernel dimensions are read
    from singular values below sv_tol * sigma_max.  The increments
    h(m+1) - h(m) count the indices below each level.  Brute-force
    oracle for tests, not the production algorithm.
    """
    s = symbol.size
    c = np.fft.fft(np.swapaxes(symbol.samples, 1, 2), axis=0) / symbol.N
    m_modes = np.fft.fftfreq(symbol.N, 1.0 / symbol.N).astype(int)
    cmap = {int(mm): c[k] for k, mm in enumerate(m_modes)}
    zero = np.zeros((s, s), dtype=complex)
    # the tall section only needs rows reaching the symbol's support
    mags = np.linalg.norm(c, axis=(1, 2))
    sig = np.abs(m_modes[mags > 1e-13 * mags.max()])
    support = int(sig.max()) if sig.size else 0

    def coeff(k):
        return cmap.get(int(k), zero)

    def kernel_dim(shift):
        rows = order + support + 1
        T = np.empty((rows * s, (order + 1) * s), dtype=complex)
        for i in range(rows):
            for j in range(order + 1):
                T[i * s : (i + 1) * s, j * s : (j + 1) * s] = coeff(i - j + shift)
        sv = np.linalg.svd(T, compute_uv=False)
        top = sv[0] if sv[0] > 0 else 1.0
        small = int(np.sum(sv < sv_tol * top))
        if small:
            # a kernel count is only trusted across a clear spectral gap
            counted_max = sv[sv < sv_tol * top].max()
            uncounted_min = sv[sv >= sv_tol * top].min()
            if counted_max > 0 and uncounted_min / counted_max < 1e3:
                raise FactorizationError("Toeplitz oracle has no clear singular gap")
        return small

    wind = winding_number(symbol.det_samples())
    start = int(np.floor(wind / s))
    h = {}

    def get(m):
        if m not in h:
            h[m] = kernel_dim(m)
        return h[m]

    lo = start
    for _ in range(max_scan):
        if get(lo) == 0:
            break
        lo -= 1
    if get(lo) != 0:
        raise FactorizationError("Toeplitz oracle scan did not reach the lowest index")
    kappa = []
    prev = 0
    m = lo
    for _ in range(max_scan):
        inc = get(m + 1) - get(m)
        if inc < prev or inc > s:
            raise FactorizationError("inconsistent Toeplitz kernel increments")
        kappa.extend([m] * (inc - prev))
        prev = inc
        m += 1
        if inc == s:
            break
    if len(kappa) != s:
        raise FactorizationError("Toeplitz oracle did not recover s indices")
    pi = PartialIndices.from_values(kappa)
    if pi.total != wind:
        raise FactorizationError("Toeplitz oracle sum disagrees with det winding")
    return pi


# ---------------------------------------------------------------------------
# Reduction-chain replay
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReductionReport:
    steps: list
    det_winding: int
    kappa_gradient: PartialIndices
    kappa_closed: PartialIndices

    def to_json(self):
        return {
            "kappa": list(self.kappa_closed.kappa),
            "total": self.kappa_closed.total,
            "det_winding": self.det_winding,
            "steps": self.steps,
        }


def verify_reduction_chain(q, params, N=None, pointwise_tol=1e-8):
    """Replay the constant/one-sided reduction from G to the closed form.

    Each recorded step multiplies the gradient matrix on the right by a
    constant or a minus-side diagonal factor (or permutes rows), none
    of which moves a partial index or the determinant winding; the
    chain must land exactly on the displayed closed-form symbol, and
    the gradient-based and closed-form partial indices must agree.
    """
    N = validate_grid(N or 256)
    if np.linalg.norm(params.v) != 0.0:
        raise InvalidParamsError("reduction chain assumes a centered disc (v = 0)")
    lift = projectivize_lift(q, LiftParams(disc=params, b=1.0), N=N)
    q, params = lift.quadric, lift.params
    n = q.n
    s = 2 * n + 1
    zeta = circle_nodes(N)
    a = params.a
    w = params.w
    g = q.A @ w
    gn = g[n - 1]
    if abs(gn) < 1e-12:
        raise InvalidParamsError("normalizing component vanishes")

    G0 = build_G(q, lift).samples
    steps = []

    def record(name, Gk):
        dw = winding_number(np.linalg.det(Gk))
        steps.append({"step": name, "det_winding": int(dw)})
        return Gk

    record("gradient-matrix", G0)

    M1 = np.zeros((s, s), dtype=complex)
    M1[0, 0] = 1.0
    M1[1 : n + 1, 1 : n + 1] = np.linalg.inv(q.A.conj())
    M1[n + 1 :, n + 1 :] = np.eye(n)
    G1 = record("column-normalization", G0 @ M1)

    D2 = np.eye(s, dtype=complex)
    D2[0, 0] = 2.0
    for k in range(n + 1, 2 * n + 1):
        D2[k, k] = 1.0 / gn
    perm = [0, n, 2 * n]
    for j in range(1, n):
        perm.extend([j, n + j])
    P = np.zeros((s, s))
    for new, old in enumerate(perm):
        P[new, old] = 1.0
    G2 = record("column-scaling-row-permutation", np.einsum("ij,kjl->kil", P, G1 @ D2))

    # constant column combination: new C1 = old C_n + sum t_j old C_j, etc.
    t_const = np.conj(g) / np.conj(gn)
    V = np.zeros((s, s), dtype=complex)
    V[0, 0] = 1.0
    V[n, 1] = 1.0
    for j in range(1, n):
        V[j, 1] = t_const[j - 1]
    V[n + 1, 2] = 1.0
    for j in range(1, n):
        V[j, 2 * j + 1] = 1.0
        V[n + 1 + j, 2 * j + 2] = 1.0
    G3 = record("column-combination", G2 @ V)

    gamma = -1.0 / (2.0 * np.conj(gn))
    d4 = np.ones((N, s), dtype=complex)
    d4[:, 1] = 1.0 / (gamma * (1.0 - np.conj(a) * np.conj(zeta)))
    G4 = record("minus-side-normalization", G3 * d4[:, None, :])

    qdiag = np.ones((N, s), dtype=complex)
    tau = 1.0 - np.conj(a) * np.conj(zeta)
    qdiag[:, 1] = 1.0 / tau
    for k in range(3, s, 2):
        qdiag[:, k] = -1.0 / tau
    G5 = record("minus-side-diagonal", G4 * qdiag[:, None, :])

    B_end = np.linalg.solve(np.conj(G5), G5)
    closed = build_B(q, params, source="closed_form", N=N)
    err = np.abs(B_end - closed.samples).max()
    if err > pointwise_tol * max(1.0, np.abs(closed.samples).max()):
        raise ReductionMismatchError(f"chain endpoint deviates from closed form by {err}")

    winds = {st["det_winding"] for st in steps}
    if len(winds) != 1:
        raise ReductionMismatchError(f"determinant winding changed along the chain: {steps}")

    grad_sym = build_B(q, params, source="gradient", N=N)
    kappa_grad = partial_indices(grad_sym)
    kappa_closed = partial_indices(closed)
    if kappa_grad != kappa_closed:
        raise ReductionMismatchError(
            f"index mismatch: gradient {kappa_grad} vs closed {kappa_closed}"
        )
    bwind = winding_number(np.linalg.det(closed.samples))
    return ReductionReport(
        steps=steps,
        det_winding=int(bwind),
        kappa_gradient=kappa_grad,
        kappa_closed=kappa_closed,
    )
