"""Newton continuation of stationary discs onto perturbed hypersurfaces.

The unknowns are the truncated holomorphic Fourier coefficients of the
disc h (modes 0..M per component); the equations are the boundary
gluing rho(h) = 0 on the circle grid together with the negative Fourier
modes of zeta * lambda * (d rho / d z_j) o h for j < n, where the
positive factor lambda is rebuilt from h at every evaluation by the
Hilbert-transform construction.  The system is rank deficient by
exactly the dimension of the disc family, so Newton steps use the
minimum-norm least-squares solution; that keeps the tangent space
observable for the family-dimension diagnostics.
"""

from dataclasses import dataclass, field

import numpy as np

from .boundary_analysis import (
    circle_nodes,
    hilbert_transform,
    validate_grid,
)
from .disc import Disc, DiscParams, disc_through
from .errors import (
    DimensionAmbiguousError,
    InvalidBasisError,
    InvalidInputError,
    LiftConstructionError,
    NoConvergenceError,
    TargetInversionError,
)
from .quadric import Hyperquadric, PerturbedHypersurface, satisfies_condition_star


@dataclass(frozen=True)
class SolveConfig:
    """Discretization and Newton parameters."""

    N: int = 256
    M: int = 48
    tol: float = 1e-11
    max_iter: int = 30
    damping_min: float = 1.0 / 64.0
    fd_step: float = 1e-6
    rcond: float = 1e-8  # keeps Newton steps clear of the family's null cluster

    def __post_init__(self):
        validate_grid(self.N)
        if not 0 < self.M < self.N // 2:
            raise InvalidInputError("need 0 < M < N/2")
        if self.tol <= 0 or self.max_iter < 1 or not 0 < self.damping_min <= 1:
            raise InvalidInputError("bad solver configuration")


def _as_perturbed(m):
    if isinstance(m, Hyperquadric):
        return PerturbedHypersurface(base=m)
    return m


class _DiscSystem:
    """Residual assembly over the truncated coefficient space."""

    def __init__(self, m, cfg, pin_center=None, extra_equations=None):
        self.m = _as_perturbed(m)
        self.cfg = cfg
        self.n = self.m.n
        self.zeta = circle_nodes(cfg.N)
        self.pin_center = None if pin_center is None else np.asarray(pin_center, dtype=complex)
        self.extra_equations = extra_equations
        ncomp = self.n + 1
        self.free = np.ones((ncomp, cfg.M + 1), dtype=bool)
        if self.pin_center is not None:
            self.free[:, 0] = False

    # -- coefficient packing -------------------------------------------

    def pack(self, coeffs):
        c = coeffs[self.free]
        return np.concatenate([c.real, c.imag])

    def unpack(self, x):
        ncomp = self.n + 1
        c = np.zeros((ncomp, self.cfg.M + 1), dtype=complex)
        k = x.size // 2
        c[self.free] = x[:k] + 1j * x[k:]
        if self.pin_center is not None:
            c[:, 0] = self.pin_center
        return c

    def boundary(self, coeffs):
        spec = np.zeros((self.n + 1, self.cfg.N), dtype=complex)
        spec[:, : self.cfg.M + 1] = coeffs
        return np.fft.ifft(spec * self.cfg.N, axis=1)

    # -- residual -------------------------------------------------------

    def lift_factor(self, grad):
        # per-iteration variant of construct_regular_lift: the continuous
        # log only needs phi nonvanishing with zero winding, cheaper to
        # check than the strict half-plane separation
        phi = self.zeta * grad[:, self.n]
        scale = np.abs(phi).max()
        if scale == 0.0 or np.abs(phi).min() < 1e-12 * scale:
            raise LiftConstructionError("lift normalization component vanishes")
        ang = np.unwrap(np.angle(phi))
        if abs(ang[-1] + np.angle(phi[0] / phi[-1]) - ang[0]) > 1e-6:
            raise LiftConstructionError("normalization component winds around 0")
        U = -hilbert_transform(ang)
        lam = np.exp(U - np.log(np.abs(phi)))
        return lam, phi

    def residual(self, x):
        coeffs = self.unpack(x)
        h = self.boundary(coeffs)
        rho = self.m.eval_rho_many(h.T)
        grad = self.m.grad_rho_many(h.T)
        lam, _ = self.lift_factor(grad)
        lifted = self.zeta[None, :] * lam[None, :] * grad.T[: self.n]
        spec = np.fft.fft(lifted, axis=1) / self.cfg.N
        neg = spec[:, self.cfg.N // 2 :].reshape(-1)
        parts = [rho, neg.real, neg.imag]
        if self.extra_equations is not None:
            parts.append(np.asarray(self.extra_equations(coeffs), dtype=float))
        return np.concatenate(parts)

    def sup_norm(self, r):
        return float(np.abs(r).max())

    def jacobian(self, x):
        d = self.cfg.fd_step
        r0 = self.residual(x)
        J = np.empty((r0.size, x.size))
        for i in range(x.size):
            xp = x.copy()
            xp[i] += d
            xm = x.copy()
            xm[i] -= d
            J[:, i] = (self.residual(xp) - self.residual(xm)) / (2.0 * d)
        return J


@dataclass
class GluedDisc:
    """Converged disc on a perturbed hypersurface.

    h_coeffs holds the truncated holomorphic coefficients (n+1, M+1);
    lam the positive boundary factor of the regular lift at the
    solution; diagnostics carries residuals and iteration history.
    """

    h_coeffs: np.ndarray
    lam: np.ndarray
    config: SolveConfig
    pin_center: np.ndarray | None
    residual_sup: float
    lift_defects: np.ndarray
    iterations: int
    residual_history: list = field(default_factory=list)

    @property
    def n(self):
        return self.h_coeffs.shape[0] - 1

    def boundary_values(self, N=None):
        N = validate_grid(N or self.config.N)
        spec = np.zeros((self.h_coeffs.shape[0], N), dtype=complex)
        spec[:, : self.h_coeffs.shape[1]] = self.h_coeffs
        return np.fft.ifft(spec * N, axis=1)

    def center(self):
        return self.h_coeffs[:, 0].copy()

    def velocity(self):
        return self.h_coeffs[:, 1].copy()

    def endpoint(self):
        return self.h_coeffs.sum(axis=1)

    def to_json(self):
        return {
            "coefficients": [
                [[float(z.real), float(z.imag)] for z in row] for row in self.h_coeffs
            ],
            "residual_sup": self.residual_sup,
            "lift_defects": [float(v) for v in self.lift_defects],
            "iterations": self.iterations,
        }


def _defect_sup(system, coeffs):
    h = system.boundary(coeffs)
    grad = system.m.grad_rho_many(h.T)
    lam, _ = system.lift_factor(grad)
    lifted = system.zeta[None, :] * lam[None, :] * grad.T
    spec = np.fft.fft(lifted, axis=1) / system.cfg.N
    neg = spec[:, system.cfg.N // 2 :]
    tot = np.linalg.norm(spec, axis=1)
    tot[tot == 0] = 1.0
    return np.linalg.norm(neg, axis=1) / tot, lam


def params_to_coeffs(q, params, M):
    """Truncated coefficients of the closed-form disc."""
    return Disc(q, params, check=False).coefficients(M)


def solve_glued_disc(m, start, cfg=None, pin_center=None, extra_equations=None):
    """Newton-continue a stationary disc onto the perturbed hypersurface.

    start is a DiscParams of the base quadric (or a coefficient array).
    pin_center, when given, holds h(0) fixed at that point (hard
    constraints on the mode-0 coefficients).  extra_equations may append
    real equations evaluated on the coefficient matrix.  At epsilon = 0
    an exact disc returns unchanged with zero iterations.
    """
    m = _as_perturbed(m)
    cfg = cfg or SolveConfig()
    system = _DiscSystem(m, cfg, pin_center=pin_center, extra_equations=extra_equations)
    if isinstance(start, DiscParams):
        coeffs = params_to_coeffs(m.base, start, cfg.M)
    else:
        coeffs = np.asarray(start, dtype=complex)
        if coeffs.shape != (m.n + 1, cfg.M + 1):
            raise InvalidInputError(f"bad coefficient shape {coeffs.shape}")
    if pin_center is not None:
        coeffs = coeffs.copy()
        coeffs[:, 0] = system.pin_center
    x = system.pack(coeffs)
    r = system.residual(x)
    history = [system.sup_norm(r)]
    iters = 0
    while history[-1] >= cfg.tol:
        if iters >= cfg.max_iter:
            raise NoConvergenceError(
                f"no convergence after {iters} iterations (residual {history[-1]:.3e})",
                residual_history=history,
            )
        J = system.jacobian(x)
        step = np.linalg.lstsq(J, -r, rcond=cfg.rcond)[0]
        t = 1.0
        cur = np.linalg.norm(r)
        while True:
            try:
                r_new = system.residual(x + t * step)
                ok = np.linalg.norm(r_new) < cur * (1.0 - 1e-4 * t) or system.sup_norm(
                    r_new
                ) < cfg.tol
            except LiftConstructionError:
                ok = False
                r_new = None
            if ok:
                break
            t *= 0.5
            if t < cfg.damping_min:
                if r_new is None:
                    raise LiftConstructionError(
                        "half-plane condition failed along the Newton path"
                    )
                raise NoConvergenceError(
                    f"damping stalled at residual {history[-1]:.3e}",
                    residual_history=history,
                )
        x = x + t * step
        r = r_new
        iters += 1
        history.append(system.sup_norm(r))
    coeffs = system.unpack(x)
    defects, lam = _defect_sup(system, coeffs)
    if np.max(defects) > 10.0 * cfg.tol:
        raise NoConvergenceError(
            f"stationarity defect {np.max(defects):.3e} above tolerance",
            residual_history=history,
        )
    return GluedDisc(
        h_coeffs=coeffs,
        lam=lam,
        config=cfg,
        pin_center=system.pin_center,
        residual_sup=history[-1],
        lift_defects=defects,
        iterations=iters,
        residual_history=history,
    )


def solve_with_homotopy(m, start, cfg=None, pin_center=None, extra_equations=None):
    """solve_glued_disc with up to 4 homotopy steps in epsilon."""
    m = _as_perturbed(m)
    for schedule in ([1.0], [0.5, 1.0], [0.25, 0.5, 0.75, 1.0]):
        cur = start
        try:
            for t in schedule:
                mt = PerturbedHypersurface(base=m.base, epsilon=t * m.epsilon, terms=m.terms)
                sol = solve_glued_disc(
                    mt, cur, cfg, pin_center=pin_center, extra_equations=extra_equations
                )
                cur = sol.h_coeffs
            return sol
        except NoConvergenceError as err:
            last = err
    raise last


def family_dimension(m, sol, cfg=None, sv_cut=1e-6, gap_min=1e3):
    """Numerical null-space dimension of the linearized system at sol.

    Counts singular values below sv_cut times the largest and requires
    a spectral gap of at least gap_min across the cut; without the gap
    a DimensionAmbiguousError carries the spectrum.
    """
    m = _as_perturbed(m)
    cfg = cfg or sol.config
    system = _DiscSystem(m, cfg, pin_center=sol.pin_center)
    x = system.pack(sol.h_coeffs)
    J = system.jacobian(x)
    sv = np.linalg.svd(J, compute_uv=False)
    cut = sv_cut * sv[0]
    null = int(np.sum(sv < cut))
    if null == 0:
        raise DimensionAmbiguousError("no null directions found", singular_values=sv)
    kept_min = sv[sv >= cut].min()
    dropped_max = sv[sv < cut].max()
    if dropped_max > 0 and kept_min / dropped_max < gap_min:
        raise DimensionAmbiguousError(
            f"no clear spectral gap ({kept_min:.3e} over {dropped_max:.3e})",
            singular_values=sv,
        )
    return {"dim": null, "singular_values": sv}


def family_tangent_basis(m, sol, cfg=None):
    """Orthonormal null-space basis of the linearization at sol."""
    m = _as_perturbed(m)
    cfg = cfg or sol.config
    system = _DiscSystem(m, cfg, pin_center=sol.pin_center)
    x = system.pack(sol.h_coeffs)
    J = system.jacobian(x)
    _u, sv, vt = np.linalg.svd(J)
    cut = 1e-6 * sv[0]
    null = int(np.sum(sv < cut))
    if null == 0:
        raise InvalidBasisError("no tangent directions at the solution")
    return vt[-null:].T, system


# ---------------------------------------------------------------------------
# Fixed-center maps
# ---------------------------------------------------------------------------


def _center_disc_params(q, p0, a, direction):
    """Centered DiscParams with conj(w)^T A w / (1-|a|^2) = Re p0."""
    x0 = p0.real
    quad = float(np.real(direction.conj() @ q.A @ direction))
    if quad * x0 <= 0:
        raise InvalidInputError("direction has the wrong sign for this center")
    w = direction * np.sqrt(x0 * (1.0 - abs(a) ** 2) / quad)
    return DiscParams(y0=p0.imag, v=np.zeros(q.n, dtype=complex), w=w, a=a)


def _pinned_family_charts(q, p0, base_w, base_a):
    """Orthonormal tangent basis of the constraint surface at (w, a).

    Real coordinates (Re w, Im w, Re a, Im a); the constraint is
    conj(w)^T A w = Re p0 (1 - |a|^2).
    """
    n = q.n
    x0 = p0.real

    def to_real(w, a):
        return np.concatenate([w.real, w.imag, [a.real, a.imag]])

    def from_real(y):
        return y[:n] + 1j * y[n : 2 * n], complex(y[2 * n], y[2 * n + 1])

    def retract(y):
        w, a = from_real(y)
        if abs(a) > 0.95:
            a = 0.95 * a / abs(a)
        quad = float(np.real(w.conj() @ q.A @ w))
        target = x0 * (1.0 - abs(a) ** 2)
        if quad * target <= 0:
            raise InvalidInputError("retraction left the admissible cone")
        return w * np.sqrt(target / quad), a

    y = to_real(base_w, base_a)
    # gradient of g = conj(w)^T A w - x0 (1-|a|^2) in the real coordinates
    gw = 2.0 * (q.A @ base_w)
    grad = np.concatenate(
        [gw.real, gw.imag, [2.0 * x0 * base_a.real, 2.0 * x0 * base_a.imag]]
    )
    grad /= np.linalg.norm(grad)
    basis = []
    for e in np.eye(2 * n + 2):
        v = e - (e @ grad) * grad
        for b in basis:
            v -= (v @ b) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
    if len(basis) != 2 * n + 1:
        raise InvalidBasisError("pinned family tangent basis is rank deficient")
    return y, np.array(basis), retract, from_real


@dataclass(frozen=True)
class CenterMapJacobians:
    J_endpoint: np.ndarray
    J_velocity: np.ndarray
    sv_endpoint: np.ndarray
    sv_velocity: np.ndarray

    @property
    def endpoint_invertible(self):
        return bool(self.sv_endpoint[-1] > 1e-10 * max(1.0, self.sv_endpoint[0]))

    @property
    def velocity_injective(self):
        return bool(self.sv_velocity[-1] > 1e-10 * max(1.0, self.sv_velocity[0]))


def center_map_jacobians(m, p0, cfg=None, base_a=0.0, direction=None, delta=1e-6):
    """Jacobians of h -> (Im h0(1), h_a(1)) and h -> h'(0) on the pinned family.

    On the unperturbed quadric the family is charted analytically by
    (w, a) under the centering constraint and differentiated by central
    differences; on a perturbed hypersurface the numerical tangent basis
    of the pinned solve is mapped through the (linear) endpoint and
    velocity reads of the coefficient space.
    """
    m = _as_perturbed(m)
    q = m.base
    p0 = complex(p0)
    if not satisfies_condition_star(q, p0):
        raise InvalidInputError("center fails the admissibility condition")
    if direction is None:
        from .quadric import exists_disc_centered

        probe = np.zeros(q.n + 1, dtype=complex)
        probe[0] = p0
        res = exists_disc_centered(q, probe)
        if not res.exists:
            raise InvalidInputError("no centered disc exists at p0")
        direction = res.witness
    direction = np.asarray(direction, dtype=complex)
    base_a = complex(base_a)

    if m.epsilon == 0.0:
        params0 = _center_disc_params(q, p0, base_a, direction)
        y, basis, retract, from_real = _pinned_family_charts(q, p0, params0.w, params0.a)

        def maps(yy):
            w, a = retract(yy)
            d = Disc(q, DiscParams(y0=p0.imag, v=np.zeros(q.n), w=w, a=a), check=False)
            end = d.at(np.array(1.0 + 0.0j))
            vel = d.velocity()
            e = np.concatenate([[end[0].imag], end[1:].real, end[1:].imag])
            v = np.concatenate([vel.real, vel.imag])
            return e, v

        Je = np.empty((2 * q.n + 1, 2 * q.n + 1))
        Jv = np.empty((2 * q.n + 2, 2 * q.n + 1))
        for k, t in enumerate(basis):
            ep, vp = maps(y + delta * t)
            em, vm = maps(y - delta * t)
            Je[:, k] = (ep - em) / (2.0 * delta)
            Jv[:, k] = (vp - vm) / (2.0 * delta)
    else:
        cfg = cfg or SolveConfig()
        params0 = _center_disc_params(q, p0, base_a, direction)
        pin = np.zeros(q.n + 1, dtype=complex)
        pin[0] = p0
        sol = solve_with_homotopy(m, params0, cfg, pin_center=pin)
        basis, system = family_tangent_basis(m, sol, cfg)
        nb = basis.shape[1]
        Je = np.empty((2 * q.n + 1, nb))
        Jv = np.empty((2 * q.n + 2, nb))
        for k in range(nb):
            dc = system.unpack(basis[:, k]) - system.unpack(np.zeros(basis.shape[0]))
            de = dc.sum(axis=1)
            dv = dc[:, 1]
            Je[:, k] = np.concatenate([[de[0].imag], de[1:].real, de[1:].imag])
            Jv[:, k] = np.concatenate([dv.real, dv.imag])
    sv_e = np.linalg.svd(Je, compute_uv=False)
    sv_v = np.linalg.svd(Jv, compute_uv=False)
    return CenterMapJacobians(J_endpoint=Je, J_velocity=Jv, sv_endpoint=sv_e, sv_velocity=sv_v)


# ---------------------------------------------------------------------------
# Indicatrix sampling and jet transport
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndicatrixPoint:
    params: DiscParams | None
    velocity: np.ndarray | None
    residual: float
    error: str | None


def indicatrix_sample(m, p0, count, cfg=None, seed=0, a_max=0.5):
    """Velocity cloud h'(0) of the pinned disc family.

    Directions and pole parameters are drawn from a seeded generator;
    incompatible directions (wrong sign of the Hermitian form) and
    failed solves are reported per point rather than aborting the run.
    """
    m = _as_perturbed(m)
    q = m.base
    p0 = complex(p0)
    if not satisfies_condition_star(q, p0):
        raise InvalidInputError("center fails the admissibility condition")
    rng = np.random.default_rng(seed)
    cfg = cfg or SolveConfig()
    out = []
    pin = np.zeros(q.n + 1, dtype=complex)
    pin[0] = p0
    for _ in range(count):
        u = rng.normal(size=q.n) + 1j * rng.normal(size=q.n)
        u /= np.linalg.norm(u)
        a = a_max * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        try:
            params = _center_disc_params(q, p0, a, u)
        except InvalidInputError as err:
            out.append(IndicatrixPoint(None, None, np.nan, str(err)))
            continue
        if m.epsilon == 0.0:
            d = Disc(q, params, check=False)
            out.append(IndicatrixPoint(params, d.velocity(), 0.0, None))
            continue
        try:
            sol = solve_with_homotopy(m, params, cfg, pin_center=pin)
            out.append(IndicatrixPoint(params, sol.velocity(), sol.residual_sup, None))
        except (NoConvergenceError, LiftConstructionError) as err:
            out.append(IndicatrixPoint(params, None, np.nan, str(err)))
    return out


def _endpoint_equations(z):
    zt = np.asarray(z, dtype=complex)

    def eqs(coeffs):
        end = coeffs.sum(axis=1)
        return np.concatenate(
            [[end[0].imag - zt[0].imag], (end[1:] - zt[1:]).real, (end[1:] - zt[1:]).imag]
        )

    return eqs


def _velocity_equations(u):
    ut = np.asarray(u, dtype=complex)

    def eqs(coeffs):
        vel = coeffs[:, 1]
        return np.concatenate([(vel - ut).real, (vel - ut).imag])

    return eqs


def _disc_through_solution(m, p0, z, cfg):
    """Pinned disc whose endpoint matches z (exactly at epsilon = 0)."""
    m = _as_perturbed(m)
    q = m.base
    params = disc_through(q, p0, np.asarray(z, dtype=complex))
    if m.epsilon == 0.0:
        return params, Disc(q, params, check=False).velocity()
    pin = np.zeros(q.n + 1, dtype=complex)
    pin[0] = p0
    sol = solve_with_homotopy(
        m, params, cfg, pin_center=pin, extra_equations=_endpoint_equations(z)
    )
    return sol, sol.velocity()


def _invert_velocity(m, p0, u, cfg, tol_scale):
    """Pinned disc with h'(0) = u; inverts the velocity chart."""
    m = _as_perturbed(m)
    q = m.base
    u = np.asarray(u, dtype=complex)
    x0 = p0.real
    w = u[1:]
    if np.linalg.norm(w) < 1e-12:
        raise TargetInversionError("velocity has vanishing tangential part")
    a = u[0] / (2.0 * x0)
    if abs(a) >= 1.0 - 1e-10:
        raise TargetInversionError(f"velocity needs |a| = {abs(a)} outside the family")
    quad = float(np.real(w.conj() @ q.A @ w))
    mism = abs(quad / (1.0 - abs(a) ** 2) - x0)
    if m.epsilon == 0.0:
        if mism > 1e-8 * max(1.0, abs(x0)):
            raise TargetInversionError(
                f"velocity is off the indicatrix by {mism:.3e}; cannot invert"
            )
        params = DiscParams(y0=p0.imag, v=np.zeros(q.n), w=w, a=a)
        return params, Disc(q, params, check=False).at(np.array(1.0 + 0.0j))
    seed_w = w * np.sqrt(abs(x0 * (1.0 - abs(a) ** 2) / quad))
    seed = DiscParams(y0=p0.imag, v=np.zeros(q.n), w=seed_w, a=a)
    pin = np.zeros(q.n + 1, dtype=complex)
    pin[0] = p0
    try:
        sol = solve_with_homotopy(
            m, seed, cfg, pin_center=pin, extra_equations=_velocity_equations(u)
        )
    except (NoConvergenceError, LiftConstructionError) as err:
        raise TargetInversionError(f"velocity inversion failed: {err}")
    err = np.linalg.norm(sol.velocity() - u)
    if err > tol_scale * max(1.0, np.linalg.norm(u)):
        raise TargetInversionError(f"velocity missed by {err:.3e}")
    return sol, sol.endpoint()


def transport_jet(m_src, m_tgt, p0, dF, z, p0_target=None, cfg=None):
    """Move a boundary point through the one-jet of a biholomorphism.

    Finds the source disc through z centered at (p0, 0), pushes its
    velocity with dF, inverts the velocity chart of the target family
    centered at (p0_target, 0), and returns the endpoint of the
    resulting disc.  With identity data this is the identity map.
    """
    m_src = _as_perturbed(m_src)
    m_tgt = _as_perturbed(m_tgt)
    p0 = complex(p0)
    p0t = complex(p0_target) if p0_target is not None else p0
    dF = np.asarray(dF, dtype=complex)
    if dF.shape != (m_src.n + 1, m_src.n + 1):
        raise InvalidInputError("dF must be (n+1) x (n+1)")
    cfg = cfg or SolveConfig()
    _src, u = _disc_through_solution(m_src, p0, z, cfg)
    u_t = dF @ u
    tol_scale = max(1e-8, 10.0 * abs(m_tgt.epsilon))
    _tgt, endpoint = _invert_velocity(m_tgt, p0t, u_t, cfg, tol_scale)
    return np.asarray(endpoint, dtype=complex)
