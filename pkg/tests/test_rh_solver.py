import numpy as np
import pytest

from statdisc import (
    Disc,
    DiscParams,
    Hyperquadric,
    PerturbedHypersurface,
    SolveConfig,
    center_map_jacobians,
    family_dimension,
    indicatrix_sample,
    solve_glued_disc,
    solve_with_homotopy,
    transport_jet,
    verify_gluing,
)
from statdisc.errors import (
    LiftConstructionError,
    NoConvergenceError,
    TargetInversionError,
)
from statdisc.rh_solver import _center_disc_params, params_to_coeffs

SPHERE = Hyperquadric(n=1, A=np.array([[1.0]]))
FLAT = PerturbedHypersurface(base=SPHERE)
QUARTIC = PerturbedHypersurface(base=SPHERE, epsilon=1e-3, terms={(0, 0, 4, 0): 1.0})
CFG = SolveConfig(N=128, M=32)
START = DiscParams(y0=0.1, v=[0.0], w=[1.0], a=0.25 + 0.1j)


class TestSolve:
    def test_unperturbed_fixed_point(self):
        sol = solve_glued_disc(FLAT, START, CFG)
        assert sol.iterations == 0
        assert sol.residual_sup < 1e-14
        ref = params_to_coeffs(SPHERE, START, CFG.M)
        assert np.abs(sol.h_coeffs - ref).max() < 1e-13

    def test_perturbed_quartic(self):
        sol = solve_glued_disc(QUARTIC, START, CFG)
        assert sol.residual_sup < 1e-11
        assert sol.iterations <= 8
        rep = verify_gluing(QUARTIC, sol.boundary_values())
        assert rep.max_residual < 1e-11
        assert rep.lift_defect < 1e-10
        assert np.max(sol.lift_defects) < 1e-10
        assert np.all(sol.lam > 0)

    def test_far_perturbation_fails(self):
        far = PerturbedHypersurface(base=SPHERE, epsilon=10.0, terms={(0, 0, 4, 0): 1.0})
        with pytest.raises((NoConvergenceError, LiftConstructionError)):
            solve_glued_disc(far, START, CFG)

    def test_residual_certificate_on_perturbed_solution(self):
        m = PerturbedHypersurface(
            base=SPHERE, epsilon=1e-3, terms={(0, 0, 3, 0): 1.0, (0, 2, 0, 1): -0.4}
        )
        sol = solve_with_homotopy(m, START, CFG)
        rep = verify_gluing(m, sol.boundary_values())
        assert rep.max_residual < 1e-11 and rep.lift_defect < 1e-10

    def test_pinned_center_held(self):
        pin = np.array([1.0, 0.0], dtype=complex)
        p = DiscParams(y0=0.0, v=[0.0], w=[1.0], a=0.2)
        sol = solve_glued_disc(QUARTIC, p, CFG, pin_center=pin)
        assert np.abs(sol.center() - pin).max() == 0.0
        assert sol.residual_sup < 1e-11


class TestFamilyDimension:
    def test_unpinned_n1(self):
        sol = solve_glued_disc(FLAT, START, CFG)
        assert family_dimension(FLAT, sol, CFG)["dim"] == 7

    def test_pinned_n1(self):
        pin = np.array([1.0, 0.0], dtype=complex)
        p = DiscParams(y0=0.0, v=[0.0], w=[1.0], a=0.2)
        sol = solve_glued_disc(FLAT, p, CFG, pin_center=pin)
        assert family_dimension(FLAT, sol, CFG)["dim"] == 3

    def test_perturbed_n1(self):
        sol = solve_glued_disc(QUARTIC, START, CFG)
        fd = family_dimension(QUARTIC, sol, CFG)
        assert fd["dim"] == 7
        sv = fd["singular_values"]
        kept = sv[sv >= 1e-6 * sv[0]].min()
        dropped = sv[sv < 1e-6 * sv[0]].max()
        assert kept / dropped > 1e3

    def test_unpinned_n2(self):
        q2 = Hyperquadric(n=2, A=np.diag([1.0, 1.5]))
        m2 = PerturbedHypersurface(base=q2)
        p2 = DiscParams(y0=0.0, v=[0.0, 0.0], w=[1.0, 0.4 - 0.2j], a=0.2 + 0.1j)
        cfg = SolveConfig(N=128, M=24)
        sol = solve_glued_disc(m2, p2, cfg)
        assert family_dimension(m2, sol, cfg)["dim"] == 11


class TestCenterMaps:
    def test_invertible_at_unit_center(self):
        cm = center_map_jacobians(FLAT, 1.0)
        assert cm.endpoint_invertible
        assert cm.velocity_injective
        assert cm.sv_endpoint[-1] > 0.1

    def test_endpoint_degenerates_toward_quadric(self):
        svs = [center_map_jacobians(FLAT, x0).sv_endpoint[-1] for x0 in (1.0, 0.1, 0.01)]
        assert svs[0] > svs[1] > svs[2]

    def test_velocity_jacobian_pattern_at_origin_pole(self):
        # at (w, a) = (1, 0) the map d(h'(0)) = (2 x0 a', w') decouples:
        # the a'-directions drive the first component with slope 2 x0 and
        # the tangential w'-direction drives the second with slope 1
        # (the radial w'-direction is normal to the centering constraint)
        cm = center_map_jacobians(FLAT, 1.0, base_a=0.0, direction=np.array([1.0 + 0j]))
        images = [np.round(c, 6) for c in cm.J_velocity.T]
        # velocity rows: (Re v0, Re v1, Im v0, Im v1)
        def matches(col, target):
            return np.abs(np.abs(col) - target).max() < 1e-6

        assert any(matches(c, [2, 0, 0, 0]) for c in images)
        assert any(matches(c, [0, 0, 2, 0]) for c in images)
        assert any(matches(c, [0, 0, 0, 1]) for c in images)

    def test_perturbed_jacobians(self):
        cfg = SolveConfig(N=128, M=32)
        cm = center_map_jacobians(QUARTIC, 1.0, cfg)
        assert cm.endpoint_invertible and cm.velocity_injective


class TestIndicatrix:
    def test_flat_cloud_closed_form(self):
        pts = indicatrix_sample(FLAT, 1.0, 8, CFG, seed=11)
        ok = [p for p in pts if p.velocity is not None]
        assert len(ok) == 8
        for p in ok:
            a, w = p.params.a, p.params.w
            assert abs(p.velocity[0] - 2.0 * a * 1.0) < 1e-12
            assert np.abs(p.velocity[1:] - w).max() < 1e-12

    def test_zero_pole_samples_have_flat_first_component(self):
        params = _center_disc_params(SPHERE, 1.0 + 0j, 0.0, np.array([0.6 + 0.8j]))
        vel = Disc(SPHERE, params, check=False).velocity()
        assert abs(vel[0]) < 1e-14
        assert abs(abs(vel[1]) - 1.0) < 1e-12  # |w| = 1 for x0 = 1, a = 0

    def test_spec_half_pole_value(self):
        params = _center_disc_params(SPHERE, 1.0 + 0j, 0.5, np.array([1.0 + 0j]))
        vel = Disc(SPHERE, params, check=False).velocity()
        assert abs(vel[0] - 1.0) < 1e-14
        assert abs(vel[1] - np.sqrt(3.0) / 2.0) < 1e-14

    def test_perturbed_cloud_continuity(self):
        cfg = SolveConfig(N=128, M=40)
        flat = indicatrix_sample(FLAT, 1.0, 6, cfg, seed=5, a_max=0.45)
        pert = indicatrix_sample(QUARTIC, 1.0, 6, cfg, seed=5, a_max=0.45)
        pairs = [
            (a.velocity, b.velocity)
            for a, b in zip(flat, pert)
            if a.velocity is not None and b.velocity is not None
        ]
        assert len(pairs) >= 5
        scale = max(np.linalg.norm(v0) for v0, _ in pairs)
        for v0, v1 in pairs:
            assert np.linalg.norm(v1 - v0) < 10 * QUARTIC.epsilon * max(1.0, scale)


class TestTransport:
    def test_identity(self):
        z = np.array([2.0, np.sqrt(2.0)], dtype=complex)
        out = transport_jet(FLAT, FLAT, 1.0, np.eye(2), z)
        assert np.abs(out - z).max() < 1e-9

    def test_rotation_automorphism(self):
        th = 0.8
        z = np.array([2.0, np.sqrt(2.0)], dtype=complex)
        dF = np.diag([1.0, np.exp(1j * th)])
        out = transport_jet(FLAT, FLAT, 1.0, dF, z)
        assert np.abs(out - np.array([z[0], np.exp(1j * th) * z[1]])).max() < 1e-9

    def test_perturbed_identity_within_epsilon(self):
        cfg = SolveConfig(N=128, M=40)
        z = np.array([2.0, np.sqrt(2.0)], dtype=complex)
        out = transport_jet(QUARTIC, QUARTIC, 1.0, np.eye(2), z, cfg=cfg)
        assert np.abs(out - z).max() < 10 * QUARTIC.epsilon

    def test_off_indicatrix_velocity_rejected(self):
        with pytest.raises(TargetInversionError):
            from statdisc.rh_solver import _invert_velocity

            _invert_velocity(FLAT, 1.0 + 0j, np.array([0.5, 2.0 + 0j]), CFG, 1e-8)
