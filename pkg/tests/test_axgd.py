import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvopt import axgd
from curvopt.axgd import (
    LineSearchError,
    SolverParams,
    SolverState,
    axgd_step,
    binary_line_search,
    iteration_budget,
    mirror_dual_grad,
    params_from_constants,
    probe_bound,
)


class Quadratic:
    """Euclidean quadratic on a 1-d ball: the gamma = 1 sanity problem."""

    def __init__(self, curv, target, R_tilde):
        self.curv, self.target, self.R_tilde = curv, np.asarray(target, float), R_tilde

    def value(self, x):
        return float(0.5 * self.curv * np.sum((x - self.target) ** 2))

    def grad(self, x):
        return self.curv * (x - self.target)


class ZeroGradient:
    R_tilde = 1.0

    def value(self, x):
        return 0.0

    def grad(self, x):
        return np.zeros_like(x)


def quad_params(t=20, eps=1e-6):
    return SolverParams(
        L_tilde=2.0, gamma_n=1.0, gamma_p=1.0, epsilon=eps, t=t, R_tilde=1.0
    )


class TestMirrorDualGrad:
    def test_interior_identity(self):
        z = np.array([0.3, -0.2])
        assert np.array_equal(mirror_dual_grad(z, 1.0), z)

    def test_radial_projection(self):
        z = np.array([2.0, 0.0])
        assert np.allclose(mirror_dual_grad(z, 1.0), [1.0, 0.0])

    @given(
        coords=st.lists(st.floats(-5, 5), min_size=2, max_size=2),
        R=st.floats(0.1, 2.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_projection_properties(self, coords, R):
        z = np.array(coords)
        p = mirror_dual_grad(z, R)
        assert np.linalg.norm(p) <= R * (1 + 1e-12)
        assert np.allclose(mirror_dual_grad(p, R), p)

    def test_argmin_against_grid(self):
        # Brute-force oracle: the projection minimizes |z - w| over the ball.
        rng = np.random.default_rng(0)
        grid = np.stack(
            np.meshgrid(np.linspace(-1, 1, 301), np.linspace(-1, 1, 301)), -1
        ).reshape(-1, 2)
        grid = grid[np.linalg.norm(grid, axis=1) <= 1.0]
        for _ in range(10):
            z = rng.uniform(-3, 3, 2)
            p = mirror_dual_grad(z, 1.0)
            best = grid[np.argmin(np.linalg.norm(grid - z, axis=1))]
            assert np.linalg.norm(z - p) <= np.linalg.norm(z - best) + 1e-9


class TestSchedule:
    def test_schedule_closed_forms(self):
        p = quad_params()
        for i in range(1, 10):
            assert p.a(i) == pytest.approx(i * p.sigma * p.gamma_n**2 * p.gamma_p / (2 * p.L_tilde))
            assert p.A(i) == pytest.approx(sum(p.a(j) for j in range(1, i + 1)), rel=1e-12)

    @given(
        L=st.floats(0.5, 500.0),
        gn=st.floats(0.01, 1.0),
        gp=st.floats(0.01, 1.0),
        i=st.integers(0, 10_000),
    )
    @settings(max_examples=300, deadline=None)
    def test_rate_hypothesis_inequality(self, L, gn, gp, i):
        # L~ a_{i+1}^2 / (gamma_n sigma) <= a_{i+1} + A_i gamma_n gamma_p
        p = SolverParams(L_tilde=L, gamma_n=gn, gamma_p=gp, epsilon=1.0, t=2, R_tilde=1.0)
        a_next = p.a(i + 1)
        lhs = L * a_next**2 / (gn * p.sigma)
        rhs = a_next + p.A(i) * gn * gp
        assert lhs <= rhs * (1 + 1e-12)

    def test_eps_hat_sums_to_half_epsilon(self):
        p = quad_params(t=40, eps=1e-3)
        total = sum(p.A(i) * p.eps_hat(i) for i in range(1, p.t)) / p.A(p.t)
        assert total == pytest.approx(p.epsilon / 2, rel=1e-12)

    def test_budget_formula(self):
        t = iteration_budget(10.0, 0.5, 0.5, 1e-4, 0.8)
        assert t == math.ceil(math.sqrt(2 * 10.0 * (1.6) ** 2 / (0.25 * 0.5 * 1e-4)))


class TestStep:
    def test_first_step_is_projected_mirror_step(self):
        f = Quadratic(2.0, [0.5], 1.0)
        p = quad_params(t=1)
        x0 = np.array([-0.3])
        state = SolverState.initial(x0)
        new, cand = axgd_step(state, p, f, 1.0)
        a1 = p.a(1)
        expected = mirror_dual_grad(x0 - (a1 / p.gamma_n) * f.grad(x0), p.R_tilde)
        assert np.allclose(new.x_t, expected, atol=1e-15)
        assert new.grad_evals == 2

    def test_run_t1_single_mirror_step(self):
        f = Quadratic(2.0, [0.5], 1.0)
        p = quad_params(t=1)
        x0 = np.array([-0.3])
        out = axgd.run(f, p, x0)
        a1 = p.a(1)
        expected = mirror_dual_grad(x0 - (a1 / p.gamma_n) * f.grad(x0), p.R_tilde)
        assert np.allclose(out, expected, atol=1e-15)

    def test_zero_gradient_fixed_point(self):
        f = ZeroGradient()
        p = quad_params(t=8)
        x0 = np.array([0.4, -0.1])
        recs = []
        out = axgd.run(f, p, x0, trace=recs.append)
        assert np.allclose(out, x0, atol=1e-15)
        assert all(np.allclose(r.x, x0) for r in recs)
        assert all(r.probes == 1 for r in recs[1:])

    def test_lambda_range_validated(self):
        f = Quadratic(2.0, [0.5], 1.0)
        p = quad_params()
        with pytest.raises(ValueError):
            axgd_step(SolverState.initial(np.array([0.0])), p, f, 1.5)

    def test_matches_hand_stepped_reference(self):
        # Independent scalar recursion of the discretization with
        # gamma_hat = 1 (valid for convex f), ten steps, bit-level match.
        f = Quadratic(1.7, [0.4], 1.0)
        p = SolverParams(
            L_tilde=1.7, gamma_n=1.0, gamma_p=1.0, epsilon=1e-9, t=10, R_tilde=1.0
        )
        x0 = np.array([-0.8])

        def proj(z):
            n = abs(float(z[0]))
            return z if n <= 1.0 else z / n

        # reference: x_{i+1} = (1-lam) x_i + lam proj(z_i - a grad f(chi));
        # lam = a_{i+1} / A_{i+1} at gamma_hat = 1.
        xs = [x0.copy()]
        x, z, A = x0.copy(), x0.copy(), 0.0
        for i in range(10):
            a = (i + 1) / (2 * 1.7)
            lam = 1.0 if i == 0 else a / (A + a)
            chi = (1 - lam) * x + lam * proj(z)
            zeta = z - a * f.grad(chi)
            x = (1 - lam) * x + lam * proj(zeta)
            z = z - a * f.grad(x)
            A += a
            xs.append(x.copy())

        recs = []
        out = axgd.run(f, p, x0, trace=recs.append)
        for rec, ref in zip(recs, xs[1:]):
            assert abs(rec.x[0] - ref[0]) < 1e-12
        assert abs(out[0] - xs[-1][0]) < 1e-12


class TestLineSearch:
    def test_convex_endpoint_succeeds_first_probe(self):
        f = Quadratic(2.0, [0.5], 1.0)
        p = quad_params(t=20)
        state = SolverState.initial(np.array([-0.6]))
        state, _ = axgd_step(state, p, f, 1.0)
        res = binary_line_search(state, p, f, p.eps_hat(1))
        assert res.probes == 1
        assert res.gamma_hat == pytest.approx(1.0)
        assert res.residual <= p.eps_hat(1)

    def test_gamma_hat_lambda_consistency(self):
        f = Quadratic(2.0, [0.5], 1.0)
        p = quad_params(t=20)
        state = SolverState.initial(np.array([-0.6]))
        state, _ = axgd_step(state, p, f, 1.0)
        res = binary_line_search(state, p, f, p.eps_hat(1))
        step = p.a(state.i + 1) / p.gamma_n
        lam_back = step / (state.A * res.gamma_hat + step)
        assert res.lam == pytest.approx(lam_back, rel=1e-12)

    def test_requires_started_state(self):
        f = Quadratic(2.0, [0.5], 1.0)
        p = quad_params()
        with pytest.raises(ValueError):
            binary_line_search(SolverState.initial(np.array([0.0])), p, f, 1e-3)

    def test_violated_assumptions_are_diagnosable(self):
        # An oscillatory objective with a wildly understated smoothness
        # constant cannot satisfy the accepted-step inequality; the search
        # must fail with diagnostic context instead of looping.
        class Wiggle:
            R_tilde = 1.0

            def value(self, x):
                return float(0.5 * np.cos(13.0 * (x[0] - 0.3)))

            def grad(self, x):
                return np.array([-6.5 * np.sin(13.0 * (x[0] - 0.3))])

        p = SolverParams(
            L_tilde=0.1, gamma_n=0.4, gamma_p=0.3, epsilon=1e-12, t=50, R_tilde=1.0
        )
        state = SolverState(i=1, x_t=np.array([-0.5]), z_t=np.array([0.9]), A=p.a(1))
        with pytest.raises(LineSearchError) as err:
            binary_line_search(state, p, Wiggle(), 1e-16)
        assert err.value.iteration == 1
        assert err.value.bracket is not None

    @pytest.mark.parametrize("sign,R", [(-1, 1.0), (1, 1.1)])
    def test_accepted_step_inequality_recheck(self, sign, R):
        # On curved instances: every accepted iterate satisfies the
        # residual condition with its own gamma_hat and eps_hat, and the
        # accepted gamma_hat stays inside [gamma_p, 1/gamma_n].
        from conftest import frechet_instance
        from curvopt import CurvatureClass, MappedObjective, make_frame
        from curvopt.geomap import deformation_constants

        space = (
            CurvatureClass.hyperbolic() if sign < 0 else CurvatureClass.spherical()
        )
        center, F = frechet_instance(space, 2, R, 4, seed=3)
        frame = make_frame(center, R)
        dc = deformation_constants(frame, F.smoothness)
        p = params_from_constants(dc, frame.R_tilde, 1e-2)
        fmap = MappedObjective(F, frame)
        recs = []
        axgd.run(fmap, p, np.zeros(2), trace=recs.append)
        f_prev = None
        for rec in recs:
            if rec.i >= 2:
                inner = float(fmap.grad(rec.x) @ (rec.x - rec.x_prev))
                lhs = rec.f_value - f_prev
                assert lhs <= rec.gamma_hat * inner + rec.eps_hat * (1 + 1e-12)
                assert dc.gamma_p <= rec.gamma_hat <= 1 / dc.gamma_n + 1e-12
            f_prev = rec.f_value

    def test_probe_counts_within_bound(self):
        from conftest import frechet_instance
        from curvopt import CurvatureClass, MappedObjective, make_frame
        from curvopt.geomap import deformation_constants

        space = CurvatureClass.spherical()
        center, F = frechet_instance(space, 2, 1.1, 4, seed=4)
        frame = make_frame(center, 1.1)
        dc = deformation_constants(frame, F.smoothness)
        p = params_from_constants(dc, frame.R_tilde, 1e-2)
        recs = []
        axgd.run(MappedObjective(F, frame), p, np.zeros(2), trace=recs.append)
        for rec in recs[1:]:
            assert rec.probes <= probe_bound(p, rec.i - 1, rec.eps_hat)


class TestRunInvariants:
    def test_feasibility_and_budget(self):
        from conftest import frechet_instance
        from curvopt import CurvatureClass, MappedObjective, make_frame
        from curvopt.geomap import deformation_constants

        space = CurvatureClass.hyperbolic()
        center, F = frechet_instance(space, 2, 1.0, 5, seed=5)
        frame = make_frame(center, 1.0)
        dc = deformation_constants(frame, F.smoothness)
        p = params_from_constants(dc, frame.R_tilde, 1e-2)
        recs = []
        axgd.run(MappedObjective(F, frame), p, np.zeros(2), trace=recs.append)
        assert max(np.linalg.norm(r.x) for r in recs) <= frame.R_tilde + 1e-12
        assert recs[-1].grad_evals == sum(2 * r.probes for r in recs)

    def test_determinism(self):
        from conftest import frechet_instance
        from curvopt import CurvatureClass, MappedObjective, make_frame
        from curvopt.geomap import deformation_constants

        space = CurvatureClass.hyperbolic()
        center, F = frechet_instance(space, 2, 1.0, 5, seed=6)
        frame = make_frame(center, 1.0)
        dc = deformation_constants(frame, F.smoothness)
        p = params_from_constants(dc, frame.R_tilde, 1e-2)

        def trajectory():
            recs = []
            axgd.run(MappedObjective(F, frame), p, np.zeros(2), trace=recs.append)
            return recs

        a, b = trajectory(), trajectory()
        assert len(a) == len(b)
        for ra, rb in zip(a, b):
            assert np.array_equal(ra.x, rb.x)
            assert ra.f_value == rb.f_value
            assert ra.lam == rb.lam

    def test_infeasible_start_rejected(self):
        f = Quadratic(2.0, [0.0], 1.0)
        with pytest.raises(ValueError):
            axgd.run(f, quad_params(), np.array([2.0]))

    @pytest.mark.parametrize("sign,R", [(-1, 1.0), (1, 1.1)])
    def test_convergence_bound_at_every_budget(self, sign, R):
        # The schedule guarantee must hold for any iteration count t, with
        # the start-to-optimum distance measured in the ball:
        # f(x_t) - f* <= 2 L~ |x0~ - x*~|^2 / (gn^2 gp t (t+1)) + eps/2.
        from conftest import frechet_instance
        from curvopt import CurvatureClass, MappedObjective, make_frame, to_ball
        from curvopt.baselines import reference_optimum
        from curvopt.geomap import deformation_constants

        space = (
            CurvatureClass.hyperbolic() if sign < 0 else CurvatureClass.spherical()
        )
        center, F = frechet_instance(space, 2, R, 4, seed=8)
        x_star, f_star = reference_optimum(F, center, R)
        frame = make_frame(center, R)
        dc = deformation_constants(frame, F.smoothness)
        fmap = MappedObjective(F, frame)
        # start at the ball edge, opposite the optimum
        xt_star = to_ball(frame, x_star)
        direction = -xt_star / np.linalg.norm(xt_star)
        x0 = 0.95 * frame.R_tilde * direction
        dist0_sq = float(np.sum((x0 - xt_star) ** 2))
        eps = 1e-3
        for t in (1, 3, 10, 30, 100, 300):
            params = params_from_constants(dc, frame.R_tilde, eps, t=t)
            out = axgd.run(fmap, params, x0)
            gap = fmap.value(out) - f_star
            bound = (
                2 * dc.L_tilde * dist0_sq / (dc.gamma_n**2 * dc.gamma_p * t * (t + 1))
                + eps / 2
            )
            assert gap <= bound * (1 + 1e-9), (t, gap, bound)
