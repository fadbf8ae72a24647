import numpy as np
import pytest

from mvisolve.baselines import (
    BaselineConfig,
    fb_step,
    jx_step,
    run_baseline,
    tc_step,
    tseng_step,
    zw_step,
)
from mvisolve.linesearch import LineSearchParams
from mvisolve.operators import (
    ForwardOperator,
    box_resolvent,
    identity_forward,
    identity_resolvent,
    l1_resolvent,
    linear_forward,
    zero_forward,
)
from mvisolve.solver import (
    Inclusion,
    InertiaSchedule,
    SolverConfig,
    StoppingRule,
    TerminalStatus,
    ifb_step,
    solve,
)
from mvisolve.spaces import euclidean


def _random_monotone_linear(rng, d):
    """M = S^T S + W with W skew: <Mx, x> >= 0, generally non-symmetric."""
    S = rng.standard_normal((d, d))
    W = rng.standard_normal((d, d))
    W = 0.5 * (W - W.T)
    return S.T @ S + W


class TestFB:
    def test_pure_backward_step(self):
        u = np.array([3.0, -1.0])
        res = l1_resolvent(1.0)
        u_next, out = fb_step(u, 0.5, zero_forward(), res, euclidean(2))
        np.testing.assert_array_equal(u_next, res(u, 0.5))

    def test_pure_forward_step(self):
        u = np.array([2.0, 4.0])
        u_next, _ = fb_step(u, 0.25, identity_forward(), identity_resolvent(), euclidean(2))
        np.testing.assert_allclose(u_next, 0.75 * u)

    def test_translation_prox_case(self):
        # B = gradient of 0.5*||u - a||^2, lam = 1: input to the prox is a
        a = np.array([2.0])
        B = ForwardOperator(lambda u: u - a, label="translation")
        for u0 in ([5.0], [-3.0], [0.0]):
            u_next, _ = fb_step(np.array(u0), 1.0, B, l1_resolvent(1.0), euclidean(1))
            np.testing.assert_allclose(u_next, [1.0])  # soft(2, 1)


class TestTseng:
    def test_b_zero_reduces_to_resolvent(self):
        u = np.array([3.0])
        p = LineSearchParams(1.0, 0.5, 0.9)
        u_next, out = tseng_step(u, zero_forward(), l1_resolvent(1.0), p, euclidean(1))
        np.testing.assert_array_equal(u_next, [2.0])
        assert out.j == 0

    def test_linear_closed_form(self):
        # lam accepted at 0.5: v = 0.5u, u_next = v - lam*(Bv - Bu) = 0.75u
        u = np.array([1.0])
        p = LineSearchParams(1.0, 0.5, 0.9)
        u_next, out = tseng_step(u, identity_forward(), identity_resolvent(), p, euclidean(1))
        assert out.lam == 0.5
        np.testing.assert_allclose(u_next, [0.75])

    def test_fixed_point_is_stationary(self):
        u = np.zeros(2)
        p = LineSearchParams(1.0, 0.5, 0.9)
        u_next, _ = tseng_step(u, identity_forward(), identity_resolvent(), p, euclidean(2))
        np.testing.assert_array_equal(u_next, u)


class TestZW:
    def test_b_zero_step(self):
        # phi = u - v, delta = 1, gamma = 1: u_next = v
        u = np.array([4.0])
        u_next, out = zw_step(u, zero_forward(), l1_resolvent(1.0), 1.0, 1.0, euclidean(1))
        np.testing.assert_array_equal(u_next, [3.0])
        assert out.delta == 1.0

    def test_linear_case_matches_contraction_solver(self):
        u = np.array([1.0])
        u_next, out = zw_step(u, identity_forward(), identity_resolvent(), 0.5, 1.0, euclidean(1))
        np.testing.assert_allclose(u_next, [0.5])
        assert out.delta == pytest.approx(2.0)

    def test_bitwise_equality_with_zero_inertia_contraction(self):
        # forced common step, zero inertia: the two methods share the exact
        # arithmetic path and must agree to the last bit
        rng = np.random.default_rng(42)
        for trial in range(100):
            d = int(rng.integers(1, 9))
            M = _random_monotone_linear(rng, d)
            lam = 0.9 * 0.9 / np.linalg.norm(M, 2)  # accepted at j=0
            fwd = linear_forward(M)
            res = l1_resolvent(float(rng.uniform(0.05, 1.0)))
            gamma = float(rng.uniform(0.1, 1.9))
            u = rng.standard_normal(d) * 3
            space = euclidean(d)

            cfg = SolverConfig(
                gamma=gamma,
                linesearch=LineSearchParams(s=lam, mu=0.5, sigma=0.9),
                inertia=InertiaSchedule.constant(0.0),
                stop=StoppingRule("iter_cap_only"),
                max_iters=5,
            )
            u_ifb, out_ifb = ifb_step(u, u, 1, fwd, res, cfg, space)
            assert out_ifb.j == 0 and out_ifb.lam == lam
            u_zw, out_zw = zw_step(u, fwd, res, lam, gamma, space)
            np.testing.assert_array_equal(u_ifb, u_zw)
            assert out_ifb.delta == out_zw.delta
            assert out_ifb.phi_norm == out_zw.phi_norm


class TestTC:
    def test_hand_computed_scalar_step(self):
        # A=0, B=identity, u_prev=u_curr=1, theta=0, gamma=1, mu_tc=0.5,
        # alpha=0.5, f(x)=0.5x, armijo (1, 0.5, 0.5):
        # lam=0.5, v=0.5, phi=0.25, eta=2, z=0.5, u_next=0.25+0.25=0.5
        u = np.array([1.0])
        p = LineSearchParams(1.0, 0.5, 0.5)
        u_next, out = tc_step(
            u, u, 1, identity_forward(), identity_resolvent(), p,
            gamma=1.0, mu_tc=0.5, alpha_k=0.5, theta=0.0, eps_k=1.0,
            space=euclidean(1),
        )
        assert out.lam == 0.5
        assert out.delta == pytest.approx(2.0)  # eta
        np.testing.assert_allclose(u_next, [0.5])

    def test_equal_iterates_take_constant_inertia_branch(self):
        u = np.array([1.0])
        u_next, out = tc_step(
            u, u, 1, identity_forward(), identity_resolvent(),
            LineSearchParams(1.0, 0.5, 0.5), theta=0.37, eps_k=1.0, space=euclidean(1),
        )
        assert out.theta == 0.37

    def test_vanishing_viscosity_reduces_to_contraction_step(self):
        # alpha_k = 0, theta = 0, mu_tc = 0: u_next = w - gamma*eta*phi with
        # eta = ||w-v||^2/||phi||^2, checked term by term
        rng = np.random.default_rng(5)
        u = rng.standard_normal(3)
        p = LineSearchParams(1.0, 0.5, 0.5)
        space = euclidean(3)
        M = _random_monotone_linear(rng, 3)
        fwd = linear_forward(M)
        res = l1_resolvent(0.3)
        u_next, out = tc_step(
            u, u, 1, fwd, res, p, gamma=1.3, mu_tc=0.0, alpha_k=0.0,
            theta=0.0, eps_k=1.0, space=space,
        )
        v = res(u - out.lam * fwd(u), out.lam)
        phi = (u - v) - out.lam * (fwd(u) - fwd(v))
        eta = float((u - v) @ (u - v)) / float(phi @ phi)
        np.testing.assert_allclose(u_next, u - 1.3 * eta * phi, rtol=1e-14)

    def test_hand_computed_literal_vs_consistent_step(self):
        # scalar case, A=0, B=identity, u_prev=0, u_curr=1, theta=0.5,
        # eps=1, gamma=1, mu_tc=0.5, alpha=0.5, f(x)=x/2, armijo (1,.5,.5):
        #   inertia: theta_1 = min(1/1, 0.5) = 0.5, w = 1.5
        #   literal: search from u=1: lam=.5, v=.5; phi_scalar from w: 0.5,
        #            phi_update from u: 0.25; eta = .5*1/.25 = 2;
        #            z = 1.5 - 2*.25 = 1.0; u_next = .25 + .5 = 0.75
        #   consistent: search from w=1.5: v=.75; phi=.375; eta=2;
        #            z = .75; u_next = .25 + .375 = 0.625
        p = LineSearchParams(1.0, 0.5, 0.5)
        args = dict(
            forward=identity_forward(), resolvent=identity_resolvent(),
            armijo=p, gamma=1.0, mu_tc=0.5, alpha_k=0.5, theta=0.5, eps_k=1.0,
            space=euclidean(1),
        )
        u_prev, u_curr = np.array([0.0]), np.array([1.0])
        u_lit, out_lit = tc_step(u_prev, u_curr, 1, literal=True, **args)
        np.testing.assert_allclose(u_lit, [0.75])
        assert out_lit.theta == 0.5
        u_con, out_con = tc_step(u_prev, u_curr, 1, literal=False, **args)
        np.testing.assert_allclose(u_con, [0.625])
        assert out_con.delta == pytest.approx(2.0)

    def test_literal_mode_differs_and_is_labelled(self):
        rng = np.random.default_rng(9)
        u_prev = rng.standard_normal(3)
        u_curr = rng.standard_normal(3)
        p = LineSearchParams(1.0, 0.5, 0.5)
        space = euclidean(3)
        fwd = linear_forward(_random_monotone_linear(rng, 3))
        res = l1_resolvent(0.2)
        a, _ = tc_step(u_prev, u_curr, 2, fwd, res, p, space=space, literal=False)
        b, _ = tc_step(u_prev, u_curr, 2, fwd, res, p, space=space, literal=True)
        assert not np.array_equal(a, b)


class TestJX:
    def test_unconstrained_reduces_to_zw_with_unit_relaxation(self):
        rng = np.random.default_rng(1)
        u = rng.standard_normal(4)
        p = LineSearchParams(1.0, 0.5, 0.9)
        space = euclidean(4)
        fwd = linear_forward(_random_monotone_linear(rng, 4))
        res = identity_resolvent()  # K is the whole space
        u_jx, out_jx = jx_step(u, fwd, res, p, space)
        u_zw, out_zw = zw_step(u, fwd, res, out_jx.lam, 1.0, space)
        np.testing.assert_array_equal(u_jx, u_zw)

    def test_stationary_point_in_set(self):
        # u in K with B(u) = 0: v = u, phi = 0
        proj = box_resolvent(np.zeros(2), np.ones(2))
        u = np.array([0.5, 0.25])
        u_next, out = jx_step(u, zero_forward(), proj, LineSearchParams(), euclidean(2))
        assert out.phizero
        np.testing.assert_array_equal(u_next, u)

    def test_hand_computed_box_case(self):
        # K=[0,1], B=identity, u=2: lam=0.5, v=1, phi=0.5, alpha=2, u_next=1
        proj = box_resolvent(np.array([0.0]), np.array([1.0]))
        u = np.array([2.0])
        p = LineSearchParams(1.0, 0.5, 0.9)
        u_next, out = jx_step(u, identity_forward(), proj, p, euclidean(1))
        assert out.lam == 0.5
        assert out.delta == pytest.approx(2.0)
        np.testing.assert_allclose(u_next, [1.0])

    def test_box_reduction_matches_contraction_solver_iterate_for_iterate(self):
        # normal-cone problem: the zero-inertia contraction solver with
        # gamma=1 and the projection-type method walk the same path
        rng = np.random.default_rng(3)
        d = 4
        lo, hi = -np.ones(d), np.ones(d)
        proj = box_resolvent(lo, hi)
        fwd = linear_forward(_random_monotone_linear(rng, d))
        space = euclidean(d)
        p = LineSearchParams(1.0, 0.5, 0.9)
        cfg = SolverConfig(
            gamma=1.0,
            linesearch=p,
            inertia=InertiaSchedule.constant(0.0),
            stop=StoppingRule("iter_cap_only"),
            max_iters=1,
        )
        u_ifb = u_jx = rng.standard_normal(d) * 2
        for k in range(1, 9):
            u_ifb, out_ifb = ifb_step(u_ifb, u_ifb, k, fwd, proj, cfg, space)
            u_jx, out_jx = jx_step(u_jx, fwd, proj, p, space)
            np.testing.assert_array_equal(u_ifb, u_jx)
            if out_ifb.phizero:
                break


class TestRunBaseline:
    def _problem(self):
        return Inclusion(
            forward=ForwardOperator(lambda u: u**3, label="cubic"),
            resolvent=l1_resolvent(1.0),
            space=euclidean(2),
        )

    def test_trace_schema_is_shared(self):
        prob = self._problem()
        u = np.array([1.5, -1.0])
        stop = StoppingRule("successive_diff", 1e-9)
        for cfg in (
            BaselineConfig("fb", lam=0.05),
            BaselineConfig("tseng"),
            BaselineConfig("zw", lambda_mode="armijo", gamma=0.5),
            BaselineConfig("tc"),
        ):
            uf, tr = run_baseline(cfg, prob, u, u, stop, max_iters=400)
            assert tr.iterations >= 1
            rec = tr.records[0]
            for fieldname in ("k", "theta", "lam", "delta", "res_wv", "err", "elapsed_ns"):
                assert hasattr(rec, fieldname)
            assert tr.total_forward_evals > 0
            assert tr.total_resolvent_evals > 0

    def test_eval_counters_exact_for_fb(self):
        prob = self._problem()
        u = np.array([0.5, -0.5])
        uf, tr = run_baseline(
            BaselineConfig("fb", lam=0.1), prob, u, u,
            StoppingRule("iter_cap_only"), max_iters=7,
        )
        assert tr.total_forward_evals == 7
        assert tr.total_resolvent_evals == 7

    def test_eval_counters_exact_per_backtrack(self):
        # every search trial costs one resolvent and one forward evaluation,
        # plus one forward evaluation for the anchor point
        prob = self._problem()
        u = np.array([1.5, -1.0])
        stop = StoppingRule("iter_cap_only")
        for cfg in (BaselineConfig("tseng"), BaselineConfig("zw", lambda_mode="armijo")):
            uf, tr = run_baseline(cfg, prob, u, u, stop, max_iters=10)
            for rec in tr.records:
                assert rec.forward_evals == rec.j + 2
                assert rec.resolvent_evals == rec.j + 1
        # the viscosity method in its verbatim mode needs one extra forward
        # evaluation at the extrapolated point
        uf, tr = run_baseline(BaselineConfig("tc", literal=True), prob, u, u, stop, max_iters=10)
        for rec in tr.records:
            assert rec.forward_evals == rec.j + 3
            assert rec.resolvent_evals == rec.j + 1
        # fixed-step projection-contraction: two forwards, one resolvent
        uf, tr = run_baseline(BaselineConfig("zw", lam=0.01), prob, u, u, stop, max_iters=5)
        for rec in tr.records:
            assert rec.forward_evals == 2
            assert rec.resolvent_evals == 1

    def test_lambda_schedules(self):
        # callable schedules are honored exactly
        prob = self._problem()
        u = np.array([0.5, -0.5])
        uf, tr = run_baseline(
            BaselineConfig("fb", lam=lambda k: 0.1 / k), prob, u, u,
            StoppingRule("iter_cap_only"), max_iters=4,
        )
        np.testing.assert_allclose(tr.array("lam"), [0.1, 0.05, 0.1 / 3, 0.025])
        # the default projection-contraction schedule is k/(1+k)
        cfg = BaselineConfig("zw")
        assert [cfg.lam_at(k) for k in (1, 3)] == [0.5, 0.75]
        assert cfg.gamma == 0.5

    def test_armijo_zw_respects_delta_bounds(self):
        prob = self._problem()
        u = np.array([2.0, -2.0])
        cfg = BaselineConfig("zw", lambda_mode="armijo", gamma=1.0,
                             armijo=LineSearchParams(1.0, 0.5, 0.9))
        uf, tr = run_baseline(cfg, prob, u, u, StoppingRule("iter_cap_only"),
                              max_iters=100, check_invariants=True)
        assert tr.violations["delta_bound"] == 0
        assert tr.violations["phi_sandwich"] == 0

    def test_tseng_has_no_direction_checks(self):
        # the forward-backward-forward step carries no contraction direction,
        # so invariant counting must not flag its nan placeholder
        prob = self._problem()
        u = np.array([1.5, -1.0])
        uf, tr = run_baseline(
            BaselineConfig("tseng"), prob, u, u,
            StoppingRule("successive_diff", 1e-9),
            max_iters=100, check_invariants=True,
        )
        assert tr.total_violations == 0

    def test_zw_schedule_diverges_on_cubic(self):
        # lam_k = k/(k+1) is far too large for a cubic forward map
        prob = self._problem()
        u = np.array([3.0, -3.0])
        cfg = BaselineConfig("zw", lambda_mode="schedule", gamma=0.5)
        uf, tr = run_baseline(cfg, prob, u, u, StoppingRule("successive_diff", 1e-9),
                              max_iters=200)
        assert tr.status in (TerminalStatus.DIVERGED, TerminalStatus.ITER_CAP)

    def test_tseng_converges_on_non_lipschitz_problem(self):
        # the forward-backward-forward scheme shares the backtracking, so
        # the cubic map poses no step-size problem
        prob = self._problem()
        u = np.array([2.0, -2.0])
        uf, tr = run_baseline(
            BaselineConfig("tseng"), prob, u, u,
            StoppingRule("successive_diff", 1e-10), max_iters=800,
        )
        assert tr.status is TerminalStatus.CONVERGED
        assert np.linalg.norm(uf) <= 1e-6

    def test_jx_solves_box_variational_inequality(self):
        # B(u) = u - a with a outside the box: the solution is the
        # projection of a onto the box
        a = np.array([2.0, -3.0, 0.25])
        lo, hi = np.zeros(3), np.ones(3)
        prob = Inclusion(
            forward=ForwardOperator(lambda u: u - a, label="translation"),
            resolvent=box_resolvent(lo, hi),
            space=euclidean(3),
        )
        u0 = np.array([0.5, 0.5, 0.5])
        uf, tr = run_baseline(
            BaselineConfig("jx"), prob, u0, u0,
            StoppingRule("successive_diff", 1e-12), max_iters=300,
        )
        expected = np.clip(a, lo, hi)
        np.testing.assert_allclose(uf, expected, atol=1e-8)

    def test_invalid_method_rejected(self):
        with pytest.raises(ValueError):
            BaselineConfig("nope")
