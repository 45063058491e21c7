import math
from dataclasses import replace

import numpy as np
import pytest

from prisac.gradients import (
    GradientWeights,
    block_relative_errors,
    euclidean_gradient,
    finite_difference_gradient,
    grad_ab,
    grad_f,
    grad_p_rx,
    grad_p_tx,
    grad_p_user,
    grad_w,
    gradient_weights,
    logistic,
    riemannian_gradient,
)
from prisac.manifold import inner_product, norm, project_to_tangent, retract
from prisac.objective import effective_links, metric_report, penalized_objective
from prisac.scenario import ScenarioConfig, sample_scenario

from .conftest import perturbed_point

LAM, MU = 0.08, 1.5


def zero_weights(cfg):
    return GradientWeights(alpha=np.zeros(cfg.n_users), beta=np.zeros(cfg.n_targets))


class TestWeights:
    def test_active_constraint_gives_half_lambda(self, small_instance):
        cfg, channels, pt = small_instance
        rep = metric_report(pt, channels, cfg)
        at = replace(pt, a=float(rep.sinr[0]))
        w = gradient_weights(at, channels, cfg, LAM, MU)
        assert w.alpha[0] == pytest.approx(LAM / 2, rel=1e-12)

    def test_deep_slack_underflows_cleanly(self, small_instance):
        cfg, channels, pt = small_instance
        slack = replace(pt, a=-1e6)
        w = gradient_weights(slack, channels, cfg, LAM, 1e-6)
        assert np.all(w.alpha == 0.0) and not np.any(np.isnan(w.alpha))

    def test_one_temperature_above_constraint(self, small_instance):
        # alpha = lam * logistic(1) when a sits exactly mu above the SINR
        cfg, channels, pt = small_instance
        rep = metric_report(pt, channels, cfg)
        at = replace(pt, a=float(rep.sinr[1]) + MU)
        w = gradient_weights(at, channels, cfg, 0.08, MU)
        assert w.alpha[1] == pytest.approx(0.08 * 0.7310585786300049, rel=1e-10)

    def test_bounds(self, small_instance):
        cfg, channels, pt = small_instance
        w = gradient_weights(pt, channels, cfg, LAM, MU)
        assert np.all(w.alpha >= 0) and np.all(w.alpha <= LAM)
        assert np.all(w.beta >= 0) and np.all(w.beta <= LAM)

    def test_logistic_stability(self):
        assert logistic(0.0) == 0.5
        assert logistic(-800.0) == 0.0
        assert logistic(800.0) == 1.0
        assert not np.any(np.isnan(logistic(np.array([-1e9, 0.0, 1e9]))))


class TestBlockGradients:
    def test_zero_weights_zero_blocks(self, small_instance):
        cfg, channels, pt = small_instance
        links = effective_links(pt, channels, cfg)
        w0 = zero_weights(cfg)
        assert np.all(grad_w(pt, links, w0, cfg) == 0)
        assert np.all(grad_f(pt, links, w0, cfg) == 0)
        assert np.all(grad_p_user(pt, channels, links, w0, cfg, 0) == 0)
        assert np.all(grad_p_tx(pt, channels, links, w0, cfg, 0) == 0)
        assert np.all(grad_p_rx(pt, channels, links, w0, cfg, 0) == 0)

    def test_single_user_column_formula(self):
        # One live user, silent radar stream: the own-beam column reduces to
        # -alpha * (2 / sigma^2) * h (h^H w).
        cfg = ScenarioConfig(
            m_tx=3, m_rx=2, n_users=1, n_radar_streams=1, n_targets=1,
            n_clutter=0, seed=6,
        )
        channels = sample_scenario(cfg)
        pt = perturbed_point(cfg, 2)
        w = pt.w.copy()
        w[:, 1] = 0.0
        pt = replace(pt, w=w)
        links = effective_links(pt, channels, cfg)
        weights = GradientWeights(alpha=np.array([0.3]), beta=np.zeros(1))
        g = grad_w(pt, links, weights, cfg)
        h = links.h_eff[0].conj()
        expected = -0.3 * (2.0 / cfg.noise_user) * h * (links.h_eff[0] @ pt.w[:, 0])
        np.testing.assert_allclose(g[:, 0], expected, rtol=1e-12)

    def test_scalar_filter_has_zero_gradient(self):
        # T=1, C=0, M_rx=1: SCNR does not depend on the scalar filter at all.
        cfg = ScenarioConfig(
            m_tx=2, m_rx=1, n_users=1, n_radar_streams=1, n_targets=1,
            n_clutter=0, seed=8,
        )
        channels = sample_scenario(cfg)
        pt = perturbed_point(cfg, 3)
        links = effective_links(pt, channels, cfg)
        weights = GradientWeights(alpha=np.zeros(1), beta=np.array([0.4]))
        g = grad_f(pt, links, weights, cfg)
        assert np.linalg.norm(g) < 1e-12

    def test_zero_w_zero_filter_gradient(self, small_instance):
        cfg, channels, pt = small_instance
        zeroed = replace(pt, w=np.zeros_like(pt.w))
        links = effective_links(zeroed, channels, cfg)
        weights = GradientWeights(
            alpha=np.full(cfg.n_users, 0.1), beta=np.full(cfg.n_targets, 0.1)
        )
        assert np.linalg.norm(grad_f(zeroed, links, weights, cfg)) < 1e-14

    def test_zero_filter_gives_zero_column_and_prx(self, small_instance):
        cfg, channels, pt = small_instance
        f = np.zeros_like(pt.f)
        dead = replace(pt, f=f)
        links = effective_links(dead, channels, cfg)
        weights = GradientWeights(
            alpha=np.zeros(cfg.n_users), beta=np.full(cfg.n_targets, 0.2)
        )
        assert np.all(grad_f(dead, links, weights, cfg) == 0)
        for m in range(cfg.m_rx):
            assert np.all(grad_p_rx(dead, channels, links, weights, cfg, m) == 0)

    def test_index_validation(self, small_instance):
        cfg, channels, pt = small_instance
        links = effective_links(pt, channels, cfg)
        w = zero_weights(cfg)
        with pytest.raises(IndexError):
            grad_p_user(pt, channels, links, w, cfg, cfg.n_users)
        with pytest.raises(IndexError):
            grad_p_tx(pt, channels, links, w, cfg, cfg.m_tx)
        with pytest.raises(IndexError):
            grad_p_rx(pt, channels, links, w, cfg, -1)


class TestFiniteDifferenceAgreement:
    def test_all_blocks_match_fd(self, small_instance):
        cfg, channels, pt = small_instance
        for mu in (MU, 1e-2):
            analytic = euclidean_gradient(pt, channels, cfg, LAM, mu)
            fd = finite_difference_gradient(pt, channels, cfg, LAM, mu)
            errs = block_relative_errors(analytic, fd)
            assert max(errs.values()) < 1e-6, errs

    def test_secondary_fd_step_agrees(self, small_instance):
        # a larger step guards against cancellation-dominated agreement at h=1e-6
        cfg, channels, pt = small_instance
        analytic = euclidean_gradient(pt, channels, cfg, LAM, MU)
        fd = finite_difference_gradient(pt, channels, cfg, LAM, MU, h=1e-5)
        assert max(block_relative_errors(analytic, fd).values()) < 1e-6

    def test_block_functions_match_assembled(self, small_instance):
        cfg, channels, pt = small_instance
        links = effective_links(pt, channels, cfg)
        weights = gradient_weights(pt, channels, cfg, LAM, MU)
        g = euclidean_gradient(pt, channels, cfg, LAM, MU)
        np.testing.assert_allclose(grad_w(pt, links, weights, cfg), g.w, rtol=1e-12)
        np.testing.assert_allclose(grad_f(pt, links, weights, cfg), g.f, rtol=1e-12)
        for k in range(cfg.n_users):
            np.testing.assert_allclose(
                grad_p_user(pt, channels, links, weights, cfg, k), g.p_users[k], rtol=1e-12
            )
        for m in range(cfg.m_tx):
            np.testing.assert_allclose(
                grad_p_tx(pt, channels, links, weights, cfg, m), g.p_tx[m], rtol=1e-12
            )
        for m in range(cfg.m_rx):
            np.testing.assert_allclose(
                grad_p_rx(pt, channels, links, weights, cfg, m), g.p_rx[m], rtol=1e-12
            )
        g_a, g_b = grad_ab(pt, channels, cfg, LAM, MU)
        assert (g_a, g_b) == (g.a, g.b)

    def test_ab_limits(self, small_instance):
        cfg, channels, pt = small_instance
        far = replace(pt, a=1e9, b=pt.b)
        g_a, _ = grad_ab(far, channels, cfg, LAM, 0.1)
        assert g_a == pytest.approx((cfg.rho - 1.0) + cfg.n_users * LAM, rel=1e-12)

    def test_ab_rho_one(self, small_instance):
        cfg, channels, pt = small_instance
        cfg1 = replace(cfg, rho=1.0)
        weights = gradient_weights(pt, channels, cfg1, LAM, MU)
        g_a, _ = grad_ab(pt, channels, cfg1, LAM, MU)
        expected = float(np.sum(weights.alpha)) - LAM * logistic(-pt.a / MU)
        assert g_a == pytest.approx(expected, rel=1e-12)

    def test_slack_point_gradient_limits(self, small_instance):
        cfg, channels, pt = small_instance
        rep = metric_report(pt, channels, cfg)
        slack = replace(pt, a=rep.min_sinr / 2, b=rep.min_scnr / 2)
        g = euclidean_gradient(slack, channels, cfg, LAM, 1e-9)
        assert np.linalg.norm(g.w) < 1e-12
        assert np.linalg.norm(g.f) < 1e-12
        assert g.a == pytest.approx(cfg.rho - 1.0, abs=1e-12)
        assert g.b == pytest.approx(-cfg.rho, abs=1e-12)

    def test_fd_order_of_accuracy(self, small_instance):
        # central differences: halving h shrinks the a-derivative error ~4x
        cfg, channels, pt = small_instance
        exact, _ = grad_ab(pt, channels, cfg, LAM, MU)

        def fd_a(h):
            hi = penalized_objective(replace(pt, a=pt.a + h), channels, cfg, LAM, MU)
            lo = penalized_objective(replace(pt, a=pt.a - h), channels, cfg, LAM, MU)
            return (hi - lo) / (2 * h)

        e1 = abs(fd_a(1e-2) - exact)
        e2 = abs(fd_a(5e-3) - exact)
        assert e2 < e1 / 2.5

    def test_determinism(self, small_instance):
        cfg, channels, pt = small_instance
        g1 = euclidean_gradient(pt, channels, cfg, LAM, MU)
        g2 = euclidean_gradient(pt, channels, cfg, LAM, MU)
        for name in ("w", "p_tx", "p_rx", "p_users", "f"):
            assert np.array_equal(getattr(g1, name), getattr(g2, name))
        assert (g1.a, g1.b) == (g2.a, g2.b)


class TestRiemannianGradient:
    def test_tangency(self, small_instance):
        cfg, channels, pt = small_instance
        g = riemannian_gradient(pt, channels, cfg, LAM, MU)
        assert abs(np.vdot(pt.w, g.w).real) < 1e-10
        for name in ("p_tx", "p_rx", "p_users"):
            rows_p = getattr(pt, name)
            rows_g = getattr(g, name)
            assert np.max(np.abs(np.sum(rows_p * rows_g, axis=1))) < 1e-10

    def test_flat_blocks_equal_euclidean(self, small_instance):
        cfg, channels, pt = small_instance
        amb = euclidean_gradient(pt, channels, cfg, LAM, MU)
        rie = riemannian_gradient(pt, channels, cfg, LAM, MU)
        assert np.array_equal(amb.f, rie.f)
        assert (amb.a, amb.b) == (rie.a, rie.b)

    def test_projection_is_nonexpansive(self, small_instance):
        cfg, channels, pt = small_instance
        amb = euclidean_gradient(pt, channels, cfg, LAM, MU)
        rie = riemannian_gradient(pt, channels, cfg, LAM, MU)
        assert norm(rie) <= norm(amb) + 1e-12

    def test_directional_derivative_slope(self, small_instance):
        cfg, channels, pt = small_instance
        g = riemannian_gradient(pt, channels, cfg, LAM, MU)
        phi0 = penalized_objective(pt, channels, cfg, LAM, MU)
        t = 1e-5
        slope = (penalized_objective(retract(pt, g, t), channels, cfg, LAM, MU) - phi0) / t
        assert slope == pytest.approx(-inner_product(g, g), rel=1e-2)

    def test_phase_equivariance_of_w_columns(self, small_instance):
        cfg, channels, pt = small_instance
        theta = 0.9
        w = pt.w.copy()
        w[:, 1] *= np.exp(1j * theta)
        rotated = replace(pt, w=w)
        g0 = euclidean_gradient(pt, channels, cfg, LAM, MU)
        g1 = euclidean_gradient(rotated, channels, cfg, LAM, MU)
        np.testing.assert_allclose(
            g1.w[:, 1], np.exp(1j * theta) * g0.w[:, 1], atol=1e-10
        )
        np.testing.assert_allclose(g1.w[:, 0], g0.w[:, 0], atol=1e-10)

    def test_fd_rejects_bad_step(self, small_instance):
        cfg, channels, pt = small_instance
        with pytest.raises(ValueError):
            finite_difference_gradient(pt, channels, cfg, LAM, MU, h=0.0)
