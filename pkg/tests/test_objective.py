import math
from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from prisac.objective import (
    effective_links,
    exact_penalty_objective,
    lse_smooth,
    max_violation,
    metric_csv_header,
    metric_csv_row,
    metric_report,
    penalized_objective,
    scnr,
    sinr,
)
from prisac.scenario import ScenarioConfig, sample_scenario

from .conftest import perturbed_point
from .oracles import (
    blkdiag_rows,
    exact_penalty_oracle,
    max_violation_oracle,
    penalized_objective_oracle,
    scnr_oracle,
    sinr_oracle,
)

LAM, MU = 0.08, 1.5


class TestBruteForceEquivalence:
    """The vectorized evaluators against the straight-line loop oracles."""

    def test_metrics_match_oracle(self, tiny_cfg):
        channels = sample_scenario(tiny_cfg)
        for s in range(8):
            pt = perturbed_point(tiny_cfg, s, a=0.4 * s - 1.0, b=0.1 * s)
            for k in range(tiny_cfg.n_users):
                assert sinr(pt, channels, tiny_cfg, k) == pytest.approx(
                    sinr_oracle(pt, channels, tiny_cfg, k), rel=1e-12
                )
            for t in range(tiny_cfg.n_targets):
                assert scnr(pt, channels, tiny_cfg, t) == pytest.approx(
                    scnr_oracle(pt, channels, tiny_cfg, t), rel=1e-12
                )

    def test_objectives_match_oracle(self, tiny_cfg):
        channels = sample_scenario(tiny_cfg)
        for s in range(8):
            pt = perturbed_point(tiny_cfg, s, a=0.4 * s - 1.0, b=0.1 * s)
            assert penalized_objective(pt, channels, tiny_cfg, LAM, MU) == pytest.approx(
                penalized_objective_oracle(pt, channels, tiny_cfg, LAM, MU), rel=1e-12
            )
            assert exact_penalty_objective(pt, channels, tiny_cfg, LAM) == pytest.approx(
                exact_penalty_oracle(pt, channels, tiny_cfg, LAM), rel=1e-12
            )
            assert max_violation(pt, channels, tiny_cfg) == pytest.approx(
                max_violation_oracle(pt, channels, tiny_cfg), abs=1e-12
            )

    def test_effective_links_against_blockdiag(self, tiny_cfg):
        channels = sample_scenario(tiny_cfg)
        pt = perturbed_point(tiny_cfg, 3)
        links = effective_links(pt, channels, tiny_cfg)
        p_tx = blkdiag_rows(pt.p_tx)
        p_rx = blkdiag_rows(pt.p_rx)
        for k in range(tiny_cfg.n_users):
            np.testing.assert_allclose(
                links.h_eff[k], pt.p_users[k] @ channels.comm[k] @ p_tx, atol=1e-13
            )
        for t in range(tiny_cfg.n_targets):
            for q in range(tiny_cfg.n_objects):
                np.testing.assert_allclose(
                    links.u[t, q],
                    pt.f[:, t].conj() @ p_rx.T @ channels.sensing[q] @ p_tx,
                    atol=1e-12,
                )
        for q in range(tiny_cfg.n_objects):
            np.testing.assert_allclose(
                links.s_mats[q], p_rx.T @ channels.sensing[q] @ p_tx @ pt.w, atol=1e-12
            )


class TestMetricEdgeCases:
    def test_zero_beam_gives_zero_sinr(self, small_instance):
        cfg, channels, pt = small_instance
        w = pt.w.copy()
        w[:, 0] = 0.0
        assert sinr(replace(pt, w=w), channels, cfg, 0) == 0.0

    def test_single_user_no_interference(self):
        cfg = ScenarioConfig(
            m_tx=1, m_rx=1, n_users=1, n_radar_streams=1, n_targets=1,
            n_clutter=0, power_dbm=0.0, noise_user_dbm=0.0, noise_radar_dbm=0.0,
            n_paths=1, seed=2,
        )
        channels = sample_scenario(cfg)
        pt = perturbed_point(cfg, 1)
        w = pt.w.copy()
        w[:, 1] = 0.0  # silence the radar stream: no interference terms left
        pt = replace(pt, w=w)
        links = effective_links(pt, channels, cfg)
        expected = abs(links.h_eff[0] @ pt.w[:, 0]) ** 2 / cfg.noise_user
        assert sinr(pt, channels, cfg, 0) == pytest.approx(expected, rel=1e-12)

    def test_zero_w_gives_zero_scnr(self, small_instance):
        cfg, channels, pt = small_instance
        zeroed = replace(pt, w=np.zeros_like(pt.w))
        assert scnr(zeroed, channels, cfg, 0) == 0.0

    def test_single_target_no_clutter(self):
        cfg = ScenarioConfig(
            m_tx=2, m_rx=2, n_users=1, n_radar_streams=1, n_targets=1,
            n_clutter=0, seed=4,
        )
        channels = sample_scenario(cfg)
        pt = perturbed_point(cfg, 1)
        links = effective_links(pt, channels, cfg)
        expected = np.linalg.norm(pt.f[:, 0].conj() @ links.s_mats[0]) ** 2 / (
            cfg.noise_radar * np.linalg.norm(pt.f[:, 0]) ** 2
        )
        assert scnr(pt, channels, cfg, 0) == pytest.approx(expected, rel=1e-12)

    def test_zero_filter_defined_as_zero(self, small_instance):
        cfg, channels, pt = small_instance
        f = pt.f.copy()
        f[:, 1] = 0.0
        assert scnr(replace(pt, f=f), channels, cfg, 1) == 0.0

    def test_index_range_checks(self, small_instance):
        cfg, channels, pt = small_instance
        with pytest.raises(IndexError):
            sinr(pt, channels, cfg, cfg.n_users)
        with pytest.raises(IndexError):
            scnr(pt, channels, cfg, -1)


class TestInvariances:
    def test_metrics_invariant_to_beam_phase(self, small_instance):
        cfg, channels, pt = small_instance
        w = pt.w.copy()
        w[:, 2] *= np.exp(1.3j)
        rotated = replace(pt, w=w)
        r0 = metric_report(pt, channels, cfg)
        r1 = metric_report(rotated, channels, cfg)
        np.testing.assert_allclose(r1.sinr, r0.sinr, rtol=1e-10)
        np.testing.assert_allclose(r1.scnr, r0.scnr, rtol=1e-10)

    def test_scnr_invariant_to_filter_scale(self, small_instance):
        cfg, channels, pt = small_instance
        f = pt.f.copy()
        f[:, 0] *= -3.7
        assert scnr(replace(pt, f=f), channels, cfg, 0) == pytest.approx(
            scnr(pt, channels, cfg, 0), rel=1e-10
        )

    def test_objective_monotone_in_single_sinr(self, small_instance):
        # Boosting one user's channel raises only that SINR; phi must not rise.
        cfg, channels, pt = small_instance
        phi0 = penalized_objective(pt, channels, cfg, LAM, MU)
        comm = channels.comm.copy()
        comm[1] *= 1.5
        boosted = replace(channels, comm=comm)
        assert sinr(pt, boosted, cfg, 1) > sinr(pt, channels, cfg, 1)
        assert penalized_objective(pt, boosted, cfg, LAM, MU) <= phi0

    def test_objective_monotone_in_single_scnr(self, small_instance):
        # The best receive filter raises only SCNR_t (filters are decoupled).
        cfg, channels, pt = small_instance
        links = effective_links(pt, channels, cfg)
        t = 0
        a_mat = links.s_mats[t] @ links.s_mats[t].conj().T
        b_mat = sum(
            links.s_mats[q] @ links.s_mats[q].conj().T
            for q in range(cfg.n_objects)
            if q != t
        ) + cfg.noise_radar * np.eye(cfg.m_rx)
        _, vecs = sla.eigh(a_mat, b_mat)
        f = pt.f.copy()
        f[:, t] = vecs[:, -1]
        improved = replace(pt, f=f)
        assert scnr(improved, channels, cfg, t) >= scnr(pt, channels, cfg, t)
        assert penalized_objective(improved, channels, cfg, LAM, MU) <= penalized_objective(
            pt, channels, cfg, LAM, MU
        )


class TestLseSmooth:
    def test_at_origin(self):
        assert lse_smooth(0.0, 1.0) == pytest.approx(math.log(2.0), rel=1e-15)

    def test_large_argument_no_overflow(self):
        assert lse_smooth(1000.0, 0.1) == 1000.0

    def test_rejects_nonpositive_mu(self):
        with pytest.raises(ValueError):
            lse_smooth(0.0, 0.0)
        with pytest.raises(ValueError):
            lse_smooth(0.0, -1.0)

    @given(
        z=st.floats(-1e3, 1e3),
        mu=st.sampled_from([1.5, 0.1, 1e-3, 1e-6]),
    )
    @settings(max_examples=200, deadline=None)
    def test_gap_bound(self, z, mu):
        val = lse_smooth(z, mu)
        gap = val - max(z, 0.0)
        assert math.isfinite(val)
        assert 0.0 <= gap <= mu * math.log(2.0) + 1e-18
        # strict positivity holds wherever the true gap mu*log1p(exp(-|z|/mu))
        # is not absorbed below one ulp of max(z, 0) by the final addition
        true_gap = mu * math.log1p(math.exp(-abs(z) / mu)) if abs(z) / mu < 700 else 0.0
        if true_gap > 8.0 * np.spacing(max(abs(z), 1.0)):
            assert gap > 0.0

    def test_matches_naive_form_where_safe(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            z = rng.uniform(-30.0, 30.0)
            mu = rng.uniform(0.05, 3.0)
            naive = mu * math.log1p(math.exp(z / mu))
            assert lse_smooth(z, mu) == pytest.approx(naive, rel=1e-14)


class TestPenaltyObjectives:
    def test_rho_one_drops_linear_a_term(self, small_instance):
        # at rho = 1 a change in `a` moves phi only through the smooth penalties
        cfg, channels, pt = small_instance
        cfg1 = replace(cfg, rho=1.0)
        rep = metric_report(pt, channels, cfg1)
        a1, a2 = 0.3, 1.1
        diff = penalized_objective(
            replace(pt, a=a2), channels, cfg1, LAM, MU
        ) - penalized_objective(replace(pt, a=a1), channels, cfg1, LAM, MU)
        expected = LAM * (
            np.sum(lse_smooth(a2 - rep.sinr, MU) - lse_smooth(a1 - rep.sinr, MU))
            + lse_smooth(-a2, MU)
            - lse_smooth(-a1, MU)
        )
        assert diff == pytest.approx(expected, rel=1e-12)

    def test_feasible_point_has_no_hinge_terms(self, small_instance):
        cfg, channels, pt = small_instance
        rep = metric_report(pt, channels, cfg)
        feasible = replace(pt, a=rep.min_sinr / 2, b=rep.min_scnr / 2)
        expected = (cfg.rho - 1.0) * feasible.a - cfg.rho * feasible.b
        assert exact_penalty_objective(feasible, channels, cfg, LAM) == pytest.approx(
            expected, rel=1e-12
        )

    def test_epigraph_violation_priced_by_hinges(self, small_instance):
        cfg, channels, pt = small_instance
        rep = metric_report(pt, channels, cfg)
        delta = 0.75
        feasible = replace(pt, a=rep.min_sinr, b=0.0)
        above = replace(pt, a=rep.min_sinr + delta, b=0.0)
        jump = exact_penalty_objective(above, channels, cfg, LAM) - exact_penalty_objective(
            feasible, channels, cfg, LAM
        )
        hinges = float(np.sum(np.maximum(0.0, rep.min_sinr + delta - rep.sinr)))
        assert hinges >= delta
        assert jump == pytest.approx((cfg.rho - 1.0) * delta + LAM * hinges, rel=1e-12)

    def test_smooth_tends_to_exact_penalty(self, small_instance):
        cfg, channels, pt = small_instance
        mu = 1e-8
        bound = LAM * (cfg.n_users + cfg.n_targets + 2) * 1e-7
        assert abs(
            penalized_objective(pt, channels, cfg, LAM, mu)
            - exact_penalty_objective(pt, channels, cfg, LAM)
        ) <= bound

    def test_gap_bounded_by_per_term_smoothing_sum(self, small_instance):
        cfg, channels, pt = small_instance
        for mu in (1.5, 0.3, 1e-2):
            gap = penalized_objective(pt, channels, cfg, LAM, mu) - exact_penalty_objective(
                pt, channels, cfg, LAM
            )
            assert 0.0 < gap <= LAM * (cfg.n_users + cfg.n_targets + 2) * mu * math.log(2.0)

    def test_rejects_bad_parameters(self, small_instance):
        cfg, channels, pt = small_instance
        with pytest.raises(ValueError):
            penalized_objective(pt, channels, cfg, 0.0, MU)
        with pytest.raises(ValueError):
            penalized_objective(pt, channels, cfg, LAM, 0.0)


class TestMaxViolation:
    def test_slack_point_is_zero(self, small_instance):
        cfg, channels, pt = small_instance
        rep = metric_report(pt, channels, cfg)
        slack = replace(pt, a=rep.min_sinr / 2, b=rep.min_scnr / 2)
        assert max_violation(slack, channels, cfg) == 0.0

    def test_epigraph_excess_measured(self, small_instance):
        cfg, channels, pt = small_instance
        rep = metric_report(pt, channels, cfg)
        above = replace(pt, a=rep.min_sinr + 2.0, b=0.0)
        assert max_violation(above, channels, cfg) == pytest.approx(2.0, rel=1e-12)

    def test_negativity_measured(self, small_instance):
        cfg, channels, pt = small_instance
        rep = metric_report(pt, channels, cfg)
        below = replace(pt, a=-1.0, b=min(0.5, rep.min_scnr / 2))
        assert max_violation(below, channels, cfg) == pytest.approx(1.0, rel=1e-12)


class TestReporting:
    def test_report_minima(self, small_instance):
        cfg, channels, pt = small_instance
        rep = metric_report(pt, channels, cfg)
        assert rep.min_sinr == rep.sinr.min()
        assert rep.min_scnr == rep.scnr.min()
        assert np.all(rep.sinr >= 0) and np.all(np.isfinite(rep.sinr))

    def test_csv_row_shapes(self, small_instance):
        cfg, channels, pt = small_instance
        rep = metric_report(pt, channels, cfg)
        header = metric_csv_header(cfg)
        row = metric_csv_row(rep, trial=3, iteration=7)
        assert header == ["trial", "iteration", "min_sinr_db", "min_scnr_db"]
        assert len(row) == len(header)
        detailed = metric_csv_row(rep, 3, 7, detailed=True)
        assert len(detailed) == len(metric_csv_header(cfg, detailed=True))
        assert row[2] == pytest.approx(10 * math.log10(rep.min_sinr))
