"""SINR/SCNR metrics and the penalized max-min objective.

The fairness objective is handled through two epigraph scalars a, b bounded
above by every user SINR and target SCNR.  The exact (hinge) penalty makes
the bounds enforceable, and a log-sum-exp surrogate with temperature mu keeps
the penalized objective smooth; the hinge form is retained as a test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .manifold import ProductPoint
from .scenario import ChannelSet, ScenarioConfig

__all__ = [
    "EffectiveLinks",
    "MetricReport",
    "effective_links",
    "sinr",
    "scnr",
    "metric_report",
    "lse_smooth",
    "penalized_objective",
    "exact_penalty_objective",
    "max_violation",
    "metric_csv_header",
    "metric_csv_row",
]


@dataclass(frozen=True)
class EffectiveLinks:
    """Effective single-polarization links at one point, recomputed per point.

    ``h_eff[k]`` is the row p_k^T H_k P_tx, ``u[t, q]`` the row
    f_t^H P_rx^T G_q P_tx, and ``s_mats[q]`` the filtered echo matrix
    P_rx^T G_q P_tx W.  ``h_tp`` (H_k P_tx) and ``g_eff`` (P_rx^T G_q P_tx)
    are the shared intermediates the gradient routines reuse.
    """

    h_eff: np.ndarray   # (n_users, m_tx) complex
    u: np.ndarray       # (n_targets, n_objects, m_tx) complex
    s_mats: np.ndarray  # (n_objects, m_rx, n_streams) complex
    h_tp: np.ndarray    # (n_users, 2, m_tx) complex
    g_p: np.ndarray     # (n_objects, m_rx, 2, m_tx) complex: G_q P_tx per H/V row
    g_eff: np.ndarray   # (n_objects, m_rx, m_tx) complex


@dataclass(frozen=True)
class MetricReport:
    """Linear-scale per-user SINR and per-target SCNR with their minima."""

    sinr: np.ndarray
    scnr: np.ndarray
    min_sinr: float
    min_scnr: float


def effective_links(point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig) -> EffectiveLinks:
    """Contract the polarization 2-vectors into the dual-polarized channels."""
    channels.validate_against(cfg)
    k, mt, mr, q = cfg.n_users, cfg.m_tx, cfg.m_rx, cfg.n_objects
    h5 = channels.comm.reshape(k, 2, mt, 2)
    g5 = channels.sensing.reshape(q, mr, 2, mt, 2)

    h_tp = np.einsum("kimj,mj->kim", h5, point.p_tx)
    h_eff = np.einsum("ki,kim->km", point.p_users, h_tp)
    g_p = np.einsum("qrimj,mj->qrim", g5, point.p_tx)
    g_eff = np.einsum("ri,qrim->qrm", point.p_rx, g_p)
    u = np.einsum("rt,qrm->tqm", point.f.conj(), g_eff)
    s_mats = g_eff @ point.w
    return EffectiveLinks(h_eff=h_eff, u=u, s_mats=s_mats, h_tp=h_tp, g_p=g_p, g_eff=g_eff)


@dataclass(frozen=True)
class _Metrics:
    """Metric values plus the stream-domain intermediates shared with gradients."""

    c: np.ndarray        # (n_users, n_streams): h_eff[k] @ w_j
    d_comm: np.ndarray   # (n_users,) SINR denominators
    sinr: np.ndarray     # (n_users,)
    z: np.ndarray        # (n_targets, n_objects, n_streams): u[t,q] @ w_j
    d_rad: np.ndarray    # (n_targets,) SCNR denominators
    scnr: np.ndarray     # (n_targets,)
    f_norm_sq: np.ndarray  # (n_targets,)


def _metrics_from_links(links: EffectiveLinks, point: ProductPoint, cfg: ScenarioConfig) -> _Metrics:
    k, t = cfg.n_users, cfg.n_targets

    c = links.h_eff @ point.w
    pw = c.real**2 + c.imag**2
    own = pw[np.arange(k), np.arange(k)]
    d_comm = pw.sum(axis=1) - own + cfg.noise_user
    sinr_vals = own / d_comm

    z = links.u @ point.w
    zpow = (z.real**2 + z.imag**2).sum(axis=2)
    own_r = zpow[np.arange(t), np.arange(t)]
    f_norm_sq = (point.f.real**2 + point.f.imag**2).sum(axis=0)
    d_rad = zpow.sum(axis=1) - own_r + cfg.noise_radar * f_norm_sq
    # A zero filter gives an empty 0/0 ratio; define that target's SCNR as 0.
    safe = np.where(d_rad > 0.0, d_rad, 1.0)
    scnr_vals = np.where(d_rad > 0.0, own_r / safe, 0.0)

    return _Metrics(
        c=c, d_comm=d_comm, sinr=sinr_vals, z=z, d_rad=d_rad, scnr=scnr_vals,
        f_norm_sq=f_norm_sq,
    )


def _metrics(point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig) -> _Metrics:
    return _metrics_from_links(effective_links(point, channels, cfg), point, cfg)


def sinr(point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig, k: int) -> float:
    """SINR of user ``k`` (0-based) in linear scale."""
    if not 0 <= k < cfg.n_users:
        raise IndexError(f"user index {k} out of range [0, {cfg.n_users})")
    return float(_metrics(point, channels, cfg).sinr[k])


def scnr(point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig, t: int) -> float:
    """SCNR of target ``t`` (0-based) in linear scale; 0 for a zero filter."""
    if not 0 <= t < cfg.n_targets:
        raise IndexError(f"target index {t} out of range [0, {cfg.n_targets})")
    return float(_metrics(point, channels, cfg).scnr[t])


def metric_report(point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig) -> MetricReport:
    m = _metrics(point, channels, cfg)
    return MetricReport(
        sinr=m.sinr, scnr=m.scnr,
        min_sinr=float(m.sinr.min()), min_scnr=float(m.scnr.min()),
    )


def lse_smooth(z, mu: float):
    """Smooth surrogate mu * log(1 + exp(z / mu)) for max(z, 0).

    Evaluated as max(z, 0) + mu * log1p(exp(-|z| / mu)) so it neither
    overflows nor loses the large-z limit; mu goes down to 1e-6 in the outer
    schedule, where the naive form would overflow for any z above ~7e-4.
    """
    if mu <= 0.0:
        raise ValueError(f"smoothing temperature mu must be > 0, got {mu}")
    z = np.asarray(z, dtype=float)
    out = np.maximum(z, 0.0) + mu * np.log1p(np.exp(-np.abs(z) / mu))
    return float(out) if out.ndim == 0 else out


def _penalty_terms(m: _Metrics, a: float, b: float, mu: float) -> float:
    return float(
        np.sum(lse_smooth(a - m.sinr, mu))
        + np.sum(lse_smooth(b - m.scnr, mu))
        + lse_smooth(-a, mu)
        + lse_smooth(-b, mu)
    )


def penalized_objective(
    point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig, lam: float, mu: float
) -> float:
    """Smoothed exterior-penalty objective; smaller is better."""
    if lam <= 0.0:
        raise ValueError(f"penalty factor lam must be > 0, got {lam}")
    m = _metrics(point, channels, cfg)
    base = (cfg.rho - 1.0) * point.a - cfg.rho * point.b
    return base + lam * _penalty_terms(m, point.a, point.b, mu)


def exact_penalty_objective(
    point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig, lam: float
) -> float:
    """Nonsmooth hinge-penalty objective, the mu -> 0 limit of the smooth form."""
    m = _metrics(point, channels, cfg)
    a, b = point.a, point.b
    hinges = (
        np.sum(np.maximum(0.0, a - m.sinr))
        + np.sum(np.maximum(0.0, b - m.scnr))
        + max(0.0, -a)
        + max(0.0, -b)
    )
    return (cfg.rho - 1.0) * a - cfg.rho * b + lam * float(hinges)


def max_violation(point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig) -> float:
    """Largest violation among the epigraph and nonnegativity constraints."""
    m = _metrics(point, channels, cfg)
    return float(
        max(
            0.0,
            -point.a,
            -point.b,
            np.max(point.a - m.sinr),
            np.max(point.b - m.scnr),
        )
    )


def _db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0.0 else -math.inf


def metric_csv_header(cfg: ScenarioConfig, detailed: bool = False) -> list[str]:
    cols = ["trial", "iteration", "min_sinr_db", "min_scnr_db"]
    if detailed:
        cols += [f"sinr_db_{k}" for k in range(cfg.n_users)]
        cols += [f"scnr_db_{t}" for t in range(cfg.n_targets)]
    return cols


def metric_csv_row(
    report: MetricReport, trial: int, iteration: int, detailed: bool = False
) -> list:
    row = [trial, iteration, _db(report.min_sinr), _db(report.min_scnr)]
    if detailed:
        row += [_db(v) for v in report.sinr]
        row += [_db(v) for v in report.scnr]
    return row
