"""Euclidean and Riemannian gradients of the penalized objective.

All complex gradients follow the convention  d(phi) = Re<G, dX>,  i.e.
G = d(phi)/d(Re X) + j * d(phi)/d(Im X); the quotient-rule formulas below carry
their factor 2 under that convention.  A central finite-difference oracle over
every real degree of freedom provides the independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .manifold import ProductPoint, TangentVector, project_to_tangent
from .objective import (
    EffectiveLinks,
    _metrics,
    _metrics_from_links,
    _Metrics,
    effective_links,
    penalized_objective,
)
from .scenario import ChannelSet, ScenarioConfig

__all__ = [
    "GradientWeights",
    "gradient_weights",
    "grad_w",
    "grad_f",
    "grad_p_user",
    "grad_p_tx",
    "grad_p_rx",
    "grad_ab",
    "euclidean_gradient",
    "riemannian_gradient",
    "finite_difference_gradient",
    "block_relative_errors",
    "logistic",
]


def logistic(x):
    """Numerically stable logistic 1 / (1 + exp(-x)); underflows to 0, never NaN."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GradientWeights:
    """Per-constraint chain-rule weights: alpha for users, beta for targets."""

    alpha: np.ndarray  # (n_users,)
    beta: np.ndarray   # (n_targets,)


def gradient_weights(
    point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig, lam: float, mu: float
) -> GradientWeights:
    """Weights lam * logistic((a - SINR_k)/mu) and lam * logistic((b - SCNR_t)/mu)."""
    if lam <= 0.0 or mu <= 0.0:
        raise ValueError("lam and mu must be > 0")
    links = effective_links(point, channels, cfg)
    m = _metrics_from_links(links, point, cfg)
    return _weights_from_metrics(m, point, lam, mu)


def _weights_from_metrics(m: _Metrics, point: ProductPoint, lam: float, mu: float) -> GradientWeights:
    return GradientWeights(
        alpha=lam * logistic((point.a - m.sinr) / mu),
        beta=lam * logistic((point.b - m.scnr) / mu),
    )


# ---------------------------------------------------------------------------
# Stream-domain coefficient tables shared by all design-variable gradients.

def _sinr_coef(m: _Metrics, cfg: ScenarioConfig) -> np.ndarray:
    """coef[k, j] such that  grad_{w_j} SINR_k = conj(h_eff[k]) * coef[k, j]."""
    k = cfg.n_users
    coef = (-2.0 * m.sinr / m.d_comm)[:, None] * m.c
    coef[np.arange(k), np.arange(k)] = (2.0 / m.d_comm) * m.c[np.arange(k), np.arange(k)]
    return coef


def _scnr_coef(m: _Metrics, cfg: ScenarioConfig) -> np.ndarray:
    """omega[t, q] such that grad_W SCNR_t = sum_q omega[t,q] conj(u[t,q])^T z[t,q,:].

    Rows of zero-filter targets are zeroed; their SCNR is the constant 0.
    """
    t = cfg.n_targets
    live = m.d_rad > 0.0
    d_safe = np.where(live, m.d_rad, 1.0)
    omega = np.where(live, -2.0 * m.scnr / d_safe, 0.0)[:, None] * np.ones(cfg.n_objects)
    omega[np.arange(t), np.arange(t)] = np.where(live, 2.0 / d_safe, 0.0)
    return omega


def _assemble_design_gradient(
    point: ProductPoint,
    channels: ChannelSet,
    cfg: ScenarioConfig,
    links: EffectiveLinks,
    m: _Metrics,
    alpha: np.ndarray,
    beta: np.ndarray,
):
    """Chain-rule gradients of  -sum_k alpha_k SINR_k - sum_t beta_t SCNR_t
    with respect to W, F and all polarization blocks."""
    k, t, mt, mr = cfg.n_users, cfg.n_targets, cfg.m_tx, cfg.m_rx
    q = cfg.n_objects
    w, f = point.w, point.f
    coef = _sinr_coef(m, cfg)
    omega = _scnr_coef(m, cfg)
    a_coef = alpha[:, None] * coef        # (K, S)
    bo = beta[:, None] * omega            # (T, Q)
    zc = m.z.conj()

    # W block
    g_w = -(links.h_eff.conj().T @ a_coef)
    g_w -= np.einsum("tq,tqm,tqs->ms", bo, links.u.conj(), m.z)

    # F block: columns -beta_t [ sum_q omega[t,q] S_q conj(z[t,q]) - (2 SCNR/D) sig_r^2 f_t ]
    live = m.d_rad > 0.0
    gamma = np.where(live, 2.0 * m.scnr / np.where(live, m.d_rad, 1.0), 0.0)
    g_f = -np.einsum("tq,qms,tqs->mt", bo, links.s_mats, zc)
    g_f += (beta * gamma * cfg.noise_radar) * f

    # user polarization block: -alpha_k Re( sum_j s_all[k,:,j] conj(coef[k,j]) )
    s_all = links.h_tp @ w  # (K, 2, S)
    g_pu = -np.einsum("kis,ks->ki", s_all, a_coef.conj()).real

    # transmit polarization block
    h5 = channels.comm.reshape(k, 2, mt, 2)
    eta = np.einsum("ki,kimj->kmj", point.p_users, h5)          # (K, Mt, 2)
    scal = a_coef.conj() @ w.T                                   # (K, Mt)
    g_ptx = -np.einsum("km,kmj->mj", scal, eta).real
    g4 = channels.sensing.reshape(q, 2 * mr, mt, 2)
    r_rows = (f.conj().T[:, :, None] * point.p_rx[None, :, :]).reshape(t, 2 * mr)
    d_tens = np.einsum("tr,qrmj->tqmj", r_rows, g4)              # (T, Q, Mt, 2)
    zw = np.einsum("tqs,ms->tqm", zc, w)                         # (T, Q, Mt)
    g_ptx -= np.einsum("tq,tqm,tqmj->mj", bo, zw, d_tens).real

    # receive polarization block
    v = np.einsum("qrim,ms->qris", links.g_p, w)                 # (Q, Mr, 2, S)
    y = np.einsum("tqs,qris->tqri", zc, v)                       # (T, Q, Mr, 2)
    g_prx = -np.einsum("tq,rt,tqri->ri", bo, f.conj(), y).real

    return g_w, g_f, g_pu, g_ptx, g_prx


def grad_w(
    point: ProductPoint, links: EffectiveLinks, weights: GradientWeights, cfg: ScenarioConfig
) -> np.ndarray:
    """Euclidean gradient block for the beamformer W."""
    m = _metrics_from_links(links, point, cfg)
    coef = _sinr_coef(m, cfg)
    omega = _scnr_coef(m, cfg)
    g = -(links.h_eff.conj().T @ (weights.alpha[:, None] * coef))
    g -= np.einsum("tq,tqm,tqs->ms", weights.beta[:, None] * omega, links.u.conj(), m.z)
    return g


def grad_f(
    point: ProductPoint, links: EffectiveLinks, weights: GradientWeights, cfg: ScenarioConfig
) -> np.ndarray:
    """Euclidean gradient block for the receive filters F (zero for zero filters)."""
    m = _metrics_from_links(links, point, cfg)
    omega = _scnr_coef(m, cfg)
    live = m.d_rad > 0.0
    gamma = np.where(live, 2.0 * m.scnr / np.where(live, m.d_rad, 1.0), 0.0)
    g = -np.einsum("tq,qms,tqs->mt", weights.beta[:, None] * omega, links.s_mats, m.z.conj())
    g += (weights.beta * gamma * cfg.noise_radar) * point.f
    return g


def grad_p_user(
    point: ProductPoint,
    channels: ChannelSet,
    links: EffectiveLinks,
    weights: GradientWeights,
    cfg: ScenarioConfig,
    k: int,
) -> np.ndarray:
    """Euclidean gradient 2-vector for user k's polarization combiner."""
    if not 0 <= k < cfg.n_users:
        raise IndexError(f"user index {k} out of range [0, {cfg.n_users})")
    m = _metrics_from_links(links, point, cfg)
    coef = _sinr_coef(m, cfg)
    s_all = links.h_tp[k] @ point.w  # (2, S)
    return -weights.alpha[k] * (s_all @ coef[k].conj()).real


def grad_p_tx(
    point: ProductPoint,
    channels: ChannelSet,
    links: EffectiveLinks,
    weights: GradientWeights,
    cfg: ScenarioConfig,
    m_idx: int,
) -> np.ndarray:
    """Euclidean gradient 2-vector for transmit antenna ``m_idx``'s combiner."""
    if not 0 <= m_idx < cfg.m_tx:
        raise IndexError(f"transmit antenna index {m_idx} out of range [0, {cfg.m_tx})")
    m = _metrics_from_links(links, point, cfg)
    _, _, _, g_ptx, _ = _assemble_design_gradient(
        point, channels, cfg, links, m, weights.alpha, weights.beta
    )
    return g_ptx[m_idx]


def grad_p_rx(
    point: ProductPoint,
    channels: ChannelSet,
    links: EffectiveLinks,
    weights: GradientWeights,
    cfg: ScenarioConfig,
    m_idx: int,
) -> np.ndarray:
    """Euclidean gradient 2-vector for receive antenna ``m_idx``'s combiner."""
    if not 0 <= m_idx < cfg.m_rx:
        raise IndexError(f"receive antenna index {m_idx} out of range [0, {cfg.m_rx})")
    m = _metrics_from_links(links, point, cfg)
    _, _, _, _, g_prx = _assemble_design_gradient(
        point, channels, cfg, links, m, weights.alpha, weights.beta
    )
    return g_prx[m_idx]


def grad_ab(
    point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig, lam: float, mu: float
) -> tuple[float, float]:
    """Euclidean gradients of the two epigraph scalars."""
    if lam <= 0.0 or mu <= 0.0:
        raise ValueError("lam and mu must be > 0")
    m = _metrics(point, channels, cfg)
    w = _weights_from_metrics(m, point, lam, mu)
    g_a = (cfg.rho - 1.0) + float(np.sum(w.alpha)) - lam * logistic(-point.a / mu)
    g_b = -cfg.rho + float(np.sum(w.beta)) - lam * logistic(-point.b / mu)
    return g_a, g_b


def euclidean_gradient(
    point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig, lam: float, mu: float
) -> TangentVector:
    """All ambient gradient blocks of the penalized objective at ``point``.

    Effective links and the chain-rule weights are computed once and shared
    across blocks.
    """
    if lam <= 0.0 or mu <= 0.0:
        raise ValueError("lam and mu must be > 0")
    links = effective_links(point, channels, cfg)
    m = _metrics_from_links(links, point, cfg)
    wts = _weights_from_metrics(m, point, lam, mu)
    g_w, g_f, g_pu, g_ptx, g_prx = _assemble_design_gradient(
        point, channels, cfg, links, m, wts.alpha, wts.beta
    )
    g_a = (cfg.rho - 1.0) + float(np.sum(wts.alpha)) - lam * logistic(-point.a / mu)
    g_b = -cfg.rho + float(np.sum(wts.beta)) - lam * logistic(-point.b / mu)
    return TangentVector(w=g_w, p_tx=g_ptx, p_rx=g_prx, p_users=g_pu, f=g_f, a=g_a, b=g_b)


def riemannian_gradient(
    point: ProductPoint, channels: ChannelSet, cfg: ScenarioConfig, lam: float, mu: float
) -> TangentVector:
    """Tangent-space projection of the Euclidean gradient."""
    return project_to_tangent(point, euclidean_gradient(point, channels, cfg, lam, mu))


# ---------------------------------------------------------------------------
# Finite-difference oracle.

def finite_difference_gradient(
    point: ProductPoint,
    channels: ChannelSet,
    cfg: ScenarioConfig,
    lam: float,
    mu: float,
    h: float = 1e-6,
) -> TangentVector:
    """Central differences of the penalized objective over every real DOF.

    Complex entries are perturbed independently in their real and imaginary
    parts and reassembled as G = d/dRe + j * d/dIm, matching the analytic
    convention.  Intended as a verification oracle, not for production use.
    """
    if h <= 0.0:
        raise ValueError(f"finite-difference step must be > 0, got {h}")

    def phi(p: ProductPoint) -> float:
        return penalized_objective(p, channels, cfg, lam, mu)

    def central(name: str, base: np.ndarray, idx: int, part: complex) -> float:
        hi = base.copy().ravel()
        hi[idx] += h * part
        lo = base.copy().ravel()
        lo[idx] -= h * part
        shape = base.shape
        return (
            phi(replace(point, **{name: hi.reshape(shape)}))
            - phi(replace(point, **{name: lo.reshape(shape)}))
        ) / (2.0 * h)

    def fd_block(name: str) -> np.ndarray:
        base = getattr(point, name)
        if np.iscomplexobj(base):
            g_re = np.array([central(name, base, i, 1.0) for i in range(base.size)])
            g_im = np.array([central(name, base, i, 1.0j) for i in range(base.size)])
            return (g_re + 1j * g_im).reshape(base.shape)
        g = np.array([central(name, base, i, 1.0) for i in range(base.size)])
        return g.reshape(base.shape)

    g_a = (phi(replace(point, a=point.a + h)) - phi(replace(point, a=point.a - h))) / (2.0 * h)
    g_b = (phi(replace(point, b=point.b + h)) - phi(replace(point, b=point.b - h))) / (2.0 * h)
    return TangentVector(
        w=fd_block("w"),
        p_tx=fd_block("p_tx"),
        p_rx=fd_block("p_rx"),
        p_users=fd_block("p_users"),
        f=fd_block("f"),
        a=g_a,
        b=g_b,
    )


def block_relative_errors(analytic: TangentVector, reference: TangentVector) -> dict:
    """Per-block relative deviation ||G_an - G_ref|| / (1 + ||G_ref||)."""
    out = {}
    for name in ("w", "p_tx", "p_rx", "p_users", "f"):
        ga = getattr(analytic, name)
        gr = getattr(reference, name)
        out[name] = float(np.linalg.norm(ga - gr) / (1.0 + np.linalg.norm(gr)))
    for name in ("a", "b"):
        ga = getattr(analytic, name)
        gr = getattr(reference, name)
        out[name] = abs(ga - gr) / (1.0 + abs(gr))
    return out
