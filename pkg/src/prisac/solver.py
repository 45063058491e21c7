"""Penalized Riemannian gradient descent with an exact-penalty outer loop.

The inner loop performs projected gradient descent on the product manifold
with Armijo backtracking and an adaptive initial step.  The outer loop anneals
the smoothing temperature, tightens the gradient and violation tolerances, and
raises the penalty factor whenever the worst constraint violation exceeds its
current allowance.  Two reduced modes provide the in-framework baselines:
frozen polarization vectors, and a sum-utility objective without the fairness
epigraph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .gradients import _assemble_design_gradient, euclidean_gradient
from .manifold import (
    DegenerateRetractionError,
    ProductPoint,
    TangentVector,
    feasibility_residual,
    inner_product,
    point_distance,
    project_to_tangent,
    retract,
)
from .objective import (
    _metrics,
    _metrics_from_links,
    effective_links,
    max_violation,
    metric_report,
    penalized_objective,
)
from .scenario import ChannelSet, ScenarioConfig

__all__ = [
    "Hyperparams",
    "InnerRecord",
    "OuterRecord",
    "InnerRun",
    "SolveTrace",
    "LineSearchError",
    "armijo_search",
    "next_tau_init",
    "prmgd_inner",
    "ep_prmgd",
    "solve_fixed_polarization",
    "solve_sum_objective",
    "hyperparams_from_mapping",
    "DEFAULT_HYPERPARAMS",
    "DESK_HYPERPARAMS",
]


class LineSearchError(RuntimeError):
    """Raised when no backtracking step satisfies the sufficient-decrease test."""


@dataclass(frozen=True)
class Hyperparams:
    """Penalty/smoothing schedule constants and loop controls."""

    lambda0: float = 0.08
    mu0: float = 1.5
    eps0: float = 1e-2
    sigma0: float = 0.1
    decay_lambda: float = 0.75
    decay_mu: float = 0.5
    decay_eps: float = 0.6
    decay_sigma: float = 0.7
    mu_min: float = 1e-6
    eps_min: float = 1e-6
    sigma_min: float = 1e-5
    o_tol: float = 1e-6
    i_inner: int = 150
    i_outer: int = 25
    armijo_c: float = 1e-4
    armijo_beta: float = 0.5
    tau_init0: float = 1.0

    def __post_init__(self) -> None:
        for name in ("lambda0", "mu0", "eps0", "sigma0", "mu_min", "eps_min",
                     "sigma_min", "o_tol", "tau_init0"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")
        for name in ("decay_lambda", "decay_mu", "decay_eps", "decay_sigma",
                     "armijo_c", "armijo_beta"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie strictly in (0, 1)")
        if self.mu_min > self.mu0 or self.eps_min > self.eps0 or self.sigma_min > self.sigma0:
            raise ValueError("floors must not exceed initial values")
        if self.i_inner < 1 or self.i_outer < 1:
            raise ValueError("iteration caps must be >= 1")


DEFAULT_HYPERPARAMS = Hyperparams()

# Reduced-scale runs need a larger initial penalty: the smoothed objective is
# bounded in the epigraph scalars only while K * lam > 1 - rho and
# T * lam > rho, so lam0 must clear 1 / min(K, T) over the whole trade-off
# range (0.25 at K = T = 4; the full-scale default 0.08 clears its own
# K = T = 8 threshold).  The 2.4x margin also keeps the constraint weights
# differentiated at the sweep extremes instead of saturating toward lam.
DESK_HYPERPARAMS = replace(DEFAULT_HYPERPARAMS, lambda0=0.6)


def hyperparams_from_mapping(mapping: dict, base: Hyperparams = DEFAULT_HYPERPARAMS) -> Hyperparams:
    """Build hyperparameters from string key/value pairs; unknown keys raise."""
    known = {f.name for f in fields(Hyperparams)}
    updates = {}
    for key, raw in mapping.items():
        if key not in known:
            raise ValueError(
                f"unknown hyperparams key '{key}'; valid keys: {', '.join(sorted(known))}"
            )
        updates[key] = int(raw) if key in ("i_inner", "i_outer") else float(raw)
    return replace(base, **updates)


@dataclass(frozen=True)
class InnerRecord:
    """One accepted descent step."""

    outer: int
    inner: int
    phi_before: float
    phi_after: float
    grad_norm: float
    grad_norm_sq: float
    tau: float
    backtracks: int


@dataclass(frozen=True)
class OuterRecord:
    """State after one outer iteration: schedule values, violation, metrics."""

    outer: int
    lam: float
    mu: float
    eps: float
    vtol: float
    v_max: float
    min_sinr: float
    min_scnr: float
    a: float
    b: float
    displacement: float
    inner_steps: int
    stalled: bool
    exit_grad_norm: float


@dataclass
class InnerRun:
    """Inner-loop fragment: accepted-step records plus exit diagnostics."""

    records: list = field(default_factory=list)
    steps: int = 0
    stalled: bool = False
    exit_grad_norm: float = math.inf
    phi_final: float = math.nan


@dataclass
class SolveTrace:
    inner: list = field(default_factory=list)
    outer: list = field(default_factory=list)


def next_tau_init(tau_accepted: float, m_i: int) -> float:
    """Adapt the next initial step from this step's backtrack count."""
    if tau_accepted <= 0.0:
        raise ValueError(f"accepted step must be > 0, got {tau_accepted}")
    if m_i == 0:
        return 2.0 * tau_accepted
    if m_i == 1:
        return tau_accepted
    return 0.5 * tau_accepted


def _armijo(point, value_fn, grad, tau_init, c, beta, m_max, phi0, gn2, post=None):
    """Backtracking search for phi(ret(x, g, tau)) <= phi(x) - c tau ||g||^2."""
    if gn2 == 0.0:
        cand = retract(point, grad, tau_init)
        if post is not None:
            cand = post(cand)
        return cand, tau_init, 0, value_fn(cand)
    tau = tau_init
    for m in range(m_max + 1):
        try:
            cand = retract(point, grad, tau)
            if post is not None:
                cand = post(cand)
            phi_new = value_fn(cand)
            if phi_new <= phi0 - c * tau * gn2:
                return cand, tau, m, phi_new
        except DegenerateRetractionError:
            pass  # zero candidate block: treat as a failed step and shrink tau
        tau *= beta
    raise LineSearchError(
        f"no sufficient decrease within {m_max} backtracks (tau_init={tau_init:g})"
    )


def armijo_search(
    point: ProductPoint,
    channels: ChannelSet,
    cfg: ScenarioConfig,
    lam: float,
    mu: float,
    grad: TangentVector,
    tau_init: float,
    *,
    c: float = 1e-4,
    beta: float = 0.5,
    m_max: int = 50,
):
    """Armijo step on the penalized objective; returns (point, tau, backtracks)."""
    if tau_init <= 0.0:
        raise ValueError(f"tau_init must be > 0, got {tau_init}")
    phi0 = penalized_objective(point, channels, cfg, lam, mu)
    gn2 = inner_product(grad, grad)
    cand, tau, m, _ = _armijo(
        point,
        lambda p: penalized_objective(p, channels, cfg, lam, mu),
        grad, tau_init, c, beta, m_max, phi0, gn2,
    )
    return cand, tau, m


def _descend(point, value_fn, rgrad_fn, eps, i_max, tau_init, c, beta,
             outer_index=0, post=None, on_record=None):
    """Generic inner loop; returns (point, run, final tau_init)."""
    run = InnerRun()
    phi0 = value_fn(point)
    while True:
        grad = rgrad_fn(point)
        gn2 = inner_product(grad, grad)
        gn = math.sqrt(max(gn2, 0.0))
        run.exit_grad_norm = gn
        if gn <= eps or run.steps >= i_max:
            break
        try:
            cand, tau, m, phi_new = _armijo(
                point, value_fn, grad, tau_init, c, beta, 50, phi0, gn2, post
            )
        except LineSearchError:
            run.stalled = True
            break
        rec = InnerRecord(
            outer=outer_index, inner=run.steps, phi_before=phi0, phi_after=phi_new,
            grad_norm=gn, grad_norm_sq=gn2, tau=tau, backtracks=m,
        )
        run.records.append(rec)
        if on_record is not None:
            on_record(rec)
        point = cand
        phi0 = phi_new
        tau_init = next_tau_init(tau, m)
        run.steps += 1
    run.phi_final = phi0
    return point, run, tau_init


def _zero_polarization(g: TangentVector) -> TangentVector:
    return replace(
        g,
        p_tx=np.zeros_like(g.p_tx),
        p_rx=np.zeros_like(g.p_rx),
        p_users=np.zeros_like(g.p_users),
    )


def prmgd_inner(
    start: ProductPoint,
    channels: ChannelSet,
    cfg: ScenarioConfig,
    lam: float,
    mu: float,
    eps: float,
    i_inner: int,
    tau_init: float,
    *,
    outer_index: int = 0,
    armijo_c: float = 1e-4,
    armijo_beta: float = 0.5,
    freeze_polarization: bool = False,
    on_record=None,
):
    """Inner manifold gradient descent at fixed (lam, mu).

    Iterates gradient / projection / Armijo step / retraction until the
    Riemannian gradient norm falls to ``eps`` or ``i_inner`` steps are taken.
    A line-search failure ends the loop with the stall flag set.  With
    ``freeze_polarization`` the polarization gradient blocks are zeroed and the
    blocks re-pinned after every retraction.
    """

    def value_fn(p):
        return penalized_objective(p, channels, cfg, lam, mu)

    def rgrad_fn(p):
        g = euclidean_gradient(p, channels, cfg, lam, mu)
        if freeze_polarization:
            g = _zero_polarization(g)
        return project_to_tangent(p, g)

    post = None
    if freeze_polarization:
        frozen = (start.p_tx, start.p_rx, start.p_users)

        def post(p):
            return replace(p, p_tx=frozen[0], p_rx=frozen[1], p_users=frozen[2])

    return _descend(
        start, value_fn, rgrad_fn, eps, i_inner, tau_init, armijo_c, armijo_beta,
        outer_index=outer_index, post=post, on_record=on_record,
    )


def ep_prmgd(
    cfg: ScenarioConfig,
    channels: ChannelSet,
    hyper: Hyperparams,
    start: ProductPoint,
    *,
    freeze_polarization: bool = False,
    on_record=None,
):
    """Full exact-penalty solve; returns the final point and its trace.

    Each outer iteration warm-starts the inner loop from the previous iterate
    (the adapted initial step carries over as well), then decays mu/eps and the
    violation allowance, and raises the penalty factor if the measured worst
    violation exceeds the freshly decayed allowance.  The loop ends once the
    iterate displacement drops below ``o_tol`` with mu and the allowance at
    their floors, or at the outer iteration cap.  A stalled inner loop counts
    as zero displacement.
    """
    res = feasibility_residual(start, cfg)
    if res > 1e-8:
        raise ValueError(f"start point is infeasible (residual {res:.3e})")

    lam, mu, eps, vtol = hyper.lambda0, hyper.mu0, hyper.eps0, hyper.sigma0
    tau_init = hyper.tau_init0
    trace = SolveTrace()
    point = start
    for j in range(hyper.i_outer):
        prev = point
        point, run, tau_init = prmgd_inner(
            point, channels, cfg, lam, mu, eps, hyper.i_inner, tau_init,
            outer_index=j, armijo_c=hyper.armijo_c, armijo_beta=hyper.armijo_beta,
            freeze_polarization=freeze_polarization, on_record=on_record,
        )
        trace.inner.extend(run.records)

        mu_next = max(hyper.mu_min, hyper.decay_mu * mu)
        eps_next = max(hyper.eps_min, hyper.decay_eps * eps)
        vtol_next = max(hyper.sigma_min, hyper.decay_sigma * vtol)
        v_max = max_violation(point, channels, cfg)
        lam_next = lam / hyper.decay_lambda if v_max > vtol_next else lam

        disp = 0.0 if run.stalled else point_distance(point, prev)
        report = metric_report(point, channels, cfg)
        rec = OuterRecord(
            outer=j, lam=lam, mu=mu, eps=eps, vtol=vtol_next, v_max=v_max,
            min_sinr=report.min_sinr, min_scnr=report.min_scnr,
            a=point.a, b=point.b, displacement=disp, inner_steps=run.steps,
            stalled=run.stalled, exit_grad_norm=run.exit_grad_norm,
        )
        trace.outer.append(rec)
        if on_record is not None:
            on_record(rec)

        lam, mu, eps, vtol = lam_next, mu_next, eps_next, vtol_next
        if disp <= hyper.o_tol and mu == hyper.mu_min and vtol == hyper.sigma_min:
            break
    return point, trace


def solve_fixed_polarization(
    cfg: ScenarioConfig,
    channels: ChannelSet,
    hyper: Hyperparams,
    start: ProductPoint,
    *,
    on_record=None,
):
    """Baseline: the full penalty solve with all polarization vectors frozen.

    The frozen values are taken from ``start`` (the balanced split for the
    standard initializer); their gradient blocks are zeroed and their
    retraction is the identity, so the returned blocks equal the frozen values
    exactly.
    """
    return ep_prmgd(
        cfg, channels, hyper, start, freeze_polarization=True, on_record=on_record
    )


def solve_sum_objective(
    cfg: ScenarioConfig,
    channels: ChannelSet,
    hyper: Hyperparams,
    start: ProductPoint,
    *,
    on_record=None,
):
    """Baseline: maximize mean utility with no fairness epigraph.

    Minimizes -[(1-rho) * mean SINR + rho * mean SCNR] over the same manifold
    with a single smooth descent run (no penalties, no a/b updates).  The
    mean normalization keeps the objective scale comparable across user and
    target counts.  The run gets the same total iteration budget as the
    penalty solver and stops at the ``eps_min`` gradient tolerance.
    """
    res = feasibility_residual(start, cfg)
    if res > 1e-8:
        raise ValueError(f"start point is infeasible (residual {res:.3e})")

    alpha = np.full(cfg.n_users, (1.0 - cfg.rho) / cfg.n_users)
    beta = np.full(cfg.n_targets, cfg.rho / cfg.n_targets)

    def value_fn(p):
        m = _metrics(p, channels, cfg)
        return -float(alpha @ m.sinr + beta @ m.scnr)

    def rgrad_fn(p):
        links = effective_links(p, channels, cfg)
        m = _metrics_from_links(links, p, cfg)
        g_w, g_f, g_pu, g_ptx, g_prx = _assemble_design_gradient(
            p, channels, cfg, links, m, alpha, beta
        )
        amb = TangentVector(w=g_w, p_tx=g_ptx, p_rx=g_prx, p_users=g_pu, f=g_f, a=0.0, b=0.0)
        return project_to_tangent(p, amb)

    point, run, _ = _descend(
        start, value_fn, rgrad_fn, hyper.eps_min, hyper.i_inner * hyper.i_outer,
        hyper.tau_init0, hyper.armijo_c, hyper.armijo_beta, outer_index=0,
        on_record=on_record,
    )
    report = metric_report(point, channels, cfg)
    rec = OuterRecord(
        outer=0, lam=0.0, mu=0.0, eps=hyper.eps_min, vtol=0.0,
        v_max=max_violation(point, channels, cfg),
        min_sinr=report.min_sinr, min_scnr=report.min_scnr,
        a=point.a, b=point.b, displacement=point_distance(point, start),
        inner_steps=run.steps, stalled=run.stalled, exit_grad_norm=run.exit_grad_norm,
    )
    trace = SolveTrace(inner=run.records, outer=[rec])
    if on_record is not None:
        on_record(rec)
    return point, trace
