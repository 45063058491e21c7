"""Product-manifold geometry for the joint beamforming variable.

The full optimization variable bundles the beamformer W (complex sphere of
radius sqrt(P)), the per-antenna and per-user polarization 2-vectors (unit
circles), the receive filters F and the two epigraph scalars a, b (flat).
This module provides the tangent-space projection, the normalization
retraction, the ambient metric and feasibility checks for that product space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig

__all__ = [
    "ProductPoint",
    "TangentVector",
    "DegenerateRetractionError",
    "random_point",
    "project_to_tangent",
    "retract",
    "inner_product",
    "norm",
    "point_distance",
    "feasibility_residual",
    "save_point",
    "load_point",
]


class DegenerateRetractionError(RuntimeError):
    """Raised when a block that must be normalized retracts from the zero point."""


@dataclass(frozen=True)
class ProductPoint:
    """A point on the product manifold.

    Blocks: ``w`` (m_tx x n_streams, complex, Frobenius norm sqrt(P)),
    ``p_tx``/``p_rx``/``p_users`` (rows are unit 2-vectors), ``f``
    (m_rx x n_targets, complex, unconstrained) and the scalars ``a``, ``b``.
    The block-diagonal combining matrices are never materialized; consumers
    contract the 2-vector rows directly.
    """

    w: np.ndarray
    p_tx: np.ndarray
    p_rx: np.ndarray
    p_users: np.ndarray
    f: np.ndarray
    a: float
    b: float

    def __post_init__(self) -> None:
        for arr in (self.w, self.p_tx, self.p_rx, self.p_users, self.f):
            arr.setflags(write=False)


@dataclass(frozen=True)
class TangentVector:
    """Block container matching :class:`ProductPoint`.

    Instances produced by :func:`project_to_tangent` satisfy the tangency
    conditions at their base point; the same container also carries raw
    ambient gradients before projection.
    """

    w: np.ndarray
    p_tx: np.ndarray
    p_rx: np.ndarray
    p_users: np.ndarray
    f: np.ndarray
    a: float
    b: float


def _check_same_shapes(x, y) -> None:
    for name in ("w", "p_tx", "p_rx", "p_users", "f"):
        if getattr(x, name).shape != getattr(y, name).shape:
            raise ValueError(
                f"block '{name}' shape mismatch: "
                f"{getattr(x, name).shape} vs {getattr(y, name).shape}"
            )


def random_point(cfg: ScenarioConfig, seed: int) -> ProductPoint:
    """Deterministic feasible starting point.

    W is complex Gaussian rescaled to Frobenius norm sqrt(P), every
    polarization vector starts at the balanced split (1, 1)/sqrt(2), F is
    complex Gaussian with unit-variance entries, and a = b = 0.  Substreams
    ``(2, 0)`` and ``(2, 1)`` of ``seed`` drive W and F respectively, so the
    draw is independent of the channel streams sharing the same seed.
    """
    rng_w = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, 0)))
    rng_f = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, 1)))

    w = rng_w.standard_normal((cfg.m_tx, cfg.n_streams)) + 1j * rng_w.standard_normal(
        (cfg.m_tx, cfg.n_streams)
    )
    w *= math.sqrt(cfg.power) / np.linalg.norm(w)

    f = (
        rng_f.standard_normal((cfg.m_rx, cfg.n_targets))
        + 1j * rng_f.standard_normal((cfg.m_rx, cfg.n_targets))
    ) / math.sqrt(2.0)

    balanced = np.full(2, 1.0 / math.sqrt(2.0))
    return ProductPoint(
        w=w,
        p_tx=np.tile(balanced, (cfg.m_tx, 1)),
        p_rx=np.tile(balanced, (cfg.m_rx, 1)),
        p_users=np.tile(balanced, (cfg.n_users, 1)),
        f=f,
        a=0.0,
        b=0.0,
    )


def project_to_tangent(base: ProductPoint, ambient: TangentVector) -> TangentVector:
    """Orthogonal projection of an ambient block set onto the tangent space.

    The W block loses its radial component Re{Tr(G W^H)} W / P, each
    polarization row loses (p^T g) p, and the flat blocks (F, a, b) pass
    through unchanged.
    """
    _check_same_shapes(base, ambient)
    p = float(np.vdot(base.w, base.w).real)  # ||W||_F^2 = P on the manifold
    radial = np.vdot(base.w, ambient.w).real / p
    w = ambient.w - radial * base.w

    def proj_rows(p_rows: np.ndarray, g_rows: np.ndarray) -> np.ndarray:
        coef = np.sum(p_rows * g_rows, axis=1, keepdims=True)
        return g_rows - coef * p_rows

    return TangentVector(
        w=w,
        p_tx=proj_rows(base.p_tx, ambient.p_tx),
        p_rx=proj_rows(base.p_rx, ambient.p_rx),
        p_users=proj_rows(base.p_users, ambient.p_users),
        f=ambient.f,
        a=ambient.a,
        b=ambient.b,
    )


def retract(base: ProductPoint, direction: TangentVector, step: float) -> ProductPoint:
    """Descent step followed by normalization back onto the manifold.

    Forms the ambient candidate ``base - step * direction`` and renormalizes
    the W block to radius sqrt(P) and every polarization row to unit length;
    F, a, b map identically.  ``step`` is unsigned: callers pass the gradient
    itself as the direction.
    """
    if step < 0.0:
        raise ValueError(f"step must be >= 0, got {step}")
    if step == 0.0:
        return base
    _check_same_shapes(base, direction)

    w_hat = base.w - step * direction.w
    w_norm = np.linalg.norm(w_hat)
    if w_norm == 0.0:
        raise DegenerateRetractionError("candidate W block is identically zero")
    sqrt_p = np.linalg.norm(base.w)
    w = (sqrt_p / w_norm) * w_hat

    def ret_rows(p_rows: np.ndarray, d_rows: np.ndarray, label: str) -> np.ndarray:
        cand = p_rows - step * d_rows
        norms = np.linalg.norm(cand, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise DegenerateRetractionError(f"candidate {label} block has a zero row")
        return cand / norms

    return ProductPoint(
        w=w,
        p_tx=ret_rows(base.p_tx, direction.p_tx, "p_tx"),
        p_rx=ret_rows(base.p_rx, direction.p_rx, "p_rx"),
        p_users=ret_rows(base.p_users, direction.p_users, "p_users"),
        f=base.f - step * direction.f,
        a=base.a - step * direction.a,
        b=base.b - step * direction.b,
    )


def inner_product(x, y) -> float:
    """Ambient metric: Re-trace on complex blocks, dot product on real ones."""
    _check_same_shapes(x, y)
    total = np.vdot(x.w, y.w).real + np.vdot(x.f, y.f).real
    total += float(np.sum(x.p_tx * y.p_tx) + np.sum(x.p_rx * y.p_rx))
    total += float(np.sum(x.p_users * y.p_users))
    total += x.a * y.a + x.b * y.b
    return float(total)


def norm(x) -> float:
    return math.sqrt(max(inner_product(x, x), 0.0))


def point_distance(x: ProductPoint, y: ProductPoint) -> float:
    """Euclidean distance between two points in the ambient product space."""
    _check_same_shapes(x, y)
    sq = (
        np.linalg.norm(x.w - y.w) ** 2
        + np.linalg.norm(x.p_tx - y.p_tx) ** 2
        + np.linalg.norm(x.p_rx - y.p_rx) ** 2
        + np.linalg.norm(x.p_users - y.p_users) ** 2
        + np.linalg.norm(x.f - y.f) ** 2
        + (x.a - y.a) ** 2
        + (x.b - y.b) ** 2
    )
    return math.sqrt(sq)


def feasibility_residual(x: ProductPoint, cfg: ScenarioConfig) -> float:
    """Worst deviation from the power sphere and the unit polarization circles."""
    res = abs(np.linalg.norm(x.w) - math.sqrt(cfg.power))
    for rows in (x.p_tx, x.p_rx, x.p_users):
        res = max(res, float(np.max(np.abs(np.linalg.norm(rows, axis=1) - 1.0))))
    return float(res)


# ---------------------------------------------------------------------------
# Serialization: a self-describing JSON blob with per-block shape headers and
# row-major data.  Floats round-trip exactly through Python's JSON repr.

_FORMAT = "prisac-point-v1"


def _encode_block(arr: np.ndarray) -> dict:
    out = {"shape": list(arr.shape)}
    if np.iscomplexobj(arr):
        out["re"] = arr.real.ravel().tolist()
        out["im"] = arr.imag.ravel().tolist()
    else:
        out["data"] = arr.ravel().tolist()
    return out


def _decode_block(blob: dict) -> np.ndarray:
    shape = tuple(blob["shape"])
    if "re" in blob:
        return (np.array(blob["re"]) + 1j * np.array(blob["im"])).reshape(shape)
    return np.array(blob["data"]).reshape(shape)


def save_point(point: ProductPoint, path) -> None:
    blob = {
        "format": _FORMAT,
        "a": point.a,
        "b": point.b,
    }
    for name in ("w", "p_tx", "p_rx", "p_users", "f"):
        blob[name] = _encode_block(getattr(point, name))
    with open(path, "w") as fh:
        json.dump(blob, fh)


def load_point(path) -> ProductPoint:
    with open(path) as fh:
        blob = json.load(fh)
    if blob.get("format") != _FORMAT:
        raise ValueError(f"unrecognized point blob format: {blob.get('format')!r}")
    return ProductPoint(
        w=_decode_block(blob["w"]),
        p_tx=_decode_block(blob["p_tx"]),
        p_rx=_decode_block(blob["p_rx"]),
        p_users=_decode_block(blob["p_users"]),
        f=_decode_block(blob["f"]),
        a=float(blob["a"]),
        b=float(blob["b"]),
    )
