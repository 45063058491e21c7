"""Scenario definitions and polarimetric channel synthesis.

A scenario fixes the array geometry, the user/target/clutter population and
the power budget; :func:`sample_scenario` then draws one Monte-Carlo
realization of the dual-polarized communication and sensing channels from a
seeded, splittable random stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

__all__ = [
    "ScenarioConfig",
    "PathRealization",
    "ChannelSet",
    "steering_vector",
    "depolarization_matrix",
    "field_response_matrix",
    "build_comm_channel",
    "build_sensing_channel",
    "sample_scenario",
    "scenario_from_mapping",
    "DEFAULT_SCENARIO",
    "DESK_SCENARIO",
]


def dbm_to_linear(dbm: float) -> float:
    """Convert a dBm value to linear milliwatts."""
    return 10.0 ** (dbm / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Static description of one simulated deployment.

    Powers are stored in dBm and converted to linear scale exactly once at
    this boundary; everything downstream works in linear units.
    """

    m_tx: int = 32
    m_rx: int = 32
    n_users: int = 8
    n_radar_streams: int = 16
    n_targets: int = 8
    n_clutter: int = 8
    power_dbm: float = 30.0
    noise_user_dbm: float = 20.0
    noise_radar_dbm: float = 20.0
    rho: float = 0.5
    n_paths: int = 6
    xpd: float = 0.1
    element_spacing_wavelengths: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("m_tx", "m_rx", "n_users", "n_radar_streams", "n_targets", "n_paths"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.n_clutter < 0:
            raise ValueError(f"n_clutter must be >= 0, got {self.n_clutter}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if self.xpd < 0.0:
            raise ValueError(f"xpd must be >= 0, got {self.xpd}")
        if self.element_spacing_wavelengths <= 0.0:
            raise ValueError("element_spacing_wavelengths must be > 0")

    @property
    def power(self) -> float:
        """Total transmit power in linear scale (mW)."""
        return dbm_to_linear(self.power_dbm)

    @property
    def noise_user(self) -> float:
        """Per-user noise power in linear scale; identical across users."""
        return dbm_to_linear(self.noise_user_dbm)

    @property
    def noise_radar(self) -> float:
        return dbm_to_linear(self.noise_radar_dbm)

    @property
    def n_streams(self) -> int:
        """Beamformer columns: communication plus radar streams."""
        return self.n_users + self.n_radar_streams

    @property
    def n_objects(self) -> int:
        """Sensed objects: targets plus clutter sources."""
        return self.n_targets + self.n_clutter


@dataclass(frozen=True)
class PathRealization:
    """One propagation path: angle, complex gain, and the four H/V phase shifts."""

    angle: float
    gain: complex
    phases: tuple[float, float, float, float]  # (HH, HV, VH, VV)

    def __post_init__(self) -> None:
        if not -math.pi / 2 < self.angle < math.pi / 2:
            raise ValueError(f"path angle must lie in (-pi/2, pi/2), got {self.angle}")
        for p in self.phases:
            if not 0.0 <= p < 2.0 * math.pi:
                raise ValueError(f"polarization phase must lie in [0, 2*pi), got {p}")


@dataclass(frozen=True)
class ChannelSet:
    """Realized channels for one Monte-Carlo draw.

    ``comm[k]`` is the 2 x 2*m_tx downlink channel of user k; ``sensing[q]``
    is the 2*m_rx x 2*m_tx round-trip channel of object q (targets first,
    then clutter).  Arrays are frozen after construction.
    """

    comm: np.ndarray          # (n_users, 2, 2*m_tx) complex
    sensing: np.ndarray       # (n_objects, 2*m_rx, 2*m_tx) complex
    object_angles: np.ndarray  # (n_objects,) radians

    def __post_init__(self) -> None:
        for arr in (self.comm, self.sensing, self.object_angles):
            if not np.all(np.isfinite(arr)):
                raise ValueError("channel matrices must be finite-valued")
            arr.setflags(write=False)

    def validate_against(self, cfg: ScenarioConfig) -> None:
        expect_comm = (cfg.n_users, 2, 2 * cfg.m_tx)
        expect_sens = (cfg.n_objects, 2 * cfg.m_rx, 2 * cfg.m_tx)
        if self.comm.shape != expect_comm:
            raise ValueError(f"comm channels have shape {self.comm.shape}, expected {expect_comm}")
        if self.sensing.shape != expect_sens:
            raise ValueError(f"sensing channels have shape {self.sensing.shape}, expected {expect_sens}")


def steering_vector(m: int, spacing: float, theta: float) -> np.ndarray:
    """Uniform-linear-array steering vector.

    Parameters
    ----------
    m : int
        Number of array elements.
    spacing : float
        Element spacing in wavelengths (d / lambda).
    theta : float
        Angle in radians.

    Returns
    -------
    ndarray, shape (m,), complex
        Entry i equals exp(-j * 2*pi * spacing * i * sin(theta)).
    """
    if m < 1:
        raise ValueError(f"steering vector needs at least one element, got m={m}")
    phase = -2.0j * math.pi * spacing * math.sin(theta)
    return np.exp(phase * np.arange(m))


def depolarization_matrix(xpd: float, phases) -> np.ndarray:
    """2x2 cross-polar coupling matrix with XPD factor ``xpd``.

    ``phases`` are the four phase shifts (HH, HV, VH, VV) in radians.  The
    matrix has Frobenius norm sqrt(2) for every admissible input.
    """
    if xpd < 0.0:
        raise ValueError(f"xpd must be >= 0, got {xpd}")
    a_hh, a_hv, a_vh, a_vv = phases
    root_x = math.sqrt(xpd)
    j = np.array(
        [
            [np.exp(1j * a_hh), root_x * np.exp(1j * a_hv)],
            [root_x * np.exp(1j * a_vh), np.exp(1j * a_vv)],
        ]
    )
    return j / math.sqrt(1.0 + xpd)


def field_response_matrix(steering: np.ndarray) -> np.ndarray:
    """Kronecker expansion of a steering vector onto the H/V element pair.

    Maps a length-m steering vector to the 2m x 2 matrix ``a kron I_2``.
    """
    steering = np.asarray(steering)
    return np.kron(steering.reshape(-1, 1), np.eye(2))


def build_comm_channel(cfg: ScenarioConfig, paths: list[PathRealization]) -> np.ndarray:
    """Multipath downlink channel of one user, 2 x 2*m_tx.

    Sums ``gain * J * A(theta)^T`` over the paths and scales by
    1/sqrt(len(paths)).
    """
    if not paths:
        raise ValueError("a communication channel needs at least one path")
    h = np.zeros((2, 2 * cfg.m_tx), dtype=complex)
    for p in paths:
        a_t = field_response_matrix(
            steering_vector(cfg.m_tx, cfg.element_spacing_wavelengths, p.angle)
        ).T
        h += p.gain * depolarization_matrix(cfg.xpd, p.phases) @ a_t
    return h / math.sqrt(len(paths))


def build_sensing_channel(cfg: ScenarioConfig, path: PathRealization) -> np.ndarray:
    """Single-path monostatic round-trip channel of one object, 2*m_rx x 2*m_tx."""
    spacing = cfg.element_spacing_wavelengths
    a_rx = field_response_matrix(steering_vector(cfg.m_rx, spacing, path.angle))
    a_tx = field_response_matrix(steering_vector(cfg.m_tx, spacing, path.angle))
    return path.gain * a_rx @ depolarization_matrix(cfg.xpd, path.phases) @ a_tx.T


def _substream(seed: int, *key: int) -> np.random.Generator:
    """Named substream of the scenario seed.

    Streams are derived with ``SeedSequence(seed, spawn_key=key)`` so that every
    (user, path) and every sensed object owns an independent stream regardless
    of evaluation order.  Key layout:

    * ``(0, k, l)`` -- path l of communication user k,
    * ``(1, q)``    -- sensed object q (targets first, then clutter).
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _draw_path(rng: np.random.Generator) -> PathRealization:
    # Draw order inside a stream is fixed: angle, gain (re, im), four phases.
    angle = rng.uniform(-math.pi / 2, math.pi / 2)
    re, im = rng.standard_normal(2)
    gain = complex(re, im) / math.sqrt(2.0)
    phases = tuple(rng.uniform(0.0, 2.0 * math.pi, size=4))
    return PathRealization(angle=angle, gain=gain, phases=phases)


def sample_scenario(cfg: ScenarioConfig) -> ChannelSet:
    """Draw one set of channels for ``cfg``; a pure function of (cfg, cfg.seed).

    Angles are uniform on (-pi/2, pi/2), path gains circular complex normal
    with unit variance, and polarization phases uniform on [0, 2*pi).
    """
    comm = np.empty((cfg.n_users, 2, 2 * cfg.m_tx), dtype=complex)
    for k in range(cfg.n_users):
        paths = [_draw_path(_substream(cfg.seed, 0, k, l)) for l in range(cfg.n_paths)]
        comm[k] = build_comm_channel(cfg, paths)

    sensing = np.empty((cfg.n_objects, 2 * cfg.m_rx, 2 * cfg.m_tx), dtype=complex)
    object_angles = np.empty(cfg.n_objects)
    for q in range(cfg.n_objects):
        path = _draw_path(_substream(cfg.seed, 1, q))
        sensing[q] = build_sensing_channel(cfg, path)
        object_angles[q] = path.angle

    channels = ChannelSet(comm=comm, sensing=sensing, object_angles=object_angles)
    channels.validate_against(cfg)
    return channels


# Reference deployment of the evaluation setup, and a reduced desk-scale
# variant that keeps single runs in the seconds range.
DEFAULT_SCENARIO = ScenarioConfig()
DESK_SCENARIO = ScenarioConfig(
    m_tx=8, m_rx=8, n_users=4, n_radar_streams=4, n_targets=4, n_clutter=4
)

def scenario_from_mapping(mapping: dict, base: ScenarioConfig = DEFAULT_SCENARIO) -> ScenarioConfig:
    """Build a config from string key/value pairs, e.g. one parsed file section.

    Keys must name ScenarioConfig fields; anything else raises ``ValueError``.
    """
    known = {f.name for f in fields(ScenarioConfig)}
    updates = {}
    for key, raw in mapping.items():
        if key not in known:
            raise ValueError(
                f"unknown scenario key '{key}'; valid keys: {', '.join(sorted(known))}"
            )
        if key in ("m_tx", "m_rx", "n_users", "n_radar_streams", "n_targets",
                   "n_clutter", "n_paths", "seed"):
            updates[key] = int(raw)
        else:
            updates[key] = float(raw)
    return replace(base, **updates)
