"""Uniform planar array geometry, spherical-wave distances, and LoS channels.

The array sits in the xz-plane on a centered grid: vertical index
m in {-(M-1)/2, ..., (M-1)/2}, horizontal index n in {-(N-1)/2, ..., (N-1)/2},
in unit steps (half-integers when the count is even).  Steering vectors are
flattened n-major: element (m, n) lands at flat index n_pos * M + m_pos, which
matches the Kronecker factorization (horizontal factor) x (vertical factor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ArrayGeometry",
    "PolarPose",
    "ChannelRealization",
    "exact_distance",
    "taylor_distance",
    "steering_vector",
    "steering_batch",
    "los_channel",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """M x N uniform planar array (vertical x horizontal).

    dx/dz are the horizontal/vertical element spacings in meters and
    lambda_c the carrier wavelength.  fc is informational only; all math
    runs on lambda_c.
    """

    m_count: int
    n_count: int
    dx: float
    dz: float
    lambda_c: float
    fc: float = 0.0

    def __post_init__(self):
        if self.m_count < 1 or self.n_count < 1:
            raise ValueError("antenna counts must be >= 1")
        if self.dx <= 0 or self.dz <= 0 or self.lambda_c <= 0:
            raise ValueError("spacings and wavelength must be positive")

    @property
    def size(self) -> int:
        return self.m_count * self.n_count

    def m_indices(self) -> np.ndarray:
        """Centered vertical element indices (half-integer for even M)."""
        return np.arange(self.m_count) - (self.m_count - 1) / 2.0

    def n_indices(self) -> np.ndarray:
        """Centered horizontal element indices (half-integer for even N)."""
        return np.arange(self.n_count) - (self.n_count - 1) / 2.0

    def rayleigh_distance(self) -> float:
        """2 D^2 / lambda with D the larger aperture side."""
        aperture = max(self.n_count * self.dx, self.m_count * self.dz)
        return 2.0 * aperture * aperture / self.lambda_c


@dataclass(frozen=True)
class PolarPose:
    """Range / azimuth / elevation of a point seen from the array origin.

    r may be math.inf to denote the far-field limit (plane wave); physical
    channel synthesis requires a finite range.
    """

    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"range must be positive, got {self.r}")
        if not 0.0 < self.phi < math.pi:
            raise ValueError(f"elevation must lie in (0, pi), got {self.phi}")
        if not 0.0 <= self.theta < 2.0 * math.pi:
            raise ValueError(f"azimuth must lie in [0, 2pi), got {self.theta}")


@dataclass(frozen=True)
class ChannelRealization:
    """LoS channel h = sqrt(MN) * beta * exp(-j 2 pi r / lambda) * g."""

    gains: np.ndarray
    beta: float
    bs_pose: PolarPose


def exact_distance(geom: ArrayGeometry, pose: PolarPose, m, n):
    """Euclidean distance from element (m, n) to the point at `pose`.

    m, n may be scalars or arrays of (half-)integer element indices.
    """
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    x = pose.r * math.cos(pose.theta) * math.sin(pose.phi) + n * geom.dx
    y = pose.r * math.sin(pose.theta) * math.sin(pose.phi)
    z = pose.r * math.cos(pose.phi) + m * geom.dz
    out = np.sqrt(x * x + y * y + z * z)
    return float(out) if out.ndim == 0 else out


def taylor_distance(geom: ArrayGeometry, pose: PolarPose, m, n):
    """Second-order separable expansion of exact_distance around r.

    Valid for dx/r, dz/r << 1; accepts any r > 0.
    """
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    psi = math.cos(pose.theta) * math.sin(pose.phi)
    cph = math.cos(pose.phi)
    out = (
        pose.r
        + n * geom.dx * psi
        + n * n * geom.dx**2 * (1.0 - psi * psi) / (2.0 * pose.r)
        + m * geom.dz * cph
        + m * m * geom.dz**2 * (1.0 - cph * cph) / (2.0 * pose.r)
    )
    return float(out) if out.ndim == 0 else out


def _phase_path(geom: ArrayGeometry, pose: PolarPose, mode: str) -> np.ndarray:
    """D(m, n) - r on the (N, M) index grid; far-field limit for r = inf."""
    mm, nn = np.meshgrid(geom.m_indices(), geom.n_indices())
    psi = math.cos(pose.theta) * math.sin(pose.phi)
    cph = math.cos(pose.phi)
    if math.isinf(pose.r):
        return nn * geom.dx * psi + mm * geom.dz * cph
    if mode == "exact":
        return exact_distance(geom, pose, mm, nn) - pose.r
    if mode == "taylor":
        return taylor_distance(geom, pose, mm, nn) - pose.r
    raise ValueError(f"unknown distance mode {mode!r}")


def steering_vector(geom: ArrayGeometry, pose: PolarPose, mode: str = "exact") -> np.ndarray:
    """Unit-norm spherical-wave steering vector toward `pose`.

    Element (m, n) carries exp(j 2 pi (D(m,n) - r) / lambda) / sqrt(MN);
    mode selects exact or Taylor-expanded distances.  r = inf yields the
    plane-wave limit (identical in both modes).
    """
    path = _phase_path(geom, pose, mode)
    vec = np.exp(2j * math.pi / geom.lambda_c * path) / math.sqrt(geom.size)
    return vec.ravel()


def steering_batch(geom: ArrayGeometry, thetas, phis, rs) -> np.ndarray:
    """Exact-mode steering vectors for P poses at once, shape (P, M*N).

    rs may contain math.inf entries (plane-wave limit).
    """
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    rs = np.asarray(rs, dtype=float)
    mm, nn = np.meshgrid(geom.m_indices(), geom.n_indices())
    mm = mm.ravel()[None, :]
    nn = nn.ravel()[None, :]
    psi = (np.cos(thetas) * np.sin(phis))[:, None]
    cph = np.cos(phis)[:, None]
    sth = (np.sin(thetas) * np.sin(phis))[:, None]
    r = rs[:, None]
    far = np.isinf(rs)
    path = np.empty((len(rs), geom.size), dtype=float)
    if far.any():
        path[far] = (nn * geom.dx * psi + mm * geom.dz * cph)[far]
    near = ~far
    if near.any():
        x = r[near] * psi[near] + nn * geom.dx
        y = r[near] * sth[near]
        z = r[near] * cph[near] + mm * geom.dz
        path[near] = np.sqrt(x * x + y * y + z * z) - r[near]
    vec = np.exp(2j * math.pi / geom.lambda_c * path) / math.sqrt(geom.size)
    return vec


def los_channel(geom: ArrayGeometry, pose: PolarPose, rho0: float) -> ChannelRealization:
    """LoS-dominated channel toward a BS at `pose`.

    rho0 is the linear reference power gain at 1 m; the path amplitude is
    beta = sqrt(rho0) / r.  The channel always uses exact distances --
    approximations live only in the codebook.
    """
    if rho0 <= 0:
        raise ValueError("rho0 must be positive")
    if math.isinf(pose.r):
        raise ValueError("channel synthesis needs a finite range")
    beta = math.sqrt(rho0) / pose.r
    g = steering_vector(geom, pose, mode="exact")
    phase = np.exp(-2j * math.pi * pose.r / geom.lambda_c)
    gains = math.sqrt(geom.size) * beta * phase * g
    return ChannelRealization(gains=gains, beta=beta, bs_pose=pose)
