"""Polar-domain (angle x distance) single-beam codebook.

Angles are sampled on the inverse-count grids cos(phi_s) = (2s - M - 1) / M
and psi_s = cos(theta) sin(phi) = (2s' - N - 1) / N (feasible pairs only).
Distance rings are an arithmetic progression in 1/r whose step keeps the
Fresnel projection envelope between adjacent rings at the threshold delta.
The far-field ring (r = inf) is always present.

Ring rules:
  * "union"     -- 1/r step from the tighter of the two aperture axes
                   (vertical M*dz*sin(phi) vs horizontal N*dx*sqrt(1-psi^2));
                   default, required for a usable codebook on wide arrays.
  * "elevation" -- vertical axis only; on a 4 x 128 array this produces no
                   finite rings and degenerates to the far-field (DFT) grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .geometry import ArrayGeometry, PolarPose, steering_vector

__all__ = [
    "SamplePoint",
    "SingleBeamCodebook",
    "fresnel",
    "projection_envelope",
    "solve_zeta",
    "sample_angles",
    "sample_distances",
    "build_codebook",
    "projection",
    "max_cross_projection",
    "save_codebook",
    "load_codebook",
]

RING_RULES = ("union", "elevation")


@dataclass(frozen=True)
class SamplePoint:
    """One codebook grid point; r = math.inf marks the far-field ring."""

    theta: float
    phi: float
    r: float

    def to_pose(self) -> PolarPose:
        return PolarPose(r=self.r, theta=self.theta, phi=self.phi)


@dataclass
class SingleBeamCodebook:
    """Sampled steering-vector dictionary with its design parameters.

    codewords is (N_C, M*N) complex with unit-norm rows, row s being the
    exact-mode steering vector at sample point s.  Row order is
    elevation-major, azimuth-minor, rings innermost with the far-field ring
    first -- stable across rebuilds with identical inputs.
    """

    geom: ArrayGeometry
    delta: float
    zeta_delta: float
    r_min: float
    ring_rule: str
    thetas: np.ndarray
    phis: np.ndarray
    rs: np.ndarray
    codewords: np.ndarray

    @property
    def n_codewords(self) -> int:
        return self.codewords.shape[0]

    def point(self, s: int) -> SamplePoint:
        return SamplePoint(float(self.thetas[s]), float(self.phis[s]), float(self.rs[s]))

    @property
    def points(self) -> list[SamplePoint]:
        return [self.point(s) for s in range(self.n_codewords)]


def fresnel(zeta):
    """Fresnel integrals C(z), S(z) of cos/sin(pi t^2 / 2) on [0, z].

    Accepts scalars or arrays, rejects negative arguments.
    """
    z = np.asarray(zeta, dtype=float)
    if np.any(z < 0):
        raise ValueError("fresnel argument must be non-negative")
    s, c = special.fresnel(z)
    if z.ndim == 0:
        return float(c), float(s)
    return c, s


def projection_envelope(zeta):
    """|C(z) + j S(z)| / z, the single-axis defocus projection; 1 at z = 0."""
    z = np.asarray(zeta, dtype=float)
    c, s = fresnel(z)
    mag = np.hypot(c, s)
    out = np.divide(mag, z, out=np.ones_like(mag), where=z > 0)
    return float(out) if out.ndim == 0 else out


def solve_zeta(delta: float) -> float:
    """Smallest zeta > 0 with projection_envelope(zeta) = delta.

    delta must lie strictly inside (0, 1); bisection residual < 1e-6.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    grid = np.arange(1e-6, 40.0, 1e-3)
    vals = projection_envelope(grid) - delta
    sign_change = np.flatnonzero(vals <= 0)
    if sign_change.size == 0:
        raise ValueError(f"no envelope crossing found for delta={delta}")
    i = sign_change[0]
    lo = grid[i - 1] if i > 0 else 1e-9
    zeta = optimize.bisect(lambda z: projection_envelope(z) - delta, lo, grid[i], xtol=1e-12)
    if abs(projection_envelope(zeta) - delta) > 1e-6:
        raise ValueError("zeta bisection failed to converge")
    return float(zeta)


def sample_angles(geom: ArrayGeometry) -> list[tuple[float, float]]:
    """Feasible (theta, phi) grid pairs, elevation-major, ascending psi."""
    out = []
    M, N = geom.m_count, geom.n_count
    for s in range(1, M + 1):
        cphi = (2 * s - M - 1) / M
        phi = math.acos(cphi)
        sphi = math.sin(phi)
        for sp in range(1, N + 1):
            psi = (2 * sp - N - 1) / N
            if abs(psi) <= sphi:
                out.append((math.acos(psi / sphi), phi))
    return out


def _curvature_scale(geom: ArrayGeometry, phi: float, psi: float, rule: str) -> float:
    """Aperture scale kappa governing the 1/r ring step 2 lambda zeta^2 / kappa."""
    kappa_z = (geom.m_count * geom.dz) ** 2 * math.sin(phi) ** 2
    if rule == "elevation":
        return kappa_z
    kappa_x = (geom.n_count * geom.dx) ** 2 * (1.0 - psi * psi)
    return max(kappa_z, kappa_x)


def _rings(geom, phi, psi, zeta, r_min, rule) -> list[float]:
    kappa = _curvature_scale(geom, phi, psi, rule)
    rings = [math.inf]
    if kappa <= 0.0:
        return rings
    r1 = kappa / (2.0 * geom.lambda_c * zeta * zeta)
    t = 1
    while r1 / t >= r_min:
        rings.append(r1 / t)
        t += 1
    return rings


def sample_distances(geom: ArrayGeometry, phi_s: float, zeta_delta: float,
                     r_min: float) -> list[float]:
    """Distance rings for one elevation under the vertical-axis rule.

    Returns [inf, r_1, r_2, ...] with r_t = (M dz sin(phi))^2 / (2 lambda
    zeta^2 t), truncated at the first ring below r_min.  Consecutive rings
    are equally spaced in sin(phi)^2 / r.
    """
    if not 0.0 < phi_s < math.pi:
        raise ValueError("phi_s must lie in (0, pi)")
    if r_min <= 0:
        raise ValueError("r_min must be positive")
    return _rings(geom, phi_s, 0.0, zeta_delta, r_min, "elevation")


def build_codebook(geom: ArrayGeometry, delta: float, r_min: float = 5.0,
                   ring_rule: str = "union") -> SingleBeamCodebook:
    """Construct the single-beam codebook for `geom` at threshold `delta`."""
    if ring_rule not in RING_RULES:
        raise ValueError(f"ring_rule must be one of {RING_RULES}")
    if r_min <= 0:
        raise ValueError("r_min must be positive")
    zeta = solve_zeta(delta)
    thetas, phis, rs = [], [], []
    for theta, phi in sample_angles(geom):
        psi = math.cos(theta) * math.sin(phi)
        for r in _rings(geom, phi, psi, zeta, r_min, ring_rule):
            thetas.append(theta)
            phis.append(phi)
            rs.append(r)
    rows = np.empty((len(rs), geom.size), dtype=complex)
    for i in range(len(rs)):
        pose = PolarPose(r=rs[i], theta=thetas[i], phi=phis[i])
        rows[i] = steering_vector(geom, pose, mode="exact")
    return SingleBeamCodebook(
        geom=geom,
        delta=float(delta),
        zeta_delta=zeta,
        r_min=float(r_min),
        ring_rule=ring_rule,
        thetas=np.asarray(thetas),
        phis=np.asarray(phis),
        rs=np.asarray(rs),
        codewords=rows,
    )


def projection(geom: ArrayGeometry, p: SamplePoint, q: SamplePoint,
               mode: str = "exact") -> float:
    """|<a(p), a(q)>| between two sample points.

    exact: inner product of the steering vectors.  taylor: separable
    horizontal x vertical partial sums of the expanded phase difference
    (curvature terms vanish for infinite r).
    """
    if mode == "exact":
        ap = steering_vector(geom, p.to_pose(), mode="exact")
        aq = steering_vector(geom, q.to_pose(), mode="exact")
        return float(abs(np.vdot(ap, aq)))
    if mode != "taylor":
        raise ValueError(f"unknown projection mode {mode!r}")
    inv_rp = 0.0 if math.isinf(p.r) else 1.0 / p.r
    inv_rq = 0.0 if math.isinf(q.r) else 1.0 / q.r
    psi_p = math.cos(p.theta) * math.sin(p.phi)
    psi_q = math.cos(q.theta) * math.sin(q.phi)
    n = geom.n_indices()
    m = geom.m_indices()
    g_n = (-n * geom.dx * (psi_p - psi_q)
           + n * n * geom.dx**2 * ((1 - psi_p**2) * inv_rp - (1 - psi_q**2) * inv_rq) / 2.0)
    g_m = (-m * geom.dz * (math.cos(p.phi) - math.cos(q.phi))
           + m * m * geom.dz**2
           * (math.sin(p.phi) ** 2 * inv_rp - math.sin(q.phi) ** 2 * inv_rq) / 2.0)
    k = 2.0 * math.pi / geom.lambda_c
    sum_n = np.exp(1j * k * g_n).sum()
    sum_m = np.exp(1j * k * g_m).sum()
    return float(abs(sum_n) * abs(sum_m) / geom.size)


def max_cross_projection(book: SingleBeamCodebook) -> float:
    """Largest pairwise projection eta over all distinct codeword pairs."""
    if book.n_codewords < 2:
        raise ValueError("need at least two codewords")
    gram = np.abs(book.codewords @ book.codewords.conj().T)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


def save_codebook(book: SingleBeamCodebook, path) -> None:
    """Write a self-describing .npz that load_codebook restores bit-exactly.

    Fields: m_count, n_count, dx, dz, lambda_c, fc, delta, zeta_delta,
    r_min, ring_rule, thetas, phis, rs (inf on the far-field ring), and
    row-major complex codewords.
    """
    np.savez(
        path,
        m_count=book.geom.m_count,
        n_count=book.geom.n_count,
        dx=book.geom.dx,
        dz=book.geom.dz,
        lambda_c=book.geom.lambda_c,
        fc=book.geom.fc,
        delta=book.delta,
        zeta_delta=book.zeta_delta,
        r_min=book.r_min,
        ring_rule=book.ring_rule,
        thetas=book.thetas,
        phis=book.phis,
        rs=book.rs,
        codewords=book.codewords,
    )


def load_codebook(path) -> SingleBeamCodebook:
    with np.load(path) as data:
        geom = ArrayGeometry(
            m_count=int(data["m_count"]),
            n_count=int(data["n_count"]),
            dx=float(data["dx"]),
            dz=float(data["dz"]),
            lambda_c=float(data["lambda_c"]),
            fc=float(data["fc"]),
        )
        return SingleBeamCodebook(
            geom=geom,
            delta=float(data["delta"]),
            zeta_delta=float(data["zeta_delta"]),
            r_min=float(data["r_min"]),
            ring_rule=str(data["ring_rule"]),
            thetas=data["thetas"].copy(),
            phis=data["phis"].copy(),
            rs=data["rs"].copy(),
            codewords=data["codewords"].copy(),
        )
