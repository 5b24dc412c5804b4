"""Multi-arm beam synthesis, radiation patterns, and phase optimization.

A bucket of R single-beam codewords becomes one transmit vector
w = sum_i exp(j phase_i) c_i / sqrt(V) (hybrid precoder with V = R active
chains).  The per-arm phases are tuned to minimize the average main-lobe
deviation between the multi-arm pattern and each arm's own single-beam
pattern.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .codebook import SamplePoint, SingleBeamCodebook, _curvature_scale
from .geometry import ArrayGeometry, PolarPose, steering_batch, steering_vector
from .hashing import BucketTable

__all__ = [
    "MultiArmCodeword",
    "MainLobe",
    "synthesize",
    "pattern_single",
    "pattern_multi",
    "main_lobe",
    "deviation",
    "optimize_phases",
    "build_hmb_codebook",
    "save_hmb_codebook",
    "load_hmb_codebook",
]

PATTERN_FLOOR = 1e-6  # probes with |single-beam pattern| below this are skipped
LOBE_RANGE_CAP = 10.0  # far-field lobes integrate out to 10x Rayleigh distance


@dataclass
class MultiArmCodeword:
    """Joint antenna weights for one bucket plus its phase vector.

    deviation is NaN until the phases have been evaluated/optimized.
    """

    bucket: np.ndarray
    weights: np.ndarray = field(repr=False)
    phase: np.ndarray
    deviation: float = math.nan


@dataclass(frozen=True)
class MainLobe:
    """Axis-aligned lobe box in (cos theta, cos phi, 1/r) coordinates."""

    cos_theta: tuple[float, float]
    cos_phi: tuple[float, float]
    inv_r: tuple[float, float]


def synthesize(book: SingleBeamCodebook, bucket, phase) -> MultiArmCodeword:
    """Combine the bucket's codewords with per-arm phases into one beam."""
    bucket = np.asarray(bucket, dtype=int)
    phase = np.asarray(phase, dtype=float)
    if bucket.ndim != 1 or bucket.size == 0:
        raise ValueError("bucket must be a non-empty index vector")
    if np.unique(bucket).size != bucket.size:
        raise ValueError("bucket members must be distinct")
    if bucket.min() < 0 or bucket.max() >= book.n_codewords:
        raise ValueError("bucket index outside the codebook")
    if phase.shape != bucket.shape:
        raise ValueError("phase vector length must match the bucket size")
    v = bucket.size
    weights = (np.exp(1j * phase) @ book.codewords[bucket]) / math.sqrt(v)
    return MultiArmCodeword(bucket=bucket, weights=weights, phase=phase % (2 * math.pi))


def pattern_single(geom: ArrayGeometry, s: SamplePoint, probe: PolarPose) -> complex:
    """Normalized single-beam pattern of sample point s at the probe pose."""
    a_probe = steering_vector(geom, probe, mode="exact")
    a_s = steering_vector(geom, s.to_pose(), mode="exact")
    return complex(np.vdot(a_probe, a_s))


def pattern_multi(book: SingleBeamCodebook, cw: MultiArmCodeword,
                  probe: PolarPose) -> complex:
    """Normalized multi-arm pattern: per-arm single-beam sum weighted 1/V.

    Equals <steering(probe), cw.weights> / sqrt(V); both forms are kept and
    cross-checked in the test suite.
    """
    v = cw.bucket.size
    total = 0j
    for i, s_idx in enumerate(cw.bucket):
        total += np.exp(1j * cw.phase[i]) * pattern_single(
            book.geom, book.point(int(s_idx)), probe)
    return complex(total / v)


def main_lobe(book: SingleBeamCodebook, s: SamplePoint) -> MainLobe:
    """Main-lobe box of a single beam.

    Angle half-widths are 1/M in cos(phi) and 1/N in cos(theta).  The range
    interval spans one ring step either side in 1/r, so the box edge sits on
    the neighboring rings where the pattern has decayed to the projection
    threshold delta.  For the far-field ring the interval is [r_1, inf).
    """
    geom = book.geom
    psi = math.cos(s.theta) * math.sin(s.phi)
    kappa = _curvature_scale(geom, s.phi, psi, book.ring_rule)
    step = 2.0 * geom.lambda_c * book.zeta_delta**2 / kappa
    inv_s = 0.0 if math.isinf(s.r) else 1.0 / s.r
    c_phi = math.cos(s.phi)
    c_theta = math.cos(s.theta)
    return MainLobe(
        cos_theta=(max(c_theta - 1.0 / geom.n_count, -1.0),
                   min(c_theta + 1.0 / geom.n_count, 1.0)),
        cos_phi=(max(c_phi - 1.0 / geom.m_count, -1.0),
                 min(c_phi + 1.0 / geom.m_count, 1.0)),
        inv_r=(max(inv_s - step, 0.0), inv_s + step),
    )


def _lobe_probes(book: SingleBeamCodebook, s: SamplePoint, grid):
    """Cell-center probe poses covering the main lobe of s."""
    n_t, n_p, n_r = grid
    lobe = main_lobe(book, s)
    inv_lo = max(lobe.inv_r[0], 1.0 / (LOBE_RANGE_CAP * book.geom.rayleigh_distance()))
    inv_hi = lobe.inv_r[1]
    ct = lobe.cos_theta[0] + (np.arange(n_t) + 0.5) * (lobe.cos_theta[1] - lobe.cos_theta[0]) / n_t
    cp = lobe.cos_phi[0] + (np.arange(n_p) + 0.5) * (lobe.cos_phi[1] - lobe.cos_phi[0]) / n_p
    iv = inv_lo + (np.arange(n_r) + 0.5) * (inv_hi - inv_lo) / n_r
    ct = np.clip(ct, -1.0, 1.0)
    cp = np.clip(cp, -1.0 + 1e-12, 1.0 - 1e-12)
    CT, CP, IV = np.meshgrid(ct, cp, iv, indexing="ij")
    return np.arccos(CT).ravel(), np.arccos(CP).ravel(), 1.0 / IV.ravel()


def _lobe_workspace(book: SingleBeamCodebook, bucket: np.ndarray, grid):
    """Per-arm pattern matrix S, own-pattern column, and averaging weights.

    S[p, i] is arm i's single-beam pattern at probe p; probes are the
    concatenated lobe grids of all arms.  The weight vector folds the
    per-arm masked mean and the 1/V arm average into one dot product.
    """
    geom = book.geom
    v = bucket.size
    n_per = int(np.prod(grid))
    thetas = np.empty(v * n_per)
    phis = np.empty(v * n_per)
    rs = np.empty(v * n_per)
    for i, s_idx in enumerate(bucket):
        t, p, r = _lobe_probes(book, book.point(int(s_idx)), grid)
        sl = slice(i * n_per, (i + 1) * n_per)
        thetas[sl], phis[sl], rs[sl] = t, p, r
    a_probes = steering_batch(geom, thetas, phis, rs)
    s_mat = a_probes.conj() @ book.codewords[bucket].T
    own = np.concatenate([s_mat[i * n_per:(i + 1) * n_per, i] for i in range(v)])
    own_abs = np.abs(own)
    weights = np.zeros(v * n_per)
    for i in range(v):
        sl = slice(i * n_per, (i + 1) * n_per)
        valid = own_abs[sl] >= PATTERN_FLOOR
        n_valid = int(valid.sum())
        if n_valid:
            weights[sl][valid] = 1.0 / (n_valid * v)
    return s_mat, own_abs, weights


def _objective(w_vec, own_abs, weights):
    safe = np.maximum(own_abs, PATTERN_FLOOR)
    return float(weights @ (np.abs(np.abs(w_vec) - own_abs) / safe))


def deviation(book: SingleBeamCodebook, cw: MultiArmCodeword,
              grid=(8, 8, 4)) -> float:
    """Average main-lobe deviation of the multi-arm beam.

    Per arm, the relative magnitude error | |W| - |W'| | / |W'| is averaged
    over a fixed (cos theta x cos phi x 1/r) cell-center grid on that arm's
    main lobe (probes with |W'| < 1e-6 are excluded), then averaged over the
    arms.  Values are only comparable at equal grid resolution.
    """
    s_mat, own_abs, weights = _lobe_workspace(book, cw.bucket, grid)
    w_vec = s_mat @ (np.exp(1j * cw.phase) / cw.bucket.size)
    return _objective(w_vec, own_abs, weights)


def optimize_phases(book: SingleBeamCodebook, bucket, budget: int, *,
                    levels: int = 16, n_starts: int = 4, seed: int = 0,
                    grid=(8, 8, 4), history: list | None = None):
    """Minimize the average lobe deviation over a discrete phase grid.

    Coordinate descent over a levels-point phase grid per arm, coarse-to-fine
    from 16 levels, multi-start (all-zeros plus random starts), deterministic
    given seed.  budget caps the number of candidate evaluations.  Returns
    (phase_vector, deviation); `history` (diagnostic) collects the objective
    after every accepted improvement.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    bucket = np.asarray(bucket, dtype=int)
    v = bucket.size
    if v == 1:
        return np.zeros(1), 0.0
    s_mat, own_abs, weights = _lobe_workspace(book, bucket, grid)

    ladder = [min(16, levels)]
    while ladder[-1] < levels:
        ladder.append(min(ladder[-1] * 2, levels))

    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xC0DE)))
    starts = [np.zeros(v)]
    base_step = 2 * math.pi / ladder[0]
    for _ in range(max(0, n_starts - 1)):
        starts.append(rng.integers(0, ladder[0], size=v) * base_step)

    best_phase, best_val = None, math.inf
    evals = 0
    for start in starts:
        if evals >= budget:
            break
        phase = start.copy()
        contrib = s_mat * (np.exp(1j * phase) / v)
        w_vec = contrib.sum(axis=1)
        val = _objective(w_vec, own_abs, weights)
        evals += 1
        if val < best_val:
            best_phase, best_val = phase.copy(), val
            if history is not None:
                history.append(val)
        for lev in ladder:
            cand_phases = np.arange(lev) * (2 * math.pi / lev)
            improved = True
            while improved and evals < budget:
                improved = False
                for i in range(v):
                    room = budget - evals
                    if room <= 0:
                        break
                    base = w_vec - contrib[:, i]
                    cols = cand_phases[:min(lev, room)]
                    cand_w = base[:, None] + s_mat[:, i:i + 1] * (np.exp(1j * cols) / v)[None, :]
                    safe = np.maximum(own_abs, PATTERN_FLOOR)
                    objs = weights @ (np.abs(np.abs(cand_w) - own_abs[:, None]) / safe[:, None])
                    evals += cols.size
                    j = int(np.argmin(objs))
                    if objs[j] < val - 1e-15:
                        val = float(objs[j])
                        phase[i] = cols[j]
                        contrib[:, i] = s_mat[:, i] * (np.exp(1j * phase[i]) / v)
                        w_vec = base + contrib[:, i]
                        improved = True
                        if val < best_val:
                            best_phase, best_val = phase.copy(), val
                            if history is not None:
                                history.append(val)
    return best_phase % (2 * math.pi), best_val


def build_hmb_codebook(book: SingleBeamCodebook, table: BucketTable,
                       budget: int, *, levels: int = 16, seed: int = 0,
                       grid=(8, 8, 4), cache: dict | None = None):
    """One multi-arm codeword per bucket, in bucket order.

    budget = 0 skips phase shaping entirely (all-zero phases, deviation NaN)
    -- the cheap mode used by large Monte Carlo sweeps.  Results are memoized
    by bucket content via `cache` so identical buckets are optimized once.
    """
    if table.universe_size != book.n_codewords:
        raise ValueError("bucket table universe does not match the codebook")
    out = []
    for members in table.buckets:
        members = np.asarray(members, dtype=int)
        key = (tuple(members.tolist()), budget, levels, tuple(grid))
        if cache is not None and key in cache:
            phase, dev = cache[key]
        elif budget == 0:
            phase, dev = np.zeros(members.size), math.nan
        else:
            phase, dev = optimize_phases(book, members, budget, levels=levels,
                                         seed=seed, grid=grid)
        if cache is not None:
            cache[key] = (phase, dev)
        cw = synthesize(book, members, phase)
        cw.deviation = dev
        out.append(cw)
    return out


def codebook_digest(book: SingleBeamCodebook) -> str:
    """sha256 of the codeword matrix bytes; ties HMB files to their source."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(book.codewords).tobytes())
    return h.hexdigest()


def save_hmb_codebook(codewords: list[MultiArmCodeword], book: SingleBeamCodebook,
                      path, *, round_id: int = 0, levels: int = 16,
                      grid=(8, 8, 4)) -> None:
    """Write one hash round's multi-arm codebook as .npz.

    Header: source codebook digest, B, R, round_id, phase levels, lobe grid;
    body: per-bucket member indices, phases, deviations, and weight vectors.
    """
    buckets = np.stack([cw.bucket for cw in codewords])
    np.savez(
        path,
        codebook_sha256=codebook_digest(book),
        bucket_count=buckets.shape[0],
        bucket_size=buckets.shape[1],
        round_id=round_id,
        phase_levels=levels,
        lobe_grid=np.asarray(grid),
        buckets=buckets,
        phases=np.stack([cw.phase for cw in codewords]),
        deviations=np.array([cw.deviation for cw in codewords]),
        weights=np.stack([cw.weights for cw in codewords]),
    )


def load_hmb_codebook(path, book: SingleBeamCodebook | None = None):
    """Restore codewords written by save_hmb_codebook.

    When `book` is given, the stored digest is checked against it.
    """
    with np.load(path) as data:
        if book is not None and str(data["codebook_sha256"]) != codebook_digest(book):
            raise ValueError("HMB file was built from a different codebook")
        out = []
        for b in range(int(data["bucket_count"])):
            out.append(MultiArmCodeword(
                bucket=data["buckets"][b].copy(),
                weights=data["weights"][b].copy(),
                phase=data["phases"][b].copy(),
                deviation=float(data["deviations"][b]),
            ))
        return out
