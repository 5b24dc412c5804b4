"""Scan / soft-decision / vote training protocol across multiple BSs.

All K base stations transmit simultaneously, one multi-arm beam per time
slot, for Q = B * L slots (L hash rounds of B buckets; slot q = l * B + b).
The user records superimposed powers, assigns slots to BSs by ranked power
(soft decision), and recovers each BS's aligned beam by voting over the
bucket memberships of its slots.  Exhaustive and equal-interval multi-arm
baselines share the same scoring machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codebook import SingleBeamCodebook
from .geometry import ArrayGeometry, ChannelRealization, PolarPose
from .hashing import BucketTable, HashFamily, derive_seed, draw_hash
from .multiarm import MultiArmCodeword, build_hmb_codebook

__all__ = [
    "ScenarioConfig",
    "PowerTrace",
    "TrainingOutcome",
    "place_base_stations",
    "draw_sector_angles",
    "ground_truth_beam",
    "scan",
    "soft_demultiplex",
    "hard_demultiplex",
    "vote",
    "hmb_train",
    "exhaustive_train",
    "eimb_train",
    "eimb_tables",
    "achievable_rate",
]

_NOISE_TAG = 0x4015E


@dataclass
class ScenarioConfig:
    """Monte Carlo scenario: link budget, protocol sizes, BS placement.

    Powers are in dBm (linear math runs in mW).  sigma2_dbm = None derives
    the noise power from snr_db via the reference-SNR definition
    gamma = P0 * M * N * rho0 / (r0^2 * sigma^2).  l_rounds = 0 selects
    ceil(log2(N_C)) rounds.
    """

    k_bs: int = 5
    b_buckets: int = 32
    l_rounds: int = 0
    snr_db: float = 20.0
    p0_dbm: float = 15.0
    sigma2_dbm: float | None = None
    rho0_db: float = -72.0
    r0: float = 81.92
    user_count: int = 1
    place_r_min: float = 10.0
    place_r_max: float = 81.92
    place_min_gap_db: float = 4.0
    place_cos_phi_max: float = 0.8
    place_cos_theta_max: float = 0.9
    place_angle_grid: bool = True
    phase_budget: int = 0
    decision: str = "soft"
    hard_kappa: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k_bs < 1:
            raise ValueError("k_bs must be >= 1")
        if self.l_rounds < 0:
            raise ValueError("l_rounds must be >= 0")
        if self.decision not in ("soft", "hard"):
            raise ValueError("decision must be 'soft' or 'hard'")

    @property
    def p0_mw(self) -> float:
        return 10.0 ** (self.p0_dbm / 10.0)

    @property
    def rho0_lin(self) -> float:
        return 10.0 ** (self.rho0_db / 10.0)

    def sigma2_mw(self, mn: int) -> float:
        """Noise power (mW) consistent with the reference SNR for an
        mn-element array; mn may also be an ArrayGeometry."""
        if isinstance(mn, ArrayGeometry):
            mn = mn.size
        if self.sigma2_dbm is not None:
            return 10.0 ** (self.sigma2_dbm / 10.0)
        gamma = 10.0 ** (self.snr_db / 10.0)
        return self.p0_mw * mn * self.rho0_lin / (self.r0**2 * gamma)

    def rounds(self, n_codewords: int) -> int:
        if self.l_rounds > 0:
            return self.l_rounds
        return max(1, math.ceil(math.log2(n_codewords)))


@dataclass
class PowerTrace:
    """Slot-ordered received powers; slot q = l * B + b maps to slot_map[q]."""

    powers: np.ndarray
    slot_map: np.ndarray  # (Q, 2) rows of (round, bucket)

    @property
    def n_slots(self) -> int:
        return self.powers.size


@dataclass
class TrainingOutcome:
    """Per-rank estimates plus the evidence that produced them.

    Rank k (0-based) is the BS with the (k+1)-th strongest channel gain;
    rank_to_bs holds that mapping (evaluator-side knowledge).  Vote ties are
    flagged and score as failures; gamma_hat is -1 where no estimate exists
    (hard decision with an empty slot cluster).
    """

    gamma_hat: np.ndarray
    slot_assignment: list
    votes: list = field(repr=False, default=None)
    ties: np.ndarray = None
    rank_to_bs: np.ndarray = None
    trace: PowerTrace = field(repr=False, default=None)
    slots_used: int = 0
    rank_confusions: int = 0


def place_base_stations(cfg: ScenarioConfig, rng: np.random.Generator,
                        geom: ArrayGeometry | None = None) -> list[PolarPose]:
    """Draw K BS poses with distinguishable channel gains.

    Ranges are log-uniform over [place_r_min, place_r_max] subject to a
    minimum pairwise path-gain gap of place_min_gap_db (the soft decision
    separates BSs by received power level, so the gain ladder must have
    actual rungs).  Angles are uniform over the codebook's sample grid
    restricted to the beamforming sector (place_angle_grid = True, needs
    `geom`), or continuous within the sector otherwise.  The sector caps on
    |cos theta| and |cos phi| keep poses off the planar array's endfire,
    where no codeword forms a usable beam.
    """
    k = cfg.k_bs
    span_db = 20.0 * math.log10(cfg.place_r_max / cfg.place_r_min)
    free_db = span_db - (k - 1) * cfg.place_min_gap_db
    if free_db < 0:
        raise ValueError("range window too small for the requested gain gaps")
    levels = np.sort(rng.uniform(0.0, free_db, size=k))
    levels += cfg.place_min_gap_db * np.arange(k)
    r = cfg.place_r_min * 10.0 ** (levels / 20.0)
    rng.shuffle(r)
    angles = draw_sector_angles(cfg, rng, geom, k)
    return [PolarPose(r=float(r[i]), theta=angles[i][0], phi=angles[i][1])
            for i in range(k)]


def draw_sector_angles(cfg: ScenarioConfig, rng: np.random.Generator,
                       geom: ArrayGeometry | None, k: int) -> list[tuple[float, float]]:
    """K (theta, phi) draws inside the beamforming sector, snapped to the
    codebook angle grid when cfg.place_angle_grid is set."""
    if cfg.place_angle_grid:
        if geom is None:
            raise ValueError("grid-snapped placement needs the array geometry")
        from .codebook import sample_angles
        pairs = [(t, p) for t, p in sample_angles(geom)
                 if abs(math.cos(t)) <= cfg.place_cos_theta_max
                 and abs(math.cos(p)) <= cfg.place_cos_phi_max]
        picks = rng.integers(0, len(pairs), size=k)
        mirror = rng.uniform(size=k) < 0.5
        out = []
        for i in range(k):
            theta, phi = pairs[int(picks[i])]
            if mirror[i]:
                theta = 2.0 * math.pi - theta
            out.append((theta, phi))
        return out
    cthetas = rng.uniform(-cfg.place_cos_theta_max, cfg.place_cos_theta_max, size=k)
    mirror = rng.uniform(size=k) < 0.5
    cphis = rng.uniform(-cfg.place_cos_phi_max, cfg.place_cos_phi_max, size=k)
    out = []
    for i in range(k):
        theta = math.acos(cthetas[i])
        if mirror[i]:
            theta = 2.0 * math.pi - theta
        out.append((theta, float(math.acos(cphis[i]))))
    return out


def ground_truth_beam(book: SingleBeamCodebook, channel: ChannelRealization) -> int:
    """Best-aligned codeword: argmax_s |<C(s,:), h>| (lowest index on ties)."""
    u = book.codewords.conj() @ channel.gains
    return int(np.argmax(np.abs(u)))


def scan(cfg: ScenarioConfig, channels: list[ChannelRealization],
         hmb: list[list[list[MultiArmCodeword]]], rng: np.random.Generator) -> PowerTrace:
    """Record |sum_k sqrt(P0) <h_k, w_k(l,b)> + n|^2 for every slot.

    hmb[k][l][b] is BS k's beam for round l, bucket b; all BSs must agree on
    (L, B).  One CN(0, sigma^2) draw per slot.
    """
    k_bs = len(channels)
    if len(hmb) != k_bs:
        raise ValueError("one beam schedule per BS required")
    n_rounds = len(hmb[0])
    n_buckets = len(hmb[0][0])
    for k in range(k_bs):
        if len(hmb[k]) != n_rounds or any(len(row) != n_buckets for row in hmb[k]):
            raise ValueError("beam schedules must share (rounds, buckets) shape")
    mn = channels[0].gains.size
    q_total = n_rounds * n_buckets
    sqrt_p0 = math.sqrt(cfg.p0_mw)
    amps = np.zeros(q_total, dtype=complex)
    slot_map = np.empty((q_total, 2), dtype=int)
    for l in range(n_rounds):
        for b in range(n_buckets):
            q = l * n_buckets + b
            slot_map[q] = (l, b)
            for k in range(k_bs):
                w = hmb[k][l][b].weights
                if w.size != mn:
                    raise ValueError("weight length does not match the array")
                amps[q] += sqrt_p0 * np.vdot(channels[k].gains, w)
    noise = _complex_noise(rng, cfg.sigma2_mw(mn), q_total)
    return PowerTrace(powers=np.abs(amps + noise) ** 2, slot_map=slot_map)


def _complex_noise(rng: np.random.Generator, sigma2: float, size) -> np.ndarray:
    scale = math.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def soft_demultiplex(powers: np.ndarray, k_bs: int, l_rounds: int) -> list[np.ndarray]:
    """Rank-k BS gets the slots of the ((k-1)L+1)-th .. kL-th largest powers.

    Ties break toward the earlier slot index.  Returned slot sets are sorted
    ascending; they are disjoint and exhaust the top K*L powers.
    """
    powers = np.asarray(powers)
    if powers.size < k_bs * l_rounds:
        raise ValueError("trace shorter than K * L slots")
    order = np.argsort(-powers, kind="stable")
    return [np.sort(order[k * l_rounds:(k + 1) * l_rounds]) for k in range(k_bs)]


def hard_demultiplex(powers: np.ndarray, k_bs: int,
                     kappa: float = 1.0) -> list[np.ndarray]:
    """Threshold baseline: slots above mean + kappa * std, split into K
    power-ordered clusters (quantile split by count).  Clusters may be empty
    when the threshold misses; missing ranks score as training failures."""
    powers = np.asarray(powers)
    tau = powers.mean() + kappa * powers.std()
    hits = np.flatnonzero(powers > tau)
    ordered = hits[np.argsort(-powers[hits], kind="stable")]
    return [np.sort(part) for part in np.array_split(ordered, k_bs)]


def vote(tables: list[BucketTable], slots: np.ndarray,
         n_codewords: int | None = None):
    """Tally one vote per slot for every member of that slot's bucket.

    slots hold flat indices q = l * B + b into the scan order of `tables`.
    Returns (winner, counts, tie); the winner is the lowest index among any
    tied maximum, with the tie flagged.
    """
    slots = np.asarray(slots, dtype=int)
    if slots.size == 0:
        raise ValueError("cannot vote over an empty slot set")
    n_buckets = tables[0].bucket_count
    if n_codewords is None:
        n_codewords = tables[0].universe_size
    members = np.concatenate(
        [tables[q // n_buckets].buckets[q % n_buckets] for q in slots])
    counts = np.bincount(members, minlength=n_codewords)
    winner = int(np.argmax(counts))
    tie = int((counts == counts[winner]).sum()) > 1
    return winner, counts, tie


def _rank_order(channels: list[ChannelRealization]) -> np.ndarray:
    betas = np.array([ch.beta for ch in channels])
    return np.argsort(-betas, kind="stable")


def _count_rank_confusions(sets, tables_per_bs, channels, book, rank_to_bs):
    """Rank sets whose dominant aligned BS differs from the gain-rank map."""
    truths = [ground_truth_beam(book, ch) for ch in channels]
    n_buckets = tables_per_bs[0][0].bucket_count
    confusions = 0
    for rank, slots in enumerate(sets):
        if len(slots) == 0:
            continue
        hits = np.zeros(len(channels), dtype=int)
        for q in slots:
            l, b = int(q) // n_buckets, int(q) % n_buckets
            for k in range(len(channels)):
                if truths[k] in tables_per_bs[k][l].buckets[b]:
                    hits[k] += 1
        if hits.max() > 0 and int(np.argmax(hits)) != int(rank_to_bs[rank]):
            confusions += 1
    return confusions


def hmb_train(cfg: ScenarioConfig, channels: list[ChannelRealization],
              book: SingleBeamCodebook, seed: int | None = None) -> TrainingOutcome:
    """Full hashed multi-arm training run for one scenario realization.

    Per BS and round, an independent hash table is drawn from a seed mixed
    with (BS index, round); beams are synthesized per bucket (phase budget
    from the config), scanned over Q = B * L slots, demultiplexed by the
    configured decision rule, and voted per rank.
    """
    if seed is None:
        seed = cfg.seed
    k_bs = len(channels)
    if k_bs != cfg.k_bs:
        raise ValueError("channel count does not match cfg.k_bs")
    n_c = book.n_codewords
    n_rounds = cfg.rounds(n_c)
    tables = []
    beams = []
    cache: dict = {}
    for k in range(k_bs):
        family = HashFamily(n_c, cfg.b_buckets, derive_seed(seed, k))
        per_round = [draw_hash(family, l) for l in range(n_rounds)]
        tables.append(per_round)
        beams.append([build_hmb_codebook(book, t, cfg.phase_budget, cache=cache)
                      for t in per_round])
    rng = np.random.default_rng(np.random.SeedSequence((seed, _NOISE_TAG)))
    trace = scan(cfg, channels, beams, rng)
    if cfg.decision == "soft":
        sets = soft_demultiplex(trace.powers, k_bs, n_rounds)
    else:
        sets = hard_demultiplex(trace.powers, k_bs, cfg.hard_kappa)
    rank_to_bs = _rank_order(channels)
    gamma_hat = np.full(k_bs, -1, dtype=int)
    ties = np.zeros(k_bs, dtype=bool)
    votes = []
    for rank in range(k_bs):
        bs = int(rank_to_bs[rank])
        if len(sets[rank]) == 0:
            ties[rank] = True
            votes.append(np.zeros(n_c, dtype=int))
            continue
        winner, counts, tie = vote(tables[bs], sets[rank], n_c)
        gamma_hat[rank] = winner
        ties[rank] = tie
        votes.append(counts)
    confusions = _count_rank_confusions(sets, tables, channels, book, rank_to_bs)
    return TrainingOutcome(
        gamma_hat=gamma_hat,
        slot_assignment=sets,
        votes=votes,
        ties=ties,
        rank_to_bs=rank_to_bs,
        trace=trace,
        slots_used=trace.n_slots,
        rank_confusions=confusions,
    )


def exhaustive_train(cfg: ScenarioConfig, channels: list[ChannelRealization],
                     book: SingleBeamCodebook, rng: np.random.Generator):
    """Alternate-scanning baseline: each BS sweeps all N_C single beams.

    Returns (per-BS argmax indices, slots used = K * N_C).
    """
    n_c = book.n_codewords
    sqrt_p0 = math.sqrt(cfg.p0_mw)
    sigma2 = cfg.sigma2_mw(channels[0].gains.size)
    estimates = np.empty(len(channels), dtype=int)
    for k, ch in enumerate(channels):
        amps = sqrt_p0 * np.conj(book.codewords.conj() @ ch.gains)
        powers = np.abs(amps + _complex_noise(rng, sigma2, n_c)) ** 2
        estimates[k] = int(np.argmax(powers))
    return estimates, len(channels) * n_c


def eimb_tables(n_codewords: int, n_buckets: int) -> list[BucketTable]:
    """Fixed two-round composition: residue classes, then contiguous blocks."""
    if n_codewords % n_buckets != 0:
        raise ValueError("bucket count must divide the codebook size")
    r = n_codewords // n_buckets
    residue = np.stack([np.arange(b, n_codewords, n_buckets) for b in range(n_buckets)])
    block = np.arange(n_codewords).reshape(n_buckets, r)
    return [BucketTable(buckets=residue, round_id=0),
            BucketTable(buckets=block, round_id=1)]


def eimb_train(cfg: ScenarioConfig, channels: list[ChannelRealization],
               book: SingleBeamCodebook, seed: int | None = None) -> TrainingOutcome:
    """Equal-interval multi-arm baseline: same pipeline, fixed bucket
    composition (identical for every BS and every trial), two rounds."""
    if seed is None:
        seed = cfg.seed
    k_bs = len(channels)
    n_c = book.n_codewords
    tables = eimb_tables(n_c, cfg.b_buckets)
    cache: dict = {}
    beams_one = [build_hmb_codebook(book, t, cfg.phase_budget, cache=cache) for t in tables]
    beams = [beams_one] * k_bs
    rng = np.random.default_rng(np.random.SeedSequence((seed, _NOISE_TAG, 1)))
    trace = scan(cfg, channels, beams, rng)
    n_rounds = len(tables)
    if cfg.decision == "soft":
        sets = soft_demultiplex(trace.powers, k_bs, n_rounds)
    else:
        sets = hard_demultiplex(trace.powers, k_bs, cfg.hard_kappa)
    rank_to_bs = _rank_order(channels)
    gamma_hat = np.full(k_bs, -1, dtype=int)
    ties = np.zeros(k_bs, dtype=bool)
    votes = []
    for rank in range(k_bs):
        if len(sets[rank]) == 0:
            ties[rank] = True
            votes.append(np.zeros(n_c, dtype=int))
            continue
        winner, counts, tie = vote(tables, sets[rank], n_c)
        gamma_hat[rank] = winner
        ties[rank] = tie
        votes.append(counts)
    tables_per_bs = [tables] * k_bs
    confusions = _count_rank_confusions(sets, tables_per_bs, channels, book, rank_to_bs)
    return TrainingOutcome(
        gamma_hat=gamma_hat,
        slot_assignment=sets,
        votes=votes,
        ties=ties,
        rank_to_bs=rank_to_bs,
        trace=trace,
        slots_used=trace.n_slots,
        rank_confusions=confusions,
    )


def achievable_rate(cfg: ScenarioConfig, channel: ChannelRealization,
                    weights: np.ndarray) -> float:
    """log2(1 + gamma |<weights, g>|^2) with g the unit channel direction."""
    gamma = 10.0 ** (cfg.snr_db / 10.0)
    g_unit = channel.gains / np.linalg.norm(channel.gains)
    proj = abs(np.vdot(weights, g_unit))
    return math.log2(1.0 + gamma * proj * proj)
