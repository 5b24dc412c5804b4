"""Experiment orchestration: Monte Carlo sweeps, CSV emission, config files.

Every sweep is a pure function of its spec: trials use per-trial derived RNG
streams, noise is drawn once per trial as unit-variance complex samples and
scaled per SNR point (common random numbers across SNR points and across
paired methods), and rows come out in deterministic grid order -- re-running
an experiment reproduces its CSV byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dc_fields

import numpy as np

from .codebook import build_codebook
from .geometry import ArrayGeometry, PolarPose, los_channel
from .hashing import BucketTable, derive_seed, draw_permutation, table_from_permutation
from .multiarm import build_hmb_codebook
from .training import (ScenarioConfig, draw_sector_angles, eimb_tables,
                       place_base_stations)

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "run_accuracy_sweep",
    "run_soft_hard_sweep",
    "run_farfield_check",
    "run_overhead_sweep",
    "run_experiment",
    "emit_csv",
    "parse_csv",
    "parse_config",
    "spec_from_config",
    "DEFAULT_SNR_GRID",
]

DEFAULT_SNR_GRID = (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
DEFAULT_B_GRID = (32, 16, 8)
DEFAULT_NC_GRID = (64, 128, 256, 512, 1024)

DEFAULT_METHODS = {
    "accuracy": ("hmb", "exhaustive_nearfield", "exhaustive_dft", "eimb"),
    "softhard": ("hmb_soft", "hmb_hard", "eimb_soft"),
    "farfield": ("exhaustive_nearfield", "exhaustive_dft"),
    "overhead": ("exhaustive", "hmb", "eimb"),
}

_PLACE_TAG = 0x9A
_HASH_TAG = 0xA5
_NOISE_TAGS = {"exhaustive_nearfield": 0xE1, "exhaustive_dft": 0xE2,
               "hmb": 0xB0, "eimb": 0xB1}

CSV_HEADER = "experiment,method,snr_db,b,nc,trials,metric,stderr,seed"


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything a sweep needs: grids, trial count, codebook and scenario
    parameters.  The default codebook r_min = 5.2 m makes the 4 x 128 grid
    size (736 codewords) divisible by every bucket count in the default
    b_grid."""

    experiment: str = "accuracy"
    methods: tuple = ()
    snr_grid_db: tuple = DEFAULT_SNR_GRID
    b_grid: tuple = DEFAULT_B_GRID
    nc_grid: tuple = DEFAULT_NC_GRID
    trials: int = 500
    seed: int = 1
    out_path: str = ""
    # codebook
    m: int = 4
    n: int = 128
    dx: float = 0.005
    dz: float = 0.005
    lambda_c: float = 0.01
    fc: float = 28e9
    delta: float = 0.5
    r_min: float = 5.2
    ring_rule: str = "union"
    # scenario
    k_bs: int = 5
    l_rounds: int = 0
    p0_dbm: float = 15.0
    rho0_db: float = -72.0
    r0: float = 81.92
    place_r_min: float = 10.0
    place_r_max: float = 81.92
    place_min_gap_db: float = 4.0
    place_cos_phi_max: float = 0.8
    place_cos_theta_max: float = 0.9
    place_angle_grid: bool = True
    phase_budget: int = 0
    hard_kappa: float = 1.0
    user_r: float = 300.0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.snr_grid_db) == 0 or len(self.b_grid) == 0:
            raise ValueError("grids must be non-empty")
        if self.experiment not in DEFAULT_METHODS:
            raise ValueError(f"unknown experiment {self.experiment!r}")

    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(self.m, self.n, self.dx, self.dz, self.lambda_c, self.fc)

    def resolved_methods(self) -> tuple:
        return tuple(self.methods) if self.methods else DEFAULT_METHODS[self.experiment]

    def scenario(self, snr_db: float, b: int, decision: str = "soft") -> ScenarioConfig:
        return ScenarioConfig(
            k_bs=self.k_bs, b_buckets=b, l_rounds=self.l_rounds, snr_db=snr_db,
            p0_dbm=self.p0_dbm, rho0_db=self.rho0_db, r0=self.r0,
            place_r_min=self.place_r_min, place_r_max=self.place_r_max,
            place_min_gap_db=self.place_min_gap_db,
            place_cos_phi_max=self.place_cos_phi_max,
            place_cos_theta_max=self.place_cos_theta_max,
            place_angle_grid=self.place_angle_grid,
            phase_budget=self.phase_budget, decision=decision,
            hard_kappa=self.hard_kappa, seed=self.seed,
        )


@dataclass(frozen=True)
class ResultRow:
    """One CSV line; metric is an accuracy in [0, 1] or an exact slot count
    (trials = 0 marks formula rows with no Monte Carlo behind them)."""

    experiment: str
    method: str
    snr_db: float
    b: int
    nc: int
    trials: int
    metric: float
    stderr: float
    seed: int


def _parse_method(tag: str):
    for suffix in ("_soft", "_hard"):
        if tag.endswith(suffix):
            return tag[: -len(suffix)], suffix[1:]
    return tag, "soft"


def _rng(*keys) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(keys))


def _complex_unit_noise(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def _soft_sets(powers: np.ndarray, k_bs: int, l_rounds: int):
    order = np.argsort(-powers, kind="stable")
    return [order[k * l_rounds:(k + 1) * l_rounds] for k in range(k_bs)]


def _hard_sets(powers: np.ndarray, k_bs: int, kappa: float):
    tau = powers.mean() + kappa * powers.std()
    hits = np.flatnonzero(powers > tau)
    ordered = hits[np.argsort(-powers[hits], kind="stable")]
    return np.array_split(ordered, k_bs)


def _score_votes(sets, rows_per_bs, rank_to_bs, truths, n_codewords, n_buckets):
    """Count ranks whose vote recovers their BS's true beam (ties fail)."""
    successes = 0
    for rank, slots in enumerate(sets):
        slots = np.asarray(slots, dtype=int)
        if slots.size == 0:
            continue
        bs = int(rank_to_bs[rank])
        members = rows_per_bs[bs][slots // n_buckets, slots % n_buckets].ravel()
        counts = np.bincount(members, minlength=n_codewords)
        winner = int(np.argmax(counts))
        tie = int((counts == counts[winner]).sum()) > 1
        if not tie and winner == truths[bs]:
            successes += 1
    return successes


def _phases_for_rows(book, rows, budget, cache):
    """(L, B, V) optimized per-arm phases for the given bucket rows."""
    n_rounds, n_buckets, v = rows.shape
    out = np.empty(rows.shape, dtype=float)
    for l in range(n_rounds):
        table = BucketTable(buckets=rows[l], round_id=l)
        cws = build_hmb_codebook(book, table, budget, cache=cache)
        for b in range(n_buckets):
            out[l, b] = cws[b].phase
    return out


def _slot_amps(u_all, sqrt_p0, rows_per_bs, phases_per_bs=None):
    """Noise-free slot amplitudes for simultaneous multi-BS scanning.

    u_all[k, s] = <C(s,:), h_k>; BS k's contribution to slot (l, b) is
    sqrt(P0) h_k^H w = sqrt(P0) conj(sum over members of exp(-j phase) u).
    Algebraically identical to training.scan with the same beams.
    """
    k_bs = len(rows_per_bs)
    n_rounds, n_buckets, v = rows_per_bs[0].shape
    amps = np.zeros(n_rounds * n_buckets, dtype=complex)
    for k in range(k_bs):
        picked = u_all[k][rows_per_bs[k]]            # (L, B, V)
        if phases_per_bs is not None:
            picked = picked * np.exp(-1j * phases_per_bs[k])
        amps += sqrt_p0 * np.conj(picked.sum(axis=2).ravel()) / math.sqrt(v)
    return amps


def _monte_carlo(spec: ExperimentSpec, experiment_name: str, methods: tuple,
                 fixed_user_r: float | None = None):
    geom = spec.geometry()
    book = build_codebook(geom, spec.delta, spec.r_min, spec.ring_rule)
    n_c = book.n_codewords
    kind_groups: dict[str, list] = {}
    for tag in methods:
        kind, decision = _parse_method(tag)
        if kind not in _NOISE_TAGS:
            raise ValueError(f"unknown method {tag!r}")
        kind_groups.setdefault(kind, []).append((tag, decision))
    dft_book = None
    dft_to_nf = None
    if "exhaustive_dft" in kind_groups:
        dft_book = build_codebook(geom, spec.delta, spec.r_min, "elevation")
        # the DFT grid is exactly the far-field ring of the near-field book,
        # so DFT estimates score against the near-field truth through it
        dft_to_nf = np.flatnonzero(np.isinf(book.rs))
        if dft_to_nf.size != dft_book.n_codewords:
            raise ValueError("far-field sub-book does not match the DFT book")

    snrs = list(spec.snr_grid_db)
    sqrt_p0 = math.sqrt(10.0 ** (spec.p0_dbm / 10.0))
    base_cfg = spec.scenario(snrs[0], spec.b_grid[0])
    sigma = [math.sqrt(spec.scenario(s, spec.b_grid[0]).sigma2_mw(geom.size))
             for s in snrs]
    k_bs = spec.k_bs
    bucketed = [k for k in ("hmb", "eimb") if k in kind_groups]
    b_values = list(spec.b_grid) if bucketed else []
    for b in b_values:
        if n_c % b != 0:
            raise ValueError(f"bucket count {b} does not divide codebook size {n_c}")
    n_rounds = base_cfg.rounds(n_c)
    eimb_rows = {b: np.stack([t.buckets for t in eimb_tables(n_c, b)])
                 for b in b_values} if "eimb" in kind_groups else {}
    phase_cache: dict = {}

    succ: dict = {}
    samp: dict = {}

    def bump(key, s):
        succ[key] = succ.get(key, 0) + s
        samp[key] = samp.get(key, 0) + k_bs

    for t in range(spec.trials):
        rng_place = _rng(spec.seed, t, _PLACE_TAG)
        if fixed_user_r is None:
            poses = place_base_stations(base_cfg, rng_place, geom)
        else:
            angles = draw_sector_angles(base_cfg, rng_place, geom, k_bs)
            poses = [PolarPose(r=fixed_user_r, theta=a[0], phi=a[1])
                     for a in angles]
        channels = [los_channel(geom, p, base_cfg.rho0_lin) for p in poses]
        h = np.stack([ch.gains for ch in channels])
        betas = np.array([ch.beta for ch in channels])
        rank_to_bs = np.argsort(-betas, kind="stable")
        u_nf = h @ book.codewords.conj().T            # u[k, s] = <C(s,:), h_k>
        truths_nf = np.argmax(np.abs(u_nf), axis=1)
        u_dft = None
        if dft_book is not None:
            u_dft = u_nf[:, dft_to_nf]

        hmb_rows = {}
        if "hmb" in kind_groups:
            perms = [[draw_permutation(derive_seed(spec.seed, t, _HASH_TAG, k), l, n_c)
                      for l in range(n_rounds)] for k in range(k_bs)]
            for b in b_values:
                hmb_rows[b] = [np.stack([table_from_permutation(perms[k][l], b).buckets
                                         for l in range(n_rounds)])
                               for k in range(k_bs)]

        noise = {}
        for kind in kind_groups:
            tag = _NOISE_TAGS[kind]
            if kind == "exhaustive_nearfield":
                noise[kind] = _complex_unit_noise(_rng(spec.seed, t, tag), (k_bs, n_c))
            elif kind == "exhaustive_dft":
                noise[kind] = _complex_unit_noise(
                    _rng(spec.seed, t, tag), (k_bs, dft_book.n_codewords))
            else:
                rounds = n_rounds if kind == "hmb" else 2
                for b in b_values:
                    noise[(kind, b)] = _complex_unit_noise(
                        _rng(spec.seed, t, tag, b), rounds * b)

        for kind, variants in kind_groups.items():
            if kind.startswith("exhaustive"):
                u = u_dft if kind == "exhaustive_dft" else u_nf
                amps = sqrt_p0 * np.conj(u)
                for si in range(len(snrs)):
                    powers = np.abs(amps + sigma[si] * noise[kind]) ** 2
                    est = np.argmax(powers, axis=1)
                    if kind == "exhaustive_dft":
                        est = dft_to_nf[est]
                    score = int((est == truths_nf).sum())
                    for tag, _ in variants:
                        bump((tag, 0, si), score)
                continue
            rounds = n_rounds if kind == "hmb" else 2
            for b in b_values:
                rows = hmb_rows[b] if kind == "hmb" else [eimb_rows[b]] * k_bs
                phases = None
                if spec.phase_budget:
                    if kind == "hmb":
                        phases = [_phases_for_rows(book, rows[k], spec.phase_budget,
                                                   phase_cache) for k in range(k_bs)]
                    else:
                        shared = _phases_for_rows(book, rows[0], spec.phase_budget,
                                                  phase_cache)
                        phases = [shared] * k_bs
                amps = _slot_amps(u_nf, sqrt_p0, rows, phases)
                for si in range(len(snrs)):
                    powers = np.abs(amps + sigma[si] * noise[(kind, b)]) ** 2
                    for tag, decision in variants:
                        sets = (_soft_sets(powers, k_bs, rounds) if decision == "soft"
                                else _hard_sets(powers, k_bs, spec.hard_kappa))
                        bump((tag, b, si),
                             _score_votes(sets, rows, rank_to_bs, truths_nf, n_c, b))

    rows_out = []
    for tag in methods:
        kind, _ = _parse_method(tag)
        b_list = [0] if kind.startswith("exhaustive") else b_values
        nc = dft_book.n_codewords if kind == "exhaustive_dft" else n_c
        for b in b_list:
            for si, s in enumerate(snrs):
                key = (tag, b, si)
                n = samp[key]
                p = succ[key] / n
                rows_out.append(ResultRow(
                    experiment=experiment_name, method=tag, snr_db=float(s),
                    b=int(b), nc=int(nc), trials=spec.trials, metric=p,
                    stderr=math.sqrt(p * (1.0 - p) / n), seed=spec.seed))
    return rows_out


def run_accuracy_sweep(spec: ExperimentSpec) -> list[ResultRow]:
    """Identification accuracy vs SNR for HMB and the baselines."""
    methods = tuple(spec.methods) if spec.methods else DEFAULT_METHODS["accuracy"]
    return _monte_carlo(spec, "accuracy", methods)


def run_soft_hard_sweep(spec: ExperimentSpec) -> list[ResultRow]:
    """Soft vs hard decision accuracy, paired on identical channel and noise
    draws (the two decisions score the very same power traces)."""
    methods = tuple(spec.methods) if spec.methods else DEFAULT_METHODS["softhard"]
    return _monte_carlo(spec, "softhard", methods)


def run_farfield_check(spec: ExperimentSpec) -> list[ResultRow]:
    """Near-field vs DFT codebook accuracy with every BS at range user_r
    (beyond the Rayleigh distance)."""
    methods = tuple(spec.methods) if spec.methods else DEFAULT_METHODS["farfield"]
    return _monte_carlo(spec, "farfield", methods, fixed_user_r=spec.user_r)


def run_overhead_sweep(spec: ExperimentSpec) -> list[ResultRow]:
    """Exact training slot counts per method over a codebook-size grid.

    exhaustive = N_C slots (per BS); hmb = B * ceil(log2 N_C) total;
    eimb = 2 B total.  Formula rows carry trials = 0 and stderr = 0.
    """
    methods = tuple(spec.methods) if spec.methods else DEFAULT_METHODS["overhead"]
    b = spec.b_grid[0]
    rows = []
    for tag in methods:
        for nc in spec.nc_grid:
            if tag == "exhaustive":
                slots, bcol = nc, 0
            elif tag == "hmb":
                if nc % b != 0:
                    raise ValueError(f"bucket count {b} does not divide {nc}")
                slots, bcol = b * math.ceil(math.log2(nc)), b
            elif tag == "eimb":
                if nc % b != 0:
                    raise ValueError(f"bucket count {b} does not divide {nc}")
                slots, bcol = 2 * b, b
            else:
                raise ValueError(f"unknown overhead method {tag!r}")
            rows.append(ResultRow(experiment="overhead", method=tag, snr_db=0.0,
                                  b=bcol, nc=int(nc), trials=0, metric=float(slots),
                                  stderr=0.0, seed=spec.seed))
    return rows


_RUNNERS = {
    "accuracy": run_accuracy_sweep,
    "softhard": run_soft_hard_sweep,
    "farfield": run_farfield_check,
    "overhead": run_overhead_sweep,
}


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    return _RUNNERS[spec.experiment](spec)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_csv(rows: list[ResultRow], path=None) -> str:
    """Serialize rows; floats use repr so parse_csv round-trips exactly."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join(_fmt(v) for v in (
            r.experiment, r.method, r.snr_db, r.b, r.nc, r.trials,
            r.metric, r.stderr, r.seed)))
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return text


def parse_csv(source) -> list[ResultRow]:
    """Inverse of emit_csv; accepts a path or the CSV text itself."""
    text = source if "\n" in str(source) else open(source).read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines[0] != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    out = []
    for ln in lines[1:]:
        cells = ln.split(",")
        out.append(ResultRow(
            experiment=cells[0], method=cells[1], snr_db=float(cells[2]),
            b=int(cells[3]), nc=int(cells[4]), trials=int(cells[5]),
            metric=float(cells[6]), stderr=float(cells[7]), seed=int(cells[8])))
    return out


# ---------------------------------------------------------------------------
# Flat key=value config files
# ---------------------------------------------------------------------------

def _parse_bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _csv_floats(v: str):
    return tuple(float(x) for x in v.split(",") if x.strip())


def _csv_ints(v: str):
    return tuple(int(x) for x in v.split(",") if x.strip())


def _csv_strs(v: str):
    return tuple(x.strip() for x in v.split(",") if x.strip())


CONFIG_SCHEMA = {
    "experiment": str,
    "methods": _csv_strs,
    "snr_grid_db": _csv_floats,
    "b_grid": _csv_ints,
    "nc_grid": _csv_ints,
    "trials": int,
    "seed": int,
    "out": str,
    "m": int,
    "n": int,
    "dx": float,
    "dz": float,
    "lambda_c": float,
    "fc": float,
    "delta": float,
    "r_min": float,
    "ring_rule": str,
    "k_bs": int,
    "l_rounds": int,
    "p0_dbm": float,
    "rho0_db": float,
    "r0": float,
    "place_r_min": float,
    "place_r_max": float,
    "place_min_gap_db": float,
    "place_cos_phi_max": float,
    "place_cos_theta_max": float,
    "place_angle_grid": _parse_bool,
    "phase_budget": int,
    "hard_kappa": float,
    "user_r": float,
}


def parse_config(text: str) -> dict:
    """Parse flat key=value lines ('#' starts a comment).

    Unknown keys are rejected; values are coerced per key.
    """
    out = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {i}: expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in CONFIG_SCHEMA:
            raise ValueError(f"config line {i}: unknown key {key!r}")
        try:
            out[key] = CONFIG_SCHEMA[key](val)
        except ValueError as exc:
            raise ValueError(f"config line {i}: bad value for {key!r}: {exc}") from None
    return out


def spec_from_config(cfg: dict, **overrides) -> ExperimentSpec:
    """Build an ExperimentSpec from parse_config output plus CLI overrides."""
    merged = dict(cfg)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if "out" in merged:
        merged["out_path"] = merged.pop("out")
    valid = {f.name for f in dc_fields(ExperimentSpec)}
    unknown = set(merged) - valid
    if unknown:
        raise ValueError(f"unknown spec fields: {sorted(unknown)}")
    return ExperimentSpec(**merged)
