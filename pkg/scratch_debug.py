"""Scratch: inspect one noiseless HMB trial (not a deliverable)."""
import math
import numpy as np
import hmbtrain as hb
from hmbtrain.hashing import derive_seed, draw_permutation, table_from_permutation
from hmbtrain.experiments import _slot_amps, _soft_sets, _rng, _PLACE_TAG, _HASH_TAG
from hmbtrain.training import place_base_stations

geom = hb.ArrayGeometry(4, 128, 0.005, 0.005, 0.01, 28e9)
book = hb.build_codebook(geom, 0.5, 5.2)
n_c = book.n_codewords
spec = hb.ExperimentSpec(trials=1, seed=1)
cfg = spec.scenario(30.0, 32)
t = 0
rng_place = _rng(spec.seed, t, _PLACE_TAG)
poses = place_base_stations(cfg, rng_place)
channels = [hb.los_channel(geom, p, cfg.rho0_lin) for p in poses]
h = np.stack([ch.gains for ch in channels])
betas = np.array([ch.beta for ch in channels])
rank_to_bs = np.argsort(-betas, kind="stable")
u = h @ book.codewords.conj().T
truths = np.argmax(np.abs(u), axis=1)
print("poses r:", [f"{p.r:.1f}" for p in poses])
print("betas:", betas)
print("rank_to_bs:", rank_to_bs)
print("truths:", truths)
print("peak |u|/ (beta sqrt(MN)):",
      [f"{np.abs(u[k]).max()/(betas[k]*math.sqrt(512)):.3f}" for k in range(5)])

B = 32
L = cfg.rounds(n_c)
R = n_c // B
perms = [[draw_permutation(derive_seed(spec.seed, t, _HASH_TAG, k), l, n_c)
          for l in range(L)] for k in range(5)]
rows = [np.stack([table_from_permutation(perms[k][l], B).buckets for l in range(L)])
        for k in range(5)]
sqrt_p0 = math.sqrt(10 ** (spec.p0_dbm / 10))
amps = _slot_amps(u, sqrt_p0, rows)
powers = np.abs(amps) ** 2  # noiseless

# where are each BS's true slots in the power ranking?
order = np.argsort(-powers, kind="stable")
rank_of_slot = np.empty(L * B, dtype=int)
rank_of_slot[order] = np.arange(L * B)
print("\nper-BS true-slot power ranks (L slots each):")
for k in range(5):
    qs = [l * B + int(np.flatnonzero((rows[k][l] == truths[k]).any(axis=1))[0])
          for l in range(L)]
    print(f"  bs{k} (beta {betas[k]:.2e}, gain rank {list(rank_to_bs).index(k)}): "
          f"{sorted(rank_of_slot[qs])}")

sets = _soft_sets(powers, 5, L)
for rank in range(5):
    bs = int(rank_to_bs[rank])
    slots = np.asarray(sets[rank])
    members = rows[bs][slots // B, slots % B].ravel()
    counts = np.bincount(members, minlength=n_c)
    win = int(np.argmax(counts))
    n_true_here = sum(truths[bs] in rows[bs][q // B, q % B] for q in slots)
    print(f"rank {rank} -> bs {bs}: votes max={counts.max()} winner={win} "
          f"truth={truths[bs]} votes[truth]={counts[truths[bs]]} "
          f"true-slots-in-set={n_true_here}")
