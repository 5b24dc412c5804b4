"""Scratch: per-BS power band statistics (not a deliverable)."""
import math
import numpy as np
import hmbtrain as hb
from hmbtrain.hashing import derive_seed, draw_permutation, table_from_permutation
from hmbtrain.experiments import _slot_amps, _rng, _PLACE_TAG, _HASH_TAG

geom = hb.ArrayGeometry(4, 128, 0.005, 0.005, 0.01, 28e9)
book = hb.build_codebook(geom, 0.5, 5.2)
n_c = book.n_codewords
C = book.codewords

# mean-square cross projection
G = np.abs(C @ C.conj().T) ** 2
np.fill_diagonal(G, 0.0)
mu2 = G.sum() / (n_c * (n_c - 1))
print(f"mean-square cross projection mu2 = {mu2:.6f}  (1/MN = {1/512:.6f})")
print(f"V=23 leakage floor  = {10*math.log10(23*mu2):.1f} dB rel. beta^2 MN")

# per-trial aligned power distribution (single BS, fixed r)
rng = np.random.default_rng(5)
projs = []
for _ in range(2000):
    th = rng.uniform(0, 2 * math.pi)
    ph = math.acos(rng.uniform(-0.9, 0.9))
    pose = hb.PolarPose(r=rng.uniform(10, 20), theta=th, phi=ph)
    g = hb.steering_vector(geom, pose)
    projs.append(np.abs(C.conj() @ g).max())
projs = np.array(projs) ** 2
print("\nbest-projection^2 over random poses (pose quantization loss):")
for q in (1, 5, 25, 50, 75, 95, 99):
    print(f"  p{q:02d}: {np.percentile(projs, q):.3f} ({10*math.log10(np.percentile(projs, q)):.1f} dB)")

# aligned-slot instantaneous power spread for one BS (leak + quantization)
B, L = 32, 10
spread = []
for t in range(300):
    th = rng.uniform(0, 2 * math.pi)
    ph = math.acos(rng.uniform(-0.9, 0.9))
    pose = hb.PolarPose(r=15.0, theta=th, phi=ph)
    ch = hb.los_channel(geom, pose, 10 ** (-7.2))
    u = (C.conj() @ ch.gains)[None, :]
    perms = [draw_permutation(derive_seed(1, t, 7, 0), l, n_c) for l in range(L)]
    rows = [np.stack([table_from_permutation(perms[l], B).buckets for l in range(L)])]
    amps = _slot_amps(u, 1.0, rows)
    powers = np.abs(amps) ** 2
    truth = int(np.argmax(np.abs(u)))
    qs = np.array([l * B + int(np.flatnonzero((rows[0][l] == truth).any(axis=1))[0])
                   for l in range(L)])
    aligned = powers[qs]
    others = np.delete(powers, qs)
    spread.append((aligned.min(), aligned.max(), np.sort(others)[-10:].mean(),
                   np.median(aligned)))
spread = np.array(spread)
ref = spread[:, 3].mean()
print("\naligned-slot band (single BS, r fixed), dB rel. median-of-medians:")
print(f"  aligned min: p05 {10*math.log10(np.percentile(spread[:,0], 5)/ref):.1f} dB, "
      f"p50 {10*math.log10(np.percentile(spread[:,0], 50)/ref):.1f} dB")
print(f"  aligned max: p95 {10*math.log10(np.percentile(spread[:,1], 95)/ref):.1f} dB")
print(f"  top-10 leakage mean: p50 {10*math.log10(np.percentile(spread[:,2], 50)/ref):.1f} dB, "
      f"p95 {10*math.log10(np.percentile(spread[:,2], 95)/ref):.1f} dB")
