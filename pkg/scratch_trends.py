"""Scratch: trend calibration for the acceptance sweeps (not a deliverable)."""
import sys, time
import numpy as np
import hmbtrain as hb

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 100
r0 = float(sys.argv[2]) if len(sys.argv) > 2 else 81.92
rmin = float(sys.argv[3]) if len(sys.argv) > 3 else 10.0
rmax = float(sys.argv[4]) if len(sys.argv) > 4 else 81.92
gap = float(sys.argv[5]) if len(sys.argv) > 5 else 5.0

spec = hb.ExperimentSpec(
    experiment="accuracy",
    methods=("exhaustive_nearfield", "hmb", "eimb", "exhaustive_dft"),
    snr_grid_db=(-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
    b_grid=(32, 16, 8),
    trials=trials,
    seed=1,
    r0=r0,
    place_r_min=rmin,
    place_r_max=rmax,
    place_min_gap_db=gap,
)

# finite-ring truth fraction under this placement
geom = spec.geometry()
book = hb.build_codebook(geom, spec.delta, spec.r_min, spec.ring_rule)
cfg = spec.scenario(20.0, 32)
nfinite = 0
ntot = 0
for t in range(200):
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed, t, 0x9A)))
    poses = hb.place_base_stations(cfg, rng, geom)
    for p in poses:
        ch = hb.los_channel(geom, p, cfg.rho0_lin)
        s = hb.ground_truth_beam(book, ch)
        nfinite += np.isfinite(book.rs[s])
        ntot += 1
print(f"finite-ring truth fraction: {nfinite/ntot:.2f}")

t0 = time.time()
rows = hb.run_accuracy_sweep(spec)
dt = time.time() - t0
print(f"accuracy sweep: {len(rows)} rows in {dt:.1f}s "
      f"(trials={trials}, r0={r0}, band=[{rmin},{rmax}], gap={gap})")

acc = {}
for r in rows:
    acc[(r.method, r.b, r.snr_db)] = r.metric

print("\nsnr    exh_nf  exh_dft  hmb32   hmb16   hmb8    eimb32  ratio32")
for s in spec.snr_grid_db:
    e = acc[("exhaustive_nearfield", 0, s)]
    d = acc[("exhaustive_dft", 0, s)]
    h32 = acc[("hmb", 32, s)]
    h16 = acc[("hmb", 16, s)]
    h8 = acc[("hmb", 8, s)]
    e32 = acc[("eimb", 32, s)]
    ratio = h32 / e if e > 0 else float("nan")
    print(f"{s:5.0f}  {e:.4f}  {d:.4f}   {h32:.4f}  {h16:.4f}  {h8:.4f}  {e32:.4f}  {ratio:.3f}")
