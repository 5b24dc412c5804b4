"""Scratch: test gain-ladder placement (not a deliverable)."""
import math, sys
import numpy as np
import hmbtrain as hb
import hmbtrain.training as tr
import hmbtrain.experiments as ex
from hmbtrain.geometry import PolarPose

gap_db = float(sys.argv[1]) if len(sys.argv) > 1 else 4.5
jit_db = float(sys.argv[2]) if len(sys.argv) > 2 else 0.4
cphi = float(sys.argv[3]) if len(sys.argv) > 3 else 0.6
trials = int(sys.argv[4]) if len(sys.argv) > 4 else 100
r0 = float(sys.argv[5]) if len(sys.argv) > 5 else 81.92
r_base = float(sys.argv[6]) if len(sys.argv) > 6 else 10.0


def ladder_place(cfg, rng):
    k = cfg.k_bs
    jit = rng.uniform(-jit_db, jit_db, size=k)
    r = r_base * 10 ** ((gap_db * np.arange(k) + jit) / 20.0)
    rng.shuffle(r)
    cthetas = rng.uniform(-0.9, 0.9, size=k)
    mirror = rng.uniform(size=k) < 0.5
    cphis = rng.uniform(-cphi, cphi, size=k)
    poses = []
    for i in range(k):
        th = math.acos(cthetas[i])
        if mirror[i]:
            th = 2 * math.pi - th
        poses.append(PolarPose(r=float(r[i]), theta=th, phi=float(math.acos(cphis[i]))))
    return poses


tr.place_base_stations = ladder_place
ex.place_base_stations = ladder_place

spec = hb.ExperimentSpec(
    experiment="accuracy",
    methods=("exhaustive_nearfield", "hmb", "eimb", "exhaustive_dft"),
    snr_grid_db=(-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
    b_grid=(32, 16, 8),
    trials=trials,
    seed=1,
    r0=r0,
)
rows = hb.run_accuracy_sweep(spec)
acc = {(r.method, r.b, r.snr_db): r.metric for r in rows}
rr = r_base * 10 ** (gap_db * np.arange(5) / 20)
print(f"ladder r = {np.round(rr,1)}, jitter +-{jit_db} dB, cosphi +-{cphi}, r0={r0}")
print("snr    exh_nf  exh_dft  hmb32   hmb16   hmb8    eimb32  ratio32")
for s in spec.snr_grid_db:
    e = acc[("exhaustive_nearfield", 0, s)]
    d = acc[("exhaustive_dft", 0, s)]
    h32, h16, h8 = (acc[("hmb", b, s)] for b in (32, 16, 8))
    e32 = acc[("eimb", 32, s)]
    print(f"{s:5.0f}  {e:.4f}  {d:.4f}   {h32:.4f}  {h16:.4f}  {h8:.4f}  {e32:.4f}  "
          f"{(h32/e if e else float('nan')):.3f}")
