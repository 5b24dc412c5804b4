"""Scratch: codebook properties + multiarm lobe values (not a deliverable)."""
import math, time
import numpy as np
import hmbtrain as hb

geom = hb.ArrayGeometry(4, 128, 0.005, 0.005, 0.01, 28e9)
book = hb.build_codebook(geom, 0.5, 5.2)
print("N_C =", book.n_codewords)

t0 = time.time()
eta = hb.max_cross_projection(book)
print(f"eta = {eta:.6f}  ({time.time()-t0:.2f}s)")

book5 = hb.build_codebook(geom, 0.5, 5.0)
print("eta(r_min=5.0) =", hb.max_cross_projection(book5))

# adjacent same-angle ring projections
rs = book.rs
vals = []
for s in range(book.n_codewords - 1):
    if (book.thetas[s] == book.thetas[s+1]) and (book.phis[s] == book.phis[s+1]):
        p = hb.projection(geom, book.point(s), book.point(s+1), mode="exact")
        vals.append(p)
vals = np.array(vals)
print(f"adjacent-ring projections: n={vals.size} min={vals.min():.4f} "
      f"max={vals.max():.4f} mean={vals.mean():.4f}")

# ring-step equality in 1/r on the dominant axis
from hmbtrain.codebook import _curvature_scale
worst = 0.0
for s in range(book.n_codewords - 1):
    if (book.thetas[s] == book.thetas[s+1]) and (book.phis[s] == book.phis[s+1]):
        psi = math.cos(book.thetas[s]) * math.sin(book.phis[s])
        kap = _curvature_scale(geom, book.phis[s], psi, book.ring_rule)
        step = 2 * geom.lambda_c * book.zeta_delta**2 / kap
        inv_p = 0.0 if math.isinf(rs[s]) else 1.0 / rs[s]
        inv_q = 1.0 / rs[s+1]
        worst = max(worst, abs(abs(inv_q - inv_p) - step) / step)
print("ring-step rel deviation from equality:", worst)

# taylor vs exact projection agreement
rng = np.random.default_rng(3)
worst = 0.0
for _ in range(300):
    i, j = rng.integers(0, book.n_codewords, 2)
    pe = hb.projection(geom, book.point(int(i)), book.point(int(j)), "exact")
    pt = hb.projection(geom, book.point(int(i)), book.point(int(j)), "taylor")
    worst = max(worst, abs(pe - pt))
print("max |exact - taylor| projection:", worst)

# lobe edge pattern value for a finite-ring codeword
fin = np.flatnonzero(np.isfinite(rs))
s = int(fin[len(fin)//2])
sp = book.point(s)
lobe = hb.main_lobe(book, sp)
print("sample point:", sp, " lobe inv_r:", lobe.inv_r)
for inv in lobe.inv_r:
    if inv > 0:
        probe = hb.PolarPose(r=1.0/inv, theta=sp.theta, phi=sp.phi)
        w = hb.pattern_single(geom, sp, probe)
        print(f"  |W'| at r-edge 1/{inv:.4f} = {abs(w):.4f}")
# far-field codeword lobe
s_ff = int(np.flatnonzero(np.isinf(rs))[100])
sp_ff = book.point(s_ff)
lobe_ff = hb.main_lobe(book, sp_ff)
print("far-field lobe inv_r:", lobe_ff.inv_r, "-> r_far =", 1.0/lobe_ff.inv_r[1])
probe = hb.PolarPose(r=1.0/lobe_ff.inv_r[1], theta=sp_ff.theta, phi=sp_ff.phi)
print("  |W'| at far lobe edge =", abs(hb.pattern_single(geom, sp_ff, probe)))

# V=1 multiarm equals single pattern
cw = hb.synthesize(book, [s], np.zeros(1))
probe = hb.PolarPose(r=9.0, theta=sp.theta + 0.003, phi=sp.phi)
w1 = hb.pattern_multi(book, cw, probe)
w2 = hb.pattern_single(geom, sp, probe)
print("V=1 multi vs single:", abs(w1 - w2))

# matrix-form cross check
cw4 = hb.synthesize(book, [3, 100, 400, 700], np.array([0.1, 2.0, 4.0, 1.0]))
a = hb.steering_vector(geom, probe)
lhs = hb.pattern_multi(book, cw4, probe)
rhs = np.vdot(a, cw4.weights) / math.sqrt(4)
print("pattern_multi vs matrix form:", abs(lhs - rhs))
