"""Scratch oracle computations (not part of the deliverable)."""
import math
import numpy as np
from scipy import integrate, optimize, special

# --- Fresnel envelope oracle via adaptive quadrature ---
def fresnel_quad(z):
    c, _ = integrate.quad(lambda t: math.cos(math.pi * t * t / 2), 0, z, epsabs=1e-12)
    s, _ = integrate.quad(lambda t: math.sin(math.pi * t * t / 2), 0, z, epsabs=1e-12)
    return c, s

def envelope_quad(z):
    c, s = fresnel_quad(z)
    return abs(complex(c, s)) / z

def envelope_sp(z):
    s, c = special.fresnel(z)
    return abs(c + 1j * s) / z

print("envelope(1.6) quad   =", envelope_quad(1.6))
print("envelope(1.6) scipy  =", envelope_sp(1.6))
print("envelope(1.5) =", envelope_quad(1.5))
# smallest root of envelope = 0.5
z05 = optimize.bisect(lambda z: envelope_quad(z) - 0.5, 0.5, 2.0, xtol=1e-12)
print("zeta_delta(0.5) quad =", z05)
z05sp = optimize.bisect(lambda z: envelope_sp(z) - 0.5, 0.5, 2.0, xtol=1e-12)
print("zeta_delta(0.5) scipy=", z05sp)
print("envelope at root:", envelope_quad(z05))

# envelope at half-step (lobe-edge candidate) and other spots
print("envelope(z05/sqrt2) =", envelope_quad(z05 / math.sqrt(2)))
print("envelope(2.0) =", envelope_quad(2.0), " envelope(2.5) =", envelope_quad(2.5))

# --- geometry constants ---
M, N = 4, 128
dx = dz = 0.005
lam = 0.01
zeta = z05sp
A = (N * dx) ** 2 / (2 * lam * zeta ** 2)   # first azimuth ring at A*(1-psi^2)
print("\nN^2 dx^2 =", (N * dx) ** 2, " A =", A)
print("elevation-axis first ring (sin phi=1):", (M * dz) ** 2 / (2 * lam * zeta ** 2))

def count_codebook(r_min):
    n_angles = 0
    n_finite = 0
    for s in range(1, M + 1):
        cphi = (2 * s - M - 1) / M
        sphi = math.sqrt(1 - cphi * cphi)
        for sp in range(1, N + 1):
            psi = (2 * sp - N - 1) / N
            if abs(psi) <= sphi:
                n_angles += 1
                kappa_x = (N * dx) ** 2 * (1 - psi * psi)
                kappa_z = (M * dz) ** 2 * sphi ** 2
                kappa = max(kappa_x, kappa_z)
                r1 = kappa / (2 * lam * zeta ** 2)
                t = 1
                while r1 / t >= r_min:
                    n_finite += 1
                    t += 1
    return n_angles, n_finite

for r_min in (5.0, 5.1, 5.2, 5.3):
    na, nf = count_codebook(r_min)
    nc = na + nf
    print(f"r_min={r_min}: angles={na} finite={nf} N_C={nc} "
          f"div32={nc % 32 == 0} div16={nc % 16 == 0} div8={nc % 8 == 0}")

# --- Taylor error study ---
def exact_D(r, th, ph, m, n):
    x = r * np.cos(th) * np.sin(ph) + n * dx
    y = r * np.sin(th) * np.sin(ph)
    z = r * np.cos(ph) + m * dz
    return np.sqrt(x * x + y * y + z * z)

def taylor_D(r, th, ph, m, n):
    psi = np.cos(th) * np.sin(ph)
    cph = np.cos(ph)
    return (r + n * dx * psi + n ** 2 * dx ** 2 * (1 - psi ** 2) / (2 * r)
            + m * dz * cph + m ** 2 * dz ** 2 * (1 - cph ** 2) / (2 * r))

mg = np.arange(M) - (M - 1) / 2
ng = np.arange(N) - (N - 1) / 2
MM, NN = np.meshgrid(mg, ng)

rng = np.random.default_rng(0)
worst_abs10 = 0.0
worst_rel = 0.0
worst_pose = None
for _ in range(20000):
    r = rng.uniform(5, 82)
    th = rng.uniform(0, 2 * np.pi)
    ph = np.arccos(rng.uniform(-1, 1))
    e = exact_D(r, th, ph, MM, NN)
    t = taylor_D(r, th, ph, MM, NN)
    rel = np.max(np.abs(t - e) / e)
    if rel > worst_rel:
        worst_rel = rel
        worst_pose = (r, th, ph)
print("\nmax rel taylor err over r in [5,82]:", worst_rel, "at", worst_pose)

for r in (5.0, 10.0, 20.0, 30.0, 82.0):
    w = 0.0
    for _ in range(4000):
        th = rng.uniform(0, 2 * np.pi)
        ph = np.arccos(rng.uniform(-1, 1))
        e = exact_D(r, th, ph, MM, NN)
        t = taylor_D(r, th, ph, MM, NN)
        w = max(w, np.max(np.abs(t - e)))
    print(f"r={r}: max|taylor-exact| ~ {w:.3e}  rel {w/r:.3e}")

# boresight pose at r=10
e = exact_D(10.0, np.pi / 2, np.pi / 2, MM, NN)
t = taylor_D(10.0, np.pi / 2, np.pi / 2, MM, NN)
print("boresight r=10 max abs err:", np.max(np.abs(t - e)))

# Rayleigh distance float check
print("\nrayleigh:", 2 * (N * dx) ** 2 / lam, 2 * (N * dx) ** 2 / lam == 81.92)

# beta example
print("beta(rho0=-72dB, r=10):", math.sqrt(10 ** (-7.2)) / 10)

# pinned exact-distance example
print("offset example:", math.sqrt(100 + 0.005 ** 2))
