"""
Sweeping oscillatory integrals for a uniform bound
==================================================

Boundedness of the chain rests on a family of oscillatory integrals
staying bounded in both the index n and the time t. Here we sweep a few
of them over a grid and report the supremum together with the change
under quadrature refinement.
"""

import numpy as np

from harmonic_chain import bounds

try:
    import matplotlib.pyplot as plt
except ImportError:  # pragma: no cover
    plt = None

ns = np.arange(0, 101)
ts = np.arange(0.0, 200.0 + 1e-9, 0.5)

for target in ("I_n", "C_n", "G_n"):
    rep = bounds.sweep(target, ns, ts)
    print(f"{target:>4}: sup = {rep.empirical_sup:.4f} at (n, t) = {rep.argmax}  "
          f"refinement change = {rep.meta.get('quadrature_change', 0.0):.1e}")

###############################################################################
# Near resonance
# --------------
# For t close to n the phase becomes stationary. The sweep below covers
# 1 < t/n < 2 and compares the relevant integral with its explicit bound.

rep = bounds.regime_sweep("1<gamma<g2", np.arange(1, 201), np.linspace(1.01, 1.99, 99))
print(f"resonant band: sup over eps <= eps' is {rep.meta['sup_within_eps_prime']:.3f} "
      f"(bound {rep.bound_formula:g}), verdict {rep.verdict}")

###############################################################################
# Growth of V_n
# -------------

vn = bounds.sweep("V_n", np.arange(2, 201))
ratio = vn.values / (vn.grid[:, 0] * np.log(vn.grid[:, 0]))
print(f"V_n / (n ln n): max {ratio.max():.3f}, at n = 200 {ratio[-1]:.3f}")

if plt is not None:
    C = bounds.C_matrix(np.arange(1, 61), ts[ts <= 120])
    fig, ax = plt.subplots(figsize=(7, 4))
    im = ax.imshow(np.abs(C), aspect="auto", origin="lower",
                   extent=(0, 120, 1, 60), cmap="viridis")
    ax.set_xlabel("t")
    ax.set_ylabel("n")
    fig.colorbar(im, label="|C_n(t)|")
    fig.tight_layout()
    plt.show()
