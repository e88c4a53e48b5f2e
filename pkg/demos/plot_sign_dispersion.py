"""
Dispersion of a step
====================

A chain released from the step ``q_k(0) = sign(k)`` never runs away:
every particle stays bounded and slowly relaxes to the midpoint 0.
This script computes the motion three independent ways and checks that
they agree, then looks at the slow decay of particle 1.

matplotlib is optional; without it the script prints its numbers only.
"""

import numpy as np

from harmonic_chain import InitialCondition, cross_validate, limits_for_ic, solve_bessel_sign

try:
    import matplotlib.pyplot as plt
except ImportError:  # pragma: no cover
    plt = None

omega = 0.5
ic = InitialCondition.sign()

###############################################################################
# Three solvers, one answer
# -------------------------
# The truncated ODE, the Fourier formula and the Bessel series are unrelated
# code paths; their pairwise gap is a direct measure of numerical error.

times = np.arange(0.0, 40.0 + 1e-9, 0.5)
report = cross_validate(ic, omega, times, np.arange(1, 21))
for row in report.rows:
    print(f"{row['a']:>16} vs {row['b']:<16} sup |diff| = {row['sup_diff']:.2e}")

###############################################################################
# Limits at the two ends and at late times
# ----------------------------------------

lim = limits_for_ic(ic)
print(f"L+ = {lim.L_plus:+.6f}   L- = {lim.L_minus:+.6f}   nu = {lim.nu:+.6f}")

###############################################################################
# Slow relaxation of particle 1
# -----------------------------
# The deviation from nu shrinks roughly like T^(-1/2), with the Bessel
# oscillation on top.

T = np.linspace(0.0, 400.0, 4001)
q1 = np.array([solve_bessel_sign(omega, 1, t) for t in T])
for t in (50, 100, 200, 400):
    print(f"T = {t:4d}   |q_1(T) - nu| = {abs(solve_bessel_sign(omega, 1, t) - lim.nu):.3e}")

if plt is not None:
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(T, q1, lw=0.8)
    ax.axhline(lim.nu, color="k", ls=":")
    ax.set_xlabel("t")
    ax.set_ylabel("q_1(t)")
    fig.tight_layout()
    plt.show()
