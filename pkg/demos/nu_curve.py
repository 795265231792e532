"""The deformation strength of the harmonic ground state and its asymptote.

The ground state of a harmonic trap under the deformed theory is a Gaussian
whose effective-mass parameter nu depends on a single dimensionless number
q = hbar^2 beta / (2 sigma0^2).  This script tabulates nu(q) next to its
large-q asymptote 16 q^2 and plots both.
"""

import numpy as np

from gupnlse import nu_of_q

q = np.logspace(-2, 2, 200)
nu = nu_of_q(q)
asym = 16 * q**2

print(f"{'q':>10s} {'nu(q)':>16s} {'16 q^2':>16s} {'ratio':>10s}")
for qi in (0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0):
    ni = nu_of_q(qi)
    print(f"{qi:10.3g} {ni:16.8g} {16 * qi**2:16.8g} {ni / (16 * qi**2):10.6f}")

# the ratio crosses 1 near q ~ 0.8 and then climbs back to 1 from below
ratio = nu / asym
print(f"\nratio at q = {q[-1]:g}: {ratio[-1]:.8f} (asymptote reached)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(q, nu, "r-", label=r"$\nu(q)$")
    ax.loglog(q, asym, "k:", label=r"$16\,q^2$")
    ax.set_xlabel("q")
    ax.set_ylabel(r"$\nu$")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig("nu_curve.png", dpi=150)
    print("saved nu_curve.png")
except ImportError:
    print("matplotlib not available; skipped the plot")
