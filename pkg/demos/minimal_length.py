"""Minimal position uncertainty from the oscillator ground-state sweep.

Sweeping the trap stiffness maps out (Delta x)^2 as a function of
q = hbar^2 beta / (2 sigma0^2).  The curve decreases monotonically and
approaches hbar^2 beta: no state of the deformed theory can localize below
the minimal length hbar sqrt(beta), the same value the algebraic
uncertainty-relation optimization gives.
"""

import numpy as np

from gupnlse import UnitsConfig, min_position_uncertainty_scan
from gupnlse.stationary import gup_min_uncertainty_product

units = UnitsConfig()
beta = 1.0

q = np.logspace(-2, 2, 200)
dx_sq, infimum = min_position_uncertainty_scan(beta, q, units)

print(f"beta = {beta}")
print(f"{'q':>10s} {'(dx)^2':>16s}")
for k in range(0, len(q), 25):
    print(f"{q[k]:10.3g} {dx_sq[k]:16.8g}")
print(f"{q[-1]:10.3g} {dx_sq[-1]:16.8g}")

target = units.hbar**2 * beta
print(f"\ninfimum estimate : {infimum:.10f}")
print(f"hbar^2 beta      : {target:.10f}")
print(f"relative gap     : {infimum / target - 1:.2e}")
print(f"monotone decrease: {bool(np.all(np.diff(dx_sq) < 0))}")

# the same bound by direct optimization of dx >= hbar (1 + beta dp^2)/(2 dp)
dp = np.linspace(1e-2, 10, 100001)
direct = gup_min_uncertainty_product(beta, dp, units).min()
print(f"\ndirect optimization of the uncertainty product: min dx = {direct:.8f}")
print(f"hbar sqrt(beta)                               : {np.sqrt(beta):.8f}")
