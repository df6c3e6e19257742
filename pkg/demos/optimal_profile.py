"""The one-dimensional transition layer and what it costs.

The optimal profile solves phi' = sqrt(2 W(phi)) with phi(0) = 0.  For the
standard well this is tanh(x / sqrt(2)), and the energy of the layer,
int phi'^2 dx, equals c_hom.  Below we integrate the ODE numerically,
compare with tanh and check the equipartition of energy.

Run:  python demos/optimal_profile.py
"""
import numpy as np
from scipy.integrate import trapezoid

from pfh import Homogeneous, c_hom, homogenize, optimal_profile

W = homogenize(Homogeneous())
x = np.linspace(-8.0, 8.0, 4001)
phi = optimal_profile(W, x)

print(f"max |phi - tanh(x/sqrt 2)| = {np.max(np.abs(phi - np.tanh(x / np.sqrt(2)))):.2e}")

# equipartition: phi'^2 / 2 = W(phi) along the layer, so the energy is int phi'^2
dphi = np.gradient(phi, x)
layer = trapezoid(dphi**2, x)
print(f"int phi'^2 dx = {layer:.6f},  c_hom = {c_hom(W):.6f}")

for xi in (-2.0, -1.0, 0.0, 1.0, 2.0):
    i = int(np.argmin(np.abs(x - xi)))
    print(f"  phi({xi:+.1f}) = {phi[i]:+.6f}")
