"""When the period is much finer than the interface, the energy can go negative.

The weight b = 1/2 on the first half of each period and 3/2 on the second
puts the wells at +-sqrt(2/3) and +-sqrt(2) alternately, so the pointwise
minimum of W is below zero.  A flat state phi = 1 plus a small periodic
corrector that leans into the deeper well gains more from the potential
than it pays in gradient.  The energy per unit length then behaves like

    E ~ (delta^2 / eps^3) * (alpha^2 pi^2 - 4 alpha / pi),

which is negative for small alpha.  The quadrature and the closed form
agree, and the rescaled energy converges to the bracket as delta shrinks.

Run:  python demos/negative_energy_counterexample.py
"""
from pfh import CounterexampleConfig, voids_counterexample_energy
from pfh.analysis import voids_energy_closed_form, voids_leading_constant

eps, alpha = 0.01, 0.03
lead = voids_leading_constant(alpha)
print(f"leading constant alpha^2 pi^2 - 4 alpha/pi = {lead:.6f}\n")
print(f"{'delta':>8}{'energy':>16}{'closed form':>16}{'E eps^3/delta^2':>18}")
for delta in (0.01, 0.005, 0.0025, 0.00125):
    cfg = CounterexampleConfig(eps=eps, delta=delta, alpha=alpha)
    e = voids_counterexample_energy(cfg)
    print(f"{delta:>8}{e:>16.6f}{voids_energy_closed_form(cfg):>16.6f}{e * eps**3 / delta**2:>18.6f}")

# the corrector must lean the right way: flipping it raises the energy instead
flipped = voids_counterexample_energy(CounterexampleConfig(eps=eps, delta=0.005, alpha=alpha, psi_sign=-1))
print(f"\nwith the corrector flipped, energy(delta=0.005) = {flipped:+.6f}")
