"""Tour of the energy function: bounds, symmetries, and limits.

Run directly:  python3 demos/energy_and_duality.py
"""

import numpy as np

from vdtoda import ModelParams, State, random_state, shift, time_reversal
from vdtoda.hamiltonian import hamiltonian, nonrel_hamiltonian

rng = np.random.default_rng(1)

print("== energy at the origin ==")
origin = State(np.zeros(3), np.zeros(3))
for kappa in (0.0, 1.0):
    params = ModelParams(3, 1.0, kappa)
    print(f"  kappa = {kappa}:  H = {hamiltonian(origin, params):.15f}")
print("  (4 + sqrt(2) and 3.5 + 3 sqrt(2), respectively)")

print()
print("== H stays strictly above the particle count ==")
margins = []
for i in range(2000):
    n = 3 + i % 5
    params = ModelParams(n, 0.5 + 0.25 * (i % 3), (0.0, 0.5, 2.0)[i % 3])
    st = random_state(n, rng, box=2.5)
    margins.append(hamiltonian(st, params) - n)
print(f"  smallest margin over 2000 random states: {min(margins):.3e}")

print()
print("== flipping all rapidities never changes the energy ==")
params = ModelParams(5, 0.7, 1.2)
st = random_state(5, rng, box=1.5)
print(f"  H(state)          = {hamiltonian(st, params):.15f}")
print(f"  H(time reversal)  = {hamiltonian(time_reversal(st), params):.15f}")

print()
print("== inverting the boundary coupling is a rigid position shift ==")
# H with coupling 1/kappa equals H with coupling kappa after shifting
# every position by ln(kappa)
kappa = 2.5
h_inverted = hamiltonian(st, ModelParams(5, 0.7, 1.0 / kappa))
h_shifted = hamiltonian(shift(st, np.full(5, kappa)), ModelParams(5, 0.7, kappa))
print(f"  H_(1/k)(state)        = {h_inverted:.15f}")
print(f"  H_k(shifted state)    = {h_shifted:.15f}")
print(f"  difference            = {abs(h_inverted - h_shifted):.2e}")

print()
print("== small-beta limit: (H - n) / beta^2 approaches the classical energy ==")
st4 = random_state(4, np.random.default_rng(9), box=1.0)
hnr = nonrel_hamiltonian(st4, ModelParams(4, 1.0, 0.7))
print(f"  limit value: {hnr:.10f}")
for beta in (0.4, 0.2, 0.1, 0.05):
    p = ModelParams(4, beta, 0.7)
    approx = (hamiltonian(st4, p) - 4.0) / beta**2
    print(f"  beta = {beta:4.2f}:  {approx:.10f}   error {approx - hnr:+.3e}")
print("  (error shrinks by 4x per halving: a second-order limit)")
