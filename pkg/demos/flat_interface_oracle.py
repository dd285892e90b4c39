"""Two dielectric half-planes with a flat interface.

A normally incident plane wave hitting a flat interface between media with
wavenumbers k0 = 1.5 and k1 = 2.5 has a closed-form solution: the reflected
and transmitted amplitudes are

    R = (beta0 - beta1) / (beta0 + beta1) = -1/4
    T = 2 beta0 / (beta0 + beta1)         =  3/4

and the energy identity |R|^2 + (beta1/beta0)|T|^2 = 1 holds exactly.
This script solves the same problem with the full machinery (windowed
quasi-periodic Green functions, Robin-to-Robin sweep, Rayleigh extraction)
and compares against those numbers.

Run:  python3 demos/flat_interface_oracle.py
"""

import numpy as np

from qpscat import IncidentWave, Layer, LayerStack, Profile, solve_stack

d = 2.0 * np.pi
k0, k1 = 1.5, 2.5

stack = LayerStack(
    d=d,
    layers=(Layer(k0), Layer(k1)),
    profiles=(Profile.flat(d),),
    M=64,
)

# window radius = 100 periods; the flat geometry converges superalgebraically
result = solve_stack(stack, IncidentWave(k=k0), 100.0 * d)

beta0, beta1 = k0, k1  # normal incidence: beta = k
r_exact = (beta0 - beta1) / (beta0 + beta1)
t_exact = 2.0 * beta0 / (beta0 + beta1)

r_num = result.rayleigh_up.coefficient(0)
t_num = result.rayleigh_down.coefficient(0)

print(f"reflected  C0+ = {r_num:.10f}   exact {r_exact:+.4f}"
      f"   |error| = {abs(r_num - r_exact):.2e}")
print(f"transmitted C0- = {t_num:.10f}   exact {t_exact:+.4f}"
      f"   |error| = {abs(t_num - t_exact):.2e}")
print(f"energy defect eps_en = {result.eps_en:.2e}")

# every nonzero Rayleigh order must vanish for a flat interface
worst = max(
    abs(e.c) for e in result.rayleigh_up.entries + result.rayleigh_down.entries
    if e.r != 0
)
print(f"largest spurious nonzero-order coefficient: {worst:.2e}")
