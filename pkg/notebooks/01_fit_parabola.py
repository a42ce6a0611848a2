"""
Fitting the ideal paraboloid
============================

The working surface is a paraboloid ``z = a (x^2 + y^2) + c`` whose focus sits
on the feed-cabin plane ``z = -(R - F)``. That pins ``c`` as a function of
``a``, so the fit is a one-dimensional search over ``a``.
"""

import numpy as np

from reflector_sim import TelescopeConstants, fit_parabola
from reflector_sim.shape import loss

constants = TelescopeConstants()
print("R =", constants.R, "F =", constants.F, "focal plane z =", constants.focal_plane_z)

# golden-section search on the discretized vertical-gap loss
coeffs = fit_parabola(constants)
print(f"a = {coeffs.a:.7f}, c = {coeffs.c:.5f}, focus z = {coeffs.focus_z:.5f}")

# the loss is a smooth bowl around the optimum
for a in np.linspace(0.9, 1.1, 5) * coeffs.a:
    trial = type(coeffs).with_focus_on_plane(a, constants)
    print(f"  a = {a:.7f}  loss = {loss(trial, constants):.4f}")

# halving the Riemann step barely moves the value
print("step 0.1 :", loss(coeffs, constants, 0.1))
print("step 0.05:", loss(coeffs, constants, 0.05))
