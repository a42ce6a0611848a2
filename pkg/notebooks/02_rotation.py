"""
Aligning the source with the vertical
=====================================

Every calculation after this point happens in a frame where the incoming
signal travels along +z. ``build_rotation`` produces that frame.
"""

import numpy as np

from reflector_sim import AzEl, build_rotation, fit_parabola
from reflector_sim.shape import paraboloid_vertex

source = AzEl(36.795, 78.169)
frame = build_rotation(source)
np.set_printoptions(precision=10, suppress=True)
print(frame.matrix)

# the source direction lands on +z
print("R s =", frame.apply(source.unit_vector()))

# a zenith source gives the identity
print(build_rotation((0.0, 90.0)).matrix)

# vertex of the fitted paraboloid back in ground coordinates
print("vertex =", paraboloid_vertex(fit_parabola(), frame))
