"""
Solving the working surface
===========================

Nodes inside the 300 m aperture move a common fraction ``p`` of the way from
the sphere to the paraboloid along their actuators. ``p`` is the largest value
that keeps every edge within 0.07 % of its length and every stroke within
0.6 m.
"""

from reflector_sim import build_rotation, fit_parabola, generate_synthetic_mesh, solve_proportion

coeffs = fit_parabola()
frame = build_rotation((36.795, 78.169))

for k in (2, 3, 4, 5):
    mesh = generate_synthetic_mesh(subdivisions=k)
    sol = solve_proportion(mesh, coeffs, frame)
    lo, hi = sol.stroke_range
    print(f"k = {k}: p = {sol.proportion:.4f}, max ratio = {sol.max_edge_ratio:.3e}, "
          f"strokes [{lo:+.3f}, {hi:+.3f}] m, {sol.aperture_node_count} aperture nodes")

# the first few adjusted nodes
for adj in sol.adjustments[:5]:
    print(adj.node_id, adj.realized_P.round(4), f"{adj.signed_stroke:+.4f}")
