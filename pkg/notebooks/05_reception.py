"""
Reception at the feed cabin
===========================

Each panel reflects the axial signal. A panel counts as received when its
projected footprint on the focal plane reaches the cabin disk. The sphere and
the working surface are compared on the same panels and in the published
style (all panels for the sphere, aperture panels for the working surface).
"""

from reflector_sim import build_rotation, compare_reports, evaluate_reception, fit_parabola, generate_synthetic_mesh, solve_proportion

frame = build_rotation((36.795, 78.169))
mesh = generate_synthetic_mesh(subdivisions=5)
sol = solve_proportion(mesh, fit_parabola(), frame)

for region in ("aperture", "mixed"):
    sphere = evaluate_reception(mesh, "sphere", frame, region=region)
    working = evaluate_reception(mesh, sol, frame, region=region)
    cmp = compare_reports(sphere, working)
    print(f"{region:9s} sphere {sphere.hit_panels}/{sphere.total_panels} = {sphere.efficiency:.3f}  "
          f"working {working.hit_panels}/{working.total_panels} = {working.efficiency:.3f}  "
          f"improvement {cmp.improvement_percent:+.1f}%")

# a larger cabin only adds panels
from reflector_sim import TelescopeConstants

small = evaluate_reception(mesh, "sphere", frame).hit_set()
large = evaluate_reception(mesh, "sphere", frame, TelescopeConstants(cabin_radius=1.0)).hit_set()
print("0.5 m hits contained in 1.0 m hits:", small <= large, len(small), len(large))
