"""Active-reflector shaping and feed-cabin reception simulation for a spherical radio telescope."""

from .constants import TelescopeConstants
from .geometry import (
    AzEl,
    RotationFrame,
    apply_rotation,
    build_rotation,
    disk_triangle_overlap,
    inverse_rotation,
    line_paraboloid_intersect,
    line_plane_intersect,
    point_in_triangle,
    reflect_unit_z,
    segment_circle_intersect,
)
from .mesh import (
    CableNode,
    Mesh,
    Panel,
    build_mesh,
    edges_of,
    generate_synthetic_mesh,
    load_nodes,
    load_panels,
    validate_mesh,
)
from .reception import ReceptionReport, compare_reports, evaluate_reception
from .shape import (
    AdjustmentSolution,
    ParabolaCoeffs,
    aperture_filter,
    export_adjustments,
    fit_parabola,
    solve_proportion,
)

__version__ = "0.1.0"
