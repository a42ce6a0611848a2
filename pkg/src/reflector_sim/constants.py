"""Telescope constants and numerical tolerances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidArgumentError

# Numerical tolerances used across the kernels.
UNIT_TOL = 1e-9           # accepted deviation of |v| from 1 for unit inputs
AREA_TOL = 1e-12          # doubled-area threshold for degenerate triangles
CROSS_TOL = 1e-9          # |AB x AC| threshold for degenerate panels (m^2)
ASCENT_TOL = 1e-12        # reflected rays with n_z below this never reach the focal plane
QUADRATIC_TOL = 1e-14     # leading coefficient treated as zero in line/paraboloid solves

DEFAULT_RADIUS = 300.4
DEFAULT_F_RATIO = 0.466
CABIN_RADIUS_MODES = {"diameter-1m": 0.5, "eq24": 1.0}


@dataclass(frozen=True)
class TelescopeConstants:
    """Geometry and limits of the reflector.

    ``F`` defaults to ``F_ratio * R``; pass it explicitly to override.
    """

    R: float = DEFAULT_RADIUS
    F: float | None = None
    aperture_diameter: float = 300.0
    stroke_limit: float = 0.6
    edge_ratio_limit: float = 0.0007
    cabin_radius: float = 0.5
    sphere_tolerance: float = 1e-3
    F_ratio: float = field(default=DEFAULT_F_RATIO, repr=False)

    def __post_init__(self):
        if self.F is None:
            object.__setattr__(self, "F", self.F_ratio * self.R)
        for name in ("R", "F", "aperture_diameter", "stroke_limit",
                     "edge_ratio_limit", "cabin_radius", "sphere_tolerance"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidArgumentError(f"{name} must be a positive finite number, got {value!r}")
        if self.F >= self.R:
            raise InvalidArgumentError(f"F ({self.F}) must be smaller than R ({self.R})")

    @property
    def focal_plane_z(self) -> float:
        """z of the focal plane in the aligned frame, ``-(R - F)``."""
        return -(self.R - self.F)

    def as_dict(self) -> dict:
        return {
            "R": self.R,
            "F": self.F,
            "aperture_diameter": self.aperture_diameter,
            "stroke_limit": self.stroke_limit,
            "edge_ratio_limit": self.edge_ratio_limit,
            "cabin_radius": self.cabin_radius,
            "sphere_tolerance": self.sphere_tolerance,
        }
