"""Vector and matrix kernel.

Frame-alignment rotations, specular reflection of the axial signal,
line/plane and line/paraboloid intersections, and the planar predicates
used to decide whether a reflected footprint reaches the feed cabin.

Predicates accept single items or stacked arrays (leading batch axes) and
return a ``bool`` or a boolean array accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import AREA_TOL, UNIT_TOL
from .errors import DegenerateGeometryError, InvalidArgumentError, NoIntersectionError

E_Z = np.array([0.0, 0.0, 1.0])


def _as_finite(v, name="vector"):
    arr = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite components: {v!r}")
    return arr


def _scalar_or_array(result):
    return bool(result) if np.ndim(result) == 0 else result


@dataclass(frozen=True)
class AzEl:
    """Source direction: azimuth ``alpha`` and elevation ``beta`` in degrees."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise InvalidArgumentError(f"non-finite direction ({self.alpha}, {self.beta})")
        if not 0.0 <= self.alpha < 360.0:
            raise InvalidArgumentError(f"alpha must lie in [0, 360), got {self.alpha}")
        if not 0.0 < self.beta <= 90.0:
            raise InvalidArgumentError(f"beta must lie in (0, 90], got {self.beta}")

    def unit_vector(self) -> np.ndarray:
        a, b = math.radians(self.alpha), math.radians(self.beta)
        return np.array([math.cos(b) * math.cos(a), math.cos(b) * math.sin(a), math.sin(b)])


@dataclass(frozen=True, eq=False)
class RotationFrame:
    """Orthonormal matrix mapping the source direction onto +z.

    ``theta_prime`` and ``gamma`` (degrees) are the y- and x-axis rotation
    angles the matrix was composed from.
    """

    matrix: np.ndarray
    theta_prime: float = 90.0
    gamma: float = 0.0

    @property
    def rows(self):
        return tuple(self.matrix[i].copy() for i in range(3))

    def apply(self, p) -> np.ndarray:
        return apply_rotation(self, p)

    def inverse(self, p) -> np.ndarray:
        return inverse_rotation(self, p)

    @classmethod
    def identity(cls) -> "RotationFrame":
        return cls(np.eye(3), 90.0, 0.0)


def build_rotation(direction) -> RotationFrame:
    """Rotation ``R = Rx(gamma) Ry(pi/2 - theta') Rz(0)`` aligning the source with +z.

    ``direction`` is an :class:`AzEl` or an ``(alpha, beta)`` pair in degrees.
    The angles come from ``atan2`` on the source direction components, so the
    closed form stays finite when ``cos(beta) cos(alpha) = 0``.
    """
    if not isinstance(direction, AzEl):
        direction = AzEl(*direction)
    if direction.beta == 90.0:
        return RotationFrame.identity()

    a, b = math.radians(direction.alpha), math.radians(direction.beta)
    ux = math.cos(b) * math.cos(a)
    uy = math.cos(b) * math.sin(a)
    uz = math.sin(b)
    # cos(gamma) = sqrt(sin^2 b + cos^2 b cos^2 a) > 0 because beta > 0
    theta_p = math.atan2(uz, ux)
    gamma = math.atan2(uy, math.hypot(uz, ux))
    st, ct = math.sin(theta_p), math.cos(theta_p)
    sg, cg = math.sin(gamma), math.cos(gamma)
    matrix = np.array([
        [st, 0.0, -ct],
        [-sg * ct, cg, -sg * st],
        [cg * ct, sg, cg * st],
    ])
    return RotationFrame(matrix, math.degrees(theta_p), math.degrees(gamma))


def apply_rotation(frame: RotationFrame, p) -> np.ndarray:
    """``R @ p`` for a point or an ``(n, 3)`` stack of points."""
    p = _as_finite(p, "point")
    return p @ frame.matrix.T


def inverse_rotation(frame: RotationFrame, p) -> np.ndarray:
    """``R.T @ p`` for a point or an ``(n, 3)`` stack of points."""
    p = _as_finite(p, "point")
    return p @ frame.matrix


def reflect_unit_z(n0) -> np.ndarray:
    """Direction of the axial signal after specular reflection on a mirror with normal ``n0``.

    Closed form ``(2 x0 z0, 2 y0 z0, z0^2 - x0^2 - y0^2) / |n0|^2``; the result
    is coplanar with ``n0`` and ``e_z`` and makes the same angle with ``n0``
    as ``e_z`` does.
    """
    n0 = _as_finite(n0, "normal")
    sq = np.sum(n0 * n0, axis=-1)
    if np.any(np.abs(np.sqrt(sq) - 1.0) > UNIT_TOL):
        raise InvalidArgumentError("reflect_unit_z expects unit normals")
    x0, y0, z0 = n0[..., 0], n0[..., 1], n0[..., 2]
    return np.stack([2 * x0 * z0, 2 * y0 * z0, z0 * z0 - x0 * x0 - y0 * y0], axis=-1) / sq[..., None]


def line_plane_intersect(origin, direction, plane_z: float) -> np.ndarray:
    """Point of the (two-sided) line ``origin + t direction`` on the plane ``z = plane_z``."""
    origin = _as_finite(origin, "origin")
    direction = _as_finite(direction, "direction")
    if not np.linalg.norm(direction) > 0:
        raise InvalidArgumentError("direction must be non-zero")
    dz = direction[2]
    gap = plane_z - origin[2]
    if dz == 0.0:
        if gap == 0.0:
            raise DegenerateGeometryError("line lies inside the plane")
        raise NoIntersectionError("line is parallel to the plane")
    return origin + (gap / dz) * direction


def paraboloid_parameters(origins, directions, a: float, c: float) -> np.ndarray:
    """Smallest-|t| root of ``z = a (x^2 + y^2) + c`` along each line.

    Works on ``(n, 3)`` stacks; entries without a real root come back NaN.
    """
    o = np.asarray(origins, dtype=float)
    d = np.asarray(directions, dtype=float)
    qa = a * (d[..., 0] ** 2 + d[..., 1] ** 2)
    qb = 2.0 * a * (o[..., 0] * d[..., 0] + o[..., 1] * d[..., 1]) - d[..., 2]
    qc = a * (o[..., 0] ** 2 + o[..., 1] ** 2) + c - o[..., 2]
    disc = qb * qb - 4.0 * qa * qc
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        root = np.sqrt(np.where(disc >= 0, disc, np.nan))
        # stable pair: q/A is the far root, C/q the near one
        q = -0.5 * (qb + np.copysign(root, qb))
        far = np.where(qa != 0.0, q / qa, np.inf)
        near = np.where(q != 0.0, qc / q, np.where(qc == 0.0, 0.0, np.nan))
        t = np.where(np.abs(near) <= np.abs(far), near, far)
        t = np.where(np.isnan(near), far, t)
    return np.where(disc >= 0, t, np.nan)


def line_paraboloid_intersect(origin, direction, coeffs) -> np.ndarray:
    """Closest intersection of a line through ``origin`` with the paraboloid ``coeffs``.

    ``coeffs`` is anything with ``a`` and ``c`` attributes.
    """
    origin = _as_finite(origin, "origin")
    direction = _as_finite(direction, "direction")
    if abs(np.linalg.norm(direction) - 1.0) > UNIT_TOL:
        raise InvalidArgumentError("direction must be a unit vector")
    t = float(paraboloid_parameters(origin, direction, coeffs.a, coeffs.c))
    if not math.isfinite(t):
        raise NoIntersectionError(f"line from {origin} along {direction} misses the paraboloid")
    return origin + t * direction


def _det2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def barycentric(p, tri):
    """Coefficients ``(a, b)`` with ``p = A + a AB + b AC`` and the doubled signed area."""
    p = np.asarray(p, dtype=float)
    tri = np.asarray(tri, dtype=float)
    v0 = tri[..., 0, :]
    v1 = tri[..., 1, :] - v0
    v2 = tri[..., 2, :] - v0
    area2 = _det2(v1, v2)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (_det2(p, v2) - _det2(v0, v2)) / area2
        b = -(_det2(p, v1) - _det2(v0, v1)) / area2
    return a, b, area2


def point_in_triangle(p, tri):
    """Strict interior test: ``a > 0``, ``b > 0`` and ``a + b < 1``."""
    a, b, area2 = barycentric(p, tri)
    if np.any(np.abs(area2) <= AREA_TOL):
        raise DegenerateGeometryError("triangle has (near) zero area")
    return _scalar_or_array((a > 0) & (b > 0) & (a + b < 1))


def segment_circle_intersect(p1, p2, radius: float):
    """Whether the closed segment ``p1 p2`` meets the circle ``|x| = radius``.

    Solved as ``|p1 + t (p2 - p1)|^2 = r^2`` for ``t in [0, 1]``. The squared
    distance is convex in ``t``, so a root exists iff its minimum on the
    segment is ``<= r^2`` and its larger endpoint value is ``>= r^2``.
    A zero-length segment reduces to "point lies on the circle".
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    d = p2 - p1
    qa = np.sum(d * d, axis=-1)
    qb = 2.0 * np.sum(p1 * d, axis=-1)
    qc = np.sum(p1 * p1, axis=-1) - radius * radius
    with np.errstate(divide="ignore", invalid="ignore"):
        t_min = np.where(qa > 0, np.clip(-qb / (2.0 * qa), 0.0, 1.0), 0.0)
    f_min = (qa * t_min + qb) * t_min + qc
    f_max = np.maximum(qc, qa + qb + qc)
    return _scalar_or_array((f_min <= 0) & (f_max >= 0))


def disk_triangle_overlap(tri, radius: float):
    """Whether the closed disk of ``radius`` about the origin meets the triangle.

    True if the origin is inside the triangle, an edge crosses the circle, or
    a vertex lies in the disk (the triangle sits wholly inside it).
    Degenerate triangles are judged by their edges and vertices alone.
    """
    tri = np.asarray(tri, dtype=float)
    a, b, area2 = barycentric(np.zeros(2), tri)
    with np.errstate(invalid="ignore"):
        center_in = (np.abs(area2) > AREA_TOL) & (a > 0) & (b > 0) & (a + b < 1)
    edge_hit = np.zeros(center_in.shape, dtype=bool)
    for i, j in ((0, 1), (1, 2), (2, 0)):
        edge_hit |= segment_circle_intersect(tri[..., i, :], tri[..., j, :], radius)
    vertex_in = np.any(np.sum(tri * tri, axis=-1) <= radius * radius, axis=-1)
    return _scalar_or_array(center_in | edge_hit | vertex_in)
