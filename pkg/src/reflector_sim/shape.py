"""Ideal paraboloid fit, actuator-axis projection and the interpolation solver."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .constants import TelescopeConstants
from .errors import (
    DegenerateGeometryError,
    EmptyRegionError,
    InvalidArgumentError,
    NoIntersectionError,
    OptimizationFailedError,
)
from .geometry import RotationFrame, apply_rotation, inverse_rotation, line_paraboloid_intersect, paraboloid_parameters
from .mesh import CableNode, Mesh

__all__ = [
    "TelescopeConstants", "ParabolaCoeffs", "NodeAdjustment", "AdjustmentSolution", "Aperture",
    "loss", "fit_parabola", "golden_section", "paraboloid_vertex", "actuator_axis", "actuator_axes",
    "target_on_paraboloid", "targets_on_paraboloid", "displacement", "signed_stroke", "edge_ratio",
    "aperture_filter", "solve_proportion", "export_adjustments", "load_adjustments",
]

ADJUSTMENT_COLUMNS = ("id", "X", "Y", "Z", "stroke")
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ParabolaCoeffs:
    """Paraboloid ``z = a (x^2 + y^2) + c`` in the aligned frame."""

    a: float
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.c)):
            raise InvalidArgumentError(f"non-finite coefficients ({self.a}, {self.c})")
        if not self.a > 0:
            raise InvalidArgumentError(f"a must be positive, got {self.a}")

    @classmethod
    def with_focus_on_plane(cls, a: float, constants: TelescopeConstants) -> "ParabolaCoeffs":
        """Coefficients whose focus ``c + 1/(4a)`` lies on the focal plane ``-(R - F)``."""
        return cls(a, constants.focal_plane_z - 1.0 / (4.0 * a))

    @property
    def focus_z(self) -> float:
        return self.c + 1.0 / (4.0 * self.a)

    def surface_z(self, x, y):
        return self.a * (np.asarray(x) ** 2 + np.asarray(y) ** 2) + self.c


def loss(coeffs: ParabolaCoeffs, constants: TelescopeConstants = TelescopeConstants(), step: float = 0.1) -> float:
    """Midpoint-rule integral of the squared vertical gap to the dish.

    The dish is the lower semicircle ``y = -sqrt(R^2 - x^2)``; the integral runs
    over the aperture ``[-D/2, D/2]``.
    """
    if not step > 0:
        raise InvalidArgumentError(f"step must be positive, got {step}")
    half = constants.aperture_diameter / 2.0
    if half > constants.R:
        raise InvalidArgumentError("aperture wider than the sphere")
    n = max(1, int(round(2.0 * half / step)))
    dx = 2.0 * half / n
    x = -half + (np.arange(n) + 0.5) * dx
    gap = coeffs.a * x * x + coeffs.c + np.sqrt(constants.R ** 2 - x * x)
    return float(np.sum(gap * gap) * dx)


def golden_section(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 500):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    x = 0.5 * (lo + hi)
    return x, f(x)


def fit_parabola(constants: TelescopeConstants = TelescopeConstants(), step: float = 0.1,
                 bracket=(1e-4, 1e-2), tol: float = 1e-13) -> ParabolaCoeffs:
    """Least-squares parabola whose focus sits on the focal plane.

    ``c`` is eliminated through the focal identity, leaving a 1-D golden-section
    search over ``a``.
    """
    lo, hi = bracket

    def objective(a):
        return loss(ParabolaCoeffs.with_focus_on_plane(a, constants), constants, step)

    a, _ = golden_section(objective, lo, hi, tol=tol)
    edge = 1e-6 * (hi - lo)
    if a - lo < edge or hi - a < edge:
        raise OptimizationFailedError(f"minimum of the loss sits on the bracket edge (a = {a:.6g})")
    return ParabolaCoeffs.with_focus_on_plane(a, constants)


def paraboloid_vertex(coeffs: ParabolaCoeffs, frame: RotationFrame) -> np.ndarray:
    """Vertex ``(0, 0, c)`` mapped back to the original frame."""
    return inverse_rotation(frame, np.array([0.0, 0.0, coeffs.c]))


def actuator_axis(node: CableNode) -> np.ndarray:
    """Unit actuator direction pointing away from the sphere center.

    Zero-length actuators fall back to the radial direction of ``M``.
    """
    return actuator_axes(node.M[None], node.D[None], node.U[None])[0]


def actuator_axes(M, D, U) -> np.ndarray:
    M, D, U = (np.asarray(v, dtype=float) for v in (M, D, U))
    v = U - D
    length = np.linalg.norm(v, axis=-1)
    radial = M / np.linalg.norm(M, axis=-1)[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.where((length > 0)[:, None], v / length[:, None], radial)
    flip = np.sum(v * M, axis=-1) < 0
    v[flip] *= -1.0
    return v


def target_on_paraboloid(node: CableNode, coeffs: ParabolaCoeffs, frame: RotationFrame) -> np.ndarray:
    """Aligned-frame point where the actuator line through ``M`` meets the paraboloid."""
    M = apply_rotation(frame, node.M)
    v = apply_rotation(frame, actuator_axis(node))
    return line_paraboloid_intersect(M, v, coeffs)


def targets_on_paraboloid(M_aligned, axes_aligned, coeffs: ParabolaCoeffs, labels=None) -> np.ndarray:
    """Batch form of :func:`target_on_paraboloid` on aligned-frame arrays."""
    t = paraboloid_parameters(M_aligned, axes_aligned, coeffs.a, coeffs.c)
    bad = ~np.isfinite(t)
    if np.any(bad):
        which = np.flatnonzero(bad)[:5]
        names = [labels[i] for i in which] if labels is not None else list(which)
        raise NoIntersectionError(f"actuator line misses the paraboloid for node(s) {names}")
    return M_aligned + t[:, None] * axes_aligned


def displacement(M, P) -> float:
    return float(np.linalg.norm(np.asarray(P, dtype=float) - np.asarray(M, dtype=float)))


def signed_stroke(node: CableNode, P, frame: RotationFrame | None = None) -> float:
    """Displacement of ``P`` from ``M`` along the outward actuator axis.

    ``P`` is in the original frame unless ``frame`` is given, in which case it
    is taken as an aligned-frame point.
    """
    P = np.asarray(P, dtype=float)
    if frame is not None:
        P = inverse_rotation(frame, P)
    return float((P - node.M) @ actuator_axis(node))


def edge_ratio(before_1, before_2, after_1, after_2) -> float:
    """Relative absolute change of an edge length."""
    d0 = float(np.linalg.norm(np.subtract(before_2, before_1)))
    if d0 == 0.0:
        raise DegenerateGeometryError(f"edge {before_1} - {before_2} has zero reference length")
    d1 = float(np.linalg.norm(np.subtract(after_2, after_1)))
    return abs(d1 - d0) / d0


@dataclass(frozen=True, eq=False)
class Aperture:
    """Subset of a mesh inside the illuminated aperture, as index arrays."""

    node_mask: np.ndarray
    node_indices: np.ndarray
    edge_indices: np.ndarray
    panel_indices: np.ndarray
    labels: tuple


def aperture_filter(mesh: Mesh, frame: RotationFrame, diameter: float) -> Aperture:
    """Nodes with aligned-frame ``x^2 + y^2 <= (diameter/2)^2`` and the edges/panels they span."""
    M = apply_rotation(frame, mesh.M) if len(mesh.labels) else np.zeros((0, 3))
    mask = M[:, 0] ** 2 + M[:, 1] ** 2 <= (diameter / 2.0) ** 2
    edges = np.flatnonzero(mask[mesh.edges].all(axis=1)) if len(mesh.edges) else np.zeros(0, dtype=np.int64)
    panels = np.flatnonzero(mask[mesh.faces].all(axis=1)) if len(mesh.faces) else np.zeros(0, dtype=np.int64)
    idx = np.flatnonzero(mask)
    return Aperture(mask, idx, edges, panels, tuple(mesh.labels[i] for i in idx))


@dataclass(frozen=True)
class NodeAdjustment:
    node_id: str
    target_N: np.ndarray
    realized_P: np.ndarray
    signed_stroke: float
    displacement: float


@dataclass(frozen=True, eq=False)
class AdjustmentSolution:
    """Working surface at a single interpolation proportion.

    ``positions`` holds every mesh node in the aligned frame: realized points
    inside the aperture, reference points ``M`` outside.
    """

    proportion: float
    adjustments: tuple
    max_edge_ratio: float
    stroke_range: tuple
    aperture_node_count: int
    aperture_edge_count: int
    constraint_edge_count: int
    positions: np.ndarray
    aperture: Aperture

    def summary(self) -> dict:
        return {
            "proportion": self.proportion,
            "max_edge_ratio": self.max_edge_ratio,
            "stroke_min": self.stroke_range[0],
            "stroke_max": self.stroke_range[1],
            "counts": {
                "aperture_nodes": self.aperture_node_count,
                "aperture_edges": self.aperture_edge_count,
                "constraint_edges": self.constraint_edge_count,
                "aperture_panels": int(len(self.aperture.panel_indices)),
            },
        }


class _InterpolationProblem:
    """Max edge ratio and stroke extent of ``M + p (N - M)`` as functions of ``p``."""

    def __init__(self, M, delta, axes, edges):
        self.M = M
        self.delta = delta
        a, b = edges[:, 0], edges[:, 1]
        self.a, self.b = a, b
        self.base = np.linalg.norm(M[b] - M[a], axis=1)
        if np.any(self.base == 0):
            raise DegenerateGeometryError("constraint edge with coincident endpoints")
        self.unit_strokes = np.sum(delta * axes, axis=1)

    def max_ratio(self, p: float) -> float:
        if len(self.base) == 0:
            return 0.0
        P = self.M + p * self.delta
        length = np.linalg.norm(P[self.b] - P[self.a], axis=1)
        return float(np.max(np.abs(length - self.base) / self.base))

    def strokes(self, p: float) -> np.ndarray:
        return p * self.unit_strokes


def solve_proportion(mesh: Mesh, coeffs: ParabolaCoeffs, frame: RotationFrame,
                     constants: TelescopeConstants = TelescopeConstants(),
                     resolution: float = 1e-3) -> AdjustmentSolution:
    """Largest uniform proportion ``p`` meeting the edge-ratio and stroke limits.

    Aperture nodes move to ``M + p (N - M)``; all others stay at ``M``. Edges
    with at least one aperture endpoint are constrained. ``p`` is bisected on
    ``[0, 1]`` assuming feasibility does not return once lost.
    """
    aperture = aperture_filter(mesh, frame, constants.aperture_diameter)
    inside = aperture.node_indices
    if len(inside) == 0:
        raise EmptyRegionError("empty aperture: no node lies within the aperture diameter")

    M = apply_rotation(frame, mesh.M)
    axes = apply_rotation(frame, actuator_axes(mesh.M, mesh.D, mesh.U))
    N = targets_on_paraboloid(M[inside], axes[inside], coeffs, aperture.labels)
    delta = np.zeros_like(M)
    delta[inside] = N - M[inside]

    constrained = mesh.edges[aperture.node_mask[mesh.edges].any(axis=1)]
    problem = _InterpolationProblem(M, delta, axes, constrained)

    def feasible(p):
        return (problem.max_ratio(p) <= constants.edge_ratio_limit
                and float(np.max(np.abs(problem.strokes(p)))) <= constants.stroke_limit)

    assert feasible(0.0), "p = 0 leaves the mesh untouched and must be feasible"
    if feasible(1.0):
        p = 1.0
    else:
        lo, hi = 0.0, 1.0
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
        p = lo

    positions = M + p * delta
    strokes = problem.strokes(p)
    adjustments = []
    for i in sorted(inside, key=lambda k: mesh.labels[k]):
        adjustments.append(NodeAdjustment(
            node_id=mesh.labels[i],
            target_N=delta[i] + M[i],
            realized_P=positions[i],
            signed_stroke=float(strokes[i]),
            displacement=float(np.linalg.norm(positions[i] - M[i])),
        ))
    s = strokes[inside]
    return AdjustmentSolution(
        proportion=p,
        adjustments=tuple(adjustments),
        max_edge_ratio=problem.max_ratio(p),
        stroke_range=(float(s.min()), float(s.max())),
        aperture_node_count=int(len(inside)),
        aperture_edge_count=int(len(aperture.edge_indices)),
        constraint_edge_count=int(len(constrained)),
        positions=positions,
        aperture=aperture,
    )


def export_adjustments(solution: AdjustmentSolution, frame: RotationFrame, target=None) -> str:
    """CSV ``id,X,Y,Z,stroke`` of realized positions in the original frame, sorted by id."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ADJUSTMENT_COLUMNS)
    for adj in sorted(solution.adjustments, key=lambda a: a.node_id):
        xyz = inverse_rotation(frame, adj.realized_P)
        writer.writerow([adj.node_id, *(repr(float(v)) for v in xyz), repr(float(adj.signed_stroke))])
    text = buf.getvalue()
    if target is not None:
        with open(target, "w", newline="") as fh:
            fh.write(text)
    return text


def load_adjustments(source) -> dict:
    """Inverse of :func:`export_adjustments`: ``{id: (xyz, stroke)}``."""
    stream = open(source, newline="") if isinstance(source, str) else source
    try:
        rows = list(csv.reader(stream))
    finally:
        if stream is not source:
            stream.close()
    if not rows or tuple(rows[0]) != ADJUSTMENT_COLUMNS:
        raise InvalidArgumentError("adjustments table needs header id,X,Y,Z,stroke")
    return {r[0]: (np.array([float(v) for v in r[1:4]]), float(r[4])) for r in rows[1:] if r}
