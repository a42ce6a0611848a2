"""Per-panel specular reflection onto the focal plane and cabin acceptance."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .constants import ASCENT_TOL, CROSS_TOL, TelescopeConstants
from .errors import DegenerateGeometryError, EmptyRegionError, InvalidArgumentError
from .geometry import RotationFrame, apply_rotation, disk_triangle_overlap, reflect_unit_z
from .mesh import Mesh
from .shape import AdjustmentSolution, aperture_filter

THREADS_ENV = "REFLECTOR_SIM_THREADS"
REGIONS = ("mixed", "aperture", "all")
_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class PanelReflection:
    panel_index: int
    normal: np.ndarray
    reflected: np.ndarray
    projected: np.ndarray | None
    hit: bool

    def as_dict(self) -> dict:
        out = {
            "panel_index": self.panel_index,
            "hit": self.hit,
            "normal": [float(v) for v in self.normal],
            "reflected": [float(v) for v in self.reflected],
        }
        if self.projected is not None:
            out["projected_vertices"] = [[float(v) for v in row] for row in self.projected]
        return out


@dataclass(frozen=True, eq=False)
class ReceptionReport:
    surface_label: str
    region: str
    cabin_radius: float
    total_panels: int
    hit_panels: int
    per_panel: tuple

    @property
    def efficiency(self) -> float:
        return self.hit_panels / self.total_panels

    def hit_set(self) -> set:
        return {r.panel_index for r in self.per_panel if r.hit}

    def as_dict(self) -> dict:
        return {
            "surface_label": self.surface_label,
            "region": self.region,
            "cabin_radius": self.cabin_radius,
            "total_panels": self.total_panels,
            "hit_panels": self.hit_panels,
            "efficiency": self.efficiency,
            "per_panel": [r.as_dict() for r in self.per_panel],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=1)


def panel_normal(vertices) -> np.ndarray:
    """Unit normal ``AB x AC`` of a flat panel, oriented to positive z.

    Accepts ``(3, 3)`` or a stack ``(n, 3, 3)``.
    """
    v = np.asarray(vertices, dtype=float)
    n = np.cross(v[..., 1, :] - v[..., 0, :], v[..., 2, :] - v[..., 0, :])
    size = np.linalg.norm(n, axis=-1)
    if np.any(size <= CROSS_TOL):
        raise DegenerateGeometryError("panel vertices are collinear")
    n = n / size[..., None]
    return np.where((n[..., 2] < 0)[..., None], -n, n)


def _project(vertices, reflected, plane_z):
    """Shift every vertex along its panel's reflected ray to ``z = plane_z``."""
    t = (plane_z - vertices[..., 2]) / reflected[..., None, 2]
    return vertices[..., :2] + t[..., None] * reflected[..., None, :2]


def project_panel(vertices, constants: TelescopeConstants = TelescopeConstants()):
    """Footprint ``A'B'C'`` of the panel's reflected bundle on the focal plane.

    Returns ``None`` when the reflected direction does not climb towards the
    plane (``n_z <= 1e-12``).
    """
    v = np.asarray(vertices, dtype=float)
    n = reflect_unit_z(panel_normal(v))
    if n[2] <= ASCENT_TOL:
        return None
    return _project(v, n, constants.focal_plane_z)


def panel_hits_cabin(projected, cabin_radius: float) -> bool:
    if not cabin_radius > 0:
        raise InvalidArgumentError("cabin radius must be positive")
    return bool(disk_triangle_overlap(projected, cabin_radius))


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise InvalidArgumentError(f"{THREADS_ENV} must be >= 0")
    return n or (os.cpu_count() or 1)


def _evaluate_chunk(tris, plane_z, radius):
    normals = panel_normal(tris)
    reflected = reflect_unit_z(normals)
    ascends = reflected[:, 2] > ASCENT_TOL
    projected = np.full((len(tris), 3, 2), np.nan)
    if np.any(ascends):
        projected[ascends] = _project(tris[ascends], reflected[ascends], plane_z)
    hits = np.zeros(len(tris), dtype=bool)
    hits[ascends] = disk_triangle_overlap(projected[ascends], radius)
    return normals, reflected, ascends, projected, hits


def evaluate_panels(vertices, constants: TelescopeConstants = TelescopeConstants(), workers: int | None = None):
    """Vectorized normal/reflection/projection/hit pass over ``(n, 3, 3)`` panels.

    Chunks run on a thread pool; results are concatenated in panel order.
    """
    tris = np.asarray(vertices, dtype=float)
    chunks = [tris[i:i + _CHUNK] for i in range(0, len(tris), _CHUNK)]
    workers = worker_count() if workers is None else workers
    args = (constants.focal_plane_z, constants.cabin_radius)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            parts = list(pool.map(lambda c: _evaluate_chunk(c, *args), chunks))
    else:
        parts = [_evaluate_chunk(c, *args) for c in chunks]
    return tuple(np.concatenate([p[k] for p in parts]) for k in range(5))


def _select_panels(mesh, frame, constants, label, region):
    if region not in REGIONS:
        raise InvalidArgumentError(f"region must be one of {REGIONS}, got {region!r}")
    if region == "mixed":
        region = "all" if label == "sphere" else "aperture"
    if region == "all":
        return np.arange(len(mesh.faces)), region
    return aperture_filter(mesh, frame, constants.aperture_diameter).panel_indices, region


def evaluate_reception(mesh: Mesh, surface, frame: RotationFrame,
                       constants: TelescopeConstants = TelescopeConstants(),
                       region: str = "mixed", workers: int | None = None) -> ReceptionReport:
    """Count panels whose reflected footprint overlaps the cabin disk.

    ``surface`` is ``"sphere"`` (reference positions) or an
    :class:`AdjustmentSolution`. ``region="mixed"`` uses every panel for the
    sphere and the aperture panels for the working surface.
    """
    if isinstance(surface, AdjustmentSolution):
        label, positions = "working", surface.positions
    elif surface == "sphere":
        label, positions = "sphere", apply_rotation(frame, mesh.M)
    else:
        raise InvalidArgumentError(f"surface must be 'sphere' or an AdjustmentSolution, got {surface!r}")

    selected, region = _select_panels(mesh, frame, constants, label, region)
    if len(selected) == 0:
        raise EmptyRegionError(f"no panels in region {region!r}")
    tris = positions[mesh.faces[selected]]
    normals, reflected, ascends, projected, hits = evaluate_panels(tris, constants, workers)

    per_panel = tuple(
        PanelReflection(int(k), normals[j], reflected[j], projected[j] if ascends[j] else None, bool(hits[j]))
        for j, k in enumerate(selected)
    )
    return ReceptionReport(label, region, constants.cabin_radius, int(len(selected)), int(hits.sum()), per_panel)


@dataclass(frozen=True)
class Comparison:
    sphere_efficiency: float
    working_efficiency: float
    improvement_percent: float | None

    @property
    def undefined_ratio(self) -> bool:
        return self.improvement_percent is None

    def as_dict(self) -> dict:
        return {
            "sphere_efficiency": self.sphere_efficiency,
            "working_efficiency": self.working_efficiency,
            "improvement_percent": self.improvement_percent,
            "undefined_ratio": self.undefined_ratio,
        }


def _improvement(sphere_eff, working_eff):
    if sphere_eff == 0:
        return Comparison(sphere_eff, working_eff, None)
    return Comparison(sphere_eff, working_eff, 100.0 * (working_eff / sphere_eff - 1.0))


def compare_reports(sphere_report, working_report) -> Comparison:
    """Absolute efficiencies and relative improvement ``working / sphere - 1`` in percent.

    Either argument may be a :class:`ReceptionReport` or a bare efficiency.
    """
    def eff(r):
        if isinstance(r, ReceptionReport):
            if r.total_panels == 0:
                raise EmptyRegionError("cannot compare an empty report")
            return r.efficiency
        value = float(r)
        if not (math.isfinite(value) and 0 <= value <= 1):
            raise InvalidArgumentError(f"efficiency must lie in [0, 1], got {r!r}")
        return value

    return _improvement(eff(sphere_report), eff(working_report))


def plot_data_csv(report: ReceptionReport, target=None) -> str:
    """Projected footprints, one row per panel vertex, for external plotting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("panel_index", "vertex", "x", "y", "hit"))
    for r in report.per_panel:
        if r.projected is None:
            continue
        for k, (x, y) in enumerate(r.projected):
            writer.writerow((r.panel_index, k, repr(float(x)), repr(float(y)), int(r.hit)))
    return _emit(buf.getvalue(), target)


def cabin_circle_csv(radius: float, samples: int = 360, target=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("x", "y"))
    for k in range(samples + 1):
        t = 2.0 * math.pi * k / samples
        writer.writerow((repr(radius * math.cos(t)), repr(radius * math.sin(t))))
    return _emit(buf.getvalue(), target)


def _emit(text, target):
    if target is not None:
        with open(target, "w", newline="") as fh:
            fh.write(text)
    return text
