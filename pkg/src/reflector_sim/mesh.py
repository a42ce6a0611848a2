"""Cable-net data model, CSV ingestion, validation and a synthetic cap generator."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .constants import DEFAULT_RADIUS, TelescopeConstants
from .errors import (
    DanglingReferenceError,
    DuplicateKeyError,
    EmptyCapError,
    InvalidArgumentError,
    InvalidPanelError,
    ParseError,
)

NODE_COLUMNS = ("id", "Mx", "My", "Mz", "Dx", "Dy", "Dz", "Ux", "Uy", "Uz")
PANEL_COLUMNS = ("id1", "id2", "id3")

# actuator top / anchor offsets below each synthetic node, along the radius
SYNTHETIC_TOP_OFFSET = 0.5
SYNTHETIC_ANCHOR_OFFSET = 2.0


@dataclass(frozen=True, eq=False)
class CableNode:
    """Main-cable node ``M`` with actuator anchor ``D`` and actuator top ``U``."""

    id: str
    M: np.ndarray
    D: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        for name in ("M", "D", "U"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(3)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def actuator_length(self) -> float:
        return float(np.linalg.norm(self.U - self.D))


@dataclass(frozen=True)
class Panel:
    node_ids: tuple

    def __post_init__(self):
        ids = tuple(str(i) for i in self.node_ids)
        if len(ids) != 3:
            raise InvalidPanelError(f"panel needs three node ids, got {ids}")
        if len(set(ids)) != 3:
            raise InvalidPanelError(f"panel repeats a node id: {ids}")
        object.__setattr__(self, "node_ids", ids)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable reflector mesh. Build with :func:`build_mesh`.

    Array views (``labels``, ``M``, ``D``, ``U``, ``faces``, ``edges``) are
    derived once and index nodes in ``labels`` order.
    """

    nodes: dict
    panels: tuple
    radius: float = DEFAULT_RADIUS

    @cached_property
    def labels(self) -> tuple:
        return tuple(self.nodes)

    @cached_property
    def index(self) -> dict:
        return {label: i for i, label in enumerate(self.labels)}

    def _stack(self, name):
        if not self.nodes:
            return np.zeros((0, 3))
        return np.array([getattr(self.nodes[k], name) for k in self.labels])

    @cached_property
    def M(self) -> np.ndarray:
        return self._stack("M")

    @cached_property
    def D(self) -> np.ndarray:
        return self._stack("D")

    @cached_property
    def U(self) -> np.ndarray:
        return self._stack("U")

    @cached_property
    def faces(self) -> np.ndarray:
        """``(f, 3)`` node indices; panels with unknown labels are dropped."""
        rows = [[self.index[i] for i in p.node_ids] for p in self.panels
                if all(i in self.index for i in p.node_ids)]
        return np.array(rows, dtype=np.int64).reshape(-1, 3)

    @cached_property
    def edges(self) -> np.ndarray:
        """``(e, 2)`` node index pairs of the deduplicated panel sides."""
        pairs = sorted(edges_of(self))
        return np.array([[self.index[a], self.index[b]] for a, b in pairs],
                        dtype=np.int64).reshape(-1, 2)


def build_mesh(nodes, panels, radius: float = DEFAULT_RADIUS, check_references: bool = True) -> Mesh:
    """Assemble a mesh, rejecting duplicate labels and (optionally) dangling panels."""
    table = {}
    for node in nodes:
        if node.id in table:
            raise DuplicateKeyError(node.id)
        table[node.id] = node
    panels = tuple(p if isinstance(p, Panel) else Panel(tuple(p)) for p in panels)
    if check_references:
        for k, panel in enumerate(panels):
            missing = [i for i in panel.node_ids if i not in table]
            if missing:
                raise DanglingReferenceError(f"panel {k} {panel.node_ids} references unknown node(s) {missing}")
    return Mesh(table, panels, float(radius))


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, newline="")
    return source


def _read_table(source, columns):
    stream = _open_text(source)
    try:
        reader = csv.reader(stream)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("missing header", line=1) from None
        if tuple(header) != columns:
            raise ParseError(f"expected header {','.join(columns)}, got {','.join(header)}", line=1)
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(columns):
                raise ParseError(f"expected {len(columns)} fields, got {len(row)}", line=reader.line_num)
            yield reader.line_num, [c.strip() for c in row]
    finally:
        if stream is not source:
            stream.close()


def _number(text, line):
    try:
        value = float(text.replace("−", "-"))
    except ValueError:
        raise ParseError(f"not a number: {text!r}", line=line) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite coordinate {text!r}", line=line)
    return value


def load_nodes(source) -> list:
    """Read ``id,Mx,My,Mz,Dx,Dy,Dz,Ux,Uy,Uz`` rows into :class:`CableNode` objects.

    ``source`` is a path or an open text stream. M, U and D need not be collinear.
    """
    nodes, seen = [], set()
    for line, row in _read_table(source, NODE_COLUMNS):
        label = row[0]
        if not label:
            raise ParseError("empty node id", line=line)
        if label in seen:
            raise DuplicateKeyError(label)
        seen.add(label)
        xyz = [_number(v, line) for v in row[1:]]
        nodes.append(CableNode(label, xyz[0:3], xyz[3:6], xyz[6:9]))
    return nodes


def load_panels(source) -> list:
    panels = []
    for line, row in _read_table(source, PANEL_COLUMNS):
        try:
            panels.append(Panel(tuple(row)))
        except InvalidPanelError as exc:
            raise InvalidPanelError(f"line {line}: {exc}") from None
    return panels


def _fmt(x) -> str:
    return repr(float(x))


def save_nodes(mesh: Mesh, target=None) -> str:
    """Write the nodes table; returns the text (and writes it to ``target`` if given)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(NODE_COLUMNS)
    for label in mesh.labels:
        n = mesh.nodes[label]
        writer.writerow([label, *map(_fmt, n.M), *map(_fmt, n.D), *map(_fmt, n.U)])
    return _emit(buf.getvalue(), target)


def save_panels(mesh: Mesh, target=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PANEL_COLUMNS)
    for panel in mesh.panels:
        writer.writerow(panel.node_ids)
    return _emit(buf.getvalue(), target)


def _emit(text, target):
    if target is None:
        return text
    if isinstance(target, (str, Path)):
        Path(target).write_text(text)
    else:
        target.write(text)
    return text


def edges_of(mesh: Mesh) -> set:
    """Unordered panel sides as ``(lo, hi)`` label tuples."""
    out = set()
    for panel in mesh.panels:
        a, b, c = panel.node_ids
        for u, v in ((a, b), (b, c), (c, a)):
            out.add((u, v) if u <= v else (v, u))
    return out


@dataclass(frozen=True)
class Violation:
    code: str
    node_or_panel: str
    message: str

    def as_dict(self) -> dict:
        return {"code": self.code, "node_or_panel": self.node_or_panel, "message": self.message}


def validate_mesh(mesh: Mesh, constants: TelescopeConstants | None = None) -> list:
    """List every violated mesh assumption; an empty list means the mesh is valid.

    Codes: ``off-sphere``, ``zero-length-actuator``, ``dangling-panel`` and
    ``duplicate-edge`` (a side shared by more than two panels).
    """
    constants = constants or TelescopeConstants(R=mesh.radius)
    report = []
    for label, node in mesh.nodes.items():
        r = float(np.linalg.norm(node.M))
        if abs(r - constants.R) > constants.sphere_tolerance:
            report.append(Violation("off-sphere", label,
                                    f"|M| = {r:.9g} m differs from R = {constants.R:.9g} m"))
        if not node.actuator_length > 0:
            report.append(Violation("zero-length-actuator", label, "actuator top U coincides with anchor D"))
    use = {}
    for k, panel in enumerate(mesh.panels):
        missing = [i for i in panel.node_ids if i not in mesh.nodes]
        if missing:
            report.append(Violation("dangling-panel", f"panel {k}",
                                    f"references unknown node(s) {', '.join(missing)}"))
        a, b, c = panel.node_ids
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u <= v else (v, u)
            use[key] = use.get(key, 0) + 1
    for (u, v), count in sorted(use.items()):
        if count > 2:
            report.append(Violation("duplicate-edge", f"{u}-{v}", f"side shared by {count} panels"))
    return report


def report_to_json(report) -> str:
    return json.dumps([v.as_dict() for v in report], indent=2)


def _icosahedron():
    """Unit icosahedron turned so that the centroid of face 0 points to -z."""
    r = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, r, 0], [1, r, 0], [-1, -r, 0], [1, -r, 0],
        [0, -1, r], [0, 1, r], [0, -1, -r], [0, 1, -r],
        [r, 0, -1], [r, 0, 1], [-r, 0, -1], [-r, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    centroid = verts[list(faces[0])].mean(axis=0)
    centroid /= np.linalg.norm(centroid)
    target = np.array([0.0, 0.0, -1.0])
    axis = np.cross(centroid, target)
    s, c = np.linalg.norm(axis), float(centroid @ target)
    k = axis / s
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    rot = np.eye(3) + s * kx + (1 - c) * (kx @ kx)
    return verts @ rot.T, faces


def _subdivide(verts, faces):
    verts = list(verts)
    cache = {}

    def midpoint(i, j):
        key = (i, j) if i < j else (j, i)
        if key not in cache:
            m = verts[i] + verts[j]
            verts.append(m / np.linalg.norm(m))
            cache[key] = len(verts) - 1
        return cache[key]

    out = []
    for i, j, k in faces:
        a, b, c = midpoint(i, j), midpoint(j, k), midpoint(k, i)
        out.extend([(i, a, c), (j, b, a), (k, c, b), (a, b, c)])
    return np.array(verts), out


def generate_synthetic_mesh(
    radius: float = DEFAULT_RADIUS,
    cap_half_angle: float = 56.3,
    subdivisions: int = 4,
    full_sphere: bool = False,
) -> Mesh:
    """Geodesic spherical cap standing in for measured cable-net data.

    An icosahedron (one face centered on -z) is subdivided ``subdivisions``
    times and projected onto the sphere. Panels are kept when all their
    vertices satisfy ``z <= -radius cos(cap_half_angle)``; ``full_sphere``
    keeps everything. Actuators are strictly radial.
    """
    if not (math.isfinite(radius) and radius > 0):
        raise InvalidArgumentError(f"radius must be positive, got {radius}")
    if not 0 < cap_half_angle <= 90:
        raise InvalidArgumentError(f"cap_half_angle must lie in (0, 90], got {cap_half_angle}")
    if int(subdivisions) != subdivisions or subdivisions < 0:
        raise InvalidArgumentError(f"subdivisions must be a non-negative integer, got {subdivisions}")

    verts, faces = _icosahedron()
    for _ in range(int(subdivisions)):
        verts, faces = _subdivide(verts, faces)

    if full_sphere:
        kept = faces
    else:
        limit = -math.cos(math.radians(cap_half_angle))
        kept = [f for f in faces if all(verts[i, 2] <= limit for i in f)]
    if not kept:
        raise EmptyCapError(
            f"no panel fits inside a {cap_half_angle} degree cap at {subdivisions} subdivisions")

    used = sorted({i for f in kept for i in f})
    width = len(str(len(used) - 1))
    label = {old: f"N{new:0{width}d}" for new, old in enumerate(used)}
    nodes = []
    for old in used:
        M = verts[old] * radius
        nodes.append(CableNode(
            label[old], M,
            D=M * (1.0 - SYNTHETIC_ANCHOR_OFFSET / radius),
            U=M * (1.0 - SYNTHETIC_TOP_OFFSET / radius),
        ))
    panels = [Panel(tuple(label[i] for i in f)) for f in kept]
    return build_mesh(nodes, panels, radius)
