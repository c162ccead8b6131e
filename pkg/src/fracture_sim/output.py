"""CSV traces, legacy-ASCII VTK snapshots and JSON summaries.

Floats are written with 17 significant digits so files round-trip exactly and
repeated runs can be compared byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fracture_sim.engines import Trace
from fracture_sim.fem import FieldState
from fracture_sim.mesh import Mesh

LOAD_DISP_COLUMNS = (
    "step",
    "prescribed_disp_m",
    "edge_left_disp_m",
    "edge_right_disp_m",
    "load_N",
    "contact_stress_Pa",
)
TRACE_COLUMNS = (
    "step",
    "event",
    "element",
    "iterations",
    "converged",
    "load_N",
    "contact_stress_Pa",
    "reaction_imbalance",
)

VTK_QUAD = 9


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_rows(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue(), newline="")


def write_load_displacement(path, trace: Trace) -> None:
    rows = [
        (r.step, fmt(r.prescribed_disp), fmt(r.edge_left_disp), fmt(r.edge_right_disp), fmt(r.load), fmt(r.contact_stress))
        for r in trace
    ]
    _write_rows(Path(path), LOAD_DISP_COLUMNS, rows)


def write_trace(path, trace: Trace) -> None:
    rows = [
        (
            r.step,
            r.event,
            r.element,
            r.iterations,
            int(r.converged),
            fmt(r.load),
            fmt(r.contact_stress),
            fmt(r.reaction_imbalance),
        )
        for r in trace
    ]
    _write_rows(Path(path), TRACE_COLUMNS, rows)


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for i, name in enumerate(header):
        col = [r[i] for r in body]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def write_vtk(path, mesh: Mesh, state: FieldState, title: str = "fracture_sim snapshot") -> None:
    n, m = mesh.n_nodes, mesh.n_elements
    lines = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {n} double")
    lines += [f"{fmt(x)} {fmt(y)} 0" for x, y in mesh.coords]
    lines.append(f"CELLS {m} {5 * m}")
    lines += ["4 " + " ".join(str(int(v)) for v in quad) for quad in mesh.elements]
    lines.append(f"CELL_TYPES {m}")
    lines += [str(VTK_QUAD)] * m
    lines.append(f"CELL_DATA {m}")
    for name, values in (("E_current", state.E_current), ("sp1", state.sp1), ("ep1", state.ep1)):
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [fmt(v) for v in values]
    lines += ["SCALARS region int 1", "LOOKUP_TABLE default"]
    lines += [str(int(r)) for r in mesh.region]
    lines.append(f"POINT_DATA {n}")
    lines.append("VECTORS u double")
    lines += [f"{fmt(ux)} {fmt(uy)} 0" for ux, uy in state.u]
    Path(path).write_text("\n".join(lines) + "\n", newline="")


@dataclass
class VtkData:
    points: np.ndarray
    cells: np.ndarray
    cell_types: np.ndarray
    cell_data: dict
    point_data: dict


def read_vtk(path) -> VtkData:
    """Minimal reader for the files written by :func:`write_vtk`."""
    tokens = Path(path).read_text().split("\n")
    if not tokens[0].startswith("# vtk DataFile Version 3.0"):
        raise ValueError("not a legacy VTK 3.0 file")
    if tokens[2].strip() != "ASCII" or tokens[3].strip() != "DATASET UNSTRUCTURED_GRID":
        raise ValueError("expected an ASCII unstructured grid")
    it = iter(tokens[4:])
    cell_data, point_data = {}, {}
    section = None
    points = cells = types = None
    for line in it:
        if not line.strip():
            continue
        head = line.split()
        if head[0] == "POINTS":
            n = int(head[1])
            points = np.array([[float(v) for v in next(it).split()] for _ in range(n)])
        elif head[0] == "CELLS":
            m = int(head[1])
            cells = np.array([[int(v) for v in next(it).split()[1:]] for _ in range(m)])
        elif head[0] == "CELL_TYPES":
            types = np.array([int(next(it)) for _ in range(int(head[1]))])
        elif head[0] == "CELL_DATA":
            section, count = cell_data, int(head[1])
        elif head[0] == "POINT_DATA":
            section, count = point_data, int(head[1])
        elif head[0] == "SCALARS":
            next(it)  # LOOKUP_TABLE
            section[head[1]] = np.array([float(next(it)) for _ in range(count)])
        elif head[0] == "VECTORS":
            section[head[1]] = np.array([[float(v) for v in next(it).split()] for _ in range(count)])
    return VtkData(points, cells, types, cell_data, point_data)


def write_summary(path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=False) + "\n")
