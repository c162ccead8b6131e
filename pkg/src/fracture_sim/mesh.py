"""Structured quadrilateral meshes of the block, the rubber strip and the patch map.

Node ``(i, j)`` of the block grid has id ``j * (nx + 1) + i``; strip nodes are
appended after the block nodes, row by row.  Elements are counter-clockwise
4-node quads.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from fracture_sim.errors import ConfigurationError

CASI = 0
RUBBER = 1
REGION_NAMES = {CASI: "casi", RUBBER: "rubber"}

# reserved patch index for rubber (and not-yet-patched) elements
RUBBER_PATCH = (-1, -1)


@dataclass(frozen=True)
class Strip:
    x_left: float
    x_right: float
    thickness: float
    rows: int
    n_cols: int
    col0: int
    # requested minus realised geometry, recorded when the strip is snapped to grid columns
    width_snap: float
    center_snap: float
    top_nodes: np.ndarray
    # block-top nodes under the strip's left and right edge
    edge_nodes: tuple[int, int]

    @property
    def width(self) -> float:
        return self.x_right - self.x_left

    @property
    def center(self) -> float:
        return 0.5 * (self.x_left + self.x_right)


@dataclass(frozen=True)
class Mesh:
    coords: np.ndarray
    elements: np.ndarray
    region: np.ndarray
    patch: np.ndarray
    width: float
    height: float
    nx: int
    ny: int
    depth: float
    strip: Strip | None = None

    @property
    def hx(self) -> float:
        return self.width / self.nx

    @property
    def hy(self) -> float:
        return self.height / self.ny

    @property
    def n_nodes(self) -> int:
        return len(self.coords)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_dofs(self) -> int:
        return 2 * len(self.coords)

    def centroids(self) -> np.ndarray:
        return self.coords[self.elements].mean(axis=1)

    def element_areas(self) -> np.ndarray:
        # shoelace formula, exact for straight-sided quads
        xy = self.coords[self.elements]
        x, y = xy[..., 0], xy[..., 1]
        return 0.5 * np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)

    def casi_elements(self) -> np.ndarray:
        return np.flatnonzero(self.region == CASI)

    def patch_ids(self) -> list[tuple[int, int]]:
        """Distinct patch indices of casi elements in row-major (lexicographic) order."""
        p = self.patch[self.region == CASI]
        return sorted({(int(a), int(b)) for a, b in p})


@dataclass(frozen=True)
class BoundarySets:
    bottom_nodes: np.ndarray
    pin_node: int
    strip_top_nodes: np.ndarray
    # extra nodes with horizontal displacement fixed (roller sides); empty for the strip problem
    side_nodes: np.ndarray = dataclasses.field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def build_structured_mesh(width: float, height: float, nx: int, ny: int, depth: float) -> Mesh:
    if not (width > 0 and height > 0 and depth > 0):
        raise ConfigurationError(f"dimensions must be positive, got W={width}, H={height}, depth={depth}")
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ConfigurationError(f"subdivisions must be integers >= 1, got nx={nx}, ny={ny}")
    nx, ny = int(nx), int(ny)

    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    coords = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    n0 = (j * (nx + 1) + i).ravel()
    elements = np.column_stack([n0, n0 + 1, n0 + nx + 2, n0 + nx + 1])

    m = nx * ny
    return Mesh(
        coords=coords,
        elements=elements,
        region=np.full(m, CASI, dtype=np.int8),
        patch=np.tile(np.array(RUBBER_PATCH), (m, 1)),
        width=float(width),
        height=float(height),
        nx=nx,
        ny=ny,
        depth=float(depth),
    )


def attach_strip(
    mesh: Mesh,
    strip_width: float,
    strip_thickness: float,
    eccentricity: float,
    strip_rows: int = 1,
) -> Mesh:
    """Stack ``strip_rows`` rows of rubber elements on the top edge.

    The strip is centred at ``W/2 + eccentricity`` and snapped to whole grid
    columns; the snap in width and in centre position is stored on the result.
    Strip and block share the nodes along the contact face (bonded interface).
    """
    if mesh.strip is not None:
        raise ConfigurationError("mesh already carries a strip")
    if strip_width <= 0 or strip_thickness <= 0 or strip_rows < 1:
        raise ConfigurationError("strip width, thickness and rows must be positive")
    W, hx = mesh.width, mesh.hx
    if abs(eccentricity) + strip_width / 2 > W / 2 * (1 + 1e-12):
        raise ConfigurationError(
            f"strip of width {strip_width} at eccentricity {eccentricity} extends beyond the top edge"
        )

    n_cols = max(1, int(round(strip_width / hx)))
    center = W / 2 + eccentricity
    col0 = int(round((center - 0.5 * n_cols * hx) / hx + 1e-9))
    col0 = min(max(col0, 0), mesh.nx - n_cols)
    x_left, x_right = col0 * hx, (col0 + n_cols) * hx

    nx, ny = mesh.nx, mesh.ny
    top_row = ny * (nx + 1) + col0 + np.arange(n_cols + 1)
    layers = [top_row]
    new_coords = []
    next_id = mesh.n_nodes
    dy = strip_thickness / strip_rows
    for r in range(1, strip_rows + 1):
        ids = next_id + np.arange(n_cols + 1)
        next_id += n_cols + 1
        xs = mesh.coords[top_row, 0]
        new_coords.append(np.column_stack([xs, np.full(n_cols + 1, mesh.height + r * dy)]))
        layers.append(ids)

    new_elems = []
    for lo, hi in zip(layers[:-1], layers[1:]):
        for c in range(n_cols):
            new_elems.append([lo[c], lo[c + 1], hi[c + 1], hi[c]])
    new_elems = np.asarray(new_elems, dtype=mesh.elements.dtype)

    strip = Strip(
        x_left=float(x_left),
        x_right=float(x_right),
        thickness=float(strip_thickness),
        rows=int(strip_rows),
        n_cols=n_cols,
        col0=col0,
        width_snap=float(strip_width - n_cols * hx),
        center_snap=float(center - 0.5 * (x_left + x_right)),
        top_nodes=layers[-1].copy(),
        edge_nodes=(int(top_row[0]), int(top_row[-1])),
    )
    k = len(new_elems)
    return dataclasses.replace(
        mesh,
        coords=np.vstack([mesh.coords, *new_coords]),
        elements=np.vstack([mesh.elements, new_elems]),
        region=np.concatenate([mesh.region, np.full(k, RUBBER, dtype=np.int8)]),
        patch=np.vstack([mesh.patch, np.tile(np.array(RUBBER_PATCH), (k, 1))]),
        strip=strip,
    )


def assign_patches(mesh: Mesh, patch_w: float, patch_h: float) -> Mesh:
    if patch_w <= 0 or patch_h <= 0:
        raise ConfigurationError("patch sizes must be positive")
    c = mesh.centroids()
    patch = np.tile(np.array(RUBBER_PATCH), (mesh.n_elements, 1))
    casi = mesh.region == CASI
    patch[casi, 0] = np.floor(c[casi, 0] / patch_w).astype(int)
    patch[casi, 1] = np.floor(c[casi, 1] / patch_h).astype(int)
    return dataclasses.replace(mesh, patch=patch)


def boundary_sets(mesh: Mesh) -> BoundarySets:
    if mesh.strip is None:
        raise ConfigurationError("boundary sets need a mesh with an attached strip")
    bottom = np.flatnonzero(np.abs(mesh.coords[:, 1]) <= 1e-12 * mesh.height)
    # stable sort on distance keeps the lower-x node on ties
    dist = np.abs(mesh.coords[bottom, 0] - mesh.strip.center)
    order = np.lexsort((mesh.coords[bottom, 0], np.round(dist / mesh.hx, 9)))
    return BoundarySets(
        bottom_nodes=bottom,
        pin_node=int(bottom[order[0]]),
        strip_top_nodes=mesh.strip.top_nodes.copy(),
    )


def edge_map(mesh: Mesh) -> dict[tuple[int, int], int]:
    """Count how many elements share each (undirected) edge."""
    counts: dict[tuple[int, int], int] = {}
    for quad in mesh.elements:
        for a, b in zip(quad, np.roll(quad, -1)):
            key = (int(min(a, b)), int(max(a, b)))
            counts[key] = counts.get(key, 0) + 1
    return counts


def patch_count_bound(width: float, height: float, patch_w: float, patch_h: float) -> int:
    return math.ceil(width / patch_w - 1e-12) * math.ceil(height / patch_h - 1e-12)
