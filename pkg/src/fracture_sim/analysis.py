"""Post-processing of load traces and crack maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fracture_sim.mesh import Mesh


@dataclass(frozen=True)
class FirstPeak:
    peak_index: int
    drop_index: int
    peak_value: float
    drop_fraction: float
    # the post-drop minimum is later exceeded by at least ``resume`` (relative)
    resumed: bool


def first_peak(values, drop: float = 0.05, resume: float = 0.05) -> FirstPeak | None:
    """First local maximum followed by a fall of at least ``drop`` below it.

    Returns None if the series never drops that far below its running maximum.
    """
    v = np.asarray(values, dtype=float)
    best, ib = -np.inf, -1
    for k, x in enumerate(v):
        if x > best:
            best, ib = x, k
        elif x <= (1 - drop) * best:
            tail = v[k:]
            j = int(np.argmin(tail[: _next_rise(tail)])) + k
            resumed = bool(v[j:].max() >= (1 + resume) * v[j]) if v[j] > 0 else bool(v[j:].max() > 0)
            return FirstPeak(ib, k, float(best), float(1 - x / best), resumed)
    return None


def _next_rise(tail: np.ndarray) -> int:
    # length of the initial non-increasing run of the post-drop series
    d = np.diff(tail)
    up = np.flatnonzero(d > 0)
    return int(up[0]) + 1 if up.size else len(tail)


@dataclass(frozen=True)
class CrackBand:
    near_edge_fraction: float
    vertical_extent: float
    # x of the strip edge that collects most degraded elements
    edge_x: float


def crack_band(mesh: Mesh, elements, half_width: float = 0.02) -> CrackBand:
    """How strongly degraded elements line up under a strip edge.

    ``near_edge_fraction`` counts elements whose centroid lies within
    ``half_width`` of either strip edge; the vertical extent is measured over
    the elements near the dominant edge.
    """
    elements = np.asarray(elements, dtype=int)
    if elements.size == 0 or mesh.strip is None:
        return CrackBand(0.0, 0.0, float("nan"))
    c = mesh.centroids()[elements]
    edges = np.array([mesh.strip.x_left, mesh.strip.x_right])
    dist = np.abs(c[:, 0, None] - edges[None, :])
    near = dist.min(axis=1) <= half_width + 1e-12
    which = np.argmin(dist, axis=1)
    counts = [np.sum(near & (which == k)) for k in range(2)]
    k = int(np.argmax(counts))
    sel = near & (which == k)
    if not sel.any():
        return CrackBand(float(near.mean()), 0.0, float(edges[k]))
    ys = c[sel, 1]
    extent = float(ys.max() - ys.min() + mesh.hy)
    return CrackBand(float(near.mean()), extent, float(edges[k]))
