"""Sensitivity of the SLA crack position to mesh density and strip rows.

    python scripts/sla_mesh_study.py

Prints, per variant, the share of the 100 degraded elements lying within
20 mm of a strip edge and the columns that collect most of them.
"""

import dataclasses

import numpy as np

from fracture_sim.analysis import crack_band
from fracture_sim.config import bundled_scenario, load_scenario
from fracture_sim.runner import run_engine

VARIANTS = [(20, 30, 1), (40, 30, 1), (40, 60, 1), (80, 60, 1), (20, 30, 2), (40, 30, 2)]


def main():
    base = load_scenario(bundled_scenario("paper_sla.json"))
    print(f"{'nx':>3} {'ny':>3} {'rows':>4} {'strip [mm]':>14} {'near edge':>9} {'extent m':>8}  busiest columns (x mm: count)")
    for nx, ny, rows in VARIANTS:
        s = dataclasses.replace(
            base,
            geometry=dataclasses.replace(base.geometry, nx=nx, ny=ny),
            strip=dataclasses.replace(base.strip, rows=rows),
        )
        mesh, r = run_engine(s)
        cb = crack_band(mesh, r.damaged)
        x = np.round(mesh.centroids()[r.damaged, 0] * 1000, 1)
        cols, counts = np.unique(x, return_counts=True)
        top = sorted(zip(counts, cols), reverse=True)[:3]
        span = f"{mesh.strip.x_left * 1000:.1f}-{mesh.strip.x_right * 1000:.1f}"
        busiest = ", ".join(f"{c}: {n}" for n, c in top)
        print(f"{nx:>3} {ny:>3} {rows:>4} {span:>14} {cb.near_edge_fraction:9.2f} {cb.vertical_extent:8.3f}  {busiest}")


if __name__ == "__main__":
    main()
