"""Run the bundled SLA scenario and report where the degraded elements sit.

    python scripts/run_paper_sla.py [--out out/paper_sla]
"""

import argparse

import numpy as np

from fracture_sim.analysis import crack_band
from fracture_sim.config import bundled_scenario, load_scenario
from fracture_sim.runner import build_mesh, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/paper_sla")
    args = ap.parse_args()

    s = load_scenario(bundled_scenario("paper_sla.json"))
    summary, _ = run_scenario(s, args.out)
    mesh = build_mesh(s)

    import json
    from pathlib import Path

    from fracture_sim.output import read_csv

    trace = read_csv(Path(args.out) / "trace.csv")
    damaged = trace["element"].astype(int)
    cb = crack_band(mesh, damaged)
    x = mesh.centroids()[damaged, 0]
    cols, counts = np.unique(np.round(x * 1000, 1), return_counts=True)

    print(json.dumps({k: summary[k] for k in ("peak_load_N", "peak_contact_stress_Pa", "termination")}, indent=2))
    print(f"strip spans x = [{mesh.strip.x_left:.4f}, {mesh.strip.x_right:.4f}] m")
    print(f"within 20 mm of an edge: {100 * cb.near_edge_fraction:.0f}%; band extent {cb.vertical_extent:.3f} m")
    print("degraded elements per column (x in mm):")
    for c, n in zip(cols, counts):
        print(f"  {c:7.1f}  {'#' * n}")


if __name__ == "__main__":
    main()
