"""First-peak statistics of the SS scenario over a range of seeds.

    python scripts/ss_ensemble.py --seeds 0..9 [--out out/ss_ensemble] [--nx 40 --ny 30]

Each seed's full output lands in its own subdirectory; the table printed at
the end lists first peak, drop and recovery per seed.
"""

import argparse
import dataclasses
from pathlib import Path

import numpy as np

from fracture_sim.analysis import first_peak
from fracture_sim.cli import _parse_seeds
from fracture_sim.config import bundled_scenario, load_scenario
from fracture_sim.output import read_csv
from fracture_sim.runner import run_ensemble


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=_parse_seeds, default=list(range(10)))
    ap.add_argument("--out", default="out/ss_ensemble")
    ap.add_argument("--nx", type=int)
    ap.add_argument("--ny", type=int)
    args = ap.parse_args()

    s = load_scenario(bundled_scenario("paper_ss.json"))
    if args.nx or args.ny:
        g = dataclasses.replace(s.geometry, nx=args.nx or s.geometry.nx, ny=args.ny or s.geometry.ny)
        s = dataclasses.replace(s, geometry=g)
    summaries, _ = run_ensemble(s, args.seeds, args.out)

    print(f"{'seed':>4} {'first peak Pa':>14} {'step':>5} {'drop':>6} {'recovery':>9} {'steps':>6}  termination")
    peaks = []
    for summ in summaries:
        seed = summ["seed"]
        cs = read_csv(Path(args.out) / f"seed_{seed:04d}" / "load_displacement.csv")["contact_stress_Pa"]
        fp = first_peak(cs)
        if fp is None:
            print(f"{seed:>4} {'no drop':>14}")
            continue
        low = fp.drop_index + int(np.argmin(cs[fp.drop_index :]))
        recovery = cs[low:].max() / cs[low] if cs[low] > 0 else float("inf")
        peaks.append(fp.peak_value)
        print(
            f"{seed:>4} {fp.peak_value:14.4e} {fp.peak_index:5d} {fp.drop_fraction:6.2f} {recovery:9.2f} "
            f"{len(cs) - 1:6d}  {summ['termination']}"
        )
    if peaks:
        print(f"median first peak {np.median(peaks):.4e} Pa over {len(peaks)} runs")


if __name__ == "__main__":
    main()
