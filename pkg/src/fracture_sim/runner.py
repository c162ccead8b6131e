"""Scenario -> mesh/field -> engine -> files on disk."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from fracture_sim.analysis import first_peak
from fracture_sim.config import Scenario
from fracture_sim.engines import EngineResult, run_sla, run_ss
from fracture_sim.material import RandomField, constant_field, sample_field
from fracture_sim.mesh import Mesh, assign_patches, attach_strip, build_structured_mesh
from fracture_sim.output import fmt, write_load_displacement, write_summary, write_trace, write_vtk

log = logging.getLogger(__name__)


def build_mesh(s: Scenario) -> Mesh:
    g, st, r = s.geometry, s.strip, s.random
    mesh = build_structured_mesh(g.width, g.height, g.nx, g.ny, g.depth)
    mesh = attach_strip(mesh, st.width, st.thickness, st.eccentricity, st.rows)
    if abs(mesh.strip.width_snap) > 1e-12 or abs(mesh.strip.center_snap) > 1e-12:
        log.info(
            "strip snapped to grid: width off by %.3g m, centre off by %.3g m",
            mesh.strip.width_snap,
            mesh.strip.center_snap,
        )
    return assign_patches(mesh, r.patch_w, r.patch_h)


def build_field(s: Scenario, mesh: Mesh) -> RandomField:
    r = s.random
    if r.constant_E:
        return constant_field(mesh.patch_ids(), s.materials.E_avg)
    return sample_field(r.seed, mesh.patch_ids(), r.E_min, r.E_max)


def run_engine(s: Scenario) -> tuple[Mesh, EngineResult]:
    mesh = build_mesh(s)
    field = build_field(s, mesh)
    cfg = s.engine_config()
    if s.engine.type == "sla":
        return mesh, run_sla(mesh, field, s.materials, cfg)
    return mesh, run_ss(mesh, field, s.materials, s.step_function, cfg)


def summarize(s: Scenario, mesh: Mesh, result: EngineResult, seconds: float) -> dict:
    trace = result.trace
    cs = trace.column("contact_stress") if len(trace) else np.zeros(0)
    summary = {
        "scenario": s.to_dict(),
        "engine": result.engine,
        "seed": s.random.seed,
        "mesh": {
            "n_nodes": mesh.n_nodes,
            "n_elements": mesh.n_elements,
            "strip_x_left_m": mesh.strip.x_left,
            "strip_x_right_m": mesh.strip.x_right,
            "strip_width_snap_m": mesh.strip.width_snap,
            "strip_center_snap_m": mesh.strip.center_snap,
        },
        "steps_recorded": len(trace),
        "peak_load_N": None,
        "peak_contact_stress_Pa": None,
        "peak_step": None,
        "first_peak_step": None,
        "first_drop_step": None,
        "first_peak_contact_stress_Pa": None,
        "damaged_element_count": len(result.damaged),
        "termination": result.termination,
        "error": result.error,
        "wall_clock_seconds": round(seconds, 3),
    }
    if len(trace):
        peak = trace.peak()
        summary.update(
            peak_load_N=peak.load,
            peak_contact_stress_Pa=peak.contact_stress,
            peak_step=peak.step,
        )
        fp = first_peak(cs)
        if fp is not None:
            steps = trace.column("step")
            summary.update(
                first_peak_step=int(steps[fp.peak_index]),
                first_drop_step=int(steps[fp.drop_index]),
                first_peak_contact_stress_Pa=float(cs[fp.peak_index]),
            )
    return summary


def run_scenario(s: Scenario, out_dir=None) -> tuple[dict, int]:
    """Run one scenario, write all outputs and return (summary, exit status)."""
    out = Path(out_dir if out_dir is not None else s.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    mesh, result = run_engine(s)
    seconds = time.perf_counter() - t0

    write_load_displacement(out / "load_displacement.csv", result.trace)
    write_trace(out / "trace.csv", result.trace)
    written = set()
    for step, state in result.snapshots:
        write_vtk(out / f"fields_step_{step:04d}.vtk", mesh, state, f"{result.engine} step {step}")
        written.add(step)
    if result.final_state is not None and len(result.trace):
        last = result.trace.records[-1].step
        if last not in written:
            write_vtk(out / f"fields_step_{last:04d}.vtk", mesh, result.final_state, f"{result.engine} step {last}")
    summary = summarize(s, mesh, result, seconds)
    write_summary(out / "summary.json", summary)
    return summary, (0 if result.termination != "error" else 1)


def _ensemble_job(args):
    scenario, seed, out = args
    summary, status = run_scenario(scenario.with_seed(seed), out)
    return seed, summary, status


def worker_count() -> int:
    """Process cap from FRACTURE_SIM_THREADS; 0 or unset means serial."""
    raw = os.environ.get("FRACTURE_SIM_THREADS", "0")
    try:
        return max(0, int(raw))
    except ValueError:
        return 0


def run_ensemble(s: Scenario, seeds, out_dir) -> tuple[list[dict], int]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(s, seed, out / f"seed_{seed:04d}") for seed in seeds]
    n = worker_count()
    if n <= 1:
        results = [_ensemble_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_ensemble_job, jobs))
    results.sort(key=lambda r: r[0])

    header = "seed,termination,peak_contact_stress_Pa,first_peak_step,first_peak_contact_stress_Pa"
    lines = [header]
    for seed, summ, _ in results:
        fpc = summ["first_peak_contact_stress_Pa"]
        lines.append(
            ",".join(
                [
                    str(seed),
                    summ["termination"],
                    fmt(summ["peak_contact_stress_Pa"]) if summ["peak_contact_stress_Pa"] is not None else "",
                    str(summ["first_peak_step"]) if summ["first_peak_step"] is not None else "",
                    fmt(fpc) if fpc is not None else "",
                ]
            )
        )
    (out / "ensemble.csv").write_text("\n".join(lines) + "\n", newline="")
    status = 0 if all(st == 0 for _, _, st in results) else 1
    return [summ for _, summ, _ in results], status
