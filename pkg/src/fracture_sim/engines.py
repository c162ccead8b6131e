"""Fracture drivers: sequential linear analysis and the secant step-function model.

Both engines run under displacement control of the strip's top face and
record the load, the contact stress and the displacement of the block surface
under the two strip edges, all positive in the loading direction (downwards
for the default compression, upwards for ``direction="tension"``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from fracture_sim.errors import ConfigurationError, FractureSimError
from fracture_sim.fem import FieldState, Model
from fracture_sim.material import MaterialParams, RandomField, StepFunction, secant_modulus, strain_to_estar
from fracture_sim.mesh import CASI, RUBBER, BoundarySets, Mesh, boundary_sets

log = logging.getLogger(__name__)


DIRECTIONS = {"compression": -1.0, "tension": 1.0}


def _check_direction(direction: str) -> None:
    if direction not in DIRECTIONS:
        raise ConfigurationError(f"direction must be one of {sorted(DIRECTIONS)}, got {direction!r}")


@dataclass(frozen=True)
class SlaConfig:
    degrade_factor: float = 0.01
    max_steps: int = 100
    load_threshold: float = 0.1
    max_displacement: float = 0.01
    snapshot_every: int = 1
    direction: str = "compression"

    def __post_init__(self):
        _check_direction(self.direction)
        if not 0 < self.degrade_factor < 1:
            raise ConfigurationError("degrade_factor must lie in (0, 1)")
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be >= 1")
        if not 0 <= self.load_threshold < 1:
            raise ConfigurationError("load_threshold must lie in [0, 1)")
        if not self.max_displacement > 0:
            raise ConfigurationError("max_displacement must be positive")


@dataclass(frozen=True)
class SsConfig:
    n_steps: int = 1000
    max_prescribed_disp: float = 2e-3
    picard_tol: float = 1e-4
    picard_max_iter: int = 50
    relaxation: float = 0.5
    max_nonconverged: int = 5
    snapshot_every: int = 10
    direction: str = "compression"

    def __post_init__(self):
        _check_direction(self.direction)
        if self.n_steps < 1:
            raise ConfigurationError("n_steps must be >= 1")
        if not 0 < self.relaxation <= 1:
            raise ConfigurationError("relaxation must lie in (0, 1]")
        if not self.picard_tol > 0 or self.picard_max_iter < 1:
            raise ConfigurationError("picard_tol must be positive and picard_max_iter >= 1")
        if not self.max_prescribed_disp > 0:
            raise ConfigurationError("max_prescribed_disp must be positive")


@dataclass
class StepRecord:
    step: int
    prescribed_disp: float
    edge_left_disp: float
    edge_right_disp: float
    load: float
    contact_stress: float
    event: str = ""
    element: int = -1
    iterations: int = 0
    converged: bool = True
    # |sum of all support reactions| / sum of their magnitudes
    reaction_imbalance: float = 0.0


@dataclass
class Trace:
    records: list[StepRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def loads(self) -> np.ndarray:
        return self.column("load")

    def peak(self) -> StepRecord | None:
        if not self.records:
            return None
        return self.records[int(np.argmax(self.loads))]


@dataclass
class EngineResult:
    engine: str
    trace: Trace
    snapshots: list[tuple[int, FieldState]]
    E_ini: np.ndarray
    termination: str
    error: str | None = None
    # SLA: element ids in degradation order; SS: elements past damage onset
    damaged: list[int] = field(default_factory=list)
    final_state: FieldState | None = None


@dataclass
class Problem:
    """Everything an engine needs besides the material law."""

    mesh: Mesh
    bsets: BoundarySets
    model: Model
    E_ini: np.ndarray
    casi: np.ndarray
    edge_nodes: tuple[int, int]
    bearing_width: float
    sign: float = -1.0

    @classmethod
    def build(
        cls,
        mesh: Mesh,
        field: RandomField,
        params: MaterialParams,
        bsets: BoundarySets | None = None,
        direction: str = "compression",
    ):
        if bsets is None:
            bsets = boundary_sets(mesh)
        model = Model(mesh, {CASI: params.nu_casi, RUBBER: params.nu_rubber}, bsets)
        casi = mesh.region == CASI
        E_ini = field.element_E(mesh.patch, casi)
        E_ini[~casi] = params.E_rubber
        if mesh.strip is not None:
            edges, width = mesh.strip.edge_nodes, mesh.strip.width
        else:
            top = np.asarray(bsets.strip_top_nodes)
            xs = mesh.coords[top, 0]
            edges = (int(top[np.argmin(xs)]), int(top[np.argmax(xs)]))
            width = float(xs.max() - xs.min())
        return cls(mesh, bsets, model, E_ini, casi, edges, width, DIRECTIONS[direction])

    def measure(self, system, u) -> tuple[float, float, float, float]:
        """(load N, contact stress Pa, left edge m, right edge m), signed along the loading."""
        f = self.model.internal_force(system.E, u.ravel())
        loaded = self.model.loaded_dofs
        load = self.sign * float(f[loaded].sum())
        left, right = self.edge_nodes
        s = self.sign
        return load, load / (self.bearing_width * self.model.thickness), s * float(u[left, 1]), s * float(u[right, 1])

    def imbalance(self, system, u) -> float:
        f = self.model.internal_force(system.E, u.ravel()).reshape(-1, 2)
        fixed = self.model.fixed_dofs
        r = np.zeros(self.model.n_dofs)
        r[fixed] = f.ravel()[fixed]
        r = r.reshape(-1, 2)
        total = np.abs(r).sum()
        if total == 0:
            return 0.0
        return float(np.abs(r.sum(axis=0)).max() / total)


def critical_element(state: FieldState, eligible, tie_rtol: float = 1e-9) -> int | None:
    """Eligible element with the largest first principal stress, lowest id on ties.

    Values within ``tie_rtol`` of the maximum count as tied, so mirror-image
    elements of a symmetric model are not split by roundoff.
    Returns ``None`` when no eligible element is in tension.
    """
    eligible = np.asarray(eligible)
    idx = np.flatnonzero(eligible) if eligible.dtype == bool else np.sort(eligible.astype(int))
    if idx.size == 0:
        return None
    s = state.sp1[idx]
    top = s.max()
    if not top > 0:
        return None
    return int(idx[np.flatnonzero(s >= top * (1 - tie_rtol))[0]])


def run_sla(
    mesh: Mesh,
    field: RandomField,
    params: MaterialParams,
    config: SlaConfig = SlaConfig(),
    bsets: BoundarySets | None = None,
) -> EngineResult:
    """Degrade the most stressed element once per step.

    Each step solves under a unit downward strip displacement and scales the
    linear solution so that the critical element just reaches ``f_t``.
    """
    prob = Problem.build(mesh, field, params, bsets, config.direction)
    E = prob.E_ini.copy()
    degraded = np.zeros(mesh.n_elements, dtype=bool)
    trace = Trace()
    snapshots: list[tuple[int, FieldState]] = []
    order: list[int] = []
    termination = "max_steps"
    error = None
    peak = 0.0
    state = None

    for step in range(1, config.max_steps + 1):
        try:
            system = prob.model.assemble(E, prob.sign)
            u = prob.model.solve(system)
        except FractureSimError as exc:
            termination, error = "error", f"step {step}: {exc}"
            log.warning("SLA stopped: %s", error)
            break
        unit = prob.model.recover(u, E)
        crit = critical_element(unit, prob.casi & ~degraded)
        if crit is None:
            termination = "no_critical_element"
            break
        lam = params.f_t / unit.sp1[crit]
        load, cs, dl, dr = prob.measure(system, u)
        rec = StepRecord(
            step=step,
            prescribed_disp=lam,
            edge_left_disp=lam * dl,
            edge_right_disp=lam * dr,
            load=lam * load,
            contact_stress=lam * cs,
            event="degraded",
            element=crit,
            iterations=1,
            reaction_imbalance=prob.imbalance(system, u),
        )
        trace.records.append(rec)
        state = _scaled(unit, lam)
        if step % config.snapshot_every == 0:
            snapshots.append((step, state))

        E[crit] = config.degrade_factor * prob.E_ini[crit]
        degraded[crit] = True
        order.append(crit)
        peak = max(peak, rec.load)

        if rec.load < config.load_threshold * peak:
            termination = "load_threshold"
            break
        if rec.prescribed_disp > config.max_displacement:
            termination = "max_displacement"
            break

    if state is not None:
        state.E_current = E.copy()
    return EngineResult("sla", trace, snapshots, prob.E_ini, termination, error, order, state)


def _scaled(state: FieldState, lam: float) -> FieldState:
    return FieldState(
        u=state.u * lam,
        strain=state.strain * lam,
        stress=state.stress * lam,
        ep1=state.ep1 * lam,
        sp1=state.sp1 * lam,
        E_current=state.E_current.copy(),
    )


def run_ss(
    mesh: Mesh,
    field: RandomField,
    params: MaterialParams,
    sf: StepFunction = StepFunction(),
    config: SsConfig = SsConfig(),
    bsets: BoundarySets | None = None,
) -> EngineResult:
    """Ramp the strip displacement, updating each element's secant modulus.

    Within a step the moduli are found by damped fixed-point iteration on
    E -> secant(max(history, e*(E))).  The damage history (largest e* seen)
    is committed only once a step ends, so trial iterates never lock damage in.
    """
    prob = Problem.build(mesh, field, params, bsets, config.direction)
    casi = prob.casi
    E_ini_casi = prob.E_ini[casi]
    kappa = np.zeros(casi.sum())
    E = prob.E_ini.copy()
    E[casi] = secant_modulus(E_ini_casi, 0.0, sf, params)

    trace = Trace()
    snapshots: list[tuple[int, FieldState]] = []
    trace.records.append(StepRecord(0, 0.0, 0.0, 0.0, 0.0, 0.0, event="start"))
    termination = "n_steps"
    error = None
    nonconv_run = 0
    state = None

    for step in range(1, config.n_steps + 1):
        delta = step / config.n_steps * config.max_prescribed_disp
        E_iter = E.copy()
        k_trial = kappa
        best = None
        converged = False
        try:
            for it in range(1, config.picard_max_iter + 1):
                system = prob.model.assemble(E_iter, prob.sign * delta)
                u = prob.model.solve(system)
                fs = prob.model.recover(u, E_iter)
                if not (np.all(np.isfinite(u)) and np.all(np.isfinite(fs.ep1))):
                    raise FloatingPointError("non-finite field values")
                k_trial = np.maximum(k_trial, strain_to_estar(fs.ep1[casi], params))
                E_target = secant_modulus(E_ini_casi, k_trial / params.estar_scale, sf, params)
                change = float(np.max(np.abs(E_target - E_iter[casi]) / E_iter[casi]))
                current = (change, system, u, fs, k_trial, E_target)
                if best is None or change < best[0]:
                    best = current
                if change <= config.picard_tol:
                    converged = True
                    break
                E_iter[casi] = (1 - config.relaxation) * E_iter[casi] + config.relaxation * E_target
        except (FractureSimError, FloatingPointError) as exc:
            termination, error = "error", f"step {step}: {exc}"
            log.warning("SS stopped: %s", error)
            break

        # a non-converged step continues from its best iterate
        change, system, u, fs, k_trial, E_target = current if converged else best
        nonconv_run = 0 if converged else nonconv_run + 1

        kappa = k_trial
        E[casi] = E_target
        load, cs, dl, dr = prob.measure(system, u)
        trace.records.append(
            StepRecord(
                step=step,
                prescribed_disp=delta,
                edge_left_disp=dl,
                edge_right_disp=dr,
                load=load,
                contact_stress=cs,
                event="converged" if converged else "not_converged",
                iterations=it,
                converged=converged,
                reaction_imbalance=prob.imbalance(system, u),
            )
        )
        state = fs
        if step % config.snapshot_every == 0:
            snapshots.append((step, _with_E(fs, E)))
        if nonconv_run >= config.max_nonconverged:
            termination = "instability"
            break

    onset = sf.e_star[np.argmax(sf.E_star < 1.0) - 1] if np.any(sf.E_star < 1.0) else np.inf
    damaged = np.flatnonzero(casi)[kappa > onset].tolist()
    final = _with_E(state, E) if state is not None else None
    return EngineResult("ss", trace, snapshots, prob.E_ini, termination, error, damaged, final)


def _with_E(state: FieldState, E: np.ndarray) -> FieldState:
    return FieldState(state.u, state.strain, state.stress, state.ep1, state.sp1, E.copy())
