"""Step-function softening law, random initial stiffness and the secant modulus."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from fracture_sim.errors import ConfigurationError, InputError

# (e*, E*) breakpoints of the normalised stiffness curve; e* = 6000 * strain
STEP_BREAKPOINTS: tuple[tuple[float, float], ...] = (
    (0.0, 1.000),
    (2.0, 1.000),
    (2.2, 0.960),
    (2.3, 0.850),
    (2.4, 0.500),
    (2.5, 0.200),
    (2.6, 0.100),
    (2.8, 0.050),
    (5.0, 0.028),
)

# (strain m/m, stress MPa) columns of the same table, as printed
STEP_STRAIN_STRESS: tuple[tuple[float, float], ...] = (
    (0.000e-3, 0.000),
    (0.333e-3, 2.000),
    (0.367e-3, 2.112),
    (0.383e-3, 1.955),
    (0.400e-3, 1.200),
    (0.417e-3, 0.500),
    (0.433e-3, 0.260),
    (0.467e-3, 0.140),
    (0.833e-3, 0.140),
)


@dataclass(frozen=True)
class StepFunction:
    """Clamped piecewise-linear curve E*(e*)."""

    breakpoints: tuple[tuple[float, float], ...] = STEP_BREAKPOINTS

    def __post_init__(self):
        bp = tuple((float(a), float(b)) for a, b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        if len(bp) < 2:
            raise ConfigurationError("step function needs at least two breakpoints")
        e = np.array([p[0] for p in bp])
        E = np.array([p[1] for p in bp])
        if np.any(np.diff(e) <= 0):
            raise ConfigurationError("step function e* values must be strictly increasing")
        if np.any(E <= 0) or np.any(E > 1):
            raise ConfigurationError("step function E* values must lie in (0, 1]")
        if E[0] != 1.0:
            raise ConfigurationError("step function must start at E* = 1")
        if np.any(np.diff(E) > 0):
            raise ConfigurationError("step function must be non-increasing")

    @property
    def e_star(self) -> np.ndarray:
        return np.array([p[0] for p in self.breakpoints])

    @property
    def E_star(self) -> np.ndarray:
        return np.array([p[1] for p in self.breakpoints])

    @property
    def residual(self) -> float:
        return self.breakpoints[-1][1]

    def __call__(self, e_star):
        return eval_step(self, e_star)


@dataclass(frozen=True)
class MaterialParams:
    E_avg: float = 6000e6
    f_t: float = 2.0e6
    nu_casi: float = 0.2
    E_rubber: float = 1000e6
    nu_rubber: float = 0.45
    E_floor: float = 1e7
    estar_scale: float = 6000.0

    def __post_init__(self):
        for name in ("nu_casi", "nu_rubber"):
            nu = getattr(self, name)
            if not 0 <= nu < 0.5:
                raise ConfigurationError(f"{name} must lie in [0, 0.5), got {nu}")
        for name in ("E_avg", "E_rubber", "f_t", "estar_scale"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.E_floor < 0:
            raise ConfigurationError("E_floor must be non-negative")


@dataclass(frozen=True)
class RandomField:
    seed: int
    E_min: float
    E_max: float
    patch_E: dict = field(default_factory=dict)

    def element_E(self, patch: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
        """Per-element initial modulus; elements outside ``mask`` get NaN."""
        out = np.full(len(patch), np.nan)
        idx = range(len(patch)) if mask is None else np.flatnonzero(mask)
        for e in idx:
            out[e] = self.patch_E[(int(patch[e, 0]), int(patch[e, 1]))]
        return out


def eval_step(sf: StepFunction, e_star):
    e = np.asarray(e_star, dtype=float)
    if np.any(e < 0) or np.any(~np.isfinite(e)):
        raise InputError("e* must be finite and non-negative")
    # np.interp clamps to the end values outside the breakpoint range
    out = np.interp(e, sf.e_star, sf.E_star)
    return float(out) if out.ndim == 0 else out


def strain_to_estar(ep1, params: MaterialParams):
    """Scaled strain; compression does not damage, so negative strain maps to 0."""
    out = params.estar_scale * np.maximum(np.asarray(ep1, dtype=float), 0.0)
    return float(out) if out.ndim == 0 else out


def sample_field(
    seed: int,
    patches: Iterable[tuple[int, int]],
    E_min: float,
    E_max: float,
) -> RandomField:
    """Draw one uniform modulus per patch.

    Uses numpy's PCG64 bit generator seeded with ``seed``; patches are visited
    in sorted (row-major) order so the mapping does not depend on how the
    caller enumerated them.
    """
    ordered = sorted({(int(a), int(b)) for a, b in patches})
    if not ordered:
        raise ConfigurationError("cannot sample a field over an empty patch set")
    if E_min > E_max or E_min <= 0:
        raise ConfigurationError(f"need 0 < E_min <= E_max, got [{E_min}, {E_max}]")
    rng = np.random.Generator(np.random.PCG64(seed))
    values = rng.uniform(E_min, E_max, size=len(ordered))
    if E_min == E_max:
        values[:] = E_min
    return RandomField(
        seed=int(seed),
        E_min=float(E_min),
        E_max=float(E_max),
        patch_E={p: float(v) for p, v in zip(ordered, values)},
    )


def constant_field(patches: Sequence[tuple[int, int]], E: float) -> RandomField:
    return sample_field(0, patches, E, E)


def secant_modulus(patch_E, ep1, sf: StepFunction, params: MaterialParams):
    """E = E_floor + E*(e*) * E_ini, with e* taken from the principal strain."""
    out = params.E_floor + np.asarray(eval_step(sf, strain_to_estar(ep1, params))) * np.asarray(patch_E, dtype=float)
    return float(out) if out.ndim == 0 else out
