"""Plane-strain bilinear quad kernel: stiffness, assembly, solve, recovery.

Element stiffness scales linearly with Young's modulus at fixed Poisson's
ratio, so unit-modulus element matrices are computed once per mesh and every
later assembly is a weighted scatter of them.  The reduced (free-dof) system
is reordered with reverse Cuthill-McKee and factorised as a banded Cholesky.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from fracture_sim.errors import JacobianError, SingularMaterialError, SingularSystemError, SolverError
from fracture_sim.mesh import BoundarySets, Mesh

_G = 1.0 / np.sqrt(3.0)
GAUSS_2x2 = np.array([[-_G, -_G], [_G, -_G], [_G, _G], [-_G, _G]])
GAUSS_W = np.ones(4)


def plane_strain_C(E: float, nu: float) -> np.ndarray:
    if not E > 0:
        raise SingularMaterialError(f"Young's modulus must be positive, got {E}")
    if not 0 <= nu < 0.5:
        raise SingularMaterialError(f"Poisson's ratio must lie in [0, 0.5), got {nu}")
    f = E / ((1 + nu) * (1 - 2 * nu))
    return f * np.array(
        [
            [1 - nu, nu, 0.0],
            [nu, 1 - nu, 0.0],
            [0.0, 0.0, (1 - 2 * nu) / 2],
        ]
    )


def _dN_dxi(xi: float, eta: float) -> np.ndarray:
    return 0.25 * np.array(
        [
            [-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)],
            [-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)],
        ]
    )


def _B_batch(xy: np.ndarray, xi: float, eta: float) -> tuple[np.ndarray, np.ndarray]:
    """Strain-displacement matrices (m, 3, 8) and Jacobian determinants (m,)."""
    dN = _dN_dxi(xi, eta)
    J = np.einsum("ak,mkd->mad", dN, xy)
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    if np.any(det <= 0):
        bad = np.flatnonzero(det <= 0)
        raise JacobianError(f"non-positive Jacobian in element(s) {bad[:10].tolist()}")
    inv = np.empty_like(J)
    inv[:, 0, 0] = J[:, 1, 1] / det
    inv[:, 1, 1] = J[:, 0, 0] / det
    inv[:, 0, 1] = -J[:, 0, 1] / det
    inv[:, 1, 0] = -J[:, 1, 0] / det
    dNx = np.einsum("mda,ak->mdk", inv, dN)
    B = np.zeros((len(xy), 3, 8))
    B[:, 0, 0::2] = dNx[:, 0]
    B[:, 1, 1::2] = dNx[:, 1]
    B[:, 2, 0::2] = dNx[:, 1]
    B[:, 2, 1::2] = dNx[:, 0]
    return B, det


def _stiffness_batch(xy: np.ndarray, C: np.ndarray, thickness: float) -> np.ndarray:
    k = np.zeros((len(xy), 8, 8))
    for (xi, eta), w in zip(GAUSS_2x2, GAUSS_W):
        B, det = _B_batch(xy, xi, eta)
        k += np.einsum("mia,mij,mjb->mab", B, C, B) * (w * det * thickness)[:, None, None]
    return k


def element_stiffness(xy, C, thickness: float) -> np.ndarray:
    """8x8 stiffness of one quad, dofs ordered (u0, v0, u1, v1, ...)."""
    xy = np.asarray(xy, dtype=float).reshape(1, 4, 2)
    return _stiffness_batch(xy, np.asarray(C)[None], thickness)[0]


def principal_max(voigt: np.ndarray, engineering_shear: bool = False) -> np.ndarray:
    """Largest principal value of 2D symmetric tensors given as (xx, yy, xy) rows."""
    v = np.atleast_2d(voigt)
    xy = v[:, 2] / 2 if engineering_shear else v[:, 2]
    c = 0.5 * (v[:, 0] + v[:, 1])
    r = np.hypot(0.5 * (v[:, 0] - v[:, 1]), xy)
    out = c + r
    return out if np.ndim(voigt) > 1 else out[0]


@dataclass
class FieldState:
    u: np.ndarray  # (n_nodes, 2)
    strain: np.ndarray  # (m, 3) with engineering shear strain
    stress: np.ndarray  # (m, 3)
    ep1: np.ndarray
    sp1: np.ndarray
    E_current: np.ndarray


@dataclass
class GlobalSystem:
    model: "Model"
    E: np.ndarray
    band: np.ndarray  # upper banded storage of the permuted reduced stiffness
    rhs: np.ndarray  # reduced right-hand side
    u_constrained: np.ndarray  # full dof vector holding only the prescribed values
    _K: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def constraints(self) -> list[tuple[int, float]]:
        dofs = self.model.fixed_dofs
        return list(zip(dofs.tolist(), self.u_constrained[dofs].tolist()))

    @property
    def K(self) -> sp.csr_matrix:
        if self._K is None:
            self._K = self.model.global_stiffness(self.E)
        return self._K

    @property
    def K_reduced(self) -> sp.csr_matrix:
        f = self.model.free_dofs
        return self.K[f][:, f]


class Model:
    """Mesh plus boundary conditions with all geometry-only work precomputed."""

    def __init__(self, mesh: Mesh, nu_per_region: dict, bsets: BoundarySets, thickness: float | None = None):
        self.mesh = mesh
        self.bsets = bsets
        self.thickness = mesh.depth if thickness is None else float(thickness)
        m = mesh.n_elements
        self.nu = np.array([nu_per_region[int(r)] for r in mesh.region], dtype=float)
        self.C_unit = np.stack([plane_strain_C(1.0, nu) for nu in self.nu]) if m else np.zeros((0, 3, 3))
        xy = mesh.coords[mesh.elements]
        self.k_unit = _stiffness_batch(xy, self.C_unit, self.thickness)
        self.B_centroid, _ = _B_batch(xy, 0.0, 0.0)

        dofs = np.empty((m, 8), dtype=np.int64)
        dofs[:, 0::2] = 2 * mesh.elements
        dofs[:, 1::2] = 2 * mesh.elements + 1
        self.elem_dofs = dofs
        self.n_dofs = mesh.n_dofs

        # constraints: bottom v = 0, pin u = 0, side u = 0, loaded nodes v = prescribed
        fixed_zero = np.concatenate(
            [2 * np.asarray(bsets.bottom_nodes) + 1, [2 * bsets.pin_node], 2 * np.asarray(bsets.side_nodes, dtype=np.int64)]
        )
        loaded = 2 * np.asarray(bsets.strip_top_nodes) + 1
        if np.intersect1d(fixed_zero, loaded).size:
            raise SingularSystemError("loaded dofs overlap the fixed support dofs")
        self.fixed_dofs = np.unique(np.concatenate([fixed_zero, loaded])).astype(np.int64)
        self.loaded_dofs = np.sort(loaded).astype(np.int64)
        is_free = np.ones(self.n_dofs, dtype=bool)
        is_free[self.fixed_dofs] = False
        self.free_dofs = np.flatnonzero(is_free)
        nf = len(self.free_dofs)
        red = np.full(self.n_dofs, -1, dtype=np.int64)
        red[self.free_dofs] = np.arange(nf)

        # sparsity of the reduced matrix -> RCM ordering -> band layout
        rows = np.repeat(dofs, 8, axis=1).ravel()
        cols = np.tile(dofs, (1, 8)).ravel()
        rr, cc = red[rows], red[cols]
        both = (rr >= 0) & (cc >= 0)
        pattern = sp.coo_matrix((np.ones(both.sum()), (rr[both], cc[both])), shape=(nf, nf)).tocsr()
        if nf:
            perm = np.asarray(reverse_cuthill_mckee(pattern, symmetric_mode=True), dtype=np.int64)
        else:
            perm = np.zeros(0, dtype=np.int64)
        iperm = np.empty(nf, dtype=np.int64)
        iperm[perm] = np.arange(nf)
        pr, pc = iperm[rr[both]], iperm[cc[both]]
        upper = pr <= pc
        self.bandwidth = int(np.max(pc[upper] - pr[upper])) if upper.any() else 0
        self.perm = perm
        self._entry_mask = np.flatnonzero(both)[upper]
        self._band_index = (self.bandwidth + pr[upper] - pc[upper]) * nf + pc[upper]
        self._n_free = nf
        self._rows, self._cols = rows, cols

    # -- assembly -------------------------------------------------------------

    def _weighted_values(self, E: np.ndarray) -> np.ndarray:
        return (self.k_unit * E[:, None, None]).ravel()

    def global_stiffness(self, E) -> sp.csr_matrix:
        E = np.asarray(E, dtype=float)
        n = self.n_dofs
        return sp.coo_matrix((self._weighted_values(E), (self._rows, self._cols)), shape=(n, n)).tocsr()

    def internal_force(self, E, u) -> np.ndarray:
        """K(E) u evaluated element by element, shape (n_dofs,)."""
        ue = np.asarray(u).ravel()[self.elem_dofs]
        fe = np.einsum("mab,mb->ma", self.k_unit, ue) * np.asarray(E)[:, None]
        return np.bincount(self.elem_dofs.ravel(), weights=fe.ravel(), minlength=self.n_dofs)

    def assemble(self, E, prescribed_disp: float) -> GlobalSystem:
        E = np.asarray(E, dtype=float)
        if E.shape != (self.mesh.n_elements,):
            raise ValueError("one modulus per element required")
        if not np.all(E > 0):
            raise SingularMaterialError("all element moduli must be positive")
        nf, b = self._n_free, self.bandwidth
        vals = self._weighted_values(E)[self._entry_mask]
        band = np.bincount(self._band_index, weights=vals, minlength=(b + 1) * nf).reshape(b + 1, nf)
        uc = np.zeros(self.n_dofs)
        uc[self.loaded_dofs] = prescribed_disp
        rhs = -self.internal_force(E, uc)[self.free_dofs]
        return GlobalSystem(model=self, E=E, band=band, rhs=rhs, u_constrained=uc)

    # -- solve ----------------------------------------------------------------

    def solve(self, system: GlobalSystem) -> np.ndarray:
        """Displacements of all dofs, shape (n_nodes, 2)."""
        if self._n_free == 0:
            return system.u_constrained.reshape(-1, 2).copy()
        try:
            chol = scipy.linalg.cholesky_banded(system.band, lower=False, check_finite=True)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularSystemError(f"reduced stiffness is not positive definite: {exc}") from exc
        # semidefinite systems can survive the factorization on roundoff; catch the tiny pivots
        pivots = chol[-1] ** 2
        if pivots.min() <= 1e-12 * system.band[-1].max():
            raise SingularSystemError(
                f"reduced stiffness is numerically singular (pivot ratio {pivots.min() / system.band[-1].max():.2e})"
            )
        rhs_p = system.rhs[self.perm]
        x = scipy.linalg.cho_solve_banded((chol, False), rhs_p, check_finite=False)
        u = system.u_constrained.copy()
        u[self.free_dofs[self.perm]] = x

        norm = np.linalg.norm(system.rhs)
        if norm == 0.0:
            return u.reshape(-1, 2)
        for it in range(3):
            res = self.internal_force(system.E, u)[self.free_dofs]
            rel = np.linalg.norm(res) / norm
            if rel <= 1e-10:
                return u.reshape(-1, 2)
            # iterative refinement on the residual
            dx = scipy.linalg.cho_solve_banded((chol, False), -res[self.perm], check_finite=False)
            u[self.free_dofs[self.perm]] += dx
        raise SolverError(f"residual {rel:.3e} above 1e-10 after {it + 1} refinement sweeps")

    # -- post-processing ------------------------------------------------------

    def recover(self, u, E) -> FieldState:
        E = np.asarray(E, dtype=float)
        u = np.asarray(u).reshape(-1, 2)
        ue = u.ravel()[self.elem_dofs]
        strain = np.einsum("mia,ma->mi", self.B_centroid, ue)
        stress = np.einsum("mij,mj->mi", self.C_unit, strain) * E[:, None]
        return FieldState(
            u=u,
            strain=strain,
            stress=stress,
            ep1=principal_max(strain, engineering_shear=True),
            sp1=principal_max(stress),
            E_current=E.copy(),
        )

    def reaction(self, system: GlobalSystem, u, nodes) -> np.ndarray:
        """Summed (x, y) reaction over ``nodes``; external load on these nodes is zero."""
        f = self.internal_force(system.E, np.asarray(u).ravel()).reshape(-1, 2)
        return f[np.asarray(nodes)].sum(axis=0)

    def all_reactions(self, system: GlobalSystem, u) -> np.ndarray:
        f = self.internal_force(system.E, np.asarray(u).ravel())
        return f[self.fixed_dofs]


# Functional wrappers matching the operation list


def assemble(mesh: Mesh, E_per_element, nu_per_region: dict, bsets: BoundarySets, prescribed_disp: float) -> GlobalSystem:
    return Model(mesh, nu_per_region, bsets).assemble(E_per_element, prescribed_disp)


def solve(system: GlobalSystem) -> np.ndarray:
    return system.model.solve(system)


def recover_fields(mesh: Mesh, u, E_per_element, nu_per_region: dict) -> FieldState:
    nu = np.array([nu_per_region[int(r)] for r in mesh.region])
    xy = mesh.coords[mesh.elements]
    B, _ = _B_batch(xy, 0.0, 0.0)
    E = np.asarray(E_per_element, dtype=float)
    C = np.stack([plane_strain_C(e, n) for e, n in zip(E, nu)])
    ue = np.asarray(u).ravel()[np.stack([2 * mesh.elements, 2 * mesh.elements + 1], axis=-1).reshape(-1, 8)]
    strain = np.einsum("mia,ma->mi", B, ue)
    stress = np.einsum("mij,mj->mi", C, strain)
    return FieldState(
        u=np.asarray(u).reshape(-1, 2),
        strain=strain,
        stress=stress,
        ep1=principal_max(strain, engineering_shear=True),
        sp1=principal_max(stress),
        E_current=E.copy(),
    )


def reaction_force(system: GlobalSystem, u, node_set, strip_width: float | None = None) -> tuple[float, float]:
    """Total vertical reaction (N) over ``node_set`` and the matching contact stress (Pa).

    The stiffness already carries the out-of-plane depth, so the reaction is a
    force; contact stress divides it by ``strip_width * depth``.
    """
    model = system.model
    Fy = float(model.reaction(system, u, node_set)[1])
    if strip_width is None:
        strip_width = model.mesh.strip.width if model.mesh.strip is not None else model.mesh.width
    return Fy, Fy / (strip_width * model.thickness)
