import numpy as np
import pytest

from fracture_sim.engines import (
    FieldState,
    SlaConfig,
    SsConfig,
    critical_element,
    run_sla,
    run_ss,
)
from fracture_sim.errors import ConfigurationError
from fracture_sim.material import MaterialParams, RandomField, StepFunction, constant_field, sample_field
from fracture_sim.mesh import CASI, BoundarySets, assign_patches, attach_strip, build_structured_mesh

P = MaterialParams()


def state_with(sp1):
    sp1 = np.asarray(sp1, dtype=float)
    z = np.zeros((len(sp1), 3))
    return FieldState(np.zeros((1, 2)), z, z, sp1, sp1, np.ones(len(sp1)))


class TestCriticalElement:
    def test_max_wins(self):
        assert critical_element(state_with([1.0, 3.0, 2.0]), [True, True, True]) == 1

    def test_exact_tie_lower_id(self):
        assert critical_element(state_with([1.0, 3.0, 3.0, 3.0]), [True, False, True, True]) == 2

    def test_index_list(self):
        assert critical_element(state_with([5.0, 3.0, 4.0]), [2, 1]) == 2

    def test_none_eligible(self):
        assert critical_element(state_with([1.0, 2.0]), [False, False]) is None

    def test_all_compressive(self):
        assert critical_element(state_with([-1.0, 0.0]), [True, True]) is None


def unit_element():
    mesh = assign_patches(build_structured_mesh(1.0, 1.0, 1, 1, 1.0), 1.0, 1.0)
    bs = BoundarySets(np.array([0, 1]), 0, np.array([2, 3]))
    return mesh, bs


def small_strip(nx=10, ny=15, width=0.2, height=0.3, ecc=0.05, strip=0.08):
    mesh = build_structured_mesh(width, height, nx, ny, 0.2)
    mesh = attach_strip(mesh, strip, 0.005, ecc)
    return assign_patches(mesh, 0.02, 0.02)


@pytest.fixture(scope="module")
def result():
    mesh = small_strip()
    field = sample_field(3, mesh.patch_ids(), 6300e6, 7700e6)
    return mesh, run_sla(mesh, field, P, SlaConfig(max_steps=25))


@pytest.fixture(scope="module")
def pair():
    mesh = small_strip()
    field = sample_field(5, mesh.patch_ids(), 6300e6, 7700e6)
    cfg = SsConfig(n_steps=60, max_prescribed_disp=1.2e-3, snapshot_every=5)
    return mesh, run_ss(mesh, field, P, StepFunction(), cfg), run_ss(mesh, field, P, StepFunction(), cfg)


class TestSlaSingleElement:
    def test_first_step(self):
        mesh, bs = unit_element()
        field = constant_field(mesh.patch_ids(), 6000e6)
        r = run_sla(mesh, field, P, SlaConfig(direction="tension", max_displacement=1.0), bs)
        first = r.trace.records[0]
        assert first.element == 0
        # lateral-free plane strain: syy = E/(1 - nu^2) eps
        lam = 2e6 * (1 - 0.2**2) / 6000e6
        assert first.prescribed_disp == pytest.approx(lam, rel=1e-12)
        assert first.contact_stress == pytest.approx(2e6, rel=1e-12)
        assert first.load == pytest.approx(2e6 * 1.0 * 1.0, rel=1e-12)
        assert r.final_state.E_current[0] == pytest.approx(60e6)
        assert r.termination == "no_critical_element"
        assert len(r.trace) == 1

    def test_compression_has_no_critical_element(self):
        mesh, bs = unit_element()
        field = constant_field(mesh.patch_ids(), 6000e6)
        r = run_sla(mesh, field, P, SlaConfig(), bs)
        assert r.termination == "no_critical_element"
        assert len(r.trace) == 0


class TestSla:
    def test_one_degradation_per_step(self, result):
        mesh, r = result
        ids = [rec.element for rec in r.trace]
        assert len(ids) == len(set(ids)) == len(r.damaged)
        assert ids == r.damaged
        assert all(mesh.region[i] == CASI for i in ids)
        damaged = r.final_state.E_current != r.E_ini
        assert damaged.sum() == len(ids)
        np.testing.assert_allclose(r.final_state.E_current[ids], 0.01 * r.E_ini[ids])

    def test_snapshot_rescaling(self, result):
        mesh, r = result
        for step, state in r.snapshots:
            rec = r.trace.records[step - 1]
            assert state.sp1[rec.element] == pytest.approx(P.f_t, rel=1e-12)
            assert state.u[mesh.strip.top_nodes, 1] == pytest.approx(-rec.prescribed_disp, rel=1e-12)

    def test_solver_health(self, result):
        _, r = result
        assert max(rec.reaction_imbalance for rec in r.trace) < 1e-8

    def test_scale_invariance(self):
        mesh = small_strip(5, 5, width=0.2, height=0.2, ecc=0.04, strip=0.08)
        base = sample_field(11, mesh.patch_ids(), 6300e6, 7700e6)
        scaled = RandomField(base.seed, base.E_min * 3, base.E_max * 3, {k: 3 * v for k, v in base.patch_E.items()})
        p3 = MaterialParams(E_rubber=3 * P.E_rubber)
        a = run_sla(mesh, base, P, SlaConfig(max_steps=12))
        b = run_sla(mesh, scaled, p3, SlaConfig(max_steps=12))
        assert [x.element for x in a.trace] == [x.element for x in b.trace]
        np.testing.assert_allclose(a.trace.loads, b.trace.loads, rtol=1e-9)
        np.testing.assert_allclose(a.trace.column("prescribed_disp"), 3 * b.trace.column("prescribed_disp"), rtol=1e-9)

    def test_load_threshold_stop(self):
        mesh = assign_patches(build_structured_mesh(1.0, 1.0, 3, 1, 1.0), 1.0, 1.0)
        bs = BoundarySets(np.arange(4), 0, np.arange(4, 8))
        field = constant_field(mesh.patch_ids(), 6000e6)
        r = run_sla(mesh, field, P, SlaConfig(direction="tension", load_threshold=0.9, max_displacement=1.0), bs)
        assert r.termination == "load_threshold"
        assert r.trace.records[-1].load < 0.9 * max(r.trace.loads)


class TestSsSingleElement:
    def run(self, floor):
        mesh, bs = unit_element()
        field = constant_field(mesh.patch_ids(), 6000e6)
        params = MaterialParams(nu_casi=0.0, E_floor=floor)
        cfg = SsConfig(n_steps=1000, max_prescribed_disp=0.833e-3, direction="tension")
        return run_ss(mesh, field, params, StepFunction(), cfg, bs)

    def test_elastic_then_softening(self):
        r = self.run(0.0)
        assert r.termination == "n_steps"
        eps, sig = r.trace.column("prescribed_disp"), r.trace.column("contact_stress")
        pre = eps < 2.0 / 6000 - 1e-12
        np.testing.assert_allclose(sig[pre], 6000e6 * eps[pre], rtol=1e-12)
        assert sig.max() == pytest.approx(2.2 / 6000 * 0.96 * 6000e6, rel=2e-3)
        assert all(rec.converged for rec in r.trace)

    def test_floor_adds_linear_term(self):
        a, b = self.run(0.0), self.run(1e7)
        eps = a.trace.column("prescribed_disp")
        # reported stress carries the Picard tolerance on E (1e-4)
        np.testing.assert_allclose(b.trace.column("contact_stress"), a.trace.column("contact_stress") + 1e7 * eps, rtol=2e-4)


class TestSs:
    def test_deterministic(self, pair):
        _, a, b = pair
        assert [r.__dict__ for r in a.trace] == [r.__dict__ for r in b.trace]
        np.testing.assert_array_equal(a.final_state.E_current, b.final_state.E_current)

    def test_stiffness_never_recovers(self, pair):
        _, a, _ = pair
        Es = np.array([s.E_current for _, s in a.snapshots])
        assert np.all(np.diff(Es, axis=0) <= 0)

    def test_damage_occurs(self, pair):
        _, a, _ = pair
        assert len(a.damaged) > 0
        assert a.trace.records[0].step == 0 and a.trace.records[0].load == 0.0

    def test_initial_linear_branch(self, pair):
        _, a, _ = pair
        loads, d = a.trace.loads[1:4], a.trace.column("prescribed_disp")[1:4]
        np.testing.assert_allclose(loads / d, loads[0] / d[0], rtol=1e-9)

    def test_solver_health(self, pair):
        _, a, _ = pair
        assert max(r.reaction_imbalance for r in a.trace) < 1e-8


@pytest.mark.parametrize(
    "cls, kw",
    [
        (SlaConfig, {"degrade_factor": 1.0}),
        (SlaConfig, {"direction": "shear"}),
        (SsConfig, {"relaxation": 0.0}),
        (SsConfig, {"max_prescribed_disp": -1e-3}),
        (SsConfig, {"n_steps": 0}),
    ],
)
def test_config_validation(cls, kw):
    with pytest.raises(ConfigurationError):
        cls(**kw)


def test_roundoff_tie_goes_to_lower_id():
    assert critical_element(state_with([3.0, 3.0 * (1 + 1e-13), 1.0]), [True, True, True]) == 0
    assert critical_element(state_with([3.0, 3.0 * (1 + 1e-6)]), [True, True]) == 1
