import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import sup, value
from mesocosserat.constitutive import (
    InsufficientDataError,
    MaterialParameters,
    ParameterError,
    dissipation_density,
    dissipative_currents,
    energy_balance_residual,
    energy_density,
    excitations,
    momenta,
    total_energy,
)
from mesocosserat.forms import Grid, coordinate_form, frame_vector
from mesocosserat.kinematics import CosseratState
from mesocosserat.scenarios import compatible_state, damped_wave, example1, random_state
from mesocosserat.suite import energy_grid_norms, random_rate_state

nonneg = st.floats(min_value=0.0, max_value=5.0, allow_nan=False)


def with_rates(state, J=None, K=None):
    return state.replace(J=state.J if J is None else J, K=state.K if K is None else K)


class TestParameters:
    def test_defaults_are_unit(self):
        p = MaterialParameters()
        assert (p.mu_T, p.mu_R, p.rho_T, p.rho_R, p.gamma_T, p.gamma_R) == (1.0,) * 6

    @pytest.mark.parametrize("name", ["mu_T", "mu_R", "rho_T", "rho_R", "gamma_T", "gamma_R"])
    def test_negative_rejected(self, name):
        with pytest.raises(ParameterError):
            MaterialParameters(**{name: -0.1})

    def test_anisotropic_matrix_validation(self):
        MaterialParameters(A=[[2.0, 0.5], [0.5, 1.0]])
        with pytest.raises(ParameterError):
            MaterialParameters(A=[[1.0, 2.0], [0.0, 1.0]])
        with pytest.raises(ParameterError):
            MaterialParameters(rho=[[1.0, 0.0], [0.0, -1.0]])

    def test_from_mapping_rejects_unknown(self):
        assert MaterialParameters.from_mapping({"mu_T": 2.0}).mu_T == 2.0
        with pytest.raises(ParameterError):
            MaterialParameters.from_mapping({"mu": 2.0})

    def test_dissipative_extension_needs_positive_viscosity(self):
        with pytest.raises(ParameterError):
            MaterialParameters(gamma_T=0.0).require_dissipative()
        MaterialParameters().require_dissipative()


class TestExcitations:
    def test_example1_unit(self):
        s = example1()
        y, t = s.space.coords[1], s.space.t
        H, O = excitations(s, MaterialParameters())
        assert sp.simplify(H.get((0,), ()) - sp.exp(-t) * sp.sin(sp.pi * y)) == 0
        assert sp.simplify(O.get((0, 1), ()) + sp.pi * sp.exp(-t) * sp.cos(sp.pi * y)) == 0
        assert H.degree == O.degree == 0

    def test_compatible_limit_vanishes(self):
        for dim in (2, 3):
            H, O = excitations(compatible_state(dim), MaterialParameters(mu_T=3.0, mu_R=2.0))
            assert H.comps == {} and O.comps == {}

    def test_scaled_modulus_value(self):
        H, _ = excitations(example1(), MaterialParameters(mu_T=2.0))
        assert value(H.get((0,), ()), H.space, 0.0, 0.0, 0.5) == pytest.approx(2.0, abs=1e-15)

    def test_three_dimensional_degree(self):
        H, O = excitations(random_state(0, dim=3), MaterialParameters())
        assert H.degree == O.degree == 1

    def test_anisotropic_mixing(self):
        A = [[2.0, 1.0], [1.0, 3.0]]
        s = random_state(2)
        H = excitations(s, MaterialParameters(A=A))[0]
        H1 = excitations(s, MaterialParameters())[0]
        pts = np.array([[0.3], [0.6]])
        h = [value(H1.get((j,), ()), s.space, s.t, 0.3, 0.6) for j in range(2)]
        for i in range(2):
            assert value(H.get((i,), ()), s.space, s.t, *pts[:, 0]) == pytest.approx(A[i][0] * h[0] + A[i][1] * h[1])

    @given(st.floats(min_value=-3.0, max_value=3.0, allow_nan=False))
    def test_linearity(self, lam):
        s = random_state(3)
        scaled = CosseratState(s.e, s.omega, s.J * lam, s.K * lam, s.t)
        p = MaterialParameters(mu_T=1.3, rho_T=0.7, rho_R=1.9)
        P, Q = momenta(s, p)
        Ps, Qs = momenta(scaled, p)
        assert sup(Ps - P * lam) < 1e-12 * max(1.0, abs(lam)) * 10
        assert sup(Qs - Q * lam) < 1e-12 * max(1.0, abs(lam)) * 10


class TestMomenta:
    def test_zero_rate(self):
        P, _ = momenta(compatible_state(), MaterialParameters())
        assert P.comps == {}

    def test_example1_rotational_momentum(self):
        s = example1()
        y, t = s.space.coords[1], s.space.t
        _, Q = momenta(s, MaterialParameters())
        assert sp.simplify(Q.get((0, 1), (1,)) + sp.exp(-t) * sp.sin(sp.pi * y)) == 0
        assert Q.get((0, 1), (0,)) == 0

    def test_linear_scaling(self):
        s = compatible_state()
        dx = coordinate_form(s.space, 0)
        J = frame_vector(s.space, [dx * sp.Float(0.7), dx * 0])
        P, _ = momenta(with_rates(s, J=J), MaterialParameters(rho_T=3.0))
        assert float(P.get((0,), (1,))) == pytest.approx(2.1)


class TestDissipation:
    def test_example1_couple_current(self):
        s = example1()
        y, t = s.space.coords[1], s.space.t
        _, M = dissipative_currents(s, MaterialParameters())
        assert sp.simplify(M.get((0, 1), (0,)) + sp.exp(-t) * sp.sin(sp.pi * y)) == 0

    def test_zero_viscosity(self):
        S, M = dissipative_currents(example1(), MaterialParameters(gamma_T=0.0, gamma_R=0.0))
        assert S.comps == {} and M.comps == {}

    def test_scalar_multiply(self):
        s = compatible_state()
        dx = coordinate_form(s.space, 0)
        J = frame_vector(s.space, [dx * 2, dx * 0])
        S, _ = dissipative_currents(with_rates(s, J=J), MaterialParameters(gamma_T=0.5))
        assert S.comps == {((0,), (0,)): 1.0}

    def test_hodge_coupling_degree(self):
        S, M = dissipative_currents(random_state(0, dim=3), MaterialParameters(), coupling="hodge")
        assert S.degree == M.degree == 2
        with pytest.raises(ValueError):
            dissipative_currents(example1(), MaterialParameters(), coupling="other")

    def test_density_value(self):
        # gamma_T = 0.5 with <J,J> = 2 gives R = 1
        s = compatible_state()
        dx, dy = (coordinate_form(s.space, a) for a in range(2))
        J = frame_vector(s.space, [dx, dy])
        R = dissipation_density(with_rates(s, J=J), MaterialParameters(gamma_T=0.5, gamma_R=0.0))
        assert float(R.get()) == pytest.approx(1.0)

    def test_density_frozen_state(self):
        assert dissipation_density(compatible_state(), MaterialParameters()).comps == {}

    def test_density_example1_peak(self):
        R = dissipation_density(example1(), MaterialParameters(gamma_T=0.0))
        assert value(R.get(), R.space, 0.0, 0.0, 0.5) == pytest.approx(1.0, abs=1e-14)

    @given(st.integers(min_value=0, max_value=10_000), nonneg, nonneg)
    def test_density_nonnegative(self, seed, gT, gR):
        s = random_rate_state(np.random.default_rng(seed), Grid.uniform(3, 3))
        R = dissipation_density(s, MaterialParameters(gamma_T=gT, gamma_R=gR))
        assert np.min(R.get()) >= 0.0

    def test_negative_viscosity_raises(self):
        p = MaterialParameters()
        object.__setattr__(p, "gamma_T", -1.0)
        with pytest.raises(ParameterError):
            dissipation_density(example1(), p)


class TestEnergy:
    def test_density_matches_componentwise_sum(self):
        s = random_state(1)
        p = MaterialParameters(mu_T=1.3, mu_R=0.7, rho_T=1.1, rho_R=0.9)
        E = energy_density(s, p).get()
        # componentwise Euclidean oracle: 1/2 sum of modulus * coefficient^2
        terms = [(p.rho_T, s.J), (p.rho_R, s.K), (p.mu_T, s.torsion), (p.mu_R, s.curvature)]
        oracle = 0
        for mod, f in terms:
            scale = 0.5 if f.kind == "matrix" else 1.0  # antisymmetric pairs counted once
            oracle += mod * scale * sum(c ** 2 for c in f.comps.values())
        pts = np.array([[0.2, 0.7], [0.4, 0.1]])
        assert np.allclose(s.space.evaluate(E, s.t, pts), 0.5 * s.space.evaluate(oracle, s.t, pts), atol=1e-12)

    def test_requires_three_snapshots(self):
        g = Grid.uniform(2, 9)
        s = example1().sample(g, 0.0)
        with pytest.raises(InsufficientDataError):
            energy_balance_residual([s, s], MaterialParameters())

    def test_static_compatible_residual_zero(self):
        g = Grid.uniform(2, 9)
        snaps = [compatible_state(t=t).sample(g, t) for t in (0.0, 0.1, 0.2)]
        res = energy_balance_residual(snaps, MaterialParameters())
        assert res[0].sup_norm() == 0.0

    def test_manufactured_order(self):
        norms = energy_grid_norms(MaterialParameters(1.3, 0.7, 1.1, 0.9, 0.4, 0.6))
        orders = [math.log2(a / b) for a, b in zip(norms, norms[1:])]
        assert orders[-1] >= 1.9

    def test_damped_energy_monotone(self):
        p = MaterialParameters(gamma_T=0.5)
        wave = damped_wave(p)
        g = Grid(2, (32, 32), periodic=(True, True))
        E = [total_energy(wave.sample(g, t), p) for t in np.linspace(0.0, 3.0, 61)]
        assert np.all(np.diff(E) <= 0.0)
        assert E[-1] < E[0]

    def test_undamped_energy_conserved(self):
        # gamma = 0 with rescaled inertia: the exact wave conserves energy, the
        # grid torsion is a centred difference so the drift is O(h^2)
        p = MaterialParameters(gamma_T=0.0, rho_T=2.0)
        wave = damped_wave(p)
        drift = []
        for n in (32, 64):
            g = Grid(2, (n, n), periodic=(True, True))
            E = [total_energy(wave.sample(g, t), p) for t in np.linspace(0.0, 3.0, 31)]
            drift.append(np.ptp(E) / max(E))
        assert drift[0] < 0.02
        assert math.log2(drift[0] / drift[1]) > 1.9

    def test_total_energy_needs_grid(self):
        with pytest.raises(ValueError):
            total_energy(example1(), MaterialParameters())
