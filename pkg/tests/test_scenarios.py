import math

import numpy as np
import pytest
import sympy as sp

from conftest import value
from mesocosserat import suite
from mesocosserat.constitutive import MaterialParameters
from mesocosserat.scenarios import (
    PRINTED_TABLE,
    SCENARIO_PARAMS,
    ScenarioSpec,
    appendix_table,
    damped_wave,
    example1,
    example2,
    force_closed_form,
    random_state,
    scalar_reduction,
)


class TestExample1:
    def test_connection_value(self):
        s = example1(0.5)
        a = s.omega.get((0, 1), (0,))
        assert value(a, s.space, 0.5, 0.0, 0.25) == pytest.approx(math.exp(-0.5) * math.sin(math.pi / 4))
        assert round(value(a, s.space, 0.5, 0.0, 0.25), 4) == 0.4289

    def test_curvature_vanishes_at_midline(self):
        s = example1()
        for t in (0.0, 0.5, 2.0):
            assert abs(value(s.curvature.get((0, 1), (0, 1)), s.space, t, 0.3, 0.5)) < 1e-15

    def test_curvature_changes_sign_once(self):
        s = example1()
        ys = np.linspace(0.01, 0.99, 99)
        k = s.space.evaluate(s.curvature.get((0, 1), (0, 1)), 0.5, np.stack([np.zeros_like(ys), ys]))
        assert np.count_nonzero(np.diff(np.sign(k))) == 1

    def test_frozen_coframe(self):
        s = example1()
        assert s.J.comps == {}


class TestExample2:
    def test_torsion_formula(self):
        a0, eps = 1.5, 0.2
        s = example2(a0=a0, eps=eps)
        y, t = s.space.coords[1], s.space.t
        expected = (a0 - eps * sp.pi) * sp.exp(-t) * sp.cos(sp.pi * y)
        assert sp.simplify(s.torsion.get((0,), (0, 1)) - expected) == 0

    def test_torsion_rate_at_origin(self):
        s = example2()
        rate = s.torsion.get((0,), (0, 1)).diff(s.space.t)
        assert value(rate, s.space, 0.0, 0.0, 0.0) == pytest.approx(-(1 - 0.1 * math.pi), abs=1e-12)
        assert round(value(rate, s.space, 0.0, 0.0, 0.0), 5) == -0.68584

    def test_balanced_amplitude_is_torsion_free_but_curved(self):
        eps = 0.1
        s = example2(a0=eps * math.pi, eps=eps)
        pts = np.array([[0.1, 0.4, 0.8], [0.2, 0.6, 0.9]])
        assert np.max(np.abs(s.space.evaluate(s.torsion.get((0,), (0, 1)), 0.3, pts))) < 1e-15
        assert np.max(np.abs(s.space.evaluate(s.curvature.get((0, 1), (0, 1)), 0.3, pts))) > 0.1


class TestScalarReduction:
    def test_example1(self):
        s = example1()
        y, t = s.space.coords[1], s.space.t
        tau, kappa, sigma_y = scalar_reduction(s, MaterialParameters(mu_T=2.0))
        assert sp.simplify(tau - sp.exp(-t) * sp.sin(sp.pi * y)) == 0
        assert sp.simplify(kappa + sp.pi * sp.exp(-t) * sp.cos(sp.pi * y)) == 0
        assert sp.simplify(sigma_y - 2 * sp.pi * sp.exp(-t) * sp.cos(sp.pi * y)) == 0

    def test_three_dimensional_rejected(self):
        with pytest.raises(ValueError):
            scalar_reduction(random_state(0, dim=3))


class TestAppendixTable:
    def test_rows(self):
        rows = appendix_table()
        assert [r["y"] for r in rows] == [0.25, 0.5, 0.75]
        for r in rows:
            assert r["F_oracle"] == pytest.approx(r["F_closed"], abs=1e-12)

    def test_connection_and_curvature_match_print(self):
        for r in appendix_table():
            assert not r["a_flag"]
            assert not r["Omega_flag"]

    def test_force_discrepancy_flagged(self):
        rows = appendix_table()
        # the printed force magnitude differs from the closed form by about 0.096
        assert rows[0]["F_flag"] and rows[2]["F_flag"]
        assert not rows[1]["F_flag"]
        assert rows[0]["F_closed"] == pytest.approx(0.57786, abs=1e-5)
        assert rows[0]["F_discrepancy"] == pytest.approx(0.57786 - 0.6736, abs=1e-5)

    def test_other_times_have_no_reference(self):
        rows = appendix_table(t=0.2)
        assert rows[0]["printed_a"] is None and rows[0]["F_flag"] is None

    def test_printed_table_is_antisymmetric(self):
        assert PRINTED_TABLE[0]["F"] == -PRINTED_TABLE[2]["F"]


class TestConfigurationalForceProfile:
    def test_antisymmetric_about_midline(self):
        s = np.linspace(0.0, 0.5, 11)
        F = suite.configurational_force_profile
        assert np.max(np.abs(F(0.5 + s, 0.7) + F(0.5 - s, 0.7))) < 1e-12

    def test_zeros(self):
        assert np.max(np.abs(suite.configurational_force_profile([0.0, 0.5, 1.0], 0.3))) < 1e-12

    @pytest.mark.parametrize("t", [0.25, 1.0, 2.0])
    def test_decay_rate(self, t):
        ys = np.linspace(0.05, 0.45, 5)
        F = suite.configurational_force_profile
        assert np.allclose(F(ys, t) / F(ys, 0.0), math.exp(-2 * t), rtol=1e-12)

    def test_closed_form(self):
        ys = np.linspace(0.0, 1.0, 9)
        assert np.allclose(suite.configurational_force_profile(ys, 0.5), force_closed_form(ys, 0.5), atol=1e-12)


class TestDampedWave:
    def test_overdamped_rejected(self):
        with pytest.raises(ValueError):
            damped_wave(MaterialParameters(gamma_T=100.0))

    def test_initial_profile(self):
        s = damped_wave(MaterialParameters(), amplitude=0.05)
        b = s.e.get((0,), (0,))
        assert value(b, s.space, 0.0, 0.0, 0.25) == pytest.approx(1.05)


class TestScenarioSpec:
    def test_unknown_name(self):
        with pytest.raises(KeyError):
            ScenarioSpec("example3")

    def test_unknown_parameter(self):
        with pytest.raises(ValueError):
            ScenarioSpec("example2", {"a1": 1.0})

    def test_resolved_defaults(self):
        assert ScenarioSpec("example2", {"eps": 0.3}).resolved() == {"a0": 1.0, "eps": 0.3}

    @pytest.mark.parametrize("name", ["example1", "example2", "manufactured-random", "damped-wave"])
    def test_build(self, name):
        assert ScenarioSpec(name).build(0.2).t == 0.2

    @pytest.mark.parametrize("name", ["wave1d", "appendix-table"])
    def test_no_field_state(self, name):
        with pytest.raises(ValueError):
            ScenarioSpec(name).build()

    def test_registry_names(self):
        assert set(SCENARIO_PARAMS) == {"example1", "example2", "manufactured-random", "damped-wave",
                                        "wave1d", "appendix-table"}
