import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import scalar_form, sup, value, vector_field
from mesocosserat.forms import (
    AnalyticSpace,
    DegreeError,
    Form,
    Grid,
    KindMismatchError,
    SpaceMismatchError,
    VectorField,
    basis,
    coordinate_form,
    covariant_derivative,
    covariant_lie_derivative,
    exterior_derivative,
    frame_vector,
    hodge_star,
    inner,
    interior_product,
    pair,
    so_matrix,
    wedge,
)
from mesocosserat.report import observed_orders

PLANE = AnalyticSpace(2)
SPACE3 = AnalyticSpace(3)


def dxdy(space=PLANE):
    return coordinate_form(space, 0), coordinate_form(space, 1)


class TestStorage:
    @pytest.mark.parametrize("dim", [2, 3])
    @pytest.mark.parametrize("degree", [0, 1, 2, 3])
    def test_basis_count_is_binomial(self, dim, degree):
        expected = math.comb(dim, degree) if degree <= dim else 0
        assert len(basis(dim, degree)) == expected

    def test_degree_above_dimension_only_zero(self):
        assert Form.zero(3, "scalar", PLANE).comps == {}
        with pytest.raises(DegreeError):
            Form(3, "scalar", PLANE, {((), (0, 1, 2)): 1})

    def test_bad_component_key_rejected(self):
        with pytest.raises(ValueError):
            Form(1, "scalar", PLANE, {((), (0, 1)): 1})

    def test_so3_storage_is_antisymmetric(self):
        x, y, z = SPACE3.coords
        d = [coordinate_form(SPACE3, a) for a in range(3)]
        W = so_matrix(SPACE3, [d[0] * x, d[1] * y, d[2] * z])
        assert sup(W + W.transpose()) == 0.0

    def test_axial_roundtrip_3d(self):
        d = [coordinate_form(SPACE3, a) for a in range(3)]
        v = [d[0] * 2, d[1] * 3, d[2] * 5]
        ax = so_matrix(SPACE3, v).axial()
        assert ax[(0,)] == (2, 0, 0)
        assert ax[(1,)] == (0, 3, 0)
        assert ax[(2,)] == (0, 0, 5)


class TestWedge:
    def test_basis_product(self):
        dx, dy = dxdy()
        assert (wedge(dx, dy)).comps == {((), (0, 1)): 1}
        assert (wedge(dy, dx)).comps == {((), (0, 1)): -1}

    def test_self_wedge_of_one_form_vanishes(self):
        dx, _ = dxdy()
        a = sp.sin(PLANE.coords[1])
        assert wedge(dx * a, dx).comps == {}

    def test_connection_on_second_coframe(self):
        # omega^1_2 ^ e^2 with omega = a dx, e^2 = dy is a dx^dy
        dx, dy = dxdy()
        a = sp.exp(-PLANE.t) * sp.sin(sp.pi * PLANE.coords[1])
        w = so_matrix(PLANE, dx * a)
        e = frame_vector(PLANE, [dx, dy])
        assert sp.simplify(wedge(w, e).get((0,), (0, 1)) - a) == 0

    def test_vector_vector_needs_mode(self):
        dx, dy = dxdy()
        e = frame_vector(PLANE, [dx, dy])
        with pytest.raises(KindMismatchError):
            wedge(e, e)
        assert wedge(e, e, mode="dot").comps == {}
        assert wedge(e, e, mode="outer").comps == {((0, 1), (0, 1)): 1, ((1, 0), (0, 1)): -1}

    def test_space_mismatch(self):
        with pytest.raises(SpaceMismatchError):
            wedge(coordinate_form(PLANE, 0), coordinate_form(SPACE3, 1))

    @given(scalar_form(PLANE, 1), scalar_form(PLANE, 1))
    def test_graded_commutativity_one_forms(self, a, b):
        assert sup(wedge(a, b) + wedge(b, a)) < 1e-12

    def test_matrix_pairing_is_axial_dot(self):
        u = [Form.scalar(SPACE3, {(): c}) for c in (1.0, 2.0, 3.0)]
        v = [Form.scalar(SPACE3, {(): c}) for c in (4.0, -1.0, 0.5)]
        p = pair(so_matrix(SPACE3, u), so_matrix(SPACE3, v))
        assert float(p.get((), ())) == pytest.approx(1 * 4 - 2 * 1 + 3 * 0.5)


class TestExteriorDerivative:
    def test_connection_curvature_coefficient(self):
        dx, _ = dxdy()
        a = sp.exp(-PLANE.t) * sp.sin(sp.pi * PLANE.coords[1])
        dw = exterior_derivative(dx * a)
        expected = -sp.pi * sp.exp(-PLANE.t) * sp.cos(sp.pi * PLANE.coords[1])
        assert sp.simplify(dw.get((), (0, 1)) - expected) == 0

    @pytest.mark.parametrize("space", [PLANE, SPACE3], ids=["2d", "3d"])
    @given(data=st.data())
    def test_dd_is_zero(self, space, data):
        for p in range(space.dim - 1):
            f = data.draw(scalar_form(space, p))
            assert sup(exterior_derivative(exterior_derivative(f)), n=3) < 1e-12

    @given(scalar_form(SPACE3, 1), scalar_form(SPACE3, 1))
    def test_graded_leibniz(self, a, b):
        lhs = exterior_derivative(wedge(a, b))
        rhs = wedge(exterior_derivative(a), b) - wedge(a, exterior_derivative(b))
        assert sup(lhs - rhs, n=3) < 1e-10

    def test_top_degree_returns_zero(self):
        f = Form.scalar(PLANE, {(0, 1): PLANE.coords[0]})
        out = exterior_derivative(f)
        assert out.degree == 3 and out.comps == {}

    def test_grid_second_order(self):
        # d_h f against the exact derivative of f = sin(pi y) on 33/65/129 points
        errs = []
        for n in (33, 65, 129):
            g = Grid.uniform(2, n)
            f = Form.scalar(g, {(): np.sin(np.pi * g.coordinate(1))})
            dy = exterior_derivative(f).get((), (1,))
            errs.append(np.max(np.abs(dy - np.pi * np.cos(np.pi * g.coordinate(1)))))
        assert errs[1] / errs[2] >= 3.7
        assert observed_orders(errs)[-1] >= 1.9

    def test_grid_dd_converges(self):
        norms = []
        for n in (33, 65, 129):
            g = Grid.uniform(2, n)
            x, y = g.coordinate(0), g.coordinate(1)
            f = Form.scalar(g, {(): np.sin(2 * x) * np.cos(3 * y)})
            norms.append(exterior_derivative(exterior_derivative(f)).sup_norm())
        assert norms[-1] < 1e-10 or observed_orders(norms)[-1] >= 1.9


class TestHodge:
    def test_two_dimensional_convention(self):
        dx, dy = dxdy()
        assert hodge_star(dx).comps == {((), (1,)): 1}
        assert hodge_star(dy).comps == {((), (0,)): -1}
        assert hodge_star(wedge(dx, dy)).comps == {((), ()): 1}
        assert hodge_star(Form.scalar(PLANE, {(): 1})).comps == {((), (0, 1)): 1}

    def test_star_of_torsion_density(self):
        tau = sp.exp(-PLANE.t) * sp.sin(sp.pi * PLANE.coords[1])
        assert hodge_star(Form.scalar(PLANE, {(0, 1): tau})).get((), ()) == tau

    @pytest.mark.parametrize("dim", [2, 3])
    def test_double_star_sign_law(self, dim):
        space = AnalyticSpace(dim)
        for p in range(dim + 1):
            for b in basis(dim, p):
                f = Form.scalar(space, {b: 1}, degree=p)
                sign = (-1) ** (p * (dim - p))
                assert hodge_star(hodge_star(f)).comps == (f * sign).comps

    @given(scalar_form(SPACE3, 2))
    def test_inner_is_nonnegative(self, a):
        vals = SPACE3.evaluate(inner(a, a).get(), 0.3, np.random.default_rng(0).random((3, 20)))
        assert np.all(vals >= -1e-14)


class TestInteriorProduct:
    def test_contract_area_form(self):
        a = sp.exp(-PLANE.t) * sp.sin(sp.pi * PLANE.coords[1])
        out = interior_product(VectorField.basis_vector(PLANE, 0), Form.scalar(PLANE, {(0, 1): a}))
        assert out.comps == {((), (1,)): a}
        assert value(out.get((), (1,)), PLANE, 0.5, 0.0, 0.25) == pytest.approx(math.exp(-0.5) * math.sin(math.pi / 4))
        assert round(value(out.get((), (1,)), PLANE, 0.5, 0.0, 0.25), 5) == 0.42888

    def test_orthogonal_contraction(self):
        _, dy = dxdy()
        assert interior_product(VectorField.basis_vector(PLANE, 0), dy).comps == {}

    def test_zero_form_raises(self):
        with pytest.raises(DegreeError):
            interior_product(VectorField.basis_vector(PLANE, 0), Form.scalar(PLANE, {(): 1}))

    def test_rotation_generator_on_one_form(self):
        # i_{J_CD} alpha = X_C alpha_D - X_D alpha_C
        x, y, z = SPACE3.coords
        alpha = Form.scalar(SPACE3, {(0,): 2 * z, (1,): x * y, (2,): sp.Integer(7)})
        J = VectorField.rotation(SPACE3, 0, 2)
        assert sp.expand(interior_product(J, alpha).get() - (x * 7 - z * 2 * z)) == 0

    @given(vector_field(SPACE3), scalar_form(SPACE3, 1), scalar_form(SPACE3, 1))
    def test_antiderivation(self, X, a, b):
        lhs = interior_product(X, wedge(a, b))
        rhs = wedge(interior_product(X, a), b) - wedge(a, interior_product(X, b))
        assert sup(lhs - rhs, n=3) < 1e-10


class TestCovariant:
    def test_example_torsion(self):
        dx, dy = dxdy()
        a = sp.exp(-PLANE.t) * sp.sin(sp.pi * PLANE.coords[1])
        T = covariant_derivative(frame_vector(PLANE, [dx, dy]), so_matrix(PLANE, dx * a))
        assert T.get((0,), (0, 1)) == a
        assert T.get((1,), (0, 1)) == 0

    def test_flat_connection_is_plain_d(self):
        dx, dy = dxdy()
        x, y = PLANE.coords
        e = frame_vector(PLANE, [dx * sp.sin(y), dy * x])
        zero = so_matrix(PLANE, dx * 0)
        assert sup(covariant_derivative(e, zero) - exterior_derivative(e)) == 0.0

    @given(data=st.data())
    def test_second_bianchi(self, data):
        w = so_matrix(SPACE3, [data.draw(scalar_form(SPACE3, 1)) for _ in range(3)])
        Om = exterior_derivative(w) + wedge(w, w)
        assert sup(covariant_derivative(Om, w), n=3) < 1e-10

    @given(data=st.data())
    def test_cartan_formula(self, data):
        X = data.draw(vector_field(SPACE3))
        w = so_matrix(SPACE3, [data.draw(scalar_form(SPACE3, 1)) for _ in range(3)])
        e = frame_vector(SPACE3, [data.draw(scalar_form(SPACE3, 1)) for _ in range(3)])
        lhs = covariant_lie_derivative(X, e, w)
        rhs = interior_product(X, covariant_derivative(e, w)) + covariant_derivative(interior_product(X, e), w)
        assert sup(lhs - rhs, n=3) < 1e-10

    def test_lie_derivative_example(self):
        # L^D_{dx} e^1 = i_{dx} T^1 + D(i_{dx} dx) = a dy
        dx, dy = dxdy()
        a = sp.exp(-PLANE.t) * sp.sin(sp.pi * PLANE.coords[1])
        w = so_matrix(PLANE, dx * a)
        e = frame_vector(PLANE, [dx, dy])
        L = covariant_lie_derivative(VectorField.basis_vector(PLANE, 0), e, w)
        assert sp.simplify(L.get((0,), (1,)) - a) == 0
        assert L.get((0,), (0,)) == 0

    def test_torsion_free_lie_is_d_of_contraction(self):
        dx, dy = dxdy()
        e = frame_vector(PLANE, [dx, dy])
        zero = so_matrix(PLANE, dx * 0)
        X = VectorField.basis_vector(PLANE, 1)
        assert sup(covariant_lie_derivative(X, e, zero)
                   - covariant_derivative(interior_product(X, e), zero)) == 0.0

    def test_zero_generator(self):
        dx, dy = dxdy()
        e = frame_vector(PLANE, [dx * PLANE.coords[1], dy])
        w = so_matrix(PLANE, dx * PLANE.coords[0])
        assert covariant_lie_derivative(VectorField(PLANE, (0, 0)), e, w).comps == {}

    def test_scalar_connection_must_be_matrix(self):
        dx, dy = dxdy()
        with pytest.raises(KindMismatchError):
            covariant_derivative(frame_vector(PLANE, [dx, dy]), dx)
