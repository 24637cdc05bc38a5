"""Chart calculus ops against hand-computed coordinate oracles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import linchart.geometry as geo
import linchart.numcore as nc


@dataclass(frozen=True)
class _Map:
    dim: int
    forward: Callable
    inverse: Callable


def _pts(seed, n, dim, lo=-2.0, hi=2.0):
    rng = np.random.default_rng(seed)
    return rng.uniform(lo, hi, size=(n, dim))


class TestPushforward:
    def test_identity_map(self):
        phi = _Map(2, lambda w: [w[0], w[1]], lambda y: y)
        x_field = geo.VectorField(2, lambda x: [x[0] * x[1], x[1] ** 2])
        pf = geo.pushforward(phi, x_field)
        for p in _pts(0, 10, 2):
            assert np.allclose(pf(p), x_field(p), atol=1e-12)

    def test_linear_map_fixes_dilation_field(self):
        a = np.array([[2.0, 1.0], [0.5, 3.0]])
        ainv = np.linalg.inv(a)
        phi = _Map(
            2,
            lambda w: [a[0, 0] * w[0] + a[0, 1] * w[1], a[1, 0] * w[0] + a[1, 1] * w[1]],
            lambda y: ainv @ np.asarray(y, dtype=float),
        )
        delta0 = geo.VectorField(2, lambda x: [x[0], x[1]])
        pf = geo.pushforward(phi, delta0)
        for p in _pts(1, 20, 2):
            assert np.allclose(pf(p), delta0(p), atol=1e-10)

    def test_naturality_of_composition(self):
        # shear after scaling, composed two ways
        psi = _Map(2, lambda w: [2.0 * w[0], 3.0 * w[1]], lambda y: np.array([y[0] / 2.0, y[1] / 3.0]))
        phi = _Map(
            2,
            lambda w: [w[0], w[1] + w[0] ** 2],
            lambda y: np.array([y[0], y[1] - y[0] ** 2]),
        )
        comp = _Map(
            2,
            lambda w: phi.forward(psi.forward(w)),
            lambda y: psi.inverse(phi.inverse(y)),
        )
        x_field = geo.VectorField(2, lambda x: [x[1], x[0] * x[0]])
        once = geo.pushforward(comp, x_field)
        twice = geo.pushforward(phi, geo.pushforward(psi, x_field))
        for p in _pts(2, 20, 2):
            assert np.allclose(once(p), twice(p), atol=1e-9)

    def test_series_input_rejected(self):
        phi = _Map(1, lambda w: [w[0]], lambda y: y)
        pf = geo.pushforward(phi, geo.VectorField(1, lambda x: [x[0]]))
        with pytest.raises(TypeError):
            pf(nc.jet_seed([1.0], 1))


class TestLieBracket:
    def test_self_bracket_vanishes(self):
        x_field = geo.VectorField(2, lambda x: [nc.sin(x[0]) * x[1], x[0] ** 2])
        br = geo.lie_bracket(x_field, x_field)
        for p in _pts(3, 10, 2):
            assert np.allclose(br(p), 0.0, atol=1e-13)

    def test_coordinate_translations_commute(self):
        dq = geo.VectorField(2, lambda x: [1.0 + 0.0 * x[0], 0.0 * x[1]])
        dp = geo.VectorField(2, lambda x: [0.0 * x[0], 1.0 + 0.0 * x[1]])
        br = geo.lie_bracket(dq, dp)
        assert np.allclose(br(np.array([0.3, -0.8])), 0.0, atol=1e-14)

    def test_hand_computed_bracket(self):
        # X = (q^2, p), Y = (p, q) at (2, 3): [X, Y] = (-9, 2)
        x_field = geo.VectorField(2, lambda x: [x[0] ** 2, x[1]])
        y_field = geo.VectorField(2, lambda x: [x[1], x[0]])
        br = geo.lie_bracket(x_field, y_field)
        assert np.allclose(br(np.array([2.0, 3.0])), [-9.0, 2.0], atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            geo.lie_bracket(
                geo.VectorField(2, lambda x: [x[0], x[1]]),
                geo.VectorField(3, lambda x: [x[0], x[1], x[2]]),
            )


class TestExteriorD:
    def test_d_of_exact_form_vanishes(self):
        f = lambda x: x[0] ** 2 * x[1]
        alpha = geo.exact_form(f, 2)
        dalpha = geo.exterior_d(alpha)
        for p in _pts(4, 10, 2):
            assert np.max(np.abs(dalpha(p))) < 1e-10

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.0, 1.0))
    def test_d_squared_zero_random_function(self, a, b, c):
        f = lambda x: a * x[0] ** 2 * x[1] + b * nc.sin(x[0]) + c * x[1] ** 3
        dalpha = geo.exterior_d(geo.exact_form(f, 2))
        assert np.max(np.abs(dalpha(np.array([0.4, -0.6])))) < 1e-9

    def test_angular_form(self):
        # d(-p dq + q dp) = 2 dq wedge dp
        alpha = geo.OneForm(2, lambda x: [-x[1], x[0]])
        m = geo.exterior_d(alpha)(np.array([1.7, 0.3]))
        assert np.allclose(m, [[0.0, 2.0], [-2.0, 0.0]], atol=1e-13)


class TestInteriorProduct:
    def test_dilation_against_canonical_form(self):
        # i_Delta (dq wedge dp) = q dp - p dq
        omega = geo.standard_omega(1)
        delta = geo.VectorField(2, lambda x: [x[0], x[1]])
        theta2 = geo.interior_product(delta, omega)
        for p in _pts(5, 10, 2):
            assert np.allclose(theta2(p), [-p[1], p[0]], atol=1e-13)

    def test_double_contraction_vanishes(self):
        omega = geo.standard_omega(1)
        x_field = geo.VectorField(2, lambda x: [x[0] ** 2 + 1.0, x[0] * x[1]])
        val = geo.pairing(geo.interior_product(x_field, omega), x_field)
        assert val(np.array([1.3, -2.1])) == 0.0

    def test_zero_form(self):
        zero = geo.TwoForm(2, lambda x: np.zeros((2, 2)))
        x_field = geo.VectorField(2, lambda x: [x[0], x[1]])
        assert np.allclose(geo.interior_product(x_field, zero)(np.array([1.0, 2.0])), 0.0)


class TestDS:
    def test_identity_tensor_gives_df(self):
        f = lambda x: x[0] ** 3 + x[0] * x[1]
        s_id = geo.constant_one_one(np.eye(2))
        form = geo.d_S(f, s_id)
        p = np.array([0.7, -1.1])
        want = nc.jet_eval(f, p, 1).gradient()
        assert np.allclose(form(p), want, atol=1e-13)

    def test_complex_structure_rotates_energy_gradient(self):
        # f = (q^2+p^2)/2, d_J f = -p dq + q dp; at (1,0) the components are (0,1)
        f = lambda x: 0.5 * (x[0] ** 2 + x[1] ** 2)
        form = geo.d_S(f, geo.standard_J(1))
        assert np.allclose(form(np.array([1.0, 0.0])), [0.0, 1.0], atol=1e-14)
        for p in _pts(6, 10, 2):
            assert np.allclose(form(p), [-p[1], p[0]], atol=1e-12)

    def test_half_dJ_recovers_action_form(self):
        # theta = (q dp - p dq)/2 = 1/2 d_J((q^2+p^2)/2)
        f = lambda x: 0.5 * (x[0] ** 2 + x[1] ** 2)
        form = geo.d_S(f, geo.standard_J(1))
        p = np.array([0.9, 0.4])
        theta = 0.5 * form(p)
        assert np.allclose(theta, [-0.2, 0.45], atol=1e-13)


class TestComposeJOmega:
    def test_standard_pair_gives_euclidean_metric(self):
        g = geo.compose_J_omega(geo.standard_J(1), geo.standard_omega(1))
        m = g(np.array([0.2, 0.4]))
        assert np.array_equal(m, np.eye(2))

    def test_J_squared_is_minus_identity(self):
        j = geo.standard_J(1)
        p = np.array([1.0, 2.0])
        assert np.array_equal(j(p) @ j(p), -np.eye(2))

    def test_oscillator_field_is_J_of_dilation(self):
        # Gamma = p d/dq - q d/dp equals J applied to the dilation field
        j = geo.standard_J(1)
        delta = geo.VectorField(2, lambda x: [x[0], x[1]])
        gamma = j.apply(delta)
        for p in _pts(7, 10, 2):
            assert np.allclose(gamma(p), [p[1], -p[0]], atol=1e-14)

    def test_higher_dimensional_blocks(self):
        g = geo.compose_J_omega(geo.standard_J(2), geo.standard_omega(2))
        assert np.array_equal(g(np.zeros(4)), np.eye(4))
