"""Operator zoo: evaluation, composition, resolvents, property checkers."""

import math

import numpy as np
import pytest

from fejerflow.operators import (
    CocoerciveMap,
    ConvexFunction,
    MonotoneOperator,
    NonexpansiveMap,
    ball_samples,
    check_cocoercive,
    check_nonexpansive,
    forward_backward_map,
    make_convex_function,
    make_nonexpansive,
    stojkovic_resolvent,
)
from fejerflow.space import euclidean


class TestApply:
    def test_identity(self):
        T = NonexpansiveMap.identity()
        assert np.allclose(T([1.0, 2.0]), [1.0, 2.0])

    def test_scalar_contraction(self):
        T = NonexpansiveMap.scalar(0.5)
        assert np.allclose(T([2.0, 0.0]), [1.0, 0.0])

    def test_negation(self):
        assert NonexpansiveMap.negation()([1.0])[0] == -1.0

    def test_expansive_matrix_rejected(self):
        with pytest.raises(ValueError):
            NonexpansiveMap.linear([[2.0]])

    def test_projection_ball(self):
        P = NonexpansiveMap.projection_ball([0.0, 0.0], 1.0)
        assert np.allclose(P([3.0, 4.0]), [0.6, 0.8])
        assert np.allclose(P([0.1, 0.2]), [0.1, 0.2])

    def test_zoo_builder(self):
        s = euclidean(2)
        T = make_nonexpansive(s, {"op": "rotation", "angle_deg": 90})
        assert np.allclose(T([1.0, 0.0]), [0.0, 1.0])


class TestForwardBackward:
    def test_gamma_range(self):
        A, B = MonotoneOperator.zero(), CocoerciveMap.identity()
        with pytest.raises(ValueError):
            forward_backward_map(A, B, 2.5)

    def test_identity_resolvent_cases(self):
        A, B = MonotoneOperator.zero(), CocoerciveMap.identity()
        T = forward_backward_map(A, B, 0.5)
        assert np.allclose(T([2.0]), [1.0])
        T1 = forward_backward_map(A, B, 1.0)
        assert np.allclose(T1([4.0]), [0.0])

    def test_projection_resolvent(self):
        A = MonotoneOperator.indicator_point([0.0])
        B = CocoerciveMap.zero()
        T = forward_backward_map(A, B, 0.7)
        assert np.allclose(T([3.0]), [0.0])

    def test_averagedness_recorded(self):
        A, B = MonotoneOperator.zero(), CocoerciveMap.identity()
        T = forward_backward_map(A, B, 1.0)
        # delta = min(1, beta/gamma) + 1/2 = 1.5
        assert T.averagedness == pytest.approx(1 / 1.5)

    def test_output_nonexpansive(self):
        s = euclidean(2)
        A = MonotoneOperator.scaled_identity(2.0)
        B = CocoerciveMap.scaled_identity(0.5)  # beta = 2
        T = forward_backward_map(A, B, 1.0)
        assert check_nonexpansive(T, s, n_samples=64, radius=3.0).passed


class TestStojkovicResolvent:
    def test_identity_fixes_x(self):
        F = NonexpansiveMap.identity()
        x = np.array([1.5])
        assert np.allclose(stojkovic_resolvent(F, 2.0, x, tol=1e-13), x)

    def test_negation_closed_form(self):
        # R_t(x) = x / (1 + 2t) for F = -Id
        F = NonexpansiveMap.negation()
        out = stojkovic_resolvent(F, 1.0, np.array([3.0]), tol=1e-13)
        assert out[0] == pytest.approx(1.0, abs=1e-10)

    def test_small_t_near_identity(self):
        F = NonexpansiveMap.negation()
        out = stojkovic_resolvent(F, 0.001, np.array([1.0]), tol=1e-13)
        assert abs(out[0] - 1.0) < 0.01

    def test_resolvent_inequality(self):
        # d(z, R_lam z) <= lam d(z, F z) on samples
        s = euclidean(2)
        F = NonexpansiveMap.rotation(90)
        for z in ball_samples(s, 8, 2.0, seed=3):
            for lam in (0.5, 1.0, 2.0):
                rz = stojkovic_resolvent(F, lam, z, tol=1e-12)
                assert s.distance(z, rz) <= lam * s.distance(z, F(z)) + 1e-9


class TestPropertyCheckers:
    def test_identity_ratio_one(self):
        rep = check_nonexpansive(NonexpansiveMap.identity(), euclidean(2))
        assert rep.passed and rep.max_ratio == pytest.approx(1.0)

    def test_scalar_half_ratio(self):
        rep = check_nonexpansive(NonexpansiveMap.scalar(0.5), euclidean(1))
        assert rep.max_ratio == pytest.approx(0.5)

    def test_expansion_flagged(self):
        double = NonexpansiveMap(fn=lambda x: 2 * x, name="double")
        rep = check_nonexpansive(double, euclidean(1))
        assert not rep.passed and rep.max_ratio == pytest.approx(2.0)

    def test_cocoercive_identity(self):
        rep = check_cocoercive(CocoerciveMap.identity(), euclidean(2))
        assert rep.passed and rep.max_ratio == pytest.approx(1.0)

    def test_cocoercive_wrong_beta(self):
        wrong = CocoerciveMap(fn=lambda x: x, beta=2.0, name="bad")
        rep = check_cocoercive(wrong, euclidean(1))
        assert not rep.passed

    def test_cocoercive_zero_map(self):
        rep = check_cocoercive(CocoerciveMap.zero(beta=5.0), euclidean(2))
        assert rep.passed

    def test_sampling_deterministic(self):
        s = euclidean(3)
        a = ball_samples(s, 16, 2.0, seed=1)
        b = ball_samples(s, 16, 2.0, seed=1)
        assert np.array_equal(a, b)
        assert np.linalg.norm(a, axis=1).max() <= 2.0 + 1e-12


class TestConvexFunctions:
    def test_quadratic_prox_closed_form(self):
        phi = ConvexFunction.quadratic(1.0, dimension=2)
        x = np.array([2.0, -4.0])
        assert np.allclose(phi.prox_point(3.0, x), x / 4.0)

    def test_prox_optimality_sampled(self):
        # phi(prox) + d^2(x, prox)/(2t) <= phi(y) + d^2(x, y)/(2t)
        s = euclidean(2)
        phi = ConvexFunction.l1(1.0, dimension=2)
        for x in ball_samples(s, 6, 2.0, seed=5):
            for t in (0.5, 2.0):
                p = phi.prox_point(t, x)
                lhs = phi(p) + np.dot(x - p, x - p) / (2 * t)
                for y in ball_samples(s, 6, 2.0, seed=9):
                    rhs = phi(y) + np.dot(x - y, x - y) / (2 * t)
                    assert lhs <= rhs + 1e-10

    def test_numeric_prox_fallback(self):
        # smooth function without a declared prox: residual within tolerance
        phi = ConvexFunction(value=lambda x: float(np.cosh(x).sum() - 1),
                             name="cosh")
        x = np.array([1.0])
        p = phi.prox_point(1.0, x)
        # first-order optimality: sinh(p) + (p - x)/t = 0
        assert abs(math.sinh(p[0]) + (p[0] - 1.0)) < 1e-5

    def test_indicator_ball_prox_projects(self):
        phi = ConvexFunction.indicator_ball([0.0], 1.0)
        assert phi.prox_point(1.0, np.array([5.0]))[0] == pytest.approx(1.0)

    def test_zoo_builder(self):
        s = euclidean(1)
        phi = make_convex_function(s, {"op": "quad_prox", "scale": 1.0})
        assert phi.prox_point(1.0, np.array([2.0]))[0] == pytest.approx(1.0)
