import math

import numpy as np
from django.test import SimpleTestCase
from scipy.optimize import bisect

from common.exceptions import DegenerateInputError, DomainError
from comparison_kernel.models import BallConditionCase, ComparisonTriple, ExtendedReal
from comparison_kernel.services import (
    ball_condition,
    cos_kappa,
    first_positive_zero,
    inradius_comparison_r,
    jacobian_J,
    pi_kappa,
    s_kappa_lambda,
    sigma_distortion,
    sin_kappa,
    stability_margin,
    tau_distortion,
)


class ExtendedRealTests(SimpleTestCase):
    def test_infinity_dominates_finite_values(self):
        self.assertGreater(ExtendedReal.infinity(), 1e300)
        self.assertLess(ExtendedReal.negative_infinity(), -1e300)
        self.assertEqual(ExtendedReal.of(math.inf), ExtendedReal.infinity())
        self.assertEqual(ExtendedReal(2.0), 2.0)

    def test_zero_times_infinity_is_zero(self):
        self.assertEqual(ExtendedReal(0.0).multiply(ExtendedReal.infinity()), 0.0)
        self.assertEqual(ExtendedReal.infinity().multiply(0), 0.0)
        self.assertEqual(ExtendedReal(-2.0).multiply(ExtendedReal.infinity()), ExtendedReal.negative_infinity())

    def test_infinity_to_the_zero_is_one(self):
        self.assertEqual(ExtendedReal.infinity().power(0), 1.0)
        self.assertEqual(ExtendedReal(4.0).power(0.5), 2.0)

    def test_json_form(self):
        self.assertEqual(ExtendedReal.infinity().to_json(), '+inf')
        self.assertEqual(ExtendedReal(0.25).to_json(), 0.25)

    def test_nan_rejected(self):
        with self.assertRaises(DomainError):
            ExtendedReal.of(float('nan'))


class ComparisonTripleTests(SimpleTestCase):
    def test_dimension_must_exceed_one(self):
        with self.assertRaises(DomainError):
            ComparisonTriple(0, 1, 1)

    def test_fields_must_be_finite(self):
        with self.assertRaises(DomainError):
            ComparisonTriple(math.inf, 1, 3)


class TrigonometricKernelTests(SimpleTestCase):
    def test_cos_kappa_known_values(self):
        self.assertEqual(cos_kappa(0, 5.0), 1.0)
        self.assertAlmostEqual(cos_kappa(1, math.pi / 2), 0.0, places=14)
        self.assertAlmostEqual(cos_kappa(-1, 1.0), 1.5430806348152437, places=13)

    def test_sin_kappa_known_values(self):
        self.assertEqual(sin_kappa(0, 3.5), 3.5)
        self.assertAlmostEqual(sin_kappa(1, math.pi / 2), 1.0, places=14)
        self.assertAlmostEqual(sin_kappa(4, math.pi / 4), 0.5, places=14)

    def test_vectorized_input_returns_array(self):
        values = cos_kappa(1, np.array([0.0, math.pi]))
        self.assertIsInstance(values, np.ndarray)
        np.testing.assert_allclose(values, [1.0, -1.0], atol=1e-15)

    def test_pi_kappa(self):
        self.assertAlmostEqual(float(pi_kappa(4)), math.pi / 2)
        self.assertEqual(pi_kappa(0), ExtendedReal.infinity())
        self.assertEqual(pi_kappa(-1), ExtendedReal.infinity())

    def test_s_kappa_lambda_known_values(self):
        self.assertAlmostEqual(s_kappa_lambda(0, 1, 0.5), 0.5)
        self.assertAlmostEqual(s_kappa_lambda(0, 1, 1.0), 0.0)
        self.assertAlmostEqual(s_kappa_lambda(-1, 2, math.atanh(0.5)), 0.0, delta=1e-10)

    def test_ode_residual_on_random_parameters(self):
        rng = np.random.default_rng(11)
        step = 1e-4
        for kappa, r in zip(rng.uniform(-10, 10, 1000), rng.uniform(-3, 3, 1000)):
            for fn in (cos_kappa, sin_kappa):
                v = fn(kappa, r)
                second = (fn(kappa, r + step) - 2 * v + fn(kappa, r - step)) / step ** 2
                bound = 1e-6 * (1 + abs(kappa)) * max(1.0, abs(v))
                self.assertLessEqual(abs(second + kappa * v), bound)

    def test_pythagorean_identity(self):
        rng = np.random.default_rng(5)
        for kappa, r in zip(rng.uniform(-10, 10, 500), rng.uniform(-10, 10, 500)):
            c = cos_kappa(kappa, r)
            s = sin_kappa(kappa, r)
            # cancellation of cosh² − sinh² scales with the magnitude of the terms
            self.assertLessEqual(abs(kappa * s * s + c * c - 1.0), 1e-12 * max(1.0, c * c))


class BallConditionTests(SimpleTestCase):
    def test_cases(self):
        self.assertEqual(ball_condition(0, 1), BallConditionCase.ZERO_KAPPA_POSITIVE_LAMBDA)
        self.assertEqual(ball_condition(-1, 0.5), BallConditionCase.FAILS)
        self.assertEqual(ball_condition(1, -100), BallConditionCase.POSITIVE_KAPPA)
        self.assertEqual(ball_condition(-1, 1.5), BallConditionCase.NEGATIVE_KAPPA_LARGE_LAMBDA)
        self.assertEqual(ball_condition(0, 0), BallConditionCase.FAILS)


class JacobianTests(SimpleTestCase):
    def test_known_values(self):
        self.assertAlmostEqual(jacobian_J(ComparisonTriple(0, 2, 3), -0.5), 2.25)
        self.assertEqual(jacobian_J(ComparisonTriple(-3, 7, 4.5), 0.0), 1.0)
        self.assertEqual(jacobian_J(ComparisonTriple(0, 2, 3), 1.0), 0.0)

    def test_reflection_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            p = ComparisonTriple(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(1.2, 6))
            mirrored = ComparisonTriple(p.K, -p.H, p.N)
            r = rng.uniform(-1.5, 1.5)
            self.assertAlmostEqual(jacobian_J(p, r), jacobian_J(mirrored, -r), delta=1e-12)


class InradiusRootTests(SimpleTestCase):
    def test_kasue_bound(self):
        for N in (2, 2.5, 3, 10):
            r = inradius_comparison_r(ComparisonTriple(0, N - 1, N))
            self.assertAlmostEqual(float(r), 1.0, delta=1e-12)

    def test_trichotomy_closed_forms_against_bisection(self):
        for N in (2, 3, 7.5):
            sphere = inradius_comparison_r(ComparisonTriple(N - 1, 0, N))
            oracle = bisect(lambda r: math.cos(r), 1e-9, math.pi - 1e-9, xtol=1e-15)
            self.assertAlmostEqual(float(sphere), oracle, delta=1e-10)
            self.assertAlmostEqual(float(sphere), math.pi / 2, delta=1e-10)

            hyperbolic = inradius_comparison_r(ComparisonTriple(-(N - 1), 2 * (N - 1), N))
            oracle = bisect(lambda r: math.cosh(r) - 2 * math.sinh(r), 1e-9, 5.0, xtol=1e-15)
            self.assertAlmostEqual(float(hyperbolic), oracle, delta=1e-10)
            self.assertAlmostEqual(float(hyperbolic), 0.5493061443340549, delta=1e-10)

    def test_ball_condition_failure_returns_infinity(self):
        self.assertEqual(inradius_comparison_r(ComparisonTriple(-1, 0, 2)), ExtendedReal.infinity())
        self.assertEqual(inradius_comparison_r(ComparisonTriple(0, -1, 3)), ExtendedReal.infinity())

    def test_infinite_mean_curvature_limits(self):
        self.assertAlmostEqual(float(first_positive_zero(1.0, -math.inf)), math.pi)
        self.assertEqual(first_positive_zero(-1.0, -math.inf), ExtendedReal.infinity())
        self.assertEqual(float(first_positive_zero(0.0, math.inf)), 0.0)

    def test_first_zero_is_first(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            kappa = rng.uniform(-1, 1)
            if kappa > 0:
                lam = rng.uniform(-3, 3)
            else:
                lam = rng.uniform(math.sqrt(-kappa) + 0.2, 3)
            r = first_positive_zero(kappa, lam)
            self.assertTrue(r.is_finite)
            self.assertLessEqual(abs(s_kappa_lambda(kappa, lam, r.value)), 1e-10)
            grid = np.linspace(0, r.value, 1002)[1:-1]
            self.assertTrue(np.all(s_kappa_lambda(kappa, lam, grid) > 0))

    def test_perturbation_limit(self):
        p = ComparisonTriple(0, 10, 3)
        base = float(inradius_comparison_r(p))
        gaps = []
        for delta in (1e-2, 1e-3, 1e-4):
            gap = abs(float(inradius_comparison_r(p.perturbed(delta))) - base)
            self.assertLessEqual(gap, delta)
            gaps.append(gap)
        self.assertGreater(gaps[0], gaps[1])
        self.assertGreater(gaps[1], gaps[2])


class DistortionTests(SimpleTestCase):
    def test_sigma_known_values(self):
        for theta in (0.3, 2.0, 50.0):
            self.assertAlmostEqual(float(sigma_distortion(0, 3, 0.4, theta)), 0.4)
        self.assertEqual(sigma_distortion(2, 2, 0.5, math.pi), ExtendedReal.infinity())
        self.assertAlmostEqual(float(sigma_distortion(2, 2, 0.5, math.pi / 2)), math.sqrt(0.5), places=12)

    def test_sigma_at_zero_angle(self):
        self.assertEqual(float(sigma_distortion(5, 2, 0.3, 0.0)), 0.3)

    def test_sigma_rejects_bad_arguments(self):
        with self.assertRaises(DomainError):
            sigma_distortion(0, 2, 1.5, 1.0)
        with self.assertRaises(DomainError):
            sigma_distortion(0, 2, 0.5, -1.0)

    def test_tau_known_values(self):
        self.assertAlmostEqual(float(tau_distortion(1, 3, 1.0, 0.7)), 1.0)
        self.assertAlmostEqual(float(tau_distortion(0, 2, 0.25, 1.0)), 0.25)
        self.assertEqual(float(tau_distortion(3, 2, 0.0, 10.0)), 0.0)
        self.assertEqual(tau_distortion(3, 2, 0.5, 10.0), ExtendedReal.infinity())

    def test_sigma_tau_consistency(self):
        rng = np.random.default_rng(23)
        for _ in range(300):
            K, N = rng.uniform(-2, 2), rng.uniform(1.5, 5)
            t, theta = rng.uniform(0, 1), rng.uniform(0, 2)
            tau = tau_distortion(K, N, t, theta)
            sigma = sigma_distortion(K, N - 1, t, theta)
            if not (tau.is_finite and sigma.is_finite):
                continue
            lhs = tau.value ** N
            rhs = t * sigma.value ** (N - 1)
            self.assertAlmostEqual(lhs, rhs, delta=1e-12 * max(1.0, abs(rhs)))


class StabilityMarginTests(SimpleTestCase):
    def test_margin_is_admissible_and_monotone(self):
        p = ComparisonTriple(0, 2, 3)
        base = float(inradius_comparison_r(p))
        self.assertAlmostEqual(base, 1.0)
        deltas = []
        for epsilon in (1e-1, 1e-2, 1e-3):
            delta = stability_margin(p, epsilon)
            self.assertGreater(delta, 0)
            self.assertLessEqual(float(inradius_comparison_r(p.perturbed(delta))), base + epsilon)
            deltas.append(delta)
        self.assertGreater(deltas[0], deltas[1])
        self.assertGreater(deltas[1], deltas[2])

    def test_margin_shrinks_to_zero(self):
        self.assertLess(stability_margin(ComparisonTriple(0, 2, 3), 1e-9), 1e-8)

    def test_infinite_root_is_degenerate(self):
        with self.assertRaises(DegenerateInputError):
            stability_margin(ComparisonTriple(-1, 0, 2), 0.1)

    def test_epsilon_must_be_positive(self):
        with self.assertRaises(DomainError):
            stability_margin(ComparisonTriple(0, 2, 3), 0.0)
