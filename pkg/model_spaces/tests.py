import math

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import (
    DegenerateInputError,
    DomainError,
    ParameterMismatchError,
    SizeCapExceeded,
    UnsupportedParameterError,
)
from discrete_needles.services import conditional_densities, ray_decomposition
from model_spaces.models import ConePoint, ModelKind, ModelSpace
from model_spaces.services import (
    builtin_base,
    circle_base,
    cone_distance,
    cone_distances,
    point_base,
    polar_disk_sample,
    radial_density,
    sharpness_witness,
    signed_distance_in_truncated_cone,
    sphere_base,
    truncated_cone_sample,
    truncation_subset,
    volume_cone_check,
)


class BaseSpaceTests(SimpleTestCase):
    def test_circle_has_requested_diameter_and_length(self):
        base = circle_base(16)
        self.assertAlmostEqual(base.dense_metric().max(), math.pi)
        self.assertAlmostEqual(base.total_mass, 2 * math.pi)

    def test_circle_diameter_is_capped_at_pi(self):
        self.assertAlmostEqual(circle_base(8, diameter=5.0).dense_metric().max(), math.pi)

    def test_sphere_is_a_metric_with_area_measure(self):
        base = sphere_base(40)
        self.assertLessEqual(base.dense_metric().max(), math.pi)
        self.assertAlmostEqual(base.total_mass, 4 * math.pi)
        self.assertLessEqual(base.triangle_excess(), 1e-9)

    def test_builtin_lookup(self):
        self.assertEqual(builtin_base('point').n, 1)
        self.assertEqual(builtin_base('circle', 12).n, 12)
        with self.assertRaises(UnsupportedParameterError):
            builtin_base('torus')


class ConeDistanceTests(SimpleTestCase):
    def setUp(self):
        self.base = circle_base(4)

    def test_euclidean_antipodal_points(self):
        space = ModelSpace(ModelKind.EUCLIDEAN_CONE, 1, self.base)
        self.assertAlmostEqual(cone_distance(space, ConePoint(1.0, 0), ConePoint(1.0, 2)), 2.0, places=12)

    def test_same_ray_is_radial_difference(self):
        for kind in ModelKind.values:
            space = ModelSpace(kind, 2, self.base)
            self.assertAlmostEqual(cone_distance(space, ConePoint(0.4, 1), ConePoint(1.3, 1)), 0.9, places=12)

    def test_suspension_equator(self):
        space = ModelSpace(ModelKind.SPHERICAL_SUSPENSION, 1, self.base)
        distance = cone_distance(space, ConePoint(math.pi / 2, 0), ConePoint(math.pi / 2, 1))
        self.assertAlmostEqual(distance, math.pi / 2, places=12)

    def test_hyperbolic_matches_cosine_law(self):
        t, s, theta = 1.0, 2.0, 1.0
        expected = math.acosh(math.cosh(t) * math.cosh(s) - math.sinh(t) * math.sinh(s) * math.cos(theta))
        self.assertAlmostEqual(float(cone_distances(ModelKind.HYPERBOLIC_CONE, t, s, theta)), expected, places=10)

    def test_base_distance_is_truncated_at_pi(self):
        near = cone_distances(ModelKind.EUCLIDEAN_CONE, 1.0, 1.0, math.pi)
        far = cone_distances(ModelKind.EUCLIDEAN_CONE, 1.0, 1.0, 4.0)
        self.assertEqual(float(near), float(far))

    def test_tip_distance_is_radius(self):
        space = ModelSpace(ModelKind.HYPERBOLIC_CONE, 1, self.base)
        self.assertAlmostEqual(cone_distance(space, ConePoint(0.0, 0), ConePoint(0.7, 3)), 0.7, places=12)

    def test_rejects_radius_beyond_suspension(self):
        space = ModelSpace(ModelKind.SPHERICAL_SUSPENSION, 1, self.base)
        with self.assertRaises(DomainError):
            cone_distance(space, ConePoint(4.0, 0), ConePoint(1.0, 0))


class RadialDensityTests(SimpleTestCase):
    def test_power_of_radius(self):
        space = ModelSpace(ModelKind.EUCLIDEAN_CONE, 2, point_base())
        self.assertEqual(radial_density(space, 3.0), 9.0)

    def test_zero_exponent_is_one_at_tip(self):
        space = ModelSpace(ModelKind.EUCLIDEAN_CONE, 0, point_base())
        self.assertEqual(radial_density(space, 0.0), 1.0)

    def test_suspension_and_hyperbolic(self):
        suspension = ModelSpace(ModelKind.SPHERICAL_SUSPENSION, 3, point_base())
        hyperbolic = ModelSpace(ModelKind.HYPERBOLIC_CONE, 2, point_base())
        self.assertAlmostEqual(radial_density(suspension, math.pi / 2), 1.0)
        self.assertAlmostEqual(radial_density(hyperbolic, 1.0), math.sinh(1.0) ** 2)
        with self.assertRaises(DomainError):
            radial_density(suspension, 4.0)


class TruncatedSampleTests(SimpleTestCase):
    def test_disk_like_sample_mass(self):
        base = circle_base(16)
        space = ModelSpace(ModelKind.EUCLIDEAN_CONE, 1, base)
        sample = truncated_cone_sample(space, 1.0, 20)
        omega = truncation_subset(sample, 1.0)
        self.assertAlmostEqual(sample.weights[omega.inside].sum(), base.total_mass / 2, places=10)
        self.assertEqual(sample.weights[0], 0.0)
        self.assertTrue(omega.outside.any())

    def test_sample_is_a_metric(self):
        space = ModelSpace(ModelKind.SPHERICAL_SUSPENSION, 2, circle_base(6))
        sample = truncated_cone_sample(space, 1.0, 6)
        self.assertLessEqual(sample.triangle_excess(), 1e-9)
        self.assertLess(sample.attributes['t'].max(), math.pi)

    def test_exterior_layers_stop_before_far_tip(self):
        space = ModelSpace(ModelKind.SPHERICAL_SUSPENSION, 1, circle_base(4))
        sample = truncated_cone_sample(space, math.pi, 8)
        self.assertEqual(sample.n, 1 + 8 * 4)

    def test_size_cap(self):
        space = ModelSpace(ModelKind.EUCLIDEAN_CONE, 1, circle_base(64))
        with self.assertRaises(SizeCapExceeded):
            truncated_cone_sample(space, 1.0, 256, size_cap=1000)

    def test_rejects_bad_radius(self):
        space = ModelSpace(ModelKind.SPHERICAL_SUSPENSION, 1, circle_base(4))
        with self.assertRaises(DomainError):
            truncated_cone_sample(space, 4.0, 8)
        with self.assertRaises(DomainError):
            truncated_cone_sample(space, 0.0, 8)

    def test_large_samples_use_row_oracle(self):
        space = ModelSpace(ModelKind.EUCLIDEAN_CONE, 1, circle_base(64))
        sample = truncated_cone_sample(space, 1.0, 80)
        self.assertIsNone(sample.metric)
        rows = sample.rows([1, 2])
        self.assertEqual(rows.shape, (2, sample.n))
        self.assertAlmostEqual(rows[0, 0], sample.attributes['t'][1])

    def test_signed_distance_to_truncation(self):
        self.assertAlmostEqual(signed_distance_in_truncated_cone(ConePoint(0.25, 0), 1.0), 0.75)
        with self.assertRaises(DomainError):
            signed_distance_in_truncated_cone(ConePoint(1.5, 0), 1.0)

    def test_polar_disk(self):
        disk = polar_disk_sample()
        self.assertEqual(disk.n, 2000)
        self.assertAlmostEqual(disk.total_mass, math.pi * 1.25 ** 2, places=10)
        inside = truncation_subset(disk, 1.0)
        self.assertAlmostEqual(disk.weights[inside.inside].sum(), math.pi, places=10)


class VolumeConeTests(SimpleTestCase):
    def test_euclidean_ratio(self):
        space = ModelSpace(ModelKind.EUCLIDEAN_CONE, 2, point_base())
        self.assertTrue(volume_cone_check(space, 0.0, 3.0, 0.5, 1.0))

    def test_all_kinds_pass(self):
        cases = [
            (ModelKind.EUCLIDEAN_CONE, 1, 0.0, 0.3, 2.0),
            (ModelKind.HYPERBOLIC_CONE, 2, -2.0, 0.4, 1.5),
            (ModelKind.SPHERICAL_SUSPENSION, 1, 1.0, 0.3, math.pi / 2),
            (ModelKind.SPHERICAL_SUSPENSION, 2, 2.0, 0.5, 3.0),
        ]
        for kind, exponent, K, r, R in cases:
            with self.subTest(kind=kind, exponent=exponent):
                space = ModelSpace(kind, exponent, circle_base(8))
                self.assertTrue(volume_cone_check(space, K, exponent + 1, r, R, tol=1e-6, radial_steps=4000))

    def test_ratio_is_measured_on_a_sample(self):
        space = ModelSpace(ModelKind.HYPERBOLIC_CONE, 2, circle_base(8))
        # eight layers resolve the profile only to a fraction of a percent
        self.assertFalse(volume_cone_check(space, -2.0, 3.0, 0.4, 1.5, radial_steps=8))
        self.assertTrue(volume_cone_check(space, -2.0, 3.0, 0.4, 1.5, tol=0.05, radial_steps=8))
        sample = truncated_cone_sample(space, 1.5, 8)
        inside = sample.attributes['t'] <= 1.5
        self.assertAlmostEqual(sample.weights[inside].sum(), sample.weights[sample.rows([0])[0] <= 1.5].sum(),
                               places=12)

    def test_equal_radii(self):
        space = ModelSpace(ModelKind.HYPERBOLIC_CONE, 1, point_base())
        self.assertTrue(volume_cone_check(space, -1.0, 2.0, 0.7, 0.7))

    def test_mismatched_parameters(self):
        space = ModelSpace(ModelKind.EUCLIDEAN_CONE, 2, point_base())
        with self.assertRaises(ParameterMismatchError):
            volume_cone_check(space, 1.0, 3.0, 0.5, 1.0)
        with self.assertRaises(ParameterMismatchError):
            volume_cone_check(space, 0.0, 2.0, 0.5, 1.0)


class SampledModelTests(SimpleTestCase):
    def test_metric_axioms_for_every_kind(self):
        rng = np.random.default_rng(17)
        cases = [
            (ModelKind.EUCLIDEAN_CONE, circle_base(12), 2.0),
            (ModelKind.HYPERBOLIC_CONE, sphere_base(12), 1.5),
            (ModelKind.SPHERICAL_SUSPENSION, sphere_base(12), math.pi),
        ]
        for kind, base, R in cases:
            with self.subTest(kind=kind):
                t = rng.uniform(0.0, R, 300)
                x = rng.integers(0, base.n, 300)
                theta = np.minimum(base.dense_metric(), math.pi)[np.ix_(x, x)]
                metric = cone_distances(kind, t[:, None], t[None, :], theta)
                np.testing.assert_array_equal(metric, metric.T)
                np.testing.assert_array_equal(np.diag(metric), 0.0)
                for k in range(t.size):
                    through = metric[:, k][:, None] + metric[k, :][None, :]
                    self.assertLessEqual(float(np.max(metric - through)), 1e-12)
                sample = truncated_cone_sample(ModelSpace(kind, 2, base), min(R, 1.5), 16)
                self.assertLessEqual(sample.n, 300)
                self.assertLessEqual(sample.triangle_excess(), 1e-12)

    def test_ray_densities_follow_the_radial_density(self):
        cases = [
            (ModelKind.EUCLIDEAN_CONE, 1.0),
            (ModelKind.HYPERBOLIC_CONE, 1.0),
            (ModelKind.SPHERICAL_SUSPENSION, math.pi / 2),
        ]
        for kind, R in cases:
            with self.subTest(kind=kind):
                space = ModelSpace(kind, 2, sphere_base(8))
                sample = truncated_cone_sample(space, R, 256)
                decomposition = conditional_densities(
                    sample, ray_decomposition(sample, truncation_subset(sample, R)))
                self.assertEqual(len(decomposition.rays), 8)
                for ray in decomposition.rays:
                    t = sample.attributes['t'][ray.points]
                    middle = (t >= R / 3) & (t <= 2 * R / 3)
                    self.assertGreater(middle.sum(), 80)
                    observed = ray.quotient_weight * np.interp(ray.parameters, ray.density.grid,
                                                               ray.density.values)
                    expected = radial_density(space, t) * space.base.weights[sample.attributes['x'][ray.points]]
                    np.testing.assert_allclose(observed[middle], expected[middle], rtol=0.05)


class SharpnessWitnessTests(SimpleTestCase):
    def test_three_model_kinds(self):
        for N in (2.0, 3.0):
            euclidean = sharpness_witness(0.0, 1.0, N)
            self.assertEqual(euclidean.space.kind, ModelKind.EUCLIDEAN_CONE)
            self.assertAlmostEqual(euclidean.R, 1.0, places=12)
            suspension = sharpness_witness(N - 1, 0.0, N)
            self.assertEqual(suspension.space.kind, ModelKind.SPHERICAL_SUSPENSION)
            self.assertAlmostEqual(suspension.R, math.pi / 2, places=12)
            hyperbolic = sharpness_witness(-(N - 1), 2.0, N)
            self.assertEqual(hyperbolic.space.kind, ModelKind.HYPERBOLIC_CONE)
            self.assertAlmostEqual(hyperbolic.R, math.atanh(0.5), places=12)
            self.assertEqual(hyperbolic.achieved_inradius, hyperbolic.R)

    def test_mean_curvature_scales_with_dimension(self):
        for N in (2.0, 3.0, 4.5):
            unit = sharpness_witness(0.0, 1.0, N)
            self.assertAlmostEqual(unit.R, 1.0, places=12)
            self.assertAlmostEqual(unit.H, N - 1, places=12)
            half = sharpness_witness(0.0, 2.0, N)
            self.assertAlmostEqual(half.R, 0.5, places=12)
            cap = sharpness_witness(N - 1, 1.0, N)
            self.assertAlmostEqual(cap.R, math.pi / 4, places=12)

    def test_base_follows_dimension(self):
        self.assertEqual(sharpness_witness(0.0, 1.0, 2.0).space.base.n, 64)
        self.assertIn('coordinates', sharpness_witness(0.0, 1.0, 3.0).space.base.attributes)

    def test_unsupported_curvature(self):
        with self.assertRaises(UnsupportedParameterError):
            sharpness_witness(0.5, 1.0, 2.0)

    def test_ball_condition_failure(self):
        with self.assertRaises(DegenerateInputError):
            sharpness_witness(0.0, 0.0, 2.0)

    def test_rejects_dimension_one(self):
        with self.assertRaises(DomainError):
            sharpness_witness(0.0, 1.0, 1.0)
