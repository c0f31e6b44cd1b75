import itertools
import math
import tempfile
import warnings
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, tag
from scipy import sparse

from common.exceptions import (
    DegenerateDecompositionWarning,
    DegenerateInputError,
    DomainError,
    EmptyClassError,
    InputParseError,
    PreconditionViolation,
)
from common.serializers import write_json
from discrete_needles.io import read_membership, read_space_csv, read_space_json, write_space_json
from discrete_needles.models import BoundMode, DiscreteMMS, RayFlag, SubsetSpec, TransportRelation
from discrete_needles.services import (
    backward_mc_estimate,
    ball_subset,
    branching_points,
    conditional_densities,
    exterior_ball_check,
    extract_chains,
    finite_inner_curvature_check,
    inner_mean_curvature_field,
    inradius,
    level_subset,
    ray_decomposition,
    signed_distance,
    surface_measure,
    transport_ordering,
    verify_inradius_bound,
    weighted_quantile,
)
from model_spaces.services import (
    circle_base,
    polar_disk_sample,
    sharpness_witness,
    sphere_base,
    truncated_cone_sample,
    truncation_subset,
)


def _line(points=201, length=2.0):
    x = np.linspace(0.0, length, points)
    return DiscreteMMS.from_coordinates(x, np.full(points, length / (points - 1))), x


def _tree_space(nodes, weights=None):
    """
    Tree metric from (branch, depth) pairs; branches other than 'stem' leave
    the stem at depth ``fork``.
    """
    fork = max(depth for branch, depth in nodes if branch == 'stem')
    n = len(nodes)
    metric = np.zeros((n, n))
    for i, (branch_i, depth_i) in enumerate(nodes):
        for j, (branch_j, depth_j) in enumerate(nodes):
            if branch_i == branch_j or 'stem' in (branch_i, branch_j):
                metric[i, j] = abs(depth_i - depth_j)
            else:
                metric[i, j] = (depth_i - fork) + (depth_j - fork)
    return DiscreteMMS(weights=np.ones(n) if weights is None else weights, metric=metric)


def _star(rng):
    """Hub 0 plus 1-3 legs of random length; u is the distance from the hub."""
    legs = rng.integers(1, 4)
    depths, owners = [0.0], [-1]
    for leg in range(legs):
        count = rng.integers(1, 12 // legs)
        depths.extend(np.cumsum(rng.uniform(0.2, 1.0, count)).tolist())
        owners.extend([leg] * count)
    depths, owners = np.array(depths), np.array(owners)
    same = (owners[:, None] == owners[None, :]) | (owners[:, None] < 0) | (owners[None, :] < 0)
    metric = np.where(same, np.abs(depths[:, None] - depths[None, :]), depths[:, None] + depths[None, :])
    np.fill_diagonal(metric, 0.0)
    return DiscreteMMS(weights=np.ones(depths.size), metric=metric), depths


def _exhaustive_chains(relation, candidates):
    pairs = relation.as_set()
    nodes = np.flatnonzero(candidates).tolist()
    related = {(i, j) for i, j in pairs} | {(j, i) for i, j in pairs}
    chains = []
    for size in range(len(nodes), 0, -1):
        for subset in itertools.combinations(nodes, size):
            if all((a, b) in related for a, b in itertools.combinations(subset, 2)):
                chosen = frozenset(subset)
                if not any(chosen < other for other in chains):
                    chains.append(chosen)
    return set(chains)


class DiscreteSpaceTests(SimpleTestCase):
    def test_rejects_asymmetric_metric(self):
        with self.assertRaises(DegenerateInputError):
            DiscreteMMS(weights=[1, 1], metric=[[0, 1], [2, 0]])

    def test_rejects_negative_weights_and_empty_mass(self):
        with self.assertRaises(DegenerateInputError):
            DiscreteMMS(weights=[1, -1], metric=[[0, 1], [1, 0]])
        with self.assertRaises(DegenerateInputError):
            DiscreteMMS(weights=[0, 0], metric=[[0, 1], [1, 0]])

    def test_triangle_violation(self):
        space = DiscreteMMS(weights=[1, 1, 1], metric=[[0, 1, 5], [1, 0, 1], [5, 1, 0]])
        self.assertAlmostEqual(space.triangle_excess(), 3 / 5)
        with self.assertRaises(DegenerateInputError):
            space.validate()

    def test_row_blocks_cover_all_points(self):
        space, _ = _line(11)
        seen = np.concatenate([rows for rows, _ in space.iter_row_blocks(block_rows=4)])
        self.assertEqual(seen.tolist(), list(range(11)))

    def test_subset_needs_both_classes(self):
        with self.assertRaises(EmptyClassError):
            SubsetSpec(np.ones(4, dtype=bool))
        with self.assertRaises(EmptyClassError):
            SubsetSpec(np.zeros(4, dtype=bool))

    def test_ball_and_level_subsets(self):
        space, x = _line(21)
        ball = ball_subset(space, 0, 0.5)
        self.assertEqual(np.flatnonzero(ball.inside).tolist(), list(range(6)))
        disk = polar_disk_sample(angles=8, radial_steps=4, exterior_steps=2)
        level = level_subset(disk, 1.0)
        self.assertEqual(int(level.inside.sum()), 32)
        with self.assertRaises(DegenerateInputError):
            level_subset(space, 1.0, attribute='height')


class InterchangeTests(SimpleTestCase):
    def test_json_round_trip(self):
        space, _ = _line(6)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_space_json(Path(tmp) / 'space.json', space)
            loaded = read_space_json(path)
        np.testing.assert_array_equal(loaded.dense_metric(), space.dense_metric())
        np.testing.assert_array_equal(loaded.weights, space.weights)

    def test_csv_pair(self):
        with tempfile.TemporaryDirectory() as tmp:
            matrix = Path(tmp) / 'metric.csv'
            matrix.write_text('0,1,2\n1,0,1\n2,1,0\n', encoding='utf-8')
            weights = Path(tmp) / 'weights.csv'
            weights.write_text('weight\n1\n2\n1\n', encoding='utf-8')
            space = read_space_csv(matrix, weights)
        self.assertEqual(space.n, 3)
        self.assertEqual(space.total_mass, 4.0)

    def test_rejects_malformed_spaces(self):
        with tempfile.TemporaryDirectory() as tmp:
            short = write_json(Path(tmp) / 'short.json', {'n': 2, 'metric': [0, 1, 1], 'weights': [1, 1]})
            with self.assertRaises(InputParseError):
                read_space_json(short)
            broken = write_json(Path(tmp) / 'broken.json',
                                {'n': 3, 'metric': [0, 1, 5, 1, 0, 1, 5, 1, 0], 'weights': [1, 1, 1]})
            with self.assertRaises(InputParseError):
                read_space_json(broken)
            garbage = Path(tmp) / 'garbage.json'
            garbage.write_text('{not json', encoding='utf-8')
            with self.assertRaises(InputParseError):
                read_space_json(garbage)

    def test_membership_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            indices = write_json(Path(tmp) / 'omega.json', {'inside': [0, 1]})
            self.assertEqual(read_membership(indices, 4).inside.tolist(), [True, True, False, False])
            flags = Path(tmp) / 'omega.csv'
            flags.write_text('inside\n0\n1\n1\n0\n', encoding='utf-8')
            self.assertEqual(read_membership(flags, 4).inside.tolist(), [False, True, True, False])
            out_of_range = write_json(Path(tmp) / 'bad.json', {'inside': [7]})
            with self.assertRaises(InputParseError):
                read_membership(out_of_range, 4)


class SignedDistanceTests(SimpleTestCase):
    def setUp(self):
        self.space, self.x = _line()
        self.omega = SubsetSpec(self.x <= 1.0 + 1e-9)

    def test_line_signed_distance(self):
        field = signed_distance(self.space, self.omega)
        self.assertLessEqual(np.max(np.abs(field.u - (self.x - 1.0))), 0.01)
        self.assertTrue(np.all(field.u[self.omega.inside] < 0))
        self.assertTrue(np.all(field.u[self.omega.outside] > 0))
        self.assertLessEqual(field.lipschitz_excess, 1e-12)
        self.assertAlmostEqual(field.resolution, 0.01)

    def test_uncorrected_distance_outside(self):
        field = signed_distance(self.space, self.omega, boundary_correction='none')
        outside = self.omega.outside
        np.testing.assert_allclose(field.u[outside], self.x[outside] - 1.0, atol=1e-12)

    def test_inradius_of_interval(self):
        # the far end 0 sits 1.01 from the first outside point
        self.assertAlmostEqual(inradius(self.space, self.omega), 1.01, places=12)
        field = signed_distance(self.space, self.omega)
        self.assertAlmostEqual(field.placed_inradius(self.omega), 1.005, places=12)
        self.assertAlmostEqual(field.mesh_allowance(self.omega), 0.005, places=12)

    def test_inradius_is_raw_distance_to_complement(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            points = rng.uniform(-1.0, 1.0, (60, 2))
            space = DiscreteMMS.from_coordinates(points, np.ones(60))
            inside = np.linalg.norm(points, axis=1) <= 0.7
            if inside.all() or not inside.any():
                continue
            metric = space.dense_metric()
            expected = metric[np.ix_(inside, ~inside)].min(axis=1).max()
            self.assertAlmostEqual(inradius(space, SubsetSpec(inside)), expected, places=12)

    def test_truncated_cone_signed_distance(self):
        witness = sharpness_witness(0.0, 1.0, 2.0)
        sample = truncated_cone_sample(witness.space, witness.R, 16)
        omega = truncation_subset(sample, witness.R)
        field = signed_distance(sample, omega)
        np.testing.assert_allclose(field.u, sample.attributes['t'] - witness.R, atol=1e-12)
        self.assertAlmostEqual(field.inradius(omega), 1.0 + 1 / 32, places=12)
        self.assertAlmostEqual(field.placed_inradius(omega), 1.0, places=12)
        self.assertAlmostEqual(field.mesh_allowance(omega), 1 / 32, places=12)


class TransportOrderingTests(SimpleTestCase):
    def test_line_is_totally_ordered(self):
        space, x = _line(21)
        relation = transport_ordering(space, x)
        self.assertEqual(relation.count, 21 * 20 // 2)
        self.assertTrue(relation.contains(0, 20))
        self.assertFalse(relation.contains(20, 0))
        self.assertLessEqual(relation.lipschitz_excess, 1e-12)

    def test_rejects_wrong_length(self):
        space, x = _line(21)
        with self.assertRaises(DegenerateInputError):
            transport_ordering(space, x[:-1])

    def test_y_junction_branches_forward(self):
        nodes = [('stem', 0.1 * k) for k in range(5)]
        nodes += [('a', 0.4 + 0.1 * k) for k in range(1, 4)]
        nodes += [('b', 0.4 + 0.1 * k) for k in range(1, 4)]
        space = _tree_space(nodes)
        u = np.array([depth for _, depth in nodes])
        branching = branching_points(space, transport_ordering(space, u))
        junction, first_a = 4, 5
        self.assertIn(junction, branching.A_plus)
        self.assertNotIn(first_a, branching.A_plus)
        self.assertNotIn(first_a, branching.A_minus)
        self.assertNotIn(7, branching.A_plus)

    def test_chains_match_exhaustive_enumeration(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            space, depths = _star(rng)
            self.assertLessEqual(space.n, 12)
            relation = transport_ordering(space, depths)
            branching = branching_points(space, relation)
            candidates = np.ones(space.n, dtype=bool)
            candidates[branching.A_plus] = False
            candidates[branching.A_minus] = False
            chains = extract_chains(relation, candidates, min_chain_points=1)
            self.assertEqual({frozenset(chain.tolist()) for chain in chains},
                             _exhaustive_chains(relation, candidates))
            for chain in chains:
                self.assertTrue(np.all(np.diff(depths[chain]) > 0))

    def test_greedy_split_of_a_diamond(self):
        pairs = sparse.csr_matrix((np.ones(5, dtype=bool), ([0, 0, 0, 1, 2], [1, 2, 3, 3, 3])), shape=(4, 4))
        relation = TransportRelation(pairs=pairs, u=np.array([0.0, 1.0, 1.0, 2.0]), tol=1e-6, lipschitz_excess=0.0)
        chains = extract_chains(relation, np.ones(4, dtype=bool), min_chain_points=1)
        self.assertEqual([chain.tolist() for chain in chains], [[0, 1, 3], [2]])


class RayDecompositionTests(SimpleTestCase):
    def setUp(self):
        self.space, self.x = _line()
        self.omega = SubsetSpec(self.x <= 1.0 + 1e-9)

    def test_line_is_one_crossing_ray(self):
        decomposition = ray_decomposition(self.space, self.omega)
        self.assertEqual(len(decomposition.rays), 1)
        ray = decomposition.rays[0]
        self.assertEqual(ray.flag, RayFlag.CROSSES_S)
        self.assertEqual(ray.size, 201)
        self.assertEqual(decomposition.unassigned_mass, 0.0)
        self.assertTrue(np.all(decomposition.assignment == 0))
        self.assertEqual(decomposition.warnings, [])

    def test_line_surface_measure_and_mass_bookkeeping(self):
        decomposition = conditional_densities(self.space, ray_decomposition(self.space, self.omega))
        self.assertAlmostEqual(surface_measure(decomposition).total, 1.0, delta=0.01)
        assigned = decomposition.total_mass - decomposition.unassigned_mass
        carried = sum(ray.quotient_weight * ray.density.integral() for ray in decomposition.rays)
        self.assertAlmostEqual(carried, assigned, places=12)
        curvature = inner_mean_curvature_field(decomposition)
        self.assertEqual(len(curvature), 1)
        self.assertLessEqual(abs(float(curvature[0].value)), 1e-6)

    def test_single_far_outside_point(self):
        omega = SubsetSpec(self.x < 2.0 - 1e-9)
        decomposition = conditional_densities(self.space, ray_decomposition(self.space, omega))
        self.assertEqual(finite_inner_curvature_check(decomposition).B_out_mass, 0.0)

    def test_densities_are_required(self):
        decomposition = ray_decomposition(self.space, self.omega)
        with self.assertRaises(PreconditionViolation):
            inner_mean_curvature_field(decomposition)
        with self.assertRaises(PreconditionViolation):
            surface_measure(decomposition)

    def test_isolated_inner_chains(self):
        nodes = [('line', 0.1 * k) for k in range(21)] + [('side', 0.1 * j) for j in range(5)]
        n = len(nodes)
        metric = np.zeros((n, n))
        for i, (branch_i, depth_i) in enumerate(nodes):
            for j, (branch_j, depth_j) in enumerate(nodes):
                if branch_i == branch_j:
                    metric[i, j] = abs(depth_i - depth_j)
                else:
                    side, line = (depth_i, depth_j) if branch_i == 'side' else (depth_j, depth_i)
                    metric[i, j] = 1.0 + (0.4 - side) + abs(line - 0.5)
        space = DiscreteMMS(weights=np.ones(n), metric=metric)
        inside = np.array([branch == 'side' or depth <= 1.0 + 1e-9 for branch, depth in nodes])
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', DegenerateDecompositionWarning)
            decomposition = ray_decomposition(space, SubsetSpec(inside), bundle_points=0)
        self.assertEqual(sorted(ray.flag for ray in decomposition.rays), [RayFlag.INNER_ONLY] * 2)
        masses = finite_inner_curvature_check(decomposition)
        self.assertEqual(masses.B_in_mass, 10.0)
        self.assertEqual(masses.B_out_mass, 0.0)

    def test_generic_cloud_warns(self):
        rng = np.random.default_rng(3)
        points = rng.uniform(-1, 1, (40, 2))
        space = DiscreteMMS.from_coordinates(points, np.ones(40))
        omega = SubsetSpec(np.linalg.norm(points, axis=1) <= 0.6)
        with self.assertWarns(DegenerateDecompositionWarning):
            decomposition = ray_decomposition(space, omega, bundle_points=0)
        self.assertGreater(decomposition.unassigned_fraction, 0.2)
        self.assertTrue(decomposition.warnings)

    def test_generic_cloud_is_bundled(self):
        rng = np.random.default_rng(3)
        points = rng.uniform(-1, 1, (40, 2))
        space = DiscreteMMS.from_coordinates(points, np.ones(40))
        omega = SubsetSpec(np.linalg.norm(points, axis=1) <= 0.6)
        with warnings.catch_warnings():
            warnings.simplefilter('error', DegenerateDecompositionWarning)
            decomposition = ray_decomposition(space, omega)
        bundles = [ray for ray in decomposition.rays if ray.bundled]
        self.assertEqual(len(bundles), 1)
        self.assertEqual(bundles[0].flag, RayFlag.CROSSES_S)
        self.assertEqual(decomposition.unassigned_mass, 0.0)
        self.assertEqual(decomposition.warnings, [])
        np.testing.assert_array_equal(np.sort(bundles[0].points),
                                      np.flatnonzero(decomposition.assignment == len(decomposition.rays) - 1))


class ExteriorBallTests(SimpleTestCase):
    def test_disk_has_exterior_balls(self):
        disk = polar_disk_sample()
        omega = truncation_subset(disk, 1.0)
        self.assertTrue(exterior_ball_check(disk, omega, 0.2))

    def test_two_disk_union_has_a_cusp(self):
        xs = np.linspace(-1.5, 1.5, 61)
        ys = np.linspace(-1.25, 1.25, 51)
        grid = np.array([(x, y) for x in xs for y in ys])
        space = DiscreteMMS.from_coordinates(grid, np.ones(len(grid)))
        left = np.hypot(grid[:, 0] + 0.5, grid[:, 1]) <= 0.8
        right = np.hypot(grid[:, 0] - 0.5, grid[:, 1]) <= 0.8
        self.assertFalse(exterior_ball_check(space, SubsetSpec(left | right), 0.5))

    def test_rejects_nonpositive_radius(self):
        space, x = _line(21)
        with self.assertRaises(DomainError):
            exterior_ball_check(space, SubsetSpec(x <= 1.0), 0.0)


class WeightedQuantileTests(SimpleTestCase):
    def test_weighted_median(self):
        self.assertEqual(weighted_quantile([3.0, 1.0, 2.0], [1.0, 1.0, 5.0], 0.5), 2.0)

    def test_low_quantile_and_infinities(self):
        values = [math.inf, 1.0, 2.0]
        self.assertEqual(weighted_quantile(values, [1.0, 1.0, 1.0], 0.05), 1.0)
        self.assertEqual(weighted_quantile(values, [1.0, 1.0, 1.0], 1.0), math.inf)

    def test_empty(self):
        with self.assertRaises(DegenerateInputError):
            weighted_quantile([], [], 0.5)


class VerifyBoundTests(SimpleTestCase):
    def setUp(self):
        self.space, self.x = _line()
        self.omega = SubsetSpec(self.x <= 1.0 + 1e-9)

    def test_flat_line_has_no_finite_bound(self):
        report = verify_inradius_bound(self.space, self.omega, 0.0, 2.0)
        self.assertTrue(report.passed)
        self.assertTrue(not report.r_comparison.is_finite or float(report.r_comparison) > 1e6)

    def test_inflated_curvature_claim_fails(self):
        report = verify_inradius_bound(self.space, self.omega, 0.0, 2.0, H_override=10.0)
        self.assertFalse(report.passed)
        self.assertAlmostEqual(float(report.r_comparison), 0.1)
        self.assertLess(report.margin, 0)
        self.assertTrue(report.H_overridden)

    def test_one_endpoint_mode(self):
        report = verify_inradius_bound(self.space, self.omega, 0.0, 2.0, mode=BoundMode.MCP)
        self.assertTrue(report.passed)
        self.assertEqual(report.mode, 'mcp')

    def test_rejects_dimension_one(self):
        with self.assertRaises(DomainError):
            verify_inradius_bound(self.space, self.omega, 0.0, 1.0)


class DiskExperimentTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.disk = polar_disk_sample()
        cls.omega = truncation_subset(cls.disk, 1.0)
        cls.decomposition = conditional_densities(cls.disk, ray_decomposition(cls.disk, cls.omega))

    def test_forty_radial_rays(self):
        self.assertEqual(len(self.decomposition.rays), 40)
        self.assertTrue(all(ray.flag == RayFlag.CROSSES_S for ray in self.decomposition.rays))
        self.assertEqual(self.decomposition.unassigned_mass, 0.0)

    def test_inradius_and_curvature(self):
        radius = self.decomposition.signed_distance.inradius(self.omega)
        self.assertTrue(0.95 <= radius <= 1.0 + 1e-12)
        field = inner_mean_curvature_field(self.decomposition)
        median = weighted_quantile([float(sample.value) for sample in field],
                                   [sample.surface_mass for sample in field], 0.5)
        self.assertTrue(0.85 <= median <= 1.15)

    def test_surface_measure_is_circumference(self):
        self.assertAlmostEqual(surface_measure(self.decomposition).total, 2 * math.pi, delta=0.2 * math.pi)

    def test_bound_passes(self):
        report = verify_inradius_bound(self.disk, self.omega, 0.0, 2.0, decomposition=self.decomposition)
        self.assertTrue(report.passed)
        self.assertGreaterEqual(report.headroom, 0.0)
        self.assertAlmostEqual(report.mesh_allowance, 0.0125, places=9)

    def test_exterior_balls_leave_no_inner_only_mass(self):
        self.assertTrue(exterior_ball_check(self.disk, self.omega, 4 * self.decomposition.signed_distance.resolution))
        masses = finite_inner_curvature_check(self.decomposition)
        self.assertLessEqual(masses.B_in_mass, 0.01 * self.decomposition.total_mass)

    def test_backward_curvature_matches_inner(self):
        self.assertAlmostEqual(float(backward_mc_estimate(self.decomposition)), 1.0, delta=0.05)

    def test_threaded_densities_agree(self):
        threaded = conditional_densities(self.disk, ray_decomposition(self.disk, self.omega), threads=4)
        for serial, parallel in zip(self.decomposition.rays, threaded.rays):
            np.testing.assert_array_equal(serial.density.values, parallel.density.values)

    def test_backward_curvature_needs_rays(self):
        with self.assertRaises(DegenerateInputError):
            backward_mc_estimate(self.decomposition, Y=[])


def _uniform_disk(rng, n, radius):
    """n iid uniform points in a disk of ``radius``, each weighted by its share of the area."""
    r = radius * np.sqrt(rng.uniform(size=n))
    theta = rng.uniform(0, 2 * np.pi, n)
    points = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return DiscreteMMS.from_coordinates(points, np.full(n, np.pi * radius ** 2 / n)), points


class RandomDiskTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.disk, cls.points = _uniform_disk(np.random.default_rng(11), 2000, 1.25)
        cls.omega = SubsetSpec(np.linalg.norm(cls.points, axis=1) <= 1.0)
        cls.decomposition = conditional_densities(cls.disk, ray_decomposition(cls.disk, cls.omega))

    def test_exact_chains_alone_miss_the_mass(self):
        space, points = _uniform_disk(np.random.default_rng(2), 500, 1.2)
        omega = SubsetSpec(np.linalg.norm(points, axis=1) <= 1.0)
        with self.assertWarns(DegenerateDecompositionWarning):
            exact = ray_decomposition(space, omega, bundle_points=0)
        self.assertGreater(exact.unassigned_fraction, 0.9)
        bundled = ray_decomposition(space, omega)
        self.assertGreater(len(bundled.rays), 0)
        self.assertLessEqual(bundled.unassigned_fraction, 0.2)
        self.assertEqual(bundled.warnings, [])

    def test_bundles_cover_the_disk(self):
        rays = self.decomposition.rays
        self.assertGreaterEqual(len([ray for ray in rays if ray.bundled]), 5)
        self.assertEqual(self.decomposition.unassigned_mass, 0.0)
        for ray in rays:
            if not ray.bundled:
                continue
            self.assertEqual(ray.flag, RayFlag.CROSSES_S)
            inside = ray.points[self.omega.inside[ray.points]]
            angles = np.arctan2(self.points[inside, 1], self.points[inside, 0])
            # members fan out from one stretch of the boundary
            self.assertGreater(abs(np.exp(1j * angles).mean()), 0.8)

    def test_inradius_and_curvature(self):
        radius = self.decomposition.signed_distance.inradius(self.omega)
        self.assertTrue(0.95 <= radius <= 1.05)
        field = inner_mean_curvature_field(self.decomposition)
        median = weighted_quantile([float(sample.value) for sample in field],
                                   [sample.surface_mass for sample in field], 0.5)
        self.assertTrue(0.85 <= median <= 1.15, median)

    def test_surface_measure_is_circumference(self):
        self.assertAlmostEqual(surface_measure(self.decomposition).total, 2 * math.pi, delta=0.2 * math.pi)

    def test_bound_passes(self):
        report = verify_inradius_bound(self.disk, self.omega, 0.0, 2.0, decomposition=self.decomposition)
        self.assertTrue(report.passed)
        self.assertGreaterEqual(report.headroom, 0.0)


def _witness_chi(K, N):
    """Boundary curvature per dimension of the standard witness of each model kind."""
    return {1: 0.0, 0: 1.0, -1: 2.0}[round(K / (N - 1))]


def _small_base(N):
    return circle_base(16) if N - 1 <= 1.5 else sphere_base(16)


def _truncation(K, N, steps):
    witness = sharpness_witness(K, _witness_chi(K, N), N, base=_small_base(N))
    sample = truncated_cone_sample(witness.space, witness.R, steps)
    return witness, sample, truncation_subset(sample, witness.R)


class TruncatedModelQuickTests(SimpleTestCase):
    def test_coarse_euclidean_witness(self):
        witness, sample, omega = _truncation(0.0, 2.0, 32)
        report = verify_inradius_bound(sample, omega, witness.K, witness.N)
        self.assertTrue(report.passed)
        self.assertEqual(report.tolerance, 1e-6)
        self.assertAlmostEqual(report.inradius, 1.0 + 1 / 64, places=12)
        self.assertAlmostEqual(report.mesh_allowance, 1 / 64, places=12)
        self.assertGreaterEqual(report.headroom, 0.0)
        self.assertLessEqual(report.headroom, 0.05)

    def test_coarse_witnesses_pass_at_default_tolerance(self):
        cases = [(1.0, 2.0, 64), (2.0, 3.0, 64), (0.0, 3.0, 32), (-2.0, 3.0, 32)]
        for K, N, steps in cases:
            with self.subTest(K=K, N=N, steps=steps):
                witness, sample, omega = _truncation(K, N, steps)
                report = verify_inradius_bound(sample, omega, witness.K, witness.N)
                self.assertTrue(report.passed, report.headroom)
                self.assertGreaterEqual(report.headroom, 0.0)
                spacing = witness.R / steps
                self.assertAlmostEqual(report.mesh_allowance, spacing / 2, places=9)
                self.assertLessEqual(abs(report.margin), report.mesh_allowance + spacing)

    def test_base_size_does_not_move_the_bound(self):
        coarse = verify_inradius_bound(*_truncation(0.0, 2.0, 32)[1:], 0.0, 2.0)
        witness = sharpness_witness(0.0, 1.0, 2.0, base=circle_base(24))
        sample = truncated_cone_sample(witness.space, witness.R, 32)
        finer = verify_inradius_bound(sample, truncation_subset(sample, witness.R), 0.0, 2.0)
        self.assertAlmostEqual(float(coarse.H_lower), float(finer.H_lower), places=9)


@tag('slow')
class SharpnessAcceptanceTests(SimpleTestCase):
    """Truncated models at the comparison radius on a 16-point base, default tolerance."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.decompositions = {}

    def _decomposition(self, K, N, steps):
        key = (K, N, steps)
        if key not in self.decompositions:
            witness, sample, omega = _truncation(K, N, steps)
            decomposition = conditional_densities(sample, ray_decomposition(sample, omega))
            self.decompositions[key] = (witness, sample, omega, decomposition)
        return self.decompositions[key]

    def _report(self, K, N, steps):
        witness, sample, omega, decomposition = self._decomposition(K, N, steps)
        return verify_inradius_bound(sample, omega, witness.K, witness.N, decomposition=decomposition)

    def test_all_models_pass_at_full_resolution(self):
        for N in (2.0, 3.0):
            for K in (N - 1, 0.0, -(N - 1)):
                with self.subTest(K=K, N=N):
                    report = self._report(K, N, 256)
                    self.assertTrue(report.passed)
                    self.assertGreaterEqual(report.headroom, 0.0)
                    self.assertLessEqual(report.headroom, 0.05)

    def test_headroom_shrinks_with_resolution(self):
        for K in (0.0, -2.0):
            with self.subTest(K=K):
                reports = [self._report(K, 3.0, steps) for steps in (32, 64, 128, 256)]
                self.assertTrue(all(report.passed for report in reports))
                headroom = [report.headroom for report in reports]
                self.assertTrue(all(later < earlier for earlier, later in zip(headroom, headroom[1:])), headroom)

    def test_euclidean_mean_curvature_recovery(self):
        for N in (2.0, 3.0):
            with self.subTest(N=N):
                decomposition = self._decomposition(0.0, N, 256)[3]
                field = inner_mean_curvature_field(decomposition)
                values = [float(sample.value) for sample in field]
                weights = [sample.surface_mass for sample in field]
                median = weighted_quantile(values, weights, 0.5)
                self.assertTrue(0.9 * (N - 1) <= median <= 1.1 * (N - 1))
                mean = float(np.average(values, weights=weights))
                backward = float(backward_mc_estimate(decomposition))
                self.assertLessEqual(abs(backward - mean), 0.05 * abs(mean))
