import itertools
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import solve_ivp

from common.exceptions import DegenerateInputError, DomainError, InputParseError, PreconditionViolation
from comparison_kernel.models import ExtendedReal
from comparison_kernel.services import (
    cos_kappa,
    first_positive_zero,
    s_kappa_lambda,
    s_kappa_lambda_derivative,
    sigma_coefficients,
    sin_kappa,
)
from needle_1d.io import read_density_csv, write_density_csv
from needle_1d.models import NeedleDensity, SigmaReading
from needle_1d.services import (
    backward_mc_bounds,
    backward_mc_from_level_masses,
    check_cd_density,
    check_mcp_density,
    comparison_envelope,
    extremal_density,
    inner_mean_curvature_from_density,
    laplace_comparison_check,
    mcp_inradius_bound,
    mean_curvature_from_boundary_mass,
    one_sided_log_derivative,
    riccati_compare,
)


def _random_extremal_parameters(rng, max_radius=2.0):
    """Draw (K, H, N) whose comparison radius is finite and at most ``max_radius``."""
    while True:
        N = rng.uniform(2.0, 4.0)
        K = rng.uniform(-1.5, 1.5) * (N - 1)
        H = rng.uniform(-1.0, 3.0) * (N - 1)
        radius = first_positive_zero(K / (N - 1), H / (N - 1))
        if radius.is_finite and 0.2 <= radius.value <= max_radius:
            return K, H, N


def _scan_all_triples(h, K, N):
    """Worst two-endpoint and one-endpoint violations by brute force over every grid triple."""
    r, f = h.grid, h.powered(1.0 / (N - 1))
    i, j, k = np.array(list(itertools.combinations(range(r.size), 3))).T
    theta = r[k] - r[i]
    t = (r[j] - r[i]) / theta
    kappa = K / (N - 1)
    with np.errstate(invalid='ignore'):
        left = np.where(f[i] == 0, 0.0, sigma_coefficients(kappa, 1.0 - t, theta) * f[i])
        right = np.where(f[k] == 0, 0.0, sigma_coefficients(kappa, t, theta) * f[k])
    cd = left + right - f[j]
    mcp = np.maximum(left - f[j], right - f[j])
    return float(cd.max()), float(mcp.max())


def _random_concave_root(rng, kappa):
    """
    A random f ≥ 0 near 0 with f'' + κf ≤ 0 that is not κ-affine: the tangent
    cos_κ + d·sin_κ bent down by c·(1 − cos_κ)/κ, capped by a second κ-affine
    function that takes over away from 0.
    """
    d = rng.uniform(-2.0, 1.0)
    c = rng.uniform(0.0, 1.0)
    lift, tilt = rng.uniform(0.1, 0.5), d - rng.uniform(0.5, 2.0)

    def root(r):
        cos, sin = np.asarray(cos_kappa(kappa, r)), np.asarray(sin_kappa(kappa, r))
        bend = r ** 2 / 2 if kappa == 0 else (1 - cos) / kappa
        return np.minimum(cos + d * sin - c * bend, (1 + lift) * cos + tilt * sin)
    return root


class NeedleDensityTests(SimpleTestCase):
    def test_rejects_grid_without_zero(self):
        with self.assertRaises(DegenerateInputError):
            NeedleDensity([-1.0, -0.5, 0.5, 1.0], [1, 1, 1, 1])

    def test_rejects_negative_values(self):
        with self.assertRaises(DegenerateInputError):
            NeedleDensity([-1.0, -0.5, 0.0, 1.0], [1, -1, 1, 1])

    def test_rejects_short_grids(self):
        with self.assertRaises(DegenerateInputError):
            NeedleDensity([-1.0, 0.0, 1.0], [1, 1, 1])

    def test_from_function_puts_zero_on_grid(self):
        h = NeedleDensity.from_function(np.exp, -0.3, 1.0, 14)
        self.assertEqual(h.value_at_zero, 1.0)
        self.assertAlmostEqual(h.a, -0.3)

    def test_reflection_and_interpolation(self):
        h = NeedleDensity.from_function(lambda r: (1 + r) ** 2, -1.0, 0.0, 11)
        tilde = h.reflected()
        self.assertEqual(tilde.a, 0.0)
        self.assertAlmostEqual(tilde.b, 1.0)
        # linear in h^{1/2} reproduces (1 + r)^2 exactly
        self.assertAlmostEqual(h.value_at(-0.25, exponent=0.5), 0.5625, places=12)


class DensityCsvTests(SimpleTestCase):
    def test_round_trip(self):
        h = extremal_density(0, 2, 3, 1.0, samples=51)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_density_csv(Path(tmp) / 'h.csv', h)
            loaded = read_density_csv(path)
        np.testing.assert_array_equal(loaded.grid, h.grid)
        np.testing.assert_array_equal(loaded.values, h.values)

    def test_negative_value_is_a_parse_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.csv'
            path.write_text('r,h\n-1,0\n-0.5,-0.2\n-0.25,1\n0,1\n', encoding='utf-8')
            with self.assertRaises(InputParseError):
                read_density_csv(path)

    def test_header_is_checked(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'bad.csv'
            path.write_text('x,y\n-1,0\n-0.5,1\n-0.25,1\n0,1\n', encoding='utf-8')
            with self.assertRaises(InputParseError):
                read_density_csv(path)


class ConcavityCheckTests(SimpleTestCase):
    def test_constant_density_is_cd(self):
        h = NeedleDensity.from_function(np.ones_like, -1.0, 1.0, 41)
        self.assertTrue(check_cd_density(h, 0.0, 3.0).passed)

    def test_affine_root_is_the_equality_case(self):
        h = NeedleDensity.from_function(lambda r: (1 + r) ** 2, -1.0, 0.0, 41)
        report = check_cd_density(h, 0.0, 3.0)
        self.assertTrue(report.passed)
        self.assertLessEqual(report.worst_violation, 1e-12)

    def test_convex_density_fails(self):
        h = NeedleDensity.from_function(lambda r: np.exp(r ** 2), -1.0, 1.0, 41)
        report = check_cd_density(h, 0.0, 2.0)
        self.assertFalse(report.passed)
        self.assertGreater(report.worst_violation, 1e-3)
        r0, rt, r1 = report.worst_triple
        self.assertLess(r0, rt)
        self.assertLess(rt, r1)

    def test_extremal_densities_pass_with_equality(self):
        for K, H, N in ((0, 2, 3), (2, 0, 3), (-2, 4, 3), (1.5, 0.5, 2.5)):
            report = check_cd_density(extremal_density(K, H, N, 1.0, samples=121), K, N)
            self.assertTrue(report.passed, (K, H, N, report))

    def test_mcp_known_values(self):
        h = NeedleDensity.from_function(lambda r: (1 + r) ** 2, -1.0, 0.0, 41)
        self.assertTrue(check_mcp_density(h, 0.0, 3.0).passed)
        hole = NeedleDensity([-1.0, -0.5, 0.0, 0.5, 1.0], [1.0, 0.0, 1.0, 1.0, 1.0])
        self.assertFalse(check_mcp_density(hole, 0.0, 2.0).passed)

    def test_mcp_reading_flag(self):
        h = extremal_density(2, 0, 3, 1.0, samples=61)
        self.assertTrue(check_mcp_density(h, 2, 3, sigma_reading=SigmaReading.K_OVER_N_MINUS_ONE).passed)
        with self.assertRaises(DomainError):
            check_mcp_density(h, 2, 3, sigma_reading='k_squared')

    def test_cd_implies_mcp(self):
        rng = np.random.default_rng(7)
        cd_passes = 0
        for case in range(500):
            K, H, N = _random_extremal_parameters(rng)
            h = extremal_density(K, H, N, rng.uniform(0.5, 2.0), samples=25)
            if case % 2:
                bump = 1.0 + rng.uniform(-0.05, 0.05) * np.sin(np.pi * h.grid / h.a)
                h = NeedleDensity(h.grid, h.values * bump)
            cd = check_cd_density(h, K, N)
            mcp = check_mcp_density(h, K, N)
            if cd.passed:
                cd_passes += 1
                self.assertTrue(mcp.passed, (K, H, N))
            self.assertLessEqual(mcp.worst_violation, cd.worst_violation + 1e-12)
        self.assertGreaterEqual(cd_passes, 250)

    def test_narrow_dip_on_a_fine_grid(self):
        h = NeedleDensity.from_function(np.ones_like, -1.0, 1.0, 1001)
        values = h.values.copy()
        values[1] = 0.01
        dipped = NeedleDensity(h.grid, values)
        report = check_cd_density(dipped, 0.0, 3.0)
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.worst_violation, 0.9, delta=1e-9)
        self.assertEqual(report.worst_triple[1], float(h.grid[1]))
        self.assertEqual(report.checked, 1001 * 1000 * 999 // 6)
        mcp = check_mcp_density(dipped, 0.0, 3.0)
        self.assertFalse(mcp.passed)
        # worst one-endpoint reading: 1·(r₁ − r_t)/(r₁ − r₀) − 0.1 with r₀, r₁ the grid ends
        self.assertAlmostEqual(mcp.worst_violation, 0.899, delta=1e-9)
        # thinning is opt-in and can step over the dip
        self.assertTrue(check_cd_density(dipped, 0.0, 3.0, max_points=200).passed)

    def test_matches_a_direct_scan_of_all_triples(self):
        rng = np.random.default_rng(23)
        for case in range(150):
            N = rng.uniform(2.0, 4.0)
            K = rng.uniform(-2.0, 2.0) * (N - 1)
            a, b = -rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0)
            grid = np.unique(np.concatenate([[a, 0.0, b], rng.uniform(a, b, rng.integers(3, 28))]))
            if case % 3 == 0:
                values = rng.uniform(0.0, 2.0, grid.size)
            else:
                values = np.clip(1.0 - 0.3 * grid ** 2 + rng.uniform(-0.02, 0.02, grid.size), 0.0, None)
            h = NeedleDensity(grid, values)
            cd_scan, mcp_scan = _scan_all_triples(h, K, N)
            cd = check_cd_density(h, K, N)
            mcp = check_mcp_density(h, K, N)
            for found, scanned in ((cd.worst_violation, cd_scan), (mcp.worst_violation, mcp_scan)):
                self.assertEqual(math.isinf(found), math.isinf(scanned), (K, N, grid))
                if not math.isinf(scanned):
                    self.assertAlmostEqual(found, scanned, delta=1e-9 * max(1.0, abs(scanned)))


class LogDerivativeTests(SimpleTestCase):
    def test_exponential(self):
        h = NeedleDensity.from_function(lambda r: np.exp(2 * r), -1.0, 1.0, 2001)
        self.assertAlmostEqual(float(one_sided_log_derivative(h, 0.0, 'left')), 2.0, delta=1e-6)

    def test_square(self):
        h = NeedleDensity.from_function(lambda r: (1 + r) ** 2, -0.5, 0.5, 1001)
        self.assertAlmostEqual(float(one_sided_log_derivative(h, 0.0, 'left')), 2.0, delta=1e-6)
        self.assertAlmostEqual(float(one_sided_log_derivative(h, 0.0, 'right')), 2.0, delta=1e-6)

    def test_vanishing_density(self):
        h = NeedleDensity([-1.0, -0.5, -0.25, 0.0, 0.5], [1.0, 0.8, 0.4, 0.0, 0.5])
        self.assertEqual(one_sided_log_derivative(h, 0.0, 'left'), ExtendedReal.negative_infinity())
        self.assertEqual(one_sided_log_derivative(h, 0.0, 'right'), ExtendedReal.infinity())

    def test_extreme_grid_point_is_degenerate(self):
        h = NeedleDensity.from_function(np.ones_like, -1.0, 1.0, 11)
        with self.assertRaises(DegenerateInputError):
            one_sided_log_derivative(h, -1.0, 'left')
        with self.assertRaises(DegenerateInputError):
            one_sided_log_derivative(h, 1.0, 'right')

    def test_gradient_checks(self):
        grid_step = 1e-3
        cases = (
            (lambda r: np.exp(1.7 * r), lambda r: 1.7),
            (lambda r: (1 + r) ** 3.5, lambda r: 3.5 / (1 + r)),
            (lambda r: np.cos(r) ** 2.5, lambda r: -2.5 * math.tan(r)),
        )
        h_grid = np.round(np.arange(-0.5, 0.5 + grid_step / 2, grid_step), 12)
        for fn, derivative in cases:
            h = NeedleDensity(h_grid, fn(h_grid))
            for at in (h_grid[100], h_grid[500], h_grid[800]):
                for side in ('left', 'right'):
                    estimate = float(one_sided_log_derivative(h, at, side))
                    self.assertAlmostEqual(estimate, derivative(at), delta=1e-6)


class MeanCurvatureTests(SimpleTestCase):
    def test_known_values(self):
        for N in (2.0, 3.0, 4.5):
            h = extremal_density(0, N - 1, N, 1.0)
            self.assertAlmostEqual(float(inner_mean_curvature_from_density(h)), N - 1, delta=1e-6)
        constant = NeedleDensity.from_function(lambda r: 3.0 * np.ones_like(r), -1.0, 0.0, 11)
        self.assertAlmostEqual(float(inner_mean_curvature_from_density(constant)), 0.0, delta=1e-12)
        dead = NeedleDensity([-1.0, -0.5, -0.25, 0.0], [1.0, 0.5, 0.2, 0.0])
        self.assertEqual(inner_mean_curvature_from_density(dead).value, ExtendedReal.negative_infinity())

    def test_extremal_round_trip(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            K, H, N = _random_extremal_parameters(rng)
            h = extremal_density(K, H, N, rng.uniform(0.1, 10.0))
            self.assertAlmostEqual(float(inner_mean_curvature_from_density(h)), H, delta=1e-6)

    def test_boundary_mass_fit_on_cells(self):
        step = 1e-3
        depths = (np.arange(1000) + 0.5) * step
        masses = 2.0 * step * (1 - 0.5 * depths)
        order = np.random.default_rng(5).permutation(depths.size)
        a, H = mean_curvature_from_boundary_mass(depths[order], masses[order])
        self.assertAlmostEqual(a, 2.0, delta=1e-4)
        self.assertAlmostEqual(float(H), 0.5, delta=1e-4)
        _, shifted = mean_curvature_from_boundary_mass(depths + 0.02, masses)
        self.assertAlmostEqual(float(shifted), 0.5, delta=0.01)

    def test_boundary_mass_fit_on_random_depths(self):
        rng = np.random.default_rng(21)
        depths = 1 - np.sqrt(1 - rng.uniform(size=20000))
        a, H = mean_curvature_from_boundary_mass(depths, np.full(depths.size, 1 / depths.size))
        self.assertAlmostEqual(a, 2.0, delta=0.1)
        self.assertAlmostEqual(float(H), 1.0, delta=0.05)

    def test_boundary_mass_fit_needs_samples(self):
        with self.assertRaises(DegenerateInputError):
            mean_curvature_from_boundary_mass([0.1, 0.2], [1.0, 1.0])
        with self.assertRaises(DomainError):
            mean_curvature_from_boundary_mass([-0.1, 0.2, 0.3, 0.4], [1.0] * 4)


class EnvelopeTests(SimpleTestCase):
    def test_cosine_power_is_its_own_envelope(self):
        N = 3.0
        h = NeedleDensity.from_function(lambda r: np.cos(r) ** (N - 1), 0.0, math.pi / 2, 401)
        result = comparison_envelope(h, N - 1, N)
        self.assertTrue(result.passed)
        self.assertFalse(result.reversed)
        np.testing.assert_allclose(result.envelope(h.grid), h.values, atol=1e-8)
        self.assertAlmostEqual(float(result.max_b), math.pi / 2, delta=1e-6)

    def test_reverse_parameterization(self):
        h = extremal_density(0, 2, 3, 1.0)
        result = comparison_envelope(h, 0.0, 3.0)
        self.assertTrue(result.reversed)
        self.assertTrue(result.passed)
        self.assertAlmostEqual(float(result.max_b), 1.0, delta=1e-9)
        self.assertAlmostEqual(result.length, 1.0)
        self.assertAlmostEqual(float(result.mean_curvature), 2.0, delta=1e-6)

    def test_constant_density_has_no_length_bound(self):
        h = NeedleDensity.from_function(np.ones_like, -1.0, 1.0, 21)
        result = comparison_envelope(h, 0.0, 2.0)
        self.assertEqual(result.max_b, ExtendedReal.infinity())
        np.testing.assert_allclose(result.envelope(np.linspace(0, 1, 5)), 1.0, atol=1e-12)

    def test_density_above_its_envelope_is_reported(self):
        # flat then rising: not CD(0, 2), so the tangent bound fails
        grid = np.linspace(0.0, 1.0, 41)
        values = np.where(grid < 0.5, 1.0, 1.0 + (grid - 0.5) ** 2)
        result = comparison_envelope(NeedleDensity(grid, values), 0.0, 2.0)
        self.assertFalse(result.passed)

    def test_extremal_envelope_sharpness(self):
        rng = np.random.default_rng(29)
        for _ in range(500):
            K, H, N = _random_extremal_parameters(rng)
            h = extremal_density(K, H, N, rng.uniform(0.5, 2.0), samples=801)
            result = comparison_envelope(h, K, N)
            scale = max(1.0, float(np.max(h.values)))
            gap = np.max(np.abs(result.envelope(h.grid) - h.values))
            self.assertLessEqual(gap, 1e-8 * scale, (K, H, N))

    def test_dominates_random_cd_densities(self):
        rng = np.random.default_rng(37)
        strict = 0
        for _ in range(500):
            N = rng.uniform(2.0, 4.0)
            K = rng.uniform(-1.5, 1.5) * (N - 1)
            root = _random_concave_root(rng, K / (N - 1))
            scan = np.linspace(0.0, 2.0, 4001)
            vanishing = np.flatnonzero(root(scan) <= 0)
            grid = np.linspace(0.0, 0.9 * (scan[vanishing[0]] if vanishing.size else 2.0), 801)
            h = NeedleDensity(grid, root(grid) ** (N - 1))
            self.assertTrue(check_cd_density(h, K, N).passed, (K, N))

            result = comparison_envelope(h, K, N)
            envelope = result.envelope(h.grid)
            scale = max(1.0, float(np.max(h.values)))
            self.assertTrue(result.passed, (K, N, result.report))
            self.assertLessEqual(float(np.max(h.values - envelope)), 1e-8 * scale)
            if np.max(envelope - h.values) > 1e-3 * scale:
                strict += 1
        self.assertGreaterEqual(strict, 250)


class RiccatiTests(SimpleTestCase):
    def test_cosine_equality(self):
        u = NeedleDensity.from_function(np.cos, 0.0, math.pi / 2 - 1e-3, 801)
        self.assertTrue(riccati_compare(u, 1.0, 0.0).passed)

    def test_affine_equality(self):
        u = NeedleDensity.from_function(lambda t: 1 - 2 * t, 0.0, 0.4, 201)
        report = riccati_compare(u, 0.0, -2.0)
        self.assertTrue(report.passed)

    def test_damped_cosine(self):
        u = NeedleDensity.from_function(lambda t: np.cos(t) * (1 - 0.1 * t ** 2), 0.0, 0.6, 301)
        self.assertTrue(riccati_compare(u, 1.0, 0.0).passed)

    def test_preconditions(self):
        shifted = NeedleDensity.from_function(lambda t: 1.1 * np.cos(t), 0.0, 1.0, 101)
        with self.assertRaises(PreconditionViolation):
            riccati_compare(shifted, 1.0, 0.0)
        convex = NeedleDensity.from_function(lambda t: (1 - t) ** 2, 0.0, 0.4, 101)
        with self.assertRaises(PreconditionViolation):
            riccati_compare(convex, 0.0, -2.0)
        steep = NeedleDensity.from_function(np.cos, 0.0, 1.0, 101)
        with self.assertRaises(PreconditionViolation):
            riccati_compare(steep, 1.0, -0.5)

    def test_slower_comparison_function(self):
        u = NeedleDensity.from_function(lambda t: 1 - 2 * t, 0.0, 0.45, 91)
        self.assertTrue(riccati_compare(u, 0.0, -1.0).passed)

    def test_against_ode_integration(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            kappa, d = rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)
            c = rng.uniform(0.0, 0.2)

            def hits_zero(t, y):
                return y[0]
            hits_zero.terminal = True
            hits_zero.direction = -1
            solution = solve_ivp(lambda t, y: [y[1], -kappa * y[0]], (0.0, 50.0), [1.0, d],
                                 events=hits_zero, rtol=1e-11, atol=1e-13)
            zero = first_positive_zero(kappa, -d)
            if solution.t_events[0].size:
                self.assertAlmostEqual(float(zero), float(solution.t_events[0][0]), delta=1e-6)
            else:
                self.assertGreater(float(zero), 50.0 - 1e-6)

            horizon = min(float(zero) * 0.95, 2.0)
            scan = np.linspace(0.0, horizon, 2001)
            v = np.asarray(s_kappa_lambda(kappa, -d, scan))
            dv = np.asarray(s_kappa_lambda_derivative(kappa, -d, scan))
            admissible = (2 * scan * dv + v >= 0) & (1 - c * scan ** 2 > 0)
            cut = np.flatnonzero(~admissible)
            b = 0.9 * (scan[cut[0]] if cut.size else horizon)
            if b < 0.05:
                continue
            t = np.linspace(0.0, b, 401)
            u = np.asarray(s_kappa_lambda(kappa, -d, t)) * (1 - c * t ** 2)
            report = riccati_compare(NeedleDensity(t, u), kappa, d, tol=1e-6)
            self.assertTrue(report.passed, (kappa, d, c, report))

    def test_cd_density_root_satisfies_riccati(self):
        for K, H, N in ((0, 2, 3), (2, 1, 3), (-2, 5, 3)):
            h = extremal_density(K, H, N, 1.0, samples=801)
            tilde = h.reflected()
            u = NeedleDensity(tilde.grid, tilde.powered(1.0 / (N - 1)))
            slope = -H / (N - 1)
            self.assertTrue(riccati_compare(u, K / (N - 1), slope, tol=1e-6).passed)

    def test_last_sample_is_checked(self):
        grid = np.linspace(0.0, 1.0, 101)
        values = np.cos(grid)
        values[-1] += 5e-8
        report = riccati_compare(NeedleDensity(grid, values), 1.0, 0.0)
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.worst_triple[0], float(grid[-2]))

    def test_growth_is_a_rate_independent_of_the_step(self):
        readings = []
        for samples in (101, 1001):
            u = NeedleDensity.from_function(lambda t: np.cos(t) * (1 + 1e-6 * t), 0.0, 1.0, samples)
            report = riccati_compare(u, 1.0, 0.0)
            self.assertFalse(report.passed)
            readings.append(report.worst_violation)
            self.assertTrue(riccati_compare(u, 1.0, 0.0, tol=2e-6).passed)
        for reading in readings:
            self.assertAlmostEqual(reading, 1e-6, delta=1e-8)


class ExtremalDensityTests(SimpleTestCase):
    def test_euclidean_profile(self):
        for N in (2.0, 3.0):
            h = extremal_density(0, N - 1, N, 1.0)
            self.assertAlmostEqual(h.a, -1.0)
            np.testing.assert_allclose(h.values, (1 + h.grid) ** (N - 1), atol=1e-12)

    def test_spherical_profile(self):
        h = extremal_density(2, 0, 3, 1.0)
        self.assertAlmostEqual(h.a, -math.pi / 2)
        np.testing.assert_allclose(h.values, np.cos(h.grid) ** 2, atol=1e-12)

    def test_hyperbolic_profile_vanishes_at_the_root(self):
        h = extremal_density(-2, 4, 3, 1.0)
        self.assertAlmostEqual(h.a, -math.atanh(0.5), delta=1e-12)
        self.assertAlmostEqual(h.values[0], 0.0, delta=1e-9)

    def test_infinite_radius_is_degenerate(self):
        with self.assertRaises(DegenerateInputError):
            extremal_density(0, 0, 3, 1.0)


class LaplaceComparisonTests(SimpleTestCase):
    def test_saturated_by_extremal_densities(self):
        N = 3.0
        report = laplace_comparison_check(extremal_density(0, N - 1, N, 1.0), 0.0, N, 1.0)
        self.assertTrue(report.passed)
        self.assertLessEqual(report.worst_violation, 1e-8)
        spherical = laplace_comparison_check(extremal_density(N - 1, 0, N, 1.0), N - 1, N, 0.0)
        self.assertTrue(spherical.passed)

    def test_constant_density(self):
        h = NeedleDensity.from_function(np.ones_like, -1.0, 0.0, 21)
        self.assertTrue(laplace_comparison_check(h, 0.0, 2.0, 0.0).passed)

    def test_curvature_hypothesis_enforced(self):
        with self.assertRaises(PreconditionViolation):
            laplace_comparison_check(extremal_density(0, 2, 3, 1.0), 0.0, 3.0, 1.2)

    def test_non_cd_density_fails(self):
        grid = np.linspace(-1.5, 0.0, 151)
        values = np.where(grid >= -0.5, 1.0 + grid, 0.5)
        report = laplace_comparison_check(NeedleDensity(grid, values), 0.0, 2.0, 1.0)
        self.assertFalse(report.passed)


class MCPBoundTests(SimpleTestCase):
    def test_attained_by_extremal_density(self):
        for N in (2.0, 3.0, 5.0):
            result = mcp_inradius_bound(extremal_density(0, N - 1, N, 1.0), 0.0, N, N - 1)
            self.assertTrue(result.passed)
            self.assertAlmostEqual(result.length, float(result.max_length), delta=1e-9)

    def test_truncation_and_dilation(self):
        h = extremal_density(0, 2, 3, 1.0)
        truncated = mcp_inradius_bound(h.restricted(-0.4, 0.0), 0.0, 3.0, 2.0)
        self.assertTrue(truncated.passed)
        stretched = mcp_inradius_bound(h.dilated(1.2), 0.0, 3.0, 2.0)
        self.assertFalse(stretched.passed)
        self.assertAlmostEqual(stretched.margin, -0.2, delta=1e-9)

    def test_hypothesis_readout(self):
        h = extremal_density(0, 2, 3, 1.0, samples=401)
        self.assertTrue(mcp_inradius_bound(h, 0.0, 3.0, 2.0, check_hypotheses=True).hypotheses_hold)
        stretched = h.dilated(1.2)
        self.assertFalse(mcp_inradius_bound(stretched, 0.0, 3.0, 2.0, check_hypotheses=True).hypotheses_hold)


class BackwardMeanCurvatureTests(SimpleTestCase):
    def test_single_extremal_needle(self):
        t = np.linspace(-1e-4, 0.0, 21)
        for N in (3.0, 3.5):
            estimate = backward_mc_from_level_masses(t, (1 + t) ** (N - 1))
            self.assertAlmostEqual(float(estimate), N - 1, delta=1e-4)

    def test_constant_masses(self):
        t = np.linspace(-0.1, 0.0, 11)
        self.assertAlmostEqual(float(backward_mc_from_level_masses(t, np.full(t.shape, 4.2))), 0.0)

    def test_weighted_mean_of_needles(self):
        rng = np.random.default_rng(41)
        curvatures = rng.uniform(1.0, 2.0, 100)
        heights = rng.uniform(0.5, 2.0, 100)
        t = np.linspace(-0.02, 0.0, 41)
        masses = sum(c * (1 + H / 2 * t) ** 2 for H, c in zip(curvatures, heights))
        expected = float(np.sum(curvatures * heights) / np.sum(heights))
        self.assertAlmostEqual(float(backward_mc_from_level_masses(t, masses)), expected, delta=1e-3)

    def test_bounds_are_ordered(self):
        t = np.linspace(-0.05, 0.0, 11)
        bounds = backward_mc_bounds(t, np.exp(2 * t) * (1 + 0.01 * np.sin(300 * t)))
        self.assertGreaterEqual(bounds.limsup, bounds.liminf)

    def test_readings_stay_within_the_window_quotients(self):
        t = np.linspace(-0.05, 0.0, 11)
        masses = np.exp(2 * t) * (1 + 0.01 * np.sin(300 * t))
        quotients = (masses[-7:-1] - masses[-1]) / (t[-7:-1] * masses[-1])
        bounds = backward_mc_bounds(t, masses, window_points=6)
        self.assertEqual(float(bounds.limsup), float(np.max(quotients)))
        self.assertEqual(float(bounds.liminf), float(np.min(quotients)))
        # a kink just before 0 cannot be amplified past the observed quotients
        kinked = np.where(t > -0.01, 1.0 + 3.0 * t, 1.0 + 2.0 * t)
        self.assertLessEqual(float(backward_mc_from_level_masses(t, kinked)), 3.0 + 1e-12)

    def test_vanishing_mass_is_degenerate(self):
        with self.assertRaises(DegenerateInputError):
            backward_mc_from_level_masses([-0.2, -0.1, 0.0], [1.0, 0.5, 0.0])
