import json
import math
import shutil
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from discrete_needles.io import write_space_json
from discrete_needles.models import DiscreteMMS
from needle_1d.io import write_density_csv
from needle_1d.services import extremal_density


def _run(*args):
    out = StringIO()
    call_command(*args, stdout=out)
    return out.getvalue()


def _report(*args):
    return json.loads(_run(*args))


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)

    def assertExitCode(self, code, *args):
        out = StringIO()
        with self.assertRaises(CommandError) as caught:
            call_command(*args, stdout=out)
        self.assertEqual(caught.exception.returncode, code)
        return out.getvalue()


class BoundCommandTests(CommandTestCase):
    def test_kasue_radius(self):
        report = _report('bound', '--K', '0', '--H', '1', '--N', '2')
        self.assertEqual(report['results']['r'], 1.0)
        self.assertEqual(report['results']['case'], 'zero_kappa_positive_lambda')
        self.assertIsNone(report['passed'])

    def test_radius_with_mean_curvature_two_in_dimension_three(self):
        report = _report('bound', '--K', '0', '--H', '2', '--N', '3')
        self.assertAlmostEqual(report['results']['r'], 1.0, places=12)

    def test_failing_ball_condition(self):
        report = _report('bound', '--K', '-1', '--H', '0', '--N', '2')
        self.assertEqual(report['results']['r'], '+inf')
        self.assertEqual(report['results']['case'], 'fails')
        self.assertEqual(set(report['results']['J_profile']['sign']), {1})

    def test_sign_profile(self):
        report = _report('bound', '--K', '0', '--H', '1', '--N', '2')
        self.assertEqual(report['results']['J_profile']['sign'], [1] * 5 + [0] * 6)

    def test_dimension_must_exceed_one(self):
        self.assertExitCode(1, 'bound', '--K', '0', '--H', '1', '--N', '1')

    def test_missing_argument_is_a_usage_error(self):
        self.assertExitCode(1, 'bound', '--K', '0')

    def test_csv_and_text_formats(self):
        csv_lines = _run('bound', '--K', '0', '--H', '1', '--N', '2', '--format', 'csv').splitlines()
        self.assertEqual(csv_lines[0], 'key,value')
        self.assertIn('results.r,1', csv_lines)
        text_lines = _run('bound', '--K', '0', '--H', '1', '--N', '2', '--format', 'text').splitlines()
        self.assertIn('results.r: 1', text_lines)
        self.assertIn('results.case: zero_kappa_positive_lambda', text_lines)

    def test_reports_are_deterministic(self):
        first = _report('bound', '--K', '0', '--H', '2', '--N', '3')
        second = _report('bound', '--K', '0', '--H', '2', '--N', '3')
        first.pop('generated_at')
        second.pop('generated_at')
        self.assertEqual(first, second)
        self.assertEqual(len(first['inputs_digest']), 64)
        self.assertIn('QUANTILE', first['config'])

    def test_report_file_and_run_event(self):
        target = self.tmp / 'reports' / 'bound.json'
        with self.assertLogs('common', level='INFO') as captured:
            printed = _report('bound', '--K', '0', '--H', '1', '--N', '2', '--report-out', str(target))
        self.assertEqual(json.loads(target.read_text(encoding='utf-8')), printed)
        self.assertTrue(any('bound.computed' in line for line in captured.output))


class StabilityCommandTests(CommandTestCase):
    def test_delta_shrinks_with_epsilon(self):
        deltas = []
        for epsilon in ('1e-1', '1e-2', '1e-3'):
            report = _report('stability', '--K', '0', '--H', '2', '--N', '3', '--epsilon', epsilon)
            self.assertTrue(report['passed'])
            self.assertLessEqual(report['results']['r_perturbed'], report['results']['target'])
            deltas.append(report['results']['delta'])
        self.assertGreater(deltas[-1], 0.0)
        self.assertGreater(deltas[0], deltas[1])
        self.assertGreater(deltas[1], deltas[2])

    def test_infinite_radius(self):
        self.assertExitCode(1, 'stability', '--K', '0', '--H', '0', '--N', '3', '--epsilon', '0.1')


class NeedleCommandTests(CommandTestCase):
    def test_extremal_round_trip(self):
        path = self.tmp / 'extremal.csv'
        written = _report('extremal', '--K', '0', '--H', '2', '--N', '3', '--out', str(path))
        self.assertAlmostEqual(written['results']['a'], -1.0, places=12)
        self.assertEqual(written['results']['b'], 0.0)
        self.assertTrue(path.exists())

        checked = _report('needle_check', str(path), '--K', '0', '--N', '3', '--H', '2')
        self.assertTrue(checked['passed'])
        self.assertTrue(checked['results']['report']['passed'])
        self.assertAlmostEqual(checked['results']['mean_curvature'], 2.0, delta=1e-6)
        self.assertAlmostEqual(checked['results']['envelope']['max_b'], 1.0, delta=1e-6)
        self.assertTrue(checked['results']['length_bound']['passed'])
        self.assertIn('density', checked['input_files'])

    def test_mcp_mode(self):
        path = write_density_csv(self.tmp / 'h.csv', extremal_density(0, 2, 3, 1.0, samples=201))
        checked = _report('needle_check', str(path), '--K', '0', '--N', '3', '--mode', 'mcp')
        self.assertTrue(checked['passed'])
        self.assertEqual(checked['results']['mode'], 'mcp')

    def test_stretched_extremal_fails(self):
        stretched = extremal_density(2, 0, 3, 1.0, samples=101).dilated(1.5)
        path = write_density_csv(self.tmp / 'stretched.csv', stretched)
        printed = self.assertExitCode(2, 'needle_check', str(path), '--K', '2', '--N', '3')
        report = json.loads(printed)
        self.assertFalse(report['passed'])
        self.assertFalse(report['results']['report']['passed'])

    def test_negative_density_is_a_parse_error(self):
        path = self.tmp / 'bad.csv'
        path.write_text('r,h\n-1,0\n-0.5,-0.2\n-0.25,1\n0,1\n', encoding='utf-8')
        self.assertExitCode(1, 'needle_check', str(path), '--K', '0', '--N', '3')

    def test_extremal_needs_finite_radius(self):
        self.assertExitCode(1, 'extremal', '--K', '0', '--H', '0', '--N', '3', '--out', str(self.tmp / 'h.csv'))


class ModelAndVerifyCommandTests(CommandTestCase):
    def _model(self, *extra):
        return _report('model', '--kind', 'euclidean_cone', '--N', '2', '--R', '1', '--radial-steps', '16',
                       '--base', 'circle', '--base-points', '16', *extra)

    def test_model_writes_space_and_membership(self):
        space_path, omega_path = self.tmp / 'cone.json', self.tmp / 'omega.json'
        report = self._model('--out', str(space_path), '--omega-out', str(omega_path))
        self.assertTrue(report['passed'])
        self.assertTrue(report['results']['volume_cone']['passed'])
        self.assertEqual(report['results']['points'], 1 + 20 * 16)
        self.assertAlmostEqual(report['results']['mass_inside'], math.pi, places=10)
        self.assertTrue(space_path.exists())
        self.assertTrue(omega_path.exists())

    def test_truncated_cone_is_sharp(self):
        space_path, omega_path = self.tmp / 'cone.json', self.tmp / 'omega.json'
        self._model('--out', str(space_path), '--omega-out', str(omega_path))
        from_file = _report('verify', str(space_path), '--omega-path', str(omega_path), '--K', '0', '--N', '2')
        bound = from_file['results']['bound']
        self.assertTrue(from_file['passed'])
        self.assertAlmostEqual(bound['inradius'], 1.0 + 1 / 32, places=12)
        self.assertAlmostEqual(bound['mesh_allowance'], 1 / 32, places=12)
        self.assertGreaterEqual(bound['headroom'], 0.0)
        self.assertLessEqual(abs(bound['margin']), 0.05)
        self.assertEqual(from_file['results']['rays'], 16)
        self.assertEqual(set(from_file['input_files']), {'space', 'omega'})

        from_level = _report('verify', str(space_path), '--omega-ulevel', '1.0', '--K', '0', '--N', '2')
        self.assertEqual(from_level['results']['bound'], bound)

    def test_model_size_cap(self):
        self.assertExitCode(1, 'model', '--kind', 'euclidean_cone', '--N', '2', '--R', '1',
                            '--radial-steps', '300', '--out', str(self.tmp / 'big.json'))

    def test_unknown_kind_is_a_usage_error(self):
        self.assertExitCode(1, 'model', '--kind', 'torus', '--N', '2', '--R', '1', '--out', str(self.tmp / 'x.json'))


class VerifyLineTests(CommandTestCase):
    def setUp(self):
        super().setUp()
        x = np.linspace(0.0, 2.0, 201)
        self.space_path = write_space_json(self.tmp / 'line.json',
                                           DiscreteMMS.from_coordinates(x, np.full(201, 0.01)))

    def test_flat_boundary_passes(self):
        report = _report('verify', str(self.space_path), '--omega-ball', '0', '1.0', '--K', '0', '--N', '2')
        self.assertTrue(report['passed'])
        r = report['results']['bound']['r_comparison']
        self.assertTrue(r == '+inf' or r > 1e6)
        self.assertEqual(report['results']['flags'], {'crosses_S': 1})

    def test_inflated_mean_curvature_fails(self):
        printed = self.assertExitCode(2, 'verify', str(self.space_path), '--omega-ball', '0', '1.0',
                                      '--K', '0', '--N', '2', '--H-override', '10')
        report = json.loads(printed)
        self.assertFalse(report['passed'])
        self.assertTrue(report['results']['bound']['H_overridden'])
        self.assertAlmostEqual(report['results']['bound']['r_comparison'], 0.1, places=12)

    def test_decomposition_csv(self):
        out = self.tmp / 'rays.csv'
        _run('verify', str(self.space_path), '--omega-ball', '0', '1.0', '--K', '0', '--N', '2',
             '--decomposition-out', str(out))
        lines = out.read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], 'ray,flag,bundled,points,mass,quotient_weight,surface_mass')
        self.assertEqual(len(lines), 2)
        self.assertEqual(lines[1].split(',')[1:3], ['crosses_S', '0'])

    def test_input_errors_exit_with_one(self):
        self.assertExitCode(1, 'verify', str(self.space_path), '--omega-ball', '900', '1.0', '--K', '0', '--N', '2')
        self.assertExitCode(1, 'verify', str(self.space_path), '--K', '0', '--N', '2')
        self.assertExitCode(1, 'verify', str(self.tmp / 'missing.json'), '--omega-ball', '0', '1.0',
                            '--K', '0', '--N', '2')
        matrix = self.tmp / 'metric.csv'
        matrix.write_text('0,1\n1,0\n', encoding='utf-8')
        self.assertExitCode(1, 'verify', str(matrix), '--omega-ball', '0', '0.5', '--K', '0', '--N', '2')


class VerifyCloudTests(CommandTestCase):
    def setUp(self):
        super().setUp()
        points = np.random.default_rng(3).uniform(-1, 1, (60, 2))
        self.space_path = write_space_json(self.tmp / 'cloud.json', DiscreteMMS.from_coordinates(points, np.ones(60)))
        self.args = ('verify', str(self.space_path), '--omega-ball', '0', '0.8', '--K', '0', '--N', '2',
                     '--H-override', '-1')

    def test_exact_chains_only(self):
        report = _report(*self.args, '--bundle-points', '0')
        self.assertTrue(report['passed'])
        self.assertTrue(report['warnings'])

    def test_leftover_mass_is_bundled(self):
        out = self.tmp / 'rays.csv'
        report = _report(*self.args, '--decomposition-out', str(out))
        self.assertEqual(report['warnings'], [])
        rows = [line.split(',') for line in out.read_text(encoding='utf-8').splitlines()[1:]]
        self.assertEqual([row[2] for row in rows].count('1'), 1)
        self.assertEqual(report['results']['rays'], len(rows))
