import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.apps import apps
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from NEEDLECOMP import settings as project_settings
from common.conf import needlecomp_config, needlecomp_setting
from common.exceptions import DomainError, InputParseError, NeedleCompError
from common.serializers import (
    canonical_dumps,
    decode_float,
    encode_float,
    inputs_digest,
    read_csv_rows,
    read_json,
    to_jsonable,
    write_csv_rows,
    write_json,
)
from common.services.run_logger import CATEGORY_DECOMPOSITION, CATEGORY_GENERAL, log_run_event


class SerializerTests(SimpleTestCase):
    def test_infinities_are_strings(self):
        self.assertEqual(encode_float(math.inf), '+inf')
        self.assertEqual(encode_float(-math.inf), '-inf')
        self.assertEqual(decode_float('+inf'), math.inf)
        self.assertEqual(decode_float('-inf'), -math.inf)
        self.assertEqual(decode_float(0.1), 0.1)

    def test_numpy_values_become_plain_json(self):
        payload = to_jsonable({'b': np.array([1.5, np.inf]), 'a': np.int64(3), 'flag': np.bool_(True)})
        self.assertEqual(payload, {'a': 3, 'b': [1.5, '+inf'], 'flag': True})

    def test_canonical_encoding_sorts_keys(self):
        self.assertEqual(canonical_dumps({'b': 1, 'a': 2}), '{"a":2,"b":1}')
        self.assertEqual(json.loads(canonical_dumps({'x': 0.1})), {'x': 0.1})

    def test_digest_is_deterministic_and_order_free(self):
        first = inputs_digest({'K': 0.0, 'N': 3.0, 'H': 2.0})
        second = inputs_digest({'H': 2.0, 'N': 3.0, 'K': 0.0})
        self.assertEqual(first, second)
        self.assertNotEqual(first, inputs_digest({'K': 0.0, 'N': 3.0, 'H': 2.5}))

    def test_json_file_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(Path(tmp) / 'nested' / 'report.json', {'r': math.inf, 'values': [1.0, 2.0]})
            self.assertEqual(read_json(path), {'r': '+inf', 'values': [1.0, 2.0]})

    def test_missing_or_malformed_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(InputParseError):
                read_json(Path(tmp) / 'absent.json')
            broken = Path(tmp) / 'broken.json'
            broken.write_text('[1, 2', encoding='utf-8')
            with self.assertRaises(InputParseError):
                read_json(broken)

    def test_csv_header_is_enforced(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_csv_rows(Path(tmp) / 'density.csv', ('r', 'h'), [(0.0, 1.0), (0.5, math.inf)])
            self.assertEqual(read_csv_rows(path, ('r', 'h')), [['0', '1'], ['0.5', '+inf']])
            with self.assertRaises(InputParseError):
                read_csv_rows(path, ('r', 'density'))


class RunLoggerTests(SimpleTestCase):
    def test_known_event_category(self):
        with self.assertLogs('common', level='INFO') as captured:
            record = log_run_event('verify.passed', metadata={'digest': 'abc'})
        self.assertEqual(record['category'], CATEGORY_DECOMPOSITION)
        self.assertEqual(record['metadata'], {'digest': 'abc'})
        self.assertIn('INFO:common:verify.passed', captured.output[0])

    def test_failures_log_at_warning(self):
        with self.assertLogs('common', level='WARNING') as captured:
            log_run_event('verify.failed')
        self.assertTrue(captured.output[0].startswith('WARNING:common:verify.failed'))

    def test_unknown_event_and_override(self):
        with self.assertLogs('common', level='INFO'):
            self.assertEqual(log_run_event('something.else')['category'], CATEGORY_GENERAL)
            self.assertEqual(log_run_event('something.else', category='custom')['category'], 'custom')


class ExceptionTests(SimpleTestCase):
    def test_code_and_message(self):
        error = DomainError('N must exceed 1, got %(N)s.', params={'N': 0.5})
        self.assertEqual(error.code, 'domain_error')
        self.assertEqual(str(error), 'N must exceed 1, got 0.5.')
        self.assertIsInstance(error, NeedleCompError)

    def test_explicit_code(self):
        self.assertEqual(InputParseError('bad', code='custom').code, 'custom')


class ConfTests(SimpleTestCase):
    def test_fallback_values(self):
        self.assertEqual(needlecomp_setting('MIN_CHAIN_POINTS'), 4)

    @override_settings(NEEDLECOMP={'QUANTILE': 0.1})
    def test_settings_override(self):
        self.assertEqual(needlecomp_setting('QUANTILE'), 0.1)
        config = needlecomp_config()
        self.assertEqual(config['QUANTILE'], 0.1)
        self.assertEqual(config['VERIFY_TOL'], 1e-6)


class ProjectLayoutTests(SimpleTestCase):
    def test_apps_carry_no_model_field_defaults(self):
        self.assertNotIn('DEFAULT_AUTO_FIELD', vars(project_settings))
        for config in apps.get_app_configs():
            if config.name.startswith('django.'):
                continue
            self.assertNotIn('default_auto_field', vars(type(config)), config.name)

    def test_requirements_list_only_used_packages(self):
        names = {
            line.split('==')[0].strip().lower()
            for line in (Path(settings.BASE_DIR) / 'requirements.txt').read_text().splitlines()
            if line.strip()
        }
        self.assertIn('numpy', names)
        self.assertIn('scipy', names)
        self.assertNotIn('pytz', names)
        self.assertNotIn('typing_extensions', names)
