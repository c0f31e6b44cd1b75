"""Common shape of the report-producing management commands."""

from __future__ import annotations

import logging
import sys
from functools import partial

from django.core.management.base import BaseCommand, CommandError

from cli.models import EXIT_CHECK_FAILED, EXIT_ERROR, Report
from cli.services import command_arguments, render_report, write_report
from common.exceptions import NeedleCompError
from common.models import OutputFormat
from common.services import log_run_event

logger = logging.getLogger('cli')


def _usage_error(parser, message):
    """Argument errors exit with 1 like every other input problem."""
    if parser.called_from_command_line:
        parser.print_usage(sys.stderr)
        parser.exit(EXIT_ERROR, f'{parser.prog}: error: {message}\n')
    raise CommandError(f'Error: {message}', returncode=EXIT_ERROR)


class ReportCommand(BaseCommand):
    """
    Run one operation and print its report.

    Subclasses implement ``add_run_arguments`` and ``run``. Domain errors and
    unreadable files exit with 1; a report whose ``passed`` is False exits
    with 2 after it has been printed.
    """

    requires_system_checks = []
    event_name = None
    completed_event = 'computed'

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = partial(_usage_error, parser)
        return parser

    def add_arguments(self, parser):
        self.add_run_arguments(parser)
        parser.add_argument('--format', choices=OutputFormat.values, default=OutputFormat.JSON,
                            help='Report format (default: json).')
        parser.add_argument('--report-out', default=None, help='Also write the report to this file.')

    def add_run_arguments(self, parser):
        raise NotImplementedError

    def run(self, options) -> Report:
        raise NotImplementedError

    def make_report(self, options, results, passed=None, warnings=None, input_files=None) -> Report:
        return Report(command=self.event_name, arguments=command_arguments(options), results=results,
                      passed=passed, warnings=list(warnings or []), input_files=dict(input_files or {}))

    def handle(self, *args, **options):
        try:
            report = self.run(options)
            rendered = render_report(report, options['format'])
            if options['report_out']:
                write_report(options['report_out'], rendered)
        except NeedleCompError as exc:
            log_run_event(f'{self.event_name}.error', metadata={'code': exc.code, 'message': str(exc)})
            raise CommandError(f'{exc.code}: {exc}', returncode=EXIT_ERROR) from exc
        except OSError as exc:
            log_run_event(f'{self.event_name}.error', metadata={'code': 'io_error', 'message': str(exc)})
            raise CommandError(f'io_error: {exc}', returncode=EXIT_ERROR) from exc

        self.stdout.write(rendered)
        if report.passed is None:
            event = f'{self.event_name}.{self.completed_event}'
        else:
            event = f'{self.event_name}.{"passed" if report.passed else "failed"}'
        log_run_event(event, metadata={'inputs_digest': report.inputs_digest, 'warnings': len(report.warnings)})
        if report.passed is False:
            logger.warning('%s check failed (digest %s)', self.event_name, report.inputs_digest)
            raise CommandError(f'{self.event_name} check failed', returncode=EXIT_CHECK_FAILED)
