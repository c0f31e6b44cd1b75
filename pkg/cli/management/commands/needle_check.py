from cli.base import ReportCommand
from cli.services import file_sha256
from discrete_needles.models import BoundMode
from needle_1d.io import read_density_csv
from needle_1d.models import DerivativeEstimator, SigmaReading
from needle_1d.services import (
    check_cd_density,
    check_mcp_density,
    comparison_envelope,
    inner_mean_curvature_from_density,
    mcp_inradius_bound,
)


class Command(ReportCommand):
    help = 'Check a sampled needle density (CSV, header r,h) against the CD or MCP inequality.'
    event_name = 'needle_check'

    def add_run_arguments(self, parser):
        parser.add_argument('path', help='Density CSV file.')
        parser.add_argument('--K', type=float, required=True)
        parser.add_argument('--N', type=float, required=True)
        parser.add_argument('--mode', choices=BoundMode.values, default=BoundMode.CD)
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--sigma-reading', choices=SigmaReading.values, default=SigmaReading.K_OVER_N_MINUS_ONE)
        parser.add_argument('--max-points', type=int, default=None,
                            help='Thin the grid evenly to this many points first; by default every sample is checked.')
        parser.add_argument('--H', type=float, default=None,
                            help='Also check the length against r_{K,H,N} (one-endpoint bound).')

    def run(self, options):
        h = read_density_csv(options['path'])
        K, N, tol = options['K'], options['N'], options['tol']
        if options['mode'] == BoundMode.CD:
            report = check_cd_density(h, K, N, tol=tol, max_points=options['max_points'])
            estimator = DerivativeEstimator.EXTRAPOLATED
        else:
            report = check_mcp_density(h, K, N, tol=tol, sigma_reading=options['sigma_reading'],
                                       max_points=options['max_points'])
            estimator = DerivativeEstimator.LIMSUP
        results = {
            'mode': options['mode'],
            'report': report,
            'a': h.a,
            'b': h.b,
        }
        passed = report.passed
        notes = []
        if h.a < 0:
            results['mean_curvature'] = inner_mean_curvature_from_density(h, estimator=estimator)
            envelope = comparison_envelope(h.restricted(h.a, 0.0), K, N, tol=tol)
            results['envelope'] = envelope
            passed = passed and envelope.passed
        else:
            notes.append('the density has no samples left of 0; no mean curvature or envelope was computed')
        if options['H'] is not None:
            bound = mcp_inradius_bound(h, K, N, options['H'], tol=tol)
            results['length_bound'] = bound
            passed = passed and bound.passed
        return self.make_report(options, results, passed=bool(passed), warnings=notes,
                                input_files={'density': file_sha256(options['path'])})
