from pathlib import Path

from cli.base import ReportCommand
from cli.services import load_space, resolve_omega
from common.services import log_run_event
from discrete_needles.io import write_decomposition_csv, write_decomposition_json
from discrete_needles.models import BoundaryCorrection, BoundMode
from discrete_needles.services import (
    conditional_densities,
    finite_inner_curvature_check,
    ray_decomposition,
    surface_measure,
    verify_inradius_bound,
)


class Command(ReportCommand):
    help = 'Decompose Ω into transport rays, estimate its inner mean curvature and check inradius ≤ r_{K,H,N}.'
    event_name = 'verify'

    def add_run_arguments(self, parser):
        parser.add_argument('space_path', help='Space JSON file, or a CSV distance matrix with --weights.')
        parser.add_argument('--weights', default=None, help='Weights CSV (header weight) for a CSV matrix.')
        omega = parser.add_mutually_exclusive_group(required=True)
        omega.add_argument('--omega-path', default=None, help='Membership file (JSON or CSV).')
        omega.add_argument('--omega-ball', nargs=2, type=float, metavar=('CENTER', 'RADIUS'), default=None,
                           help='Ω = closed ball about a sample point.')
        omega.add_argument('--omega-ulevel', type=float, default=None, metavar='C',
                           help='Ω = {attribute ≤ C}; see --level-attribute.')
        parser.add_argument('--level-attribute', default='t')
        parser.add_argument('--K', type=float, required=True)
        parser.add_argument('--N', type=float, required=True)
        parser.add_argument('--quantile', type=float, default=None)
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--mode', choices=BoundMode.values, default=BoundMode.CD)
        parser.add_argument('--H-override', dest='H_override', type=float, default=None,
                            help='Use this mean-curvature bound instead of the estimate.')
        parser.add_argument('--transport-tol', type=float, default=None)
        parser.add_argument('--bundle-points', type=int, default=None,
                            help='Points per bundle for mass the exact chains miss; 0 disables bundles.')
        parser.add_argument('--boundary-correction', choices=BoundaryCorrection.values, default=None)
        parser.add_argument('--bin-width', type=float, default=None)
        parser.add_argument('--threads', type=int, default=None)
        parser.add_argument('--decomposition-out', default=None,
                            help='Write the ray decomposition (.csv for one row per ray, JSON otherwise).')

    def run(self, options):
        space, input_files = load_space(options['space_path'], options['weights'])
        omega, omega_files = resolve_omega(space, omega_path=options['omega_path'],
                                           omega_ball=options['omega_ball'],
                                           omega_ulevel=options['omega_ulevel'],
                                           level_attribute=options['level_attribute'])
        input_files.update(omega_files)
        decomposition = ray_decomposition(space, omega, options['transport_tol'], options['boundary_correction'],
                                          bundle_points=options['bundle_points'])
        decomposition = conditional_densities(space, decomposition, options['bin_width'], options['threads'])
        report = verify_inradius_bound(space, omega, options['K'], options['N'], quantile=options['quantile'],
                                       tol=options['tol'], mode=options['mode'],
                                       H_override=options['H_override'], decomposition=decomposition)
        results = {
            'bound': report,
            'rays': len(decomposition.rays),
            'flags': {flag: decomposition.flags.count(flag) for flag in sorted(set(decomposition.flags))},
        }
        if decomposition.has_densities:
            results['surface_measure'] = surface_measure(decomposition).total
            results['inner_curvature_masses'] = finite_inner_curvature_check(decomposition)
        if decomposition.warnings:
            log_run_event('decomposition.degenerate', metadata={'warnings': decomposition.warnings})
        out = options['decomposition_out']
        if out:
            writer = write_decomposition_csv if Path(out).suffix.lower() == '.csv' else write_decomposition_json
            results['decomposition_path'] = str(writer(out, decomposition))
        return self.make_report(options, results, passed=report.passed, warnings=report.warnings,
                                input_files=input_files)
