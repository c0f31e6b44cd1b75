import numpy as np

from cli.base import ReportCommand
from comparison_kernel.models import ComparisonTriple
from comparison_kernel.services import ball_condition, inradius_comparison_r, jacobian_J


class Command(ReportCommand):
    help = 'Print the comparison radius r_{K,H,N}, its ball-condition case and the sign profile of J.'
    event_name = 'bound'

    def add_run_arguments(self, parser):
        parser.add_argument('--K', type=float, required=True, help='Lower Ricci bound.')
        parser.add_argument('--H', type=float, required=True, help='Lower mean-curvature bound.')
        parser.add_argument('--N', type=float, required=True, help='Dimension bound, N > 1.')
        parser.add_argument('--grid-points', type=int, default=11,
                            help='Points of the J profile on [0, 2r] (or [0, 10] when r is infinite).')

    def run(self, options):
        p = ComparisonTriple(options['K'], options['H'], options['N'])
        r = inradius_comparison_r(p)
        horizon = 2.0 * float(r) if r.is_finite else 10.0
        grid = np.linspace(0.0, horizon, max(options['grid_points'], 2))
        J = np.asarray(jacobian_J(p, grid))
        results = {
            'r': r,
            'case': ball_condition(p.kappa, p.lam),
            'kappa': p.kappa,
            'lambda': p.lam,
            'J_profile': {'r': grid, 'J': J, 'sign': np.sign(J).astype(int)},
        }
        return self.make_report(options, results)
