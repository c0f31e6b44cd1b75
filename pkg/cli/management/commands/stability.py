from cli.base import ReportCommand
from comparison_kernel.models import ComparisonTriple
from comparison_kernel.services import inradius_comparison_r, stability_margin


class Command(ReportCommand):
    help = 'Find δ with r(K−δ, H−δ, N+δ) ≤ r(K, H, N) + ε and re-check it.'
    event_name = 'stability'

    def add_run_arguments(self, parser):
        parser.add_argument('--K', type=float, required=True)
        parser.add_argument('--H', type=float, required=True)
        parser.add_argument('--N', type=float, required=True)
        parser.add_argument('--epsilon', type=float, required=True, help='Allowed growth of the radius.')
        parser.add_argument('--delta-max', type=float, default=None)
        parser.add_argument('--grid-steps', type=int, default=None)

    def run(self, options):
        p = ComparisonTriple(options['K'], options['H'], options['N'])
        epsilon = options['epsilon']
        delta = stability_margin(p, epsilon, delta_max=options['delta_max'], grid_steps=options['grid_steps'])
        base = inradius_comparison_r(p)
        perturbed = p.perturbed(delta)
        r_perturbed = inradius_comparison_r(perturbed)
        target = float(base) + epsilon
        results = {
            'r': base,
            'delta': delta,
            'perturbed': perturbed,
            'r_perturbed': r_perturbed,
            'target': target,
        }
        return self.make_report(options, results, passed=bool(r_perturbed <= target))
