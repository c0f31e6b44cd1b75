from cli.base import ReportCommand
from needle_1d.io import write_density_csv
from needle_1d.services import extremal_density


class Command(ReportCommand):
    help = 'Write the extremal density h0·J_{K,H,N}(−r) on [−r_{K,H,N}, 0] as CSV.'
    event_name = 'extremal'
    completed_event = 'written'

    def add_run_arguments(self, parser):
        parser.add_argument('--K', type=float, required=True)
        parser.add_argument('--H', type=float, required=True)
        parser.add_argument('--N', type=float, required=True)
        parser.add_argument('--samples', type=int, default=None)
        parser.add_argument('--h0', type=float, default=1.0, help='Density value at the boundary.')
        parser.add_argument('--out', required=True, help='CSV file to write (header r,h).')

    def run(self, options):
        h = extremal_density(options['K'], options['H'], options['N'], options['h0'], options['samples'])
        path = write_density_csv(options['out'], h)
        results = {
            'path': str(path),
            'a': h.a,
            'b': h.b,
            'samples': h.grid.size,
            'value_at_zero': h.value_at_zero,
            'integral': h.integral(),
        }
        return self.make_report(options, results)
