from cli.base import ReportCommand
from cli.services import file_sha256
from discrete_needles.io import read_space_json, write_membership, write_space_json
from model_spaces.models import BuiltinBase, ModelKind, ModelSpace
from model_spaces.services import (
    builtin_base,
    model_curvature,
    truncated_cone_sample,
    truncation_subset,
    volume_cone_check,
)


class Command(ReportCommand):
    help = 'Sample a truncated cone or suspension and write it as a metric measure space (JSON).'
    event_name = 'model'

    def add_run_arguments(self, parser):
        parser.add_argument('--kind', choices=ModelKind.values, required=True)
        parser.add_argument('--N', type=float, required=True, help='Dimension; the radial exponent is N−1.')
        parser.add_argument('--R', type=float, required=True, help='Truncation radius.')
        parser.add_argument('--radial-steps', type=int, default=32)
        parser.add_argument('--exterior-steps', type=int, default=None)
        parser.add_argument('--base', default=BuiltinBase.CIRCLE,
                            help='Builtin base (%s) or a space JSON file.' % ', '.join(BuiltinBase.values))
        parser.add_argument('--base-points', type=int, default=64)
        parser.add_argument('--out', required=True, help='Space JSON file to write.')
        parser.add_argument('--omega-out', default=None, help='Also write the truncation membership here.')

    def run(self, options):
        input_files = {}
        if options['base'] in BuiltinBase.values:
            base = builtin_base(options['base'], options['base_points'])
        else:
            base = read_space_json(options['base'])
            input_files['base'] = file_sha256(options['base'])
        N, R = options['N'], options['R']
        space = ModelSpace(kind=options['kind'], N_exp=N - 1, base=base)
        sample = truncated_cone_sample(space, R, options['radial_steps'], options['exterior_steps'])
        omega = truncation_subset(sample, R)
        path = write_space_json(options['out'], sample)
        results = {
            'space': space,
            'path': str(path),
            'points': sample.n,
            'total_mass': sample.total_mass,
            'mass_inside': float(sample.weights[omega.inside].sum()),
        }
        if options['omega_out']:
            results['omega_path'] = str(write_membership(options['omega_out'], omega))
        K = model_curvature(space)
        volume_ok = volume_cone_check(space, K, N, R / 2, R)
        results['volume_cone'] = {'K': K, 'N': N, 'r': R / 2, 'R': R, 'passed': volume_ok}
        return self.make_report(options, results, passed=volume_ok, input_files=input_files)
