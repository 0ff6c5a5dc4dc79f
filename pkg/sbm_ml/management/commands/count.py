from ...serializers import LikelihoodSolutionsSerializer, MLDegreeReportSerializer
from ...services import MLDegreeService
from ._base import EXIT_FAILED_CHECK, EXIT_INCONCLUSIVE, EXIT_OK, BlockmodelCommand


class Command(BlockmodelCommand):
    help = 'Count complex solutions of the likelihood equations and compare with the formula'

    def add_arguments(self, parser):
        self.add_spec_argument(parser)
        self.add_numeric_arguments(parser)
        parser.add_argument('--solver-report', action='store_true',
                            help='add per-seed solver output: config, path tallies, solutions, residuals')
        super().add_arguments(parser)

    def table(self, payload: dict) -> str:
        rows = [
            ('model', 'M(' + ','.join(str(s) for s in payload['spec']) + ')'),
            ('formula', payload['formula_value']),
            ('numeric', payload['numeric_count'] if payload['numeric_count'] is not None else '-'),
            ('agreement', {True: 'yes', False: 'NO', None: '-'}[payload['agreement']]),
            ('seeds', ' '.join(str(s) for s in payload['seeds'])),
            ('per seed', ' '.join(str(c) for c in payload['per_seed_counts'])),
            ('paths', f"{payload['paths_tracked']} tracked, {payload['diverged']} diverged, "
                      f"{payload['failed']} failed"),
        ]
        if 'timing' in payload:
            rows.append(('seconds', payload['timing']['seconds']))
        width = max(len(name) for name, _ in rows)
        return '\n'.join(f'{name:<{width}}  {value}' for name, value in rows) + '\n'

    def run(self, *args, **options) -> int:
        spec = self.parse_spec(options['sizes'])
        report = MLDegreeService().mldeg_numeric(
            spec,
            seeds=self.seeds(options),
            max_codim=options['max_codim'],
            override_gate=options['override_gate'],
            max_workers=options['threads'],
            residual_tolerance=options['tol'],
        )

        payload = dict(MLDegreeReportSerializer(report).data)
        if options['solver_report']:
            payload['solver'] = LikelihoodSolutionsSerializer(report.solutions, many=True).data
        payload = self.with_timing(payload, options)
        tabular = options['pretty'] and not options['solver_report']
        self.emit(payload, options, self.table(payload) if tabular else None)
        if report.numeric_count is None:
            return EXIT_INCONCLUSIVE
        return EXIT_OK if report.agreement else EXIT_FAILED_CHECK
