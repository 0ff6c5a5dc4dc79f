from django.core.management.base import CommandError

from ...exceptions import FitConvergenceError
from ...serializers import MLEFitSerializer
from ...services import BlockmodelService, MLDegreeService, MLEService
from ._base import EXIT_FAILED_CHECK, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, BlockmodelCommand


class Command(BlockmodelCommand):
    help = 'Fit the MLE to a graph, using its edge indicator plus an offset as data'

    def add_arguments(self, parser):
        parser.add_argument('graph', help='Graph JSON file')
        parser.add_argument('--offset', type=float, default=1.0,
                            help='added to every dyad of the indicator to keep data positive')
        parser.add_argument('--reconcile', action='store_true',
                            help='also solve the likelihood equations and locate the MLE among them')
        self.add_numeric_arguments(parser)
        super().add_arguments(parser)

    def run(self, *args, **options) -> int:
        if options['offset'] <= 0:
            raise CommandError('--offset must be positive', returncode=EXIT_USAGE)
        graph = self.read_graph(options['graph'])
        blockmodel_service = BlockmodelService()
        design = blockmodel_service.design_matrix(graph.spec)
        u = blockmodel_service.indicator(graph, design) + options['offset']

        mle_service = MLEService(blockmodel_service)
        try:
            fit = mle_service.fit(graph.spec, u)
        except FitConvergenceError as exc:
            raise CommandError(str(exc), returncode=EXIT_INCONCLUSIVE)
        payload = dict(MLEFitSerializer(fit, context={'columns': design.column_labels}).data)

        code = EXIT_OK
        if options['reconcile']:
            mldeg_service = MLDegreeService()
            mldeg_service.check_gate(graph.spec, options['max_codim'], options['override_gate'])
            solutions = mldeg_service.likelihood_solutions(
                graph.spec, u, options['seed'], max_workers=options['threads'], residual_tolerance=options['tol'])
            reconciled = mle_service.reconcile(solutions, fit)
            payload['reconciled'] = reconciled
            payload['solutions'] = solutions.count
            code = EXIT_OK if reconciled else EXIT_FAILED_CHECK

        self.emit(self.with_timing(payload, options), options)
        return code
