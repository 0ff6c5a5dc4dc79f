from ...serializers import FactorizationReportSerializer
from ...services import FactorizationService
from ._base import EXIT_FAILED_CHECK, EXIT_INCONCLUSIVE, EXIT_OK, BlockmodelCommand


class Command(BlockmodelCommand):
    help = 'Check that contraction of the last block factors the solution set'

    def add_arguments(self, parser):
        self.add_spec_argument(parser)
        self.add_numeric_arguments(parser)
        super().add_arguments(parser)

    def run(self, *args, **options) -> int:
        spec = self.parse_spec(options['sizes'])
        report = FactorizationService().verify_factorization(
            spec,
            seeds=self.seeds(options),
            max_codim=options['max_codim'],
            override_gate=options['override_gate'],
            max_workers=options['threads'],
        )

        payload = dict(FactorizationReportSerializer(report, context={'tolerance': options['tol']}).data)
        self.emit(self.with_timing(payload, options), options)
        if report.inconclusive:
            return EXIT_INCONCLUSIVE
        return EXIT_OK if report.passed(options['tol']) else EXIT_FAILED_CHECK
