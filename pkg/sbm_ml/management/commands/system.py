from django.conf import settings

from ...services import LikelihoodService
from ._base import EXIT_OK, BlockmodelCommand


class Command(BlockmodelCommand):
    help = 'Export the likelihood equations and kernel chart for seeded generic data'

    def add_arguments(self, parser):
        self.add_spec_argument(parser)
        parser.add_argument('--seed', type=int, default=settings.MLDEG['DEFAULT_SEED'])
        super().add_arguments(parser)

    def run(self, *args, **options) -> int:
        spec = self.parse_spec(options['sizes'])
        likelihood_service = LikelihoodService()
        data = likelihood_service.sample_generic_u(spec, options['seed'])
        system = likelihood_service.assemble(spec, data.u)
        payload = likelihood_service.export_system(system, likelihood_service.kernel_chart(system))
        payload['seed'] = data.seed
        self.emit(self.with_timing(payload, options), options)
        return EXIT_OK
