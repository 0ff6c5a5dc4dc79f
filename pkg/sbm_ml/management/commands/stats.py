from ...serializers import SufficientStatisticSerializer
from ...services import BlockmodelService
from ._base import EXIT_OK, BlockmodelCommand


class Command(BlockmodelCommand):
    help = 'Sufficient statistic (degrees, then block-pair edge counts) of a graph file'

    def add_arguments(self, parser):
        parser.add_argument('graph', help='Graph JSON file')
        super().add_arguments(parser)

    def run(self, *args, **options) -> int:
        graph = self.read_graph(options['graph'])
        statistic = BlockmodelService().sufficient_statistic(graph)
        payload = dict(SufficientStatisticSerializer(statistic).data)
        self.emit(self.with_timing(payload, options), options)
        return EXIT_OK
