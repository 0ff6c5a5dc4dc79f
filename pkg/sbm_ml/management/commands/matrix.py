from ...services import BlockmodelService, ExportService
from ._base import EXIT_OK, BlockmodelCommand


class Command(BlockmodelCommand):
    help = 'Print the design matrix as CSV or JSON'

    def add_arguments(self, parser):
        self.add_spec_argument(parser)
        parser.add_argument('--format', choices=('csv', 'json'), default='json')
        super().add_arguments(parser)

    def run(self, *args, **options) -> int:
        spec = self.parse_spec(options['sizes'])
        design = BlockmodelService().design_matrix(spec)
        export_service = ExportService()
        if options['format'] == 'csv':
            self.emit(None, options, export_service.matrix_csv(design))
        else:
            self.emit(self.with_timing(export_service.matrix_json(design), options), options)
        return EXIT_OK
