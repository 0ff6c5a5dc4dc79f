from ...services import MLDegreeService
from ._base import EXIT_OK, BlockmodelCommand


class Command(BlockmodelCommand):
    help = 'Closed-form ML degree of the beta-SBM with the given block sizes'

    def add_arguments(self, parser):
        self.add_spec_argument(parser)
        super().add_arguments(parser)

    def run(self, *args, **options) -> int:
        spec = self.parse_spec(options['sizes'])
        value = MLDegreeService().mldeg_formula(spec)
        if options['timing']:
            self.emit(self.with_timing({'spec': list(spec.sizes), 'mldeg': value}, options), options)
        else:
            self.emit(value, options)
        return EXIT_OK
