from collections import Counter

from ...serializers import QuadBinomialSerializer
from ...services import BinomialService
from ._base import EXIT_OK, BlockmodelCommand


class Command(BlockmodelCommand):
    help = 'List the quadratic binomials generating the toric ideal'

    def add_arguments(self, parser):
        self.add_spec_argument(parser)
        super().add_arguments(parser)

    def run(self, *args, **options) -> int:
        spec = self.parse_spec(options['sizes'])
        binomials = BinomialService().enumerate_binomials(spec)
        kinds = Counter(b.kind.value for b in binomials)
        payload = {
            'spec': list(spec.sizes),
            'count': len(binomials),
            'kinds': {kind: kinds.get(kind, 0) for kind in ('within', '3-1', '2-2', '2-1-1')},
            'binomials': QuadBinomialSerializer(binomials, many=True).data,
        }
        self.emit(self.with_timing(payload, options), options)
        return EXIT_OK
