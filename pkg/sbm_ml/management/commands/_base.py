import json
import time

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework.renderers import JSONRenderer

from ...exceptions import BlockmodelError
from ...models import BlockSpec, Graph
from ...serializers import BlockSpecSerializer, GraphSerializer
from ...services import ExportService

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


class BlockmodelCommand(BaseCommand):
    """
    Shared plumbing: argument parsing for block sizes and graph files, JSON
    payloads on stdout, exit codes carried by CommandError
    """
    requires_system_checks = []
    requires_migrations_checks = False

    def add_spec_argument(self, parser) -> None:
        parser.add_argument('sizes', nargs='+', help='block sizes n1 ... nk')

    def add_numeric_arguments(self, parser) -> None:
        parser.add_argument('--seed', type=int, default=settings.MLDEG['DEFAULT_SEED'],
                            help='first seed; further trials use seed+1, seed+2, ...')
        parser.add_argument('--trials', type=int, default=settings.MLDEG['TRIALS'])
        parser.add_argument('--tol', type=float, default=settings.MLDEG['RESIDUAL_TOLERANCE'],
                            help='full-system residual filter')
        parser.add_argument('--max-codim', type=int, default=settings.MLDEG['MAX_CODIM'])
        parser.add_argument('--override-gate', action='store_true',
                            help='solve even above the codimension gate')
        parser.add_argument('--threads', type=int, default=None)

    def add_arguments(self, parser) -> None:
        parser.add_argument('--pretty', action='store_true', help='human-readable output')
        parser.add_argument('--timing', action='store_true', help='add wall-clock seconds to the payload')
        parser.add_argument('--output', default=None, help='also write the payload to this file')

    def parse_spec(self, sizes) -> BlockSpec:
        serializer = BlockSpecSerializer(data={'sizes': list(sizes)})
        if not serializer.is_valid():
            raise CommandError(json.dumps({'errors': serializer.errors}), returncode=EXIT_USAGE)
        return serializer.save()

    def read_graph(self, path: str) -> Graph:
        try:
            with open(path) as graph_file:
                data = json.load(graph_file)
        except OSError as exc:
            raise CommandError(f'cannot read {path}: {exc}', returncode=EXIT_USAGE)
        except json.JSONDecodeError as exc:
            raise CommandError(f'{path}:{exc.lineno}:{exc.colno}: {exc.msg}', returncode=EXIT_USAGE)
        serializer = GraphSerializer(data=data)
        if not serializer.is_valid():
            raise CommandError(f'{path}: ' + json.dumps({'errors': serializer.errors}), returncode=EXIT_USAGE)
        return serializer.save()

    def seeds(self, options) -> list[int]:
        if options['trials'] < 1:
            raise CommandError('--trials must be at least 1', returncode=EXIT_USAGE)
        return [options['seed'] + i for i in range(options['trials'])]

    def render(self, payload, pretty: bool = False) -> str:
        context = {'indent': 2} if pretty else {}
        return JSONRenderer().render(payload, renderer_context=context).decode()

    def emit(self, payload, options, text: str | None = None) -> None:
        """Write the payload to stdout and, with --output, to a file."""
        if text is None:
            text = self.render(payload, options.get('pretty', False))
        self.stdout.write(text.rstrip('\n'))
        if options.get('output'):
            ExportService().write(options['output'], text if text.endswith('\n') else text + '\n')

    def run(self, *args, **options) -> int:
        raise NotImplementedError

    def handle(self, *args, **options):
        self._started = time.perf_counter()
        try:
            code = self.run(*args, **options)
        except BlockmodelError as exc:
            raise CommandError(str(exc), returncode=EXIT_USAGE)
        if code:
            raise CommandError(f"exit status {code}", returncode=code)

    def with_timing(self, payload: dict, options) -> dict:
        if options.get('timing'):
            payload['timing'] = {'seconds': round(time.perf_counter() - self._started, 6)}
        return payload
