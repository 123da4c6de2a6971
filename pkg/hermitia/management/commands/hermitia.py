from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from hermitia.commands import ConfigError, build_config, cmd_check, cmd_curvature, cmd_flow, cmd_verify
from hermitia.commands.config import BUILTIN_METRICS, FLOW, FORMATS, SUBCOMMANDS, VERIFY, WHAT
from hermitia.geometry.connection import KINDS
from hermitia.geometry.errors import HermitiaError
from hermitia.geometry.suites import SUITES
from hermitia.utils import log_output, setup_loggers, worker_map

DRIVERS = {
    "curvature": cmd_curvature,
    "check": cmd_check,
    "verify": cmd_verify,
    "flow": cmd_flow,
}

CONFIG_ERROR = 2
RUNTIME_ERROR = 3
VERIFICATION_FAILED = 1


class Command(BaseCommand):
    help = (
        'curvature, structure checks, verification suites and the Chern-Ricci flow of Hermitian metrics. '
        'Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 domain or runtime error.'
    )

    def add_arguments(self, parser):
        parser.add_argument('subcommand', choices=SUBCOMMANDS)

        metric = parser.add_argument_group('metric')
        metric.add_argument('--metric', choices=BUILTIN_METRICS)
        metric.add_argument('--dim', type=int)
        metric.add_argument('--metric-file', dest='metric_file')
        metric.add_argument('--order', type=int, help='jet truncation order (HERMITIA_JET_ORDER)')

        points = parser.add_argument_group('points')
        points.add_argument('--point', action='append', help='2n comma separated reals re1,im1,...; repeatable')
        points.add_argument('--sample', type=int, help='number of seeded uniform sample points')
        points.add_argument('--seed', type=int, default=0)

        curvature = parser.add_argument_group('curvature')
        curvature.add_argument('--connection', choices=KINDS, default='chern')
        curvature.add_argument('--what', choices=WHAT, default='all')

        check = parser.add_argument_group('check')
        check.add_argument('--clause', action='append', help='vanishing hypothesis clause, or all; repeatable')
        check.add_argument('--p', type=int, default=1)
        check.add_argument('--positivity-tol', dest='positivity_tol', type=float)
        check.add_argument('--classify-tol', dest='classify_tol', type=float)

        verify = parser.add_argument_group('verify')
        verify.add_argument('--suite', choices=SUITES)
        verify.add_argument('--trials', type=int)
        verify.add_argument('--points', type=int, help='sample points per dimension for the oracle suites')
        verify.add_argument('--tol', type=float)

        flow = parser.add_argument_group('flow')
        flow.add_argument('--hopf-ode', dest='hopf_ode', action='store_true')
        flow.add_argument('--mu', type=float, default=0.0)
        flow.add_argument('--c0', type=float, default=1.0)
        flow.add_argument('--T', dest='T', type=float, default=1.0)
        flow.add_argument('--steps', type=int, default=10)
        flow.add_argument('--grid', type=int, default=8)
        flow.add_argument('--dt', type=float)
        flow.add_argument('--cadence', type=int, default=1)
        flow.add_argument('--dump', help='grid dump of the final state, .csv or .npz')
        flow.add_argument('--fit', help='torus metric file fitted to the final state')

        output = parser.add_argument_group('output')
        output.add_argument('--format', choices=FORMATS, default='json')
        output.add_argument('--output', help='write the report here instead of stdout')
        output.add_argument('--log-dir', dest='log_dir')

    def handle(self, *args, **options):
        try:
            cfg = build_config(options['subcommand'], options)
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR)

        setup_loggers(options.get('log_dir') or settings.HERMITIA_LOG_DIR)
        log_output(f"hermitia {cfg.subcommand} seed {cfg.seed}")

        try:
            with worker_map() as mapper:
                result = DRIVERS[cfg.subcommand](cfg, mapper)
        except ConfigError as exc:
            raise CommandError(str(exc), returncode=CONFIG_ERROR)
        except HermitiaError as exc:
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=RUNTIME_ERROR)

        text = result.render(cfg)
        if cfg.output:
            with open(cfg.output, 'w', encoding='utf-8') as handle:
                handle.write(text)
            log_output(f"report written to {cfg.output}")
        else:
            self.stdout.write(text, ending='')

        if result.failed:
            if cfg.subcommand == FLOW:
                raise CommandError(result.data['halted']['message'], returncode=RUNTIME_ERROR)
            if cfg.subcommand == VERIFY:
                raise CommandError(f"{cfg.suite} suite failed", returncode=VERIFICATION_FAILED)
