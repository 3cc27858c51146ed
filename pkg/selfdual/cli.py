"""
Command line: solve, chi-sweep, phase and verify

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 verification failure. Failures are
described by one JSON object on standard error.
"""
import argparse
import json
import logging
import sys

from selfdual.selfdual import __version__, suppress_warnings, warnings_enabled
from selfdual.constant import defaults
from selfdual.config.run_config import build_run_config, load_config_file
from selfdual.energetics import energy_total, gl_residual
from selfdual.errors import ConfigurationError, DomainError, IntegrityError, SelfDualError, SolverError
from selfdual.landau.zeros import locate_zero
from selfdual.phase_diagram import chi, classify, diagram_emit, quasimode_family, slope_from_chis
from selfdual.solver.bogomolny import bogomolny_residuals, build_pair, grid_for_field
from selfdual.util.output import dump_fields, format_float, render_table, resolve_output
from selfdual.util.verification import verify

__all__ = ['main', 'build_parser', 'cmd_solve', 'cmd_chi_sweep', 'cmd_phase', 'cmd_verify']

logger = logging.getLogger(__name__)

STDOUT = '-'


def _add_common_flags(parser):
    group = parser.add_argument_group('lattice and discretization')
    group.add_argument('--config', help='key=value configuration file, overridden by flags')
    group.add_argument('--lattice', help='lattice preset: square or hex')
    group.add_argument('--u', type=float, help='length of the first basis vector (overrides --lattice)')
    group.add_argument('--w', type=float, help='shear of the second basis vector')
    group.add_argument('--grid', type=int, help='grid points per lattice direction (even, >= 8)')
    group.add_argument('--theta-trunc', type=int, help='theta series truncation')
    group.add_argument('--tol', type=float, help='max-norm tolerance of the Kazdan-Warner residual')
    group = parser.add_argument_group('output')
    group.add_argument('--out', help='output file, - for standard output (default: $' + defaults.OUTPUT_DIR_ENV + ')')
    group.add_argument('--format', choices=('csv', 'json'), help='table format')
    group.add_argument('--jobs', type=int, help='worker threads')
    group.add_argument('--seed', type=int, help='seed of the randomized checks')
    group.add_argument('--quiet', action='store_const', const=True, default=None, help='suppress warnings')
    group.add_argument('--verbose', action='store_true', help='log solver progress')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='selfdual',
        description='Exact self-dual Ginzburg-Landau vortex lattices and critical field bounds.')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    commands = parser.add_subparsers(dest='command', required=True)

    solve = commands.add_parser('solve', help='solve the self-dual pair at one internal field')
    solve.add_argument('--H', type=float, required=False, help='internal field H_int in (0, 1/sqrt(2)]')
    solve.add_argument('--dump-fields', action='store_const', const=True, default=None,
                       help='also save the sampled fields as a .npz archive')
    _add_common_flags(solve)

    sweep = commands.add_parser('chi-sweep', help='chi(H_int) along a descending field grid')
    sweep.add_argument('--H-grid', help='comma separated descending fields')
    _add_common_flags(sweep)

    phase = commands.add_parser('phase', help='phase diagram curves and point classification')
    phase.add_argument('--H-grid', help='fields of the quasimode family')
    phase.add_argument('--k-range', help='k_min,k_max')
    phase.add_argument('--resolution', type=int, help='number of k samples')
    phase.add_argument('--classify', action='append', help='k,H_ext point to classify (repeatable)')
    _add_common_flags(phase)

    check = commands.add_parser('verify', help='run the invariant battery')
    check.add_argument('--inject-fault', action='store_const', const=True, default=None, help=argparse.SUPPRESS)
    _add_common_flags(check)
    return parser


def _run_config(args):
    flags = {key: value for key, value in vars(args).items() if key not in ('command', 'config', 'verbose')}
    if flags.get('classify'):
        flags['classify'] = ';'.join(flags['classify'])
    file_values = load_config_file(args.config) if args.config else {}
    return build_run_config(file_values, flags)


def _emit(text, cfg, default_name, stdout):
    path = resolve_output(cfg.out, default_name)
    if path == STDOUT:
        stdout.write(text)
    else:
        with open(path, 'w', newline='') as stream:
            stream.write(text)
        logger.info('wrote %s', path)
    return path


def cmd_solve(cfg, stdout=sys.stdout):
    """Solve at cfg.H and write the pair summary with energies, residuals and the vortex position"""
    if cfg.H is None:
        raise ConfigurationError('solve needs --H')
    lat = cfg.lattice_object()
    solver_cfg = cfg.solver_config()
    grid = grid_for_field(lat, cfg.H, solver_cfg)
    pair = build_pair(lat, grid, solver_cfg.theta, cfg.H, solver_cfg)
    k = defaults.SELF_DUAL_K
    summary = pair.summary()
    summary['energy'] = dict(energy_total(pair.u, pair.a, k, cfg.H, cfg.H)._asdict())
    if pair.degenerate:
        summary['residuals'] = {'d_plus': 0.0, 'bogomolny_field': 0.0, 'gl_order_parameter': 0.0, 'gl_potential': 0.0}
        summary['zero'] = None
    else:
        d_plus, field_equation = bogomolny_residuals(pair.u, pair.a, pair.mu)
        first, second = gl_residual(pair.u, pair.a, k, cfg.H)
        summary['residuals'] = {'d_plus': d_plus, 'bogomolny_field': field_equation,
                                'gl_order_parameter': first, 'gl_potential': second}
        zero = locate_zero(pair.u)
        summary['zero'] = {'x': zero.point[0], 'y': zero.point[1], 'winding': zero.winding}
        summary['newton'] = {'iterations': pair.diagnostics.iterations,
                             'residual_history': list(pair.diagnostics.residual_history)}
    summary['chi'] = chi(pair)
    if cfg.format.value == 'json':
        text = json.dumps(summary, indent=2, sort_keys=True) + '\n'
    else:
        rows = list(_flatten(summary))
        text = render_table(('quantity', 'value'), rows)
    path = _emit(text, cfg, 'solve.' + cfg.format.value, stdout)
    if cfg.dump_fields:
        base = 'fields' if path == STDOUT else path.rsplit('.', 1)[0]
        dump_fields(resolve_output(base + '.npz', None), pair)
    return defaults.EXIT_OK


def _flatten(mapping, prefix=''):
    for key in sorted(mapping):
        value = mapping[key]
        if isinstance(value, dict):
            yield from _flatten(value, prefix + key + '.')
        elif isinstance(value, list):
            yield prefix + key, ' '.join(format_float(v) for v in value)
        else:
            yield prefix + key, value


def cmd_chi_sweep(cfg, stdout=sys.stdout, stderr=sys.stderr):
    """Rows H_int,chi,curl_energy; the S summary line goes to standard output"""
    lat = cfg.lattice_object()
    result = quasimode_family(lat, cfg.H_grid, cfg.solver_config())
    rows = [(pair.H_int, chi(pair), pair.curl_energy) for pair in result.pairs]
    _emit(render_table(('H_int', 'chi', 'curl_energy'), rows, cfg.format), cfg, 'chi.' + cfg.format.value, stdout)
    if rows:
        estimate = slope_from_chis(tuple((H, value) for H, value, _ in rows))
        stdout.write('S grid_sup={} extrapolated={}\n'.format(format_float(estimate.grid_sup),
                                                             format_float(estimate.extrapolated)))
    if result.failure is not None:
        _report_failure(result.failure, stderr)
        return defaults.EXIT_SOLVER
    return defaults.EXIT_OK


def cmd_phase(cfg, stdout=sys.stdout):
    """Diagram rows k,hc1_lower,hc1_upper,hc2 and the phase of every --classify point"""
    lat = cfg.lattice_object()
    result = quasimode_family(lat, cfg.H_grid, cfg.solver_config())
    if result.failure is not None:
        raise result.failure
    rows = diagram_emit(cfg.k_range, cfg.resolution, pairs=result.pairs, jobs=cfg.jobs)
    _emit(render_table(('k', 'hc1_lower', 'hc1_upper', 'hc2'), rows, cfg.format), cfg,
          'phase.' + cfg.format.value, stdout)
    if cfg.classify:
        points = [classify(k, H, result.pairs) for k, H in cfg.classify]
        stdout.write(render_table(('k', 'H_ext', 'phase', 'hc1_lower', 'hc1_upper', 'hc2'),
                                  [(p.k, p.H_ext, p.phase.value, p.hc1_lower, p.hc1_upper, p.hc2) for p in points],
                                  cfg.format))
    return defaults.EXIT_OK


def cmd_verify(cfg, stdout=sys.stdout):
    """Run the battery; the JSON report lists every check with its measured value"""
    run = verify(cfg.lattice_object(), cfg.solver_config(), seed=cfg.seed, inject_fault=cfg.inject_fault,
                 quiet=cfg.quiet)
    _emit(json.dumps(run.report(), indent=2, sort_keys=True) + '\n', cfg, 'verify.json', stdout)
    return defaults.EXIT_OK if run.passed else defaults.EXIT_VERIFY


def _report_failure(error, stderr):
    if isinstance(error, (SolverError, IntegrityError)):
        payload = error.to_dict()
    else:
        payload = {'error': type(error).__name__, 'message': str(error)}
    stderr.write(json.dumps(payload, sort_keys=True) + '\n')


_COMMANDS = {
    'solve': cmd_solve,
    'chi-sweep': cmd_chi_sweep,
    'phase': cmd_phase,
    'verify': cmd_verify,
}


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s', stream=stderr)
    should_warn = warnings_enabled()
    try:
        cfg = _run_config(args)
        if cfg.quiet:
            suppress_warnings()
        command = _COMMANDS[args.command]
        if command is cmd_chi_sweep:
            return command(cfg, stdout, stderr)
        return command(cfg, stdout)
    except (ConfigurationError, DomainError) as e:
        _report_failure(e, stderr)
        return defaults.EXIT_CONFIG
    except SelfDualError as e:
        _report_failure(e, stderr)
        return defaults.EXIT_SOLVER
    finally:
        suppress_warnings(should_warn)


if __name__ == '__main__':
    sys.exit(main())
