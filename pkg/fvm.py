#!/usr/bin/env python

import sys
import logging

from docopt import docopt
from dual import build_dual
from files import write_file
from generator import generate_svg
from linalg import SingularSystemError
from mesh import build_rect_mesh, build_structured_tri_mesh, format_mesh
from study import ConfigError, build_study_mesh, load_config, mesh_family, run_study
from verify import format_report, run_checks


usage = """fvm v0.1

Usage:
  fvm.py study [options]
  fvm.py verify [--perturb <eps>] [-v | --debug]
  fvm.py mesh [--kind <kind>] [--dual] <M> <N> <file.svg>
  fvm.py export [--kind <kind>] <M> <N> <file.txt>

Options:
  --scheme <scheme>     Scheme, cr or wilson (default cr).
  --family <M,N>        Coarsest mesh, both sizes doubled per level (default 2,2).
  --levels <k>          Number of meshes in the family (default 5).
  --quad-area <d>       Area quadrature degree (default 4).
  --quad-line <d>       Line quadrature degree (default 3).
  --quad-error <d>      Error quadrature degree (default 6).
  --threads <t>         Assembly threads (default 1).
  --config <file.json>  Load study configuration from file.
  --param <name:value>  Specify study parameter(s).
  --out <file.csv>      Write the convergence table to file.
  --svg <file.svg>      Draw the coarsest mesh and its dual partition.
  --dump-matrix <file>  Write the coarsest system matrix as "row col value".
  --interpolant         Measure Wilson interpolation errors instead of solving.
  --perturb <eps>       Perturb A1[0,0] before verifying [default: 0].
  --kind <kind>         Mesh kind, tri or rect [default: tri].
  --dual                Draw the dual partition as well.
  -v, --verbose         Log progress.
  --debug               Log assembly and solver details.

"""

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


def configure_logging(args):
    level = logging.WARNING
    if args.get('--debug'):
        level = logging.DEBUG
    elif args.get('--verbose'):
        level = logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')


def build_mesh(kind, M, N):
    if kind == 'tri':
        return build_structured_tri_mesh(M, N)
    if kind == 'rect':
        return build_rect_mesh(M, N)
    raise ConfigError('Unknown mesh kind %r (expected tri or rect)' % kind)


def parse_size(value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError('Invalid mesh size %r' % value)


def cmd_study(args):
    """Run a convergence study, print its table and write requested files."""
    config = load_config(args)
    report = run_study(config)
    print(report.summary(), end='')
    if config.out:
        write_file(config.out, report.to_csv())
    if config.svg:
        mesh, dual = build_study_mesh(config.scheme, *mesh_family(config)[0])
        write_file(config.svg, generate_svg(mesh, dual))
    return 0


def cmd_verify(perturbation=0.0):
    results = run_checks(perturbation)
    print(format_report(results), end='')
    return 0 if all(r.passed for r in results) else EXIT_VERIFY


def cmd_mesh_dump(M, N, kind, path, with_dual=False):
    mesh = build_mesh(kind, M, N)
    dual = build_dual(mesh) if with_dual else None
    write_file(path, generate_svg(mesh, dual))
    return 0


def cmd_export(M, N, kind, path):
    write_file(path, format_mesh(build_mesh(kind, M, N)))
    return 0


def main(argv=None):
    args = docopt(usage, argv=argv, version='fvm v0.1')
    configure_logging(args)
    try:
        if args['study']:
            return cmd_study(args)
        if args['verify']:
            try:
                perturbation = float(args['--perturb'])
            except ValueError:
                raise ConfigError('Invalid perturbation %r' % args['--perturb'])
            return cmd_verify(perturbation)
        M, N = parse_size(args['<M>']), parse_size(args['<N>'])
        if args['mesh']:
            return cmd_mesh_dump(M, N, args['--kind'], args['<file.svg>'], args['--dual'])
        return cmd_export(M, N, args['--kind'], args['<file.txt>'])
    except SingularSystemError as e:
        print('Solver failure: %s' % e, file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, OSError) as e:
        print('Configuration error: %s' % e, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
