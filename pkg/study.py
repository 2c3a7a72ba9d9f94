"""Convergence studies over doubling mesh families."""

import time
import logging

from dataclasses import dataclass, fields
from typing import List, Optional, Tuple

from cr import assemble_cr, solve_cr
from dual import build_cr_dual, build_wilson_dual
from files import read_json, write_file
from linalg import SingularSystemError, format_coo
from mesh import build_rect_mesh, build_structured_tri_mesh
from norms import ConvergenceReport, broken_h1_error, l2_error
from problem import benchmark_problem
from wilson import (assemble_wilson, ellipticity_certificate, interpolate_wilson,
                    solve_wilson, split_conforming)


log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class StudyConfig:
    scheme: str = 'cr'
    family: Tuple[int, int] = (2, 2)
    levels: int = 5
    meshes: Optional[List[Tuple[int, int]]] = None
    quad_area: int = 4
    quad_line: int = 3
    quad_error: int = 6
    threads: int = 1
    interpolant: bool = False
    out: Optional[str] = None
    svg: Optional[str] = None
    dump_matrix: Optional[str] = None

    def validate(self):
        if self.scheme not in ('cr', 'wilson'):
            raise ConfigError('Unknown scheme %r (expected cr or wilson)' % self.scheme)
        for name in ('levels', 'quad_area', 'quad_line', 'quad_error', 'threads'):
            if getattr(self, name) < 1:
                raise ConfigError('%s must be >= 1, got %d' % (name, getattr(self, name)))
        pairs = self.meshes if self.meshes is not None else [self.family]
        if not pairs:
            raise ConfigError('Empty mesh list')
        for M, N in pairs:
            if M < 1 or N < 1:
                raise ConfigError('Mesh sizes must be >= 1, got (%d,%d)' % (M, N))
        for (M0, N0), (M1, N1) in zip(pairs[:-1], pairs[1:]):
            if (M1, N1) != (2 * M0, 2 * N0):
                raise ConfigError('Meshes must double per level: (%d,%d) -> (%d,%d)' % (
                    M0, N0, M1, N1))
        if self.interpolant and self.scheme != 'wilson':
            raise ConfigError('--interpolant applies to the wilson scheme only')
        return self


def parse_params(param_str):
    """Convert a parameter string into a dictionary.

    The string is in the format "name1:val1,name2:val2 ...".

    Args:
      param_str (string): parameter string

    Returns:
      dict: dictionary of parameters
    """

    param_list = [item for item in param_str.split(",") if item]

    def split_param(param_str):
        parts = param_str.split(':')
        if len(parts) != 2:
            raise ConfigError('Malformed parameter definition: %s' % param_str)
        return parts

    return {name: value for name, value in map(split_param, param_list)}


def parse_pair(value):
    """Accept (M, N) as a sequence, "M,N" or "MxN"."""
    try:
        if isinstance(value, str):
            value = value.replace('x', ',').split(',')
        M, N = (int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError('Invalid mesh size %r' % (value,))
    return M, N


def _parse_bool(value):
    if isinstance(value, bool):
        return value
    if str(value).lower() in ('1', 'true', 'yes'):
        return True
    if str(value).lower() in ('0', 'false', 'no'):
        return False
    raise ConfigError('Invalid boolean %r' % (value,))


def _convert(name, value):
    if value is None:
        if name in ('meshes', 'out', 'svg', 'dump_matrix'):
            return None
        raise ConfigError('%s must not be null' % name)
    if name == 'family':
        return parse_pair(value)
    if name == 'meshes':
        if isinstance(value, str):
            value = [item for item in value.split(';') if item]
        return [parse_pair(item) for item in value]
    if name == 'interpolant':
        return _parse_bool(value)
    if name in ('levels', 'quad_area', 'quad_line', 'quad_error', 'threads'):
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError('%s must be an integer, got %r' % (name, value))
    return str(value)


def make_config(values):
    """Build and validate a StudyConfig from a dictionary of raw values."""
    known = {f.name for f in fields(StudyConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError('Unknown configuration key(s): %s' % ', '.join(unknown))
    return StudyConfig(**{name: _convert(name, v) for name, v in values.items()}).validate()


FLAGS = {
    '--scheme': 'scheme',
    '--family': 'family',
    '--levels': 'levels',
    '--quad-area': 'quad_area',
    '--quad-line': 'quad_line',
    '--quad-error': 'quad_error',
    '--threads': 'threads',
    '--out': 'out',
    '--svg': 'svg',
    '--dump-matrix': 'dump_matrix',
}


def load_config(args):
    """Resolve a StudyConfig from docopt arguments.

    Precedence: explicit flags, then the JSON file given by --config, then
    --param values, then defaults.
    """
    values = {}
    if args.get('--param'):
        values.update(parse_params(args['--param']))
    if args.get('--config'):
        try:
            content = read_json(args['--config'])
        except (OSError, ValueError) as e:
            raise ConfigError('Cannot load %s: %s' % (args['--config'], e))
        if not isinstance(content, dict):
            raise ConfigError('%s must contain a JSON object' % args['--config'])
        values.update(content)
    for flag, name in FLAGS.items():
        if args.get(flag) is not None:
            values[name] = args[flag]
    if args.get('--interpolant'):
        values['interpolant'] = True
    return make_config(values)


def mesh_family(config):
    """(M, N) pairs of the study, both doubling per level."""
    if config.meshes is not None:
        return list(config.meshes)
    M, N = config.family
    return [(M << k, N << k) for k in range(config.levels)]


def build_study_mesh(scheme, M, N):
    """Primal mesh and dual partition used by `scheme`."""
    if scheme == 'cr':
        mesh = build_structured_tri_mesh(M, N)
        return mesh, build_cr_dual(mesh)
    mesh = build_rect_mesh(M, N)
    return mesh, build_wilson_dual(mesh)


def run_study(config, problem=None):
    """Solve (or interpolate) on every mesh of the family and measure errors.

    Raises:
        SingularSystemError: a solve failed; the message names the mesh.
    """
    problem = problem or benchmark_problem()
    exact = problem.exact
    meshes = mesh_family(config)
    norms = ('h1', 'l2', 'h1_conf', 'l2_conf') if config.interpolant else ('h1', 'l2')
    label = '%s-%dx%d' % ((config.scheme,) + tuple(meshes[0]))
    report = ConvergenceReport(label, norms)
    log.debug('%s: quadrature degrees area %d, line %d, error %d', label,
              config.quad_area, config.quad_line, config.quad_error)

    for level, (M, N) in enumerate(meshes):
        start = time.perf_counter()
        mesh, dual = build_study_mesh(config.scheme, M, N)
        system = None
        extra = {}
        try:
            if config.scheme == 'cr':
                log.info('(%d,%d): regularity %.4f', M, N, mesh.regularity())
                system = assemble_cr(problem, mesh, dual, config.quad_area,
                                     config.quad_line, config.threads)
                u = solve_cr(system)
            else:
                log.info('(%d,%d): shape bounds %.4f..%.4f, certificate %.6e', M, N,
                         *(mesh.shape_bounds() + (ellipticity_certificate(mesh),)))
                if config.interpolant:
                    u = interpolate_wilson(exact, mesh)
                    conforming, _ = split_conforming(u)
                    extra = dict(
                        h1_conf=broken_h1_error(exact.gradient, conforming, config.quad_error),
                        l2_conf=l2_error(exact.value, conforming, config.quad_error))
                else:
                    system = assemble_wilson(problem, mesh, dual, config.quad_area,
                                             config.threads)
                    u = solve_wilson(system)
        except SingularSystemError as e:
            raise SingularSystemError('mesh (%d,%d): %s' % (M, N, e))

        if level == 0 and config.dump_matrix and system is not None:
            write_file(config.dump_matrix, format_coo(system.matrix))

        report.add(M, N, u.dofmap.n, mesh.h,
                   h1=broken_h1_error(exact.gradient, u, config.quad_error),
                   l2=l2_error(exact.value, u, config.quad_error), **extra)
        log.info('(%d,%d): n=%d err_h1=%.6e (%.2fs)', M, N, u.dofmap.n,
                 report.rows[-1].errors['h1'], time.perf_counter() - start)
    return report
