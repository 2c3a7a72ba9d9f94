"""Error norms, the discrete test-space seminorm and convergence tables."""

import logging
import numpy as np

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from quadrature import polygon_points, segment_points


log = logging.getLogger(__name__)


# |u - u_T|^2 has degree 8 for a quartic u and a linear u_T; the collapsed
# triangle rule at degree 6 is off by about 3e-6 relative.
L2_MIN_DEGREE = {'tri': 8}


def broken_h1_error(gradient, u, degree=6):
    """(sum_K int_K |grad u - grad u_T|^2)^(1/2), `gradient` the exact one."""
    points, weights, _, grads = u.sample(degree)
    diff = gradient(points[..., 0], points[..., 1]) - grads
    return float(np.sqrt(np.sum(weights * np.sum(diff * diff, axis=-1))))


def l2_error(value, u, degree=6):
    """(int |u - u_T|^2)^(1/2), `value` the exact solution.

    On triangulations `degree` is raised to at least 8.
    """
    degree = max(degree, L2_MIN_DEGREE.get(u.mesh.kind, 1))
    points, weights, values, _ = u.sample(degree)
    diff = value(points[..., 0], points[..., 1]) - values
    return float(np.sqrt(np.sum(weights * diff * diff)))


def broken_h1_norm(u, degree=2):
    _, weights, _, grads = u.sample(degree)
    return float(np.sqrt(np.sum(weights * np.sum(grads * grads, axis=-1))))


def l2_norm(u, degree=4):
    _, weights, values, _ = u.sample(degree)
    return float(np.sqrt(np.sum(weights * values * values)))


def test_space_seminorm(w, dual, degree=2):
    """Discrete seminorm of the test-space image of w.

    Sum over the dual pieces of |v|^2_1 plus, for every dual segment inside
    a primal cell, the squared jump of v across it integrated and divided by
    the segment length.
    """
    dofmap, coef = w.dofmap, w.coefficients
    nlocal = dual.pieces.shape[1]

    points, weights = polygon_points(dual.pieces, degree)
    _, grads = dofmap.piece_field(coef, points, np.arange(nlocal))
    gradient_part = np.sum(weights * np.sum(grads * grads, axis=-1))

    segs = dual.segments
    points, weights = segment_points(segs[..., 0, :], segs[..., 1, :], max(degree, 1))
    owner, _ = dofmap.piece_field(coef, points, dual.segment_sides[:, 0])
    neighbour, _ = dofmap.piece_field(coef, points, dual.segment_sides[:, 1])
    jumps = np.sum(weights * (owner - neighbour) ** 2, axis=-1) / dual.segment_lengths
    return float(np.sqrt(gradient_part + jumps.sum()))


def convergence_order(errors, hs):
    """Observed orders log(e_prev/e_cur)/log(h_prev/h_cur).

    Returns:
        list: None for the first row, then one order per refinement.

    Raises:
        ValueError: fewer than two rows or h not strictly decreasing.
    """
    errors, hs = np.asarray(errors, dtype=float), np.asarray(hs, dtype=float)
    if len(errors) != len(hs) or len(hs) < 2:
        raise ValueError('Need at least two (error, h) rows')
    if np.any(np.diff(hs) >= 0):
        raise ValueError('Mesh sizes must decrease strictly: %s' % hs)
    with np.errstate(divide='ignore', invalid='ignore'):
        orders = np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:])
    return [None] + [float(o) for o in orders]


@dataclass
class ConvergenceRow:
    M: int
    N: int
    n: int
    h: float
    errors: Dict[str, float]


@dataclass
class ConvergenceReport:
    """Per-mesh errors of one refinement family.

    `norms` lists the error columns in output order, e.g. ('h1', 'l2').
    """

    family: str
    norms: Tuple[str, ...] = ('h1', 'l2')
    rows: List[ConvergenceRow] = field(default_factory=list)

    def add(self, M, N, n, h, **errors):
        self.rows.append(ConvergenceRow(M, N, n, h, errors))

    def column(self, norm):
        return [row.errors[norm] for row in self.rows]

    def orders(self, norm):
        if len(self.rows) < 2:
            return [None] * len(self.rows)
        return convergence_order(self.column(norm), [row.h for row in self.rows])

    def to_rows(self):
        """Header and formatted rows of the CSV table."""
        header = ['family', 'M', 'N', 'n', 'h']
        for norm in self.norms:
            header += ['err_%s' % norm, 'order_%s' % norm]
        orders = {norm: self.orders(norm) for norm in self.norms}
        table = [header]
        for k, row in enumerate(self.rows):
            line = [self.family, '%d' % row.M, '%d' % row.N, '%d' % row.n, '%.6e' % row.h]
            for norm in self.norms:
                order = orders[norm][k]
                line += ['%.6e' % row.errors[norm], '' if order is None else '%.6e' % order]
            table.append(line)
        return table

    def to_csv(self):
        return ''.join(','.join(line) + '\n' for line in self.to_rows())

    def summary(self):
        """Fixed-width text table for standard output."""
        return ''.join(' '.join('%14s' % cell for cell in line) + '\n'
                       for line in self.to_rows())
