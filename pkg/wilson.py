"""Hybrid Wilson finite volume method on rectangle meshes.

Reference element [-1,1]^2 with corners P1..P4 = (1,1), (-1,1), (-1,-1),
(1,-1). Trial basis: the four bilinear corner functions plus the bubbles
(x^2-1)/8 and (y^2-1)/8. DOF functionals: corner values and the integrals of
the pure second derivatives. Test space: characteristic functions of the
four quadrants (vertex control volumes) plus the two bubbles.

Only -laplace(u) = f is supported. The element matrix of a cell with shape
parameter r = h2/h1 is r*A1 + A2/r, with A1, A2 computed once by quadrature
on the reference dual partition.
"""

import logging
import numpy as np

from dataclasses import dataclass
from functools import lru_cache

from dual import build_wilson_dual
from field import SolutionField
from linalg import SingularSystemError
from linalg import SparseBuilder, apply_dirichlet, direct_solve, map_cell_batches
from mesh import build_rect_mesh
from problem import Rectangle
from quadrature import polygon_points, segment_points, square_rule


log = logging.getLogger(__name__)


CORNERS = np.array([(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)])


def reference_basis(xi, eta):
    """Values (..., 6) and gradients (..., 6, 2) of the reference trial basis."""
    xi, eta = np.asarray(xi, dtype=float)[..., None], np.asarray(eta, dtype=float)[..., None]
    cx, cy = CORNERS[:, 0], CORNERS[:, 1]
    values = np.concatenate([(1 + cx * xi) * (1 + cy * eta) / 4,
                             (xi ** 2 - 1) / 8, (eta ** 2 - 1) / 8], axis=-1)
    zero = np.zeros_like(xi)
    dxi = np.concatenate([cx * (1 + cy * eta) / 4, xi / 4, zero], axis=-1)
    deta = np.concatenate([cy * (1 + cx * xi) / 4, zero, eta / 4], axis=-1)
    return values, np.stack([dxi, deta], axis=-1)


def reference_hessians(xi, eta):
    """Constant second derivatives (..., 6, 2, 2) of the reference basis."""
    shape = np.shape(xi)
    h = np.zeros((6, 2, 2))
    h[:4, 0, 1] = h[:4, 1, 0] = CORNERS[:, 0] * CORNERS[:, 1] / 4
    h[4, 0, 0] = h[5, 1, 1] = 0.25
    return np.broadcast_to(h, shape + (6, 2, 2))


def apply_functionals(value, hessian, degree=4):
    """The six reference DOF functionals of a function given by callbacks.

    Args:
        value: f(xi, eta) -> array, or (..., k) for k functions at once.
        hessian: f(xi, eta) -> (..., 2, 2) or (..., k, 2, 2).
    """
    rule = square_rule(degree)
    xi, eta = rule.points[:, 0], rule.points[:, 1]
    corners = np.asarray(value(CORNERS[:, 0], CORNERS[:, 1]))
    h = np.asarray(hessian(xi, eta))
    moments = [np.tensordot(rule.weights, h[..., j, j], axes=(0, 0)) for j in (0, 1)]
    return np.concatenate([corners, np.stack(moments)], axis=0)


def duality_matrix():
    """D[i, j] = eta_i(phi_j); the identity for a unisolvent element."""
    return apply_functionals(lambda x, y: reference_basis(x, y)[0], reference_hessians)


class WilsonDofMap(object):
    """Vertex values followed by two moment DOFs per cell.

    Cell c owns moments n_vertices + 2c (x-direction) and n_vertices + 2c + 1
    (y-direction). Only vertex DOFs on the boundary are constrained.
    """

    scheme = 'wilson'

    def __init__(self, mesh):
        self.mesh = mesh
        self.nvertices = len(mesh.points)
        self.n = self.nvertices + 2 * mesh.ncells
        moments = self.nvertices + 2 * np.arange(mesh.ncells)
        self.cell_dofs = np.column_stack([mesh.cells, moments, moments + 1])
        self.boundary = np.flatnonzero(mesh.boundary_vertices)

    def reference_coordinates(self, points, cells=None):
        sel = slice(None) if cells is None else cells
        m = self.mesh
        centers, h1, h2 = m.centers[sel], m.h1[sel], m.h2[sel]
        xi = (points[..., 0] - centers[:, 0:1]) / h1[:, None]
        eta = (points[..., 1] - centers[:, 1:2]) / h2[:, None]
        return xi, eta

    def basis(self, points, cells=None):
        points = np.asarray(points, dtype=float)
        xi, eta = self.reference_coordinates(points, cells)
        phi, dphi = reference_basis(xi, eta)
        sel = slice(None) if cells is None else cells
        scale = np.stack([1.0 / self.mesh.h1[sel], 1.0 / self.mesh.h2[sel]], axis=-1)
        return phi, dphi * scale[:, None, None, :]

    def cell_quadrature(self, degree):
        rule = square_rule(degree)
        m = self.mesh
        half = np.stack([m.h1, m.h2], axis=-1)
        points = m.centers[:, None, :] + half[:, None, :] * rule.points
        weights = (m.h1 * m.h2)[:, None] * rule.weights
        return points, weights

    def piece_field(self, coefficients, points, local):
        """Vertex value on each quadrant plus the (continuous) bubble part."""
        nc, nl, npts = points.shape[:3]
        phi, dphi = self.basis(points.reshape(nc, nl * npts, 2))
        bubble = coefficients[self.cell_dofs[:, 4:]]
        values = np.einsum('cqk,ck->cq', phi[..., 4:], bubble).reshape(nc, nl, npts)
        grads = np.einsum('cqkd,ck->cqd', dphi[..., 4:, :], bubble).reshape(nc, nl, npts, 2)
        values = values + coefficients[self.mesh.cells[:, local]][..., None]
        return values, grads


def bilinear_form(dofmap, dual, cells=None, axes=(0, 1), quad_area=4, quad_line=3):
    """a_K(phi_l, psi_m) by quadrature on the dual pieces of the given cells.

    Only the derivative directions listed in `axes` are kept, so that the
    reference cell yields A1 with axes=(0,) and A2 with axes=(1,).

    Returns:
        ndarray: (ncells, 6, 6), rows trial l, columns test m.
    """
    cells = np.arange(dofmap.mesh.ncells) if cells is None else np.asarray(cells)
    nc, ax = len(cells), list(axes)

    points, weights = polygon_points(dual.pieces[cells], quad_area)
    _, g = dofmap.basis(points.reshape(nc, -1, 2), cells)
    g = g.reshape(points.shape[:3] + (6, 2))[..., ax]
    test = np.zeros_like(g)
    test[..., 4:, :] = g[..., 4:, :]
    area = np.einsum('cqm,cqmla,cqmta->clt', weights, g, test)

    segs = dual.segments[cells]
    points, weights = segment_points(segs[..., 0, :], segs[..., 1, :], quad_line)
    _, g = dofmap.basis(points.reshape(nc, -1, 2), cells)
    g = g.reshape(points.shape[:3] + (6, 2))[..., ax]
    normals = dual.segment_normals[cells][..., ax]
    flux = np.einsum('csq,csqla,csa->csl', weights, g, normals)

    # quadrant tests jump across a segment, bubble tests do not
    jump = np.zeros((len(dual.segment_sides), 6))
    for s, (owner, neighbour) in enumerate(dual.segment_sides):
        jump[s, owner] += 1.0
        jump[s, neighbour] -= 1.0
    return area - np.einsum('csl,st->clt', flux, jump)


@dataclass(frozen=True)
class WilsonReferenceElement:
    A1: np.ndarray
    A2: np.ndarray
    e: np.ndarray
    E: np.ndarray

    @property
    def A1s(self):
        return 0.5 * (self.A1 + self.A1.T)

    @property
    def A2s(self):
        return 0.5 * (self.A2 + self.A2.T)

    def H(self, r):
        """r*sym(A1) + sym(A2)/r + E."""
        return r * self.A1s + self.A2s / r + self.E


@lru_cache(maxsize=None)
def reference_element():
    mesh = build_rect_mesh(1, 1, Rectangle(-1.0, 1.0, -1.0, 1.0))
    dual = build_wilson_dual(mesh)
    dofmap = WilsonDofMap(mesh)
    A1 = bilinear_form(dofmap, dual, axes=(0,))[0]
    A2 = bilinear_form(dofmap, dual, axes=(1,))[0]
    e = np.array([1.0, 1.0, 1.0, 1.0, 0.0, 0.0])
    E = np.outer(e, e) / (e @ e)
    for array in (A1, A2, e, E):
        array.setflags(write=False)
    return WilsonReferenceElement(A1, A2, e, E)


def reference_matrices():
    ref = reference_element()
    return ref.A1, ref.A2


def element_stiffness(r, A1=None, A2=None):
    """r*A1 + A2/r; `r` may be an array of shape parameters.

    Raises:
        ValueError: some r <= 0.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError('Shape parameter must be positive, got %s' % r[r <= 0][:5])
    if A1 is None or A2 is None:
        A1, A2 = reference_matrices()
    return r[..., None, None] * A1 + A2 / r[..., None, None]


def ellipticity_certificate(mesh, reference=None):
    """min over cells of the smallest eigenvalue of H(r_K)."""
    ref = reference or reference_element()
    ratios = np.unique(mesh.ratios)
    H = np.stack([ref.H(r) for r in ratios])
    return float(np.linalg.eigvalsh(H)[:, 0].min())


def _check_problem(problem):
    if not problem.is_poisson():
        raise ValueError('The Wilson FVM supports only identity diffusion and zero reaction')


def assemble_wilson(problem, mesh, dual, quad_area=4, threads=1):
    """Assemble the hybrid Wilson FVM system.

    Vertex rows are flux balances over the vertex control volumes; moment
    rows test with the cell bubbles. Boundary vertex rows become identity
    rows.

    Raises:
        ValueError: non-Poisson coefficients or a dual of another mesh.
    """
    _check_problem(problem)
    if dual.mesh is not mesh or dual.kind != 'wilson':
        raise ValueError('Dual partition (%s) was not built from this mesh' % dual.kind)
    dofmap = WilsonDofMap(mesh)
    stiffness = element_stiffness(mesh.ratios)

    cpoints, cweights = dofmap.cell_quadrature(quad_area)
    ppoints, pweights = polygon_points(dual.pieces, quad_area)

    def work(cells):
        x, y = ppoints[cells, ..., 0], ppoints[cells, ..., 1]
        vertex = np.sum(pweights[cells] * problem.source(x, y), axis=-1)
        x, y = cpoints[cells, :, 0], cpoints[cells, :, 1]
        phi, _ = dofmap.basis(cpoints[cells], cells)
        moment = np.einsum('cq,cq,cqk->ck', cweights[cells], problem.source(x, y), phi[..., 4:])
        return cells, np.concatenate([vertex, moment], axis=1)

    builder = SparseBuilder(dofmap.n)
    builder.add_block(dofmap.cell_dofs, dofmap.cell_dofs, np.swapaxes(stiffness, 1, 2))
    rhs = np.zeros(dofmap.n)
    for cells, load in map_cell_batches(work, mesh.ncells, threads):
        rhs += np.bincount(dofmap.cell_dofs[cells].ravel(), weights=load.ravel(),
                           minlength=dofmap.n)

    system = apply_dirichlet(builder.tocsr(), rhs, dofmap.boundary, dofmap)
    log.debug('Wilson system: n=%d, nnz=%d, %d constrained', system.n, system.matrix.nnz,
              len(dofmap.boundary))
    return system


def solve_wilson(system):
    """Solve an assembled Wilson system; boundary vertex values are set to 0."""
    dofmap = system.dofmap
    certificate = ellipticity_certificate(dofmap.mesh)
    log.debug('ellipticity certificate %.6e', certificate)
    if not certificate > 0:
        raise SingularSystemError('Element matrices are not uniformly elliptic (%g)' % certificate)
    x = direct_solve(system)
    x[system.constrained] = 0.0
    return SolutionField('wilson', x, dofmap.mesh, dofmap)


def split_conforming(w):
    """Split a Wilson field into its bilinear part and its bubble part."""
    nv = w.dofmap.nvertices
    conforming = w.coefficients.copy()
    conforming[nv:] = 0.0
    return w.with_coefficients(conforming), w.with_coefficients(w.coefficients - conforming)


def interpolate_wilson(exact, mesh, dofmap=None, degree=4):
    """Interpolant matching the six DOF functionals on every cell.

    Moment DOFs are (h1/h2) times the integral of u_xx over the cell and
    (h2/h1) times the integral of u_yy.

    Raises:
        ValueError: `exact` has no Hessian callback.
    """
    if exact.hessian is None:
        raise ValueError('Wilson interpolation needs second derivatives')
    dofmap = dofmap or WilsonDofMap(mesh)
    coef = np.zeros(dofmap.n)
    coef[:dofmap.nvertices] = exact.value(mesh.points[:, 0], mesh.points[:, 1])
    points, weights = dofmap.cell_quadrature(degree)
    h = exact.hessian(points[..., 0], points[..., 1])
    coef[dofmap.nvertices::2] = mesh.h1 / mesh.h2 * np.sum(weights * h[..., 0, 0], axis=-1)
    coef[dofmap.nvertices + 1::2] = mesh.h2 / mesh.h1 * np.sum(weights * h[..., 1, 1], axis=-1)
    return SolutionField('wilson', coef, mesh, dofmap)


def discrete_trial_seminorm(w, reference=None):
    """sqrt(sum_K |w_K - E w_K|^2) over the local coefficient vectors."""
    ref = reference or reference_element()
    local = w.cell_coefficients()
    d = local - local @ ref.E
    return float(np.sqrt(np.sum(d * d)))
