"""Crouzeix-Raviart finite volume method on triangulations.

Trial functions are piecewise linear and continuous at interior edge
midpoints; test functions are the characteristic functions of the
edge-midpoint control volumes. Coefficients are midpoint values, so the
transfer from trial to test space is the identity on coefficient vectors.
"""

import logging
import numpy as np

from dataclasses import dataclass

from dual import build_cr_dual
from field import SolutionField
from field import local_conservation_residual  # noqa: F401  (re-export)
from linalg import SparseBuilder, apply_dirichlet, direct_solve, map_cell_batches
from quadrature import polygon_points, segment_points, triangle_points


log = logging.getLogger(__name__)


def basis_gradients(cell_points):
    """Constant gradients (ncells, 3, 2) of the C-R basis.

    Local function k equals 1 at the midpoint of the edge opposite vertex k
    and 0 at the other two midpoints: phi_k = 1 - 2 lambda_k.
    """
    p = np.asarray(cell_points, dtype=float)
    x, y = p[..., 0], p[..., 1]
    area = 0.5 * np.sum(x * np.roll(y, -1, axis=-1) - np.roll(x, -1, axis=-1) * y, axis=-1)
    grad_lambda = np.stack([np.roll(y, -1, axis=-1) - np.roll(y, -2, axis=-1),
                            np.roll(x, -2, axis=-1) - np.roll(x, -1, axis=-1)], axis=-1)
    return -grad_lambda / area[..., None, None]


class CRDofMap(object):
    """One DOF per mesh edge; boundary edges are constrained."""

    scheme = 'cr'

    def __init__(self, mesh):
        self.mesh = mesh
        self.n = len(mesh.edges)
        self.cell_dofs = mesh.tri_edges
        self.boundary = np.flatnonzero(mesh.boundary_edges)
        self.centers = mesh.barycenters
        self.gradients = basis_gradients(mesh.cell_points)

    def basis(self, points):
        d = np.asarray(points) - self.centers[:, None, :]
        phi = 1.0 / 3 + np.einsum('cqd,ckd->cqk', d, self.gradients)
        dphi = np.broadcast_to(self.gradients[:, None], phi.shape + (2,))
        return phi, dphi

    def cell_quadrature(self, degree):
        return triangle_points(self.mesh.cell_points, degree)

    def piece_field(self, coefficients, points, local):
        """Piecewise constant test function: midpoint value on each piece."""
        values = coefficients[self.cell_dofs[:, local]]
        values = np.broadcast_to(values[..., None], points.shape[:-1])
        return values, np.zeros(points.shape)


def cr_local_basis(mesh, t):
    """Return the three C-R basis functions of triangle t and their gradients.

    Returns:
        (functions, gradients): list of three callables f(x, y) and the
        (3, 2) array of their constant gradients.
    """
    p = mesh.cell_points[t]
    g = basis_gradients(p)
    q = p.mean(axis=0)

    def make(k):
        def phi(x, y):
            return 1.0 / 3 + g[k, 0] * (np.asarray(x) - q[0]) + g[k, 1] * (np.asarray(y) - q[1])
        return phi

    return [make(k) for k in range(3)], g


def interpolate_cr(mesh, value, dofmap=None):
    """C-R interpolant: coefficients are the midpoint values."""
    dofmap = dofmap or CRDofMap(mesh)
    m = mesh.midpoints
    return SolutionField('cr', value(m[:, 0], m[:, 1]), mesh, dofmap)


@dataclass
class DualField:
    """Piecewise constant function on the control volumes."""

    dual: object
    values: np.ndarray

    def integral(self):
        return float(self.values @ self.dual.volume_areas())


def pi_cr(w, dual=None):
    """Transfer a C-R field to the test space (identity on coefficients)."""
    dual = dual if dual is not None else build_cr_dual(w.mesh)
    return DualField(dual, w.coefficients.copy())


def _check_pairing(mesh, dual, kind):
    if dual.mesh is not mesh or dual.kind != kind:
        raise ValueError('Dual partition (%s) was not built from this mesh' % dual.kind)


def local_matrices(problem, dofmap, dual, cells, quad_area=4, quad_line=3):
    """Element matrices L[c, test, trial] and load vectors of the given cells."""
    g = dofmap.gradients[cells]
    segs = dual.segments[cells]
    normals = dual.segment_normals[cells]
    nc = len(cells)

    points, weights = segment_points(segs[..., 0, :], segs[..., 1, :], quad_line)
    a = problem.diffusion(points[..., 0], points[..., 1])
    flux = np.einsum('csq,csi,csqiv,cjv->csj', weights, normals, a, g)

    local = np.zeros((nc, 3, 3))
    for s, (owner, neighbour) in enumerate(dual.segment_sides):
        local[:, owner] -= flux[:, s]
        local[:, neighbour] += flux[:, s]

    points, weights = polygon_points(dual.pieces[cells], quad_area)
    x, y = points[..., 0], points[..., 1]
    d = points - dofmap.centers[cells][:, None, None, :]
    phi = 1.0 / 3 + np.einsum('cimd,cjd->cimj', d, g)
    local += np.einsum('cim,cim,cimj->cij', weights, problem.reaction(x, y), phi)
    load = np.sum(weights * problem.source(x, y), axis=-1)
    return local, load


def assemble_cr(problem, mesh, dual, quad_area=4, quad_line=3, threads=1):
    """Assemble the Petrov-Galerkin system of the C-R FVM.

    Row i is the flux balance over the control volume of edge i, column j the
    trial function of edge j. Boundary rows become identity rows.

    Raises:
        ValueError: `dual` does not belong to `mesh`.
    """
    _check_pairing(mesh, dual, 'cr')
    dofmap = CRDofMap(mesh)

    def work(cells):
        return local_matrices(problem, dofmap, dual, cells, quad_area, quad_line)

    builder = SparseBuilder(dofmap.n)
    rhs = np.zeros(dofmap.n)
    batches = map_cell_batches(work, mesh.ncells, threads)
    start = 0
    for local, load in batches:
        cells = np.arange(start, start + len(local))
        start += len(local)
        dofs = dofmap.cell_dofs[cells]
        builder.add_block(dofs, dofs, local)
        rhs += np.bincount(dofs.ravel(), weights=load.ravel(), minlength=dofmap.n)

    system = apply_dirichlet(builder.tocsr(), rhs, dofmap.boundary, dofmap)
    log.debug('C-R system: n=%d, nnz=%d, %d constrained', system.n, system.matrix.nnz,
              len(dofmap.boundary))
    return system


def solve_cr(system):
    """Solve an assembled C-R system; boundary coefficients are set to 0."""
    x = direct_solve(system)
    x[system.constrained] = 0.0
    dofmap = system.dofmap
    return SolutionField('cr', x, dofmap.mesh, dofmap)


def reference_mass_matrix():
    """[int phi_e phi_l] on the unit triangle."""
    tri = np.array([[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]])
    points, weights = triangle_points(tri, 2)
    g = basis_gradients(tri)
    d = points - tri.mean(axis=1)[:, None, :]
    phi = 1.0 / 3 + np.einsum('cqd,ckd->cqk', d, g)
    return np.einsum('cq,cqi,cqj->ij', weights, phi, phi)
