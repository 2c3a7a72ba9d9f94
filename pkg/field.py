"""Discrete fields over a DOF map and the control-volume flux balance.

A DOF map (`cr.CRDofMap`, `wilson.WilsonDofMap`) provides:

- ``n``, ``cell_dofs`` (ncells, nloc) and ``boundary`` (constrained DOFs);
- ``basis(points)``: local basis values (ncells, np, nloc) and gradients
  (ncells, np, nloc, 2) at per-cell points of shape (ncells, np, 2);
- ``cell_quadrature(degree)``: per-cell quadrature points and weights;
- ``piece_field(coefficients, points, local)``: the test-space image of a
  field on dual pieces.
"""

import logging
import numpy as np

from dataclasses import dataclass, replace

from quadrature import polygon_points, segment_points


log = logging.getLogger(__name__)


@dataclass
class SolutionField:
    scheme: str
    coefficients: np.ndarray
    mesh: object
    dofmap: object

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        if self.coefficients.shape != (self.dofmap.n,):
            raise ValueError('Expected %d coefficients, got shape %s' % (
                self.dofmap.n, self.coefficients.shape))

    def cell_coefficients(self):
        return self.coefficients[self.dofmap.cell_dofs]

    def evaluate_in_cells(self, points):
        """Values (ncells, np) and gradients (ncells, np, 2) at per-cell points."""
        phi, dphi = self.dofmap.basis(points)
        coef = self.cell_coefficients()
        return (np.einsum('cqk,ck->cq', phi, coef),
                np.einsum('cqkd,ck->cqd', dphi, coef))

    def sample(self, degree):
        """Per-cell quadrature points, weights, values and gradients."""
        points, weights = self.dofmap.cell_quadrature(degree)
        values, gradients = self.evaluate_in_cells(points)
        return points, weights, values, gradients

    def with_coefficients(self, coefficients):
        return replace(self, coefficients=np.array(coefficients, dtype=float))

    def boundary_values(self):
        return self.coefficients[self.dofmap.boundary]


def _evaluate_on(u, points):
    """Evaluate u at points of shape (ncells, a, b, 2) lying in each cell."""
    nc, a, b = points.shape[:3]
    values, gradients = u.evaluate_in_cells(points.reshape(nc, a * b, 2))
    return values.reshape(nc, a, b), gradients.reshape(nc, a, b, 2)


def segment_fluxes(u, problem, dual, quad_line=3):
    """(a grad u).n integrated over every dual segment, normal out of its owner."""
    segs = dual.segments
    points, weights = segment_points(segs[..., 0, :], segs[..., 1, :], quad_line)
    _, gradients = _evaluate_on(u, points)
    a = problem.diffusion(points[..., 0], points[..., 1])
    return np.einsum('csq,csi,csqij,csqj->cs', weights, dual.segment_normals, a, gradients)


def local_conservation_residual(u, problem, dual, quad_line=3, quad_area=4):
    """Flux balance of every control volume.

    For each K*: outward flux of a grad u through its interior dual segments
    minus the integral of b u plus the integral of f over K*. Vanishes on
    interior volumes for the discrete solution of either scheme.
    """
    flux = segment_fluxes(u, problem, dual, quad_line)
    owner = dual.cell_volumes[:, dual.segment_sides[:, 0]].ravel()
    neighbour = dual.cell_volumes[:, dual.segment_sides[:, 1]].ravel()
    n = dual.nsites
    residual = (np.bincount(owner, weights=flux.ravel(), minlength=n)
                - np.bincount(neighbour, weights=flux.ravel(), minlength=n))

    points, weights = polygon_points(dual.pieces, quad_area)
    values, _ = _evaluate_on(u, points)
    x, y = points[..., 0], points[..., 1]
    piece = np.sum(weights * (problem.source(x, y) - problem.reaction(x, y) * values), axis=-1)
    residual += np.bincount(dual.cell_volumes.ravel(), weights=piece.ravel(), minlength=n)
    return residual
