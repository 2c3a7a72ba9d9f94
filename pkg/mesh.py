"""Structured primal partitions of rectangles.

Two mesh kinds are supported:

- `TriMesh`: an M x N grid of equal rectangles, each split by the diagonal
  running from its lower-left to its upper-right corner.
- `RectMesh`: a tensor-product rectangle mesh given by x and y breakpoints.

Vertices are numbered row by row, vertex (i, j) having index j*(M+1) + i.
"""

import logging
import numpy as np

from problem import Rectangle
from quadrature import signed_area


log = logging.getLogger(__name__)


def _check_sizes(M, N):
    if int(M) != M or int(N) != N or M < 1 or N < 1:
        raise ValueError('Mesh sizes must be positive integers, got (%r, %r)' % (M, N))
    return int(M), int(N)


def grid_points(xs, ys):
    """Return the (len(xs)*len(ys), 2) array of grid vertices, row by row."""
    x, y = np.meshgrid(xs, ys, indexing='xy')
    return np.stack([x.ravel(), y.ravel()], axis=-1)


class TriMesh(object):
    """Conforming triangulation with edge adjacency.

    Attributes:
        points (ndarray): (nv, 2) vertex coordinates.
        triangles (ndarray): (nt, 3) CCW vertex indices.
        edges (ndarray): (ne, 2) vertex indices, ordered by first appearance.
        tri_edges (ndarray): (nt, 3) edge opposite each local vertex.
        edge_triangles (ndarray): (ne, 2) incident triangles, -1 if none.
        boundary_edges (ndarray): (ne,) True for edges on the boundary.
    """

    kind = 'tri'

    def __init__(self, points, triangles, shape=None, domain=None):
        self.points = np.asarray(points, dtype=float)
        self.triangles = np.asarray(triangles, dtype=int)
        self.shape = shape
        self.domain = domain

        assert np.all(self.areas > 0), 'triangles must be CCW with positive area'

        edge_index = {}
        edges, tri_edges = [], []
        incident = []
        for t, (p0, p1, p2) in enumerate(self.triangles):
            local = []
            for a, b in ((p1, p2), (p2, p0), (p0, p1)):
                key = (min(a, b), max(a, b))
                if key not in edge_index:
                    edge_index[key] = len(edges)
                    edges.append(key)
                    incident.append([])
                e = edge_index[key]
                incident[e].append(t)
                local.append(e)
            tri_edges.append(local)

        counts = np.array([len(ts) for ts in incident])
        assert np.all((counts == 1) | (counts == 2)), 'non-manifold edge'

        self.edges = np.array(edges, dtype=int).reshape(-1, 2)
        self.tri_edges = np.array(tri_edges, dtype=int).reshape(-1, 3)
        self.edge_triangles = np.array([ts + [-1] * (2 - len(ts)) for ts in incident],
                                       dtype=int).reshape(-1, 2)
        self.boundary_edges = counts == 1

        nv, ne, nt = len(self.points), len(self.edges), len(self.triangles)
        assert nv - ne + nt == 1, 'Euler relation violated (%d-%d+%d)' % (nv, ne, nt)

    @property
    def ncells(self):
        return len(self.triangles)

    @property
    def cell_points(self):
        """(nt, 3, 2) vertex coordinates of every triangle."""
        return self.points[self.triangles]

    @property
    def areas(self):
        return signed_area(self.points[self.triangles])

    @property
    def barycenters(self):
        return self.cell_points.mean(axis=1)

    @property
    def midpoints(self):
        return self.points[self.edges].mean(axis=1)

    def edge_lengths(self):
        """(nt, 3) length of the edge opposite each local vertex."""
        p = self.cell_points
        return np.linalg.norm(np.roll(p, -1, axis=1) - np.roll(p, -2, axis=1), axis=-1)

    def diameters(self):
        """h_K: longest edge of every triangle."""
        return self.edge_lengths().max(axis=1)

    def inradius_diameters(self):
        """rho_K: diameter of the inscribed circle of every triangle."""
        return 4.0 * self.areas / self.edge_lengths().sum(axis=1)

    def angles(self):
        """(nt, 3) interior angle at each local vertex."""
        p = self.cell_points
        u = np.roll(p, -1, axis=1) - p
        v = np.roll(p, -2, axis=1) - p
        cross = np.abs(u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])
        dot = np.sum(u * v, axis=-1)
        return np.arctan2(cross, dot)

    def regularity(self):
        """min rho_K / h_K over all triangles."""
        return float((self.inradius_diameters() / self.diameters()).min())

    @property
    def h(self):
        return float(self.diameters().max())


def build_structured_tri_mesh(M, N, domain=None):
    """Triangulate `domain` with M x N rectangles cut by their diagonals.

    Args:
        M (int): subdivisions along x.
        N (int): subdivisions along y.
        domain (Rectangle): defaults to the unit square.

    Returns:
        TriMesh: (M+1)(N+1) vertices, 2MN triangles, 3MN+M+N edges.
    """
    M, N = _check_sizes(M, N)
    domain = (domain or Rectangle()).check()
    xs = np.linspace(domain.a, domain.b, M + 1)
    ys = np.linspace(domain.c, domain.d, N + 1)

    def sub2ind(i, j):
        return j * (M + 1) + i

    triangles = []
    for j in range(N):
        for i in range(M):
            p00, p10 = sub2ind(i, j), sub2ind(i + 1, j)
            p01, p11 = sub2ind(i, j + 1), sub2ind(i + 1, j + 1)
            triangles.append((p00, p10, p11))
            triangles.append((p00, p11, p01))

    mesh = TriMesh(grid_points(xs, ys), triangles, shape=(M, N), domain=domain)
    log.debug('triangulation (%d,%d): %d vertices, %d edges, %d triangles',
              M, N, len(mesh.points), len(mesh.edges), mesh.ncells)
    return mesh


def min_angle(mesh):
    """Return the smallest interior angle (radians) of a triangulation."""
    return float(mesh.angles().min())


class RectMesh(object):
    """Tensor-product rectangle mesh.

    Cell (i, j) has index j*M + i. Its corners are listed in the order of
    the reference corners (1,1), (-1,1), (-1,-1), (1,-1): upper-right,
    upper-left, lower-left, lower-right.

    Attributes:
        xs, ys (ndarray): strictly increasing breakpoints.
        points (ndarray): (nv, 2) vertices.
        cells (ndarray): (nc, 4) corner vertex indices.
        centers (ndarray): (nc, 2) cell centers.
        h1, h2 (ndarray): (nc,) half-widths along x and y.
        boundary_vertices (ndarray): (nv,) bool.
    """

    kind = 'rect'

    def __init__(self, xs, ys):
        self.xs = np.asarray(xs, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        if len(self.xs) < 2 or len(self.ys) < 2:
            raise ValueError('Need at least two breakpoints per axis')
        if np.any(np.diff(self.xs) <= 0) or np.any(np.diff(self.ys) <= 0):
            raise ValueError('Breakpoints must be strictly increasing')

        M, N = len(self.xs) - 1, len(self.ys) - 1
        self.shape = (M, N)
        self.domain = Rectangle(self.xs[0], self.xs[-1], self.ys[0], self.ys[-1])
        self.points = grid_points(self.xs, self.ys)

        i, j = np.meshgrid(np.arange(M), np.arange(N), indexing='xy')
        i, j = i.ravel(), j.ravel()

        def sub2ind(i, j):
            return j * (M + 1) + i

        self.cells = np.stack([sub2ind(i + 1, j + 1), sub2ind(i, j + 1),
                               sub2ind(i, j), sub2ind(i + 1, j)], axis=-1)
        self.h1 = 0.5 * (self.xs[i + 1] - self.xs[i])
        self.h2 = 0.5 * (self.ys[j + 1] - self.ys[j])
        self.centers = np.stack([self.xs[i] + self.h1, self.ys[j] + self.h2], axis=-1)

        vi, vj = np.meshgrid(np.arange(M + 1), np.arange(N + 1), indexing='xy')
        self.boundary_vertices = ((vi == 0) | (vi == M) | (vj == 0) | (vj == N)).ravel()

        assert np.isclose((4 * self.h1 * self.h2).sum(), self.domain.area,
                          rtol=1e-12, atol=0), 'cells do not tile the domain'

    @property
    def ncells(self):
        return len(self.cells)

    @property
    def ratios(self):
        """Shape parameters r_K = h2/h1."""
        return self.h2 / self.h1

    @property
    def areas(self):
        return 4.0 * self.h1 * self.h2

    @property
    def cell_points(self):
        return self.points[self.cells]

    def vertex_cells(self):
        """Return, for every vertex, the list of (cell, local corner) pairs."""
        result = [[] for _ in range(len(self.points))]
        for c, corners in enumerate(self.cells):
            for k, v in enumerate(corners):
                result[v].append((c, k))
        return result

    def shape_bounds(self):
        """(lambda_1, lambda_2) = (min r_K, max r_K)."""
        r = self.ratios
        return float(r.min()), float(r.max())

    @property
    def h(self):
        return float(2.0 * np.hypot(self.h1, self.h2).max())


def build_rect_mesh(M, N, domain=None):
    """Uniform M x N rectangle mesh of `domain` (default: unit square)."""
    M, N = _check_sizes(M, N)
    domain = (domain or Rectangle()).check()
    mesh = RectMesh(np.linspace(domain.a, domain.b, M + 1),
                    np.linspace(domain.c, domain.d, N + 1))
    log.debug('rectangle mesh (%d,%d): %d cells', M, N, mesh.ncells)
    return mesh


def format_mesh(mesh):
    """Plain-text dump, one record per line.

    Triangulations: ``v x y``, ``t i j k`` and ``e i j boundary_flag``.
    Rectangle meshes: ``v x y`` and ``r i j k l``.
    """
    lines = ['v %.17g %.17g' % (x, y) for x, y in mesh.points]
    if mesh.kind == 'tri':
        lines += ['t %d %d %d' % tuple(t) for t in mesh.triangles]
        lines += ['e %d %d %d' % (a, b, flag)
                  for (a, b), flag in zip(mesh.edges, mesh.boundary_edges)]
    else:
        lines += ['r %d %d %d %d' % tuple(c) for c in mesh.cells]
    return '\n'.join(lines) + '\n'
