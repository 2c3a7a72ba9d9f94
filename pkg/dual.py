"""Dual partitions (control volumes) of the primal meshes.

Every primal cell K is cut into pieces K* n K, one per DOF site attached to
K, by the dual segments running from its centre. The partition is stored per
cell so that assembly can loop over cells:

- `pieces[c, k]` is the CCW polygon of local piece k of cell c and
  `cell_volumes[c, k]` the control volume (DOF site) it belongs to.
- `segments[c, s]` is the oriented segment s inside cell c; the pieces it
  separates are `segment_sides[s] = (owner, neighbour)` and its unit normal
  points out of the owner piece.

Triangulations (edge-midpoint volumes): piece k = (P[k+1], P[k+2], Q) is the
part of the volume of the edge opposite vertex k. Segment m runs from the
barycenter Q to vertex P[m].

Rectangles (vertex volumes): piece k is the quadrant at corner P[k+1]. The
segments run from the centre to the right, top, left and bottom midpoints.
"""

import logging
import numpy as np

from dataclasses import dataclass
from typing import List, Tuple

from quadrature import signed_area


log = logging.getLogger(__name__)


CR_SIDES = np.array([(2, 1), (0, 2), (1, 0)])
WILSON_SIDES = np.array([(0, 3), (1, 0), (2, 1), (3, 2)])


@dataclass(frozen=True)
class ControlVolume:
    site: np.ndarray
    polygon: np.ndarray
    pieces: List[Tuple[int, np.ndarray]]
    boundary: bool

    @property
    def area(self):
        return float(signed_area(self.polygon))


def _key(point, decimals=12):
    return (round(float(point[0]), decimals), round(float(point[1]), decimals))


def _drop_collinear(points, tol=1e-12):
    n = len(points)
    keep = []
    for i in range(n):
        u = points[i] - points[i - 1]
        v = points[(i + 1) % n] - points[i]
        cross = u[0] * v[1] - u[1] * v[0]
        if abs(cross) > tol * np.linalg.norm(u) * np.linalg.norm(v):
            keep.append(i)
    return points[keep]


def merge_polygons(polygons):
    """Union of CCW polygons that tile a simply connected region.

    Shared edges cancel against their reverse, the remaining boundary edges
    are chained into one loop and collinear vertices are dropped.
    """
    edges = {}
    for poly in polygons:
        for a, b in zip(poly, np.roll(poly, -1, axis=0)):
            ka, kb = _key(a), _key(b)
            if (kb, ka) in edges:
                del edges[(kb, ka)]
            else:
                edges[(ka, kb)] = a
    following = {ka: kb for ka, kb in edges}
    coords = {ka: a for (ka, kb), a in edges.items()}
    start = min(following)
    loop, k = [start], following[start]
    while k != start:
        loop.append(k)
        k = following[k]
    assert len(loop) == len(following), 'pieces do not form a simple polygon'
    return _drop_collinear(np.array([coords[k] for k in loop]))


class DualPartition(object):
    """Control volumes keyed to DOF sites, stored per primal cell."""

    def __init__(self, kind, mesh, sites, boundary, cell_volumes, pieces,
                 segments, segment_sides):
        self.kind = kind
        self.mesh = mesh
        self.sites = np.asarray(sites, dtype=float)
        self.boundary = np.asarray(boundary, dtype=bool)
        self.cell_volumes = np.asarray(cell_volumes, dtype=int)
        self.pieces = np.asarray(pieces, dtype=float)
        self.segments = np.asarray(segments, dtype=float)
        self.segment_sides = np.asarray(segment_sides, dtype=int)

        d = self.segments[..., 1, :] - self.segments[..., 0, :]
        self.segment_lengths = np.linalg.norm(d, axis=-1)
        self.segment_normals = np.stack([d[..., 1], -d[..., 0]], axis=-1) \
            / self.segment_lengths[..., None]

        self.piece_areas = signed_area(self.pieces)
        assert np.all(self.piece_areas > 0), 'dual pieces must be CCW'
        assert np.allclose(self.piece_areas.sum(axis=1), mesh.areas, rtol=1e-12, atol=0)

        flat = self.cell_volumes.ravel()
        self._order = np.argsort(flat, kind='stable')
        self._offsets = np.searchsorted(flat[self._order], np.arange(self.nsites + 1))

        total = self.volume_areas().sum()
        assert np.isclose(total, mesh.domain.area, rtol=1e-12, atol=0), \
            'control volumes cover %.15g, domain has %.15g' % (total, mesh.domain.area)

    @property
    def nsites(self):
        return len(self.sites)

    def volume_areas(self):
        """|K*| for every control volume."""
        return np.bincount(self.cell_volumes.ravel(), weights=self.piece_areas.ravel(),
                           minlength=self.nsites)

    def volume_pieces(self, i):
        """Return the (cell, local piece) pairs of control volume i."""
        nlocal = self.cell_volumes.shape[1]
        flat = self._order[self._offsets[i]:self._offsets[i + 1]]
        return [(int(f // nlocal), int(f % nlocal)) for f in flat]

    def control_volume(self, i):
        pieces = [(c, self.pieces[c, k]) for c, k in self.volume_pieces(i)]
        polygon = merge_polygons([p for _, p in pieces])
        return ControlVolume(self.sites[i], polygon, pieces, bool(self.boundary[i]))

    @property
    def control_volumes(self):
        return [self.control_volume(i) for i in range(self.nsites)]

    def oriented_segments(self):
        """Every interior segment seen from both sides.

        Returns:
            (volumes, starts, ends, normals): the segment as recorded by its
            owner volume, followed by the reversed copy recorded by the
            neighbour volume; normals point out of the respective volume.
        """
        owner = self.cell_volumes[:, self.segment_sides[:, 0]].ravel()
        neighbour = self.cell_volumes[:, self.segment_sides[:, 1]].ravel()
        starts = self.segments[..., 0, :].reshape(-1, 2)
        ends = self.segments[..., 1, :].reshape(-1, 2)
        normals = self.segment_normals.reshape(-1, 2)
        return (np.concatenate([owner, neighbour]),
                np.concatenate([starts, ends]),
                np.concatenate([ends, starts]),
                np.concatenate([normals, -normals]))


def build_cr_dual(mesh):
    """Control volumes around the edge midpoints of a triangulation."""
    p = mesh.cell_points
    q = mesh.barycenters
    pieces = np.stack([np.stack([p[:, (k + 1) % 3], p[:, (k + 2) % 3], q], axis=1)
                       for k in range(3)], axis=1)
    segments = np.stack([np.stack([q, p[:, m]], axis=1) for m in range(3)], axis=1)
    dual = DualPartition('cr', mesh, mesh.midpoints, mesh.boundary_edges,
                         mesh.tri_edges, pieces, segments, CR_SIDES)
    log.debug('dual of %d triangles: %d control volumes', mesh.ncells, dual.nsites)
    return dual


def build_wilson_dual(mesh):
    """Control volumes around the vertices of a rectangle mesh.

    Interior volumes are the rectangles spanned by the four neighbouring
    cell centres; boundary volumes are clipped to the domain.
    """
    M, N = mesh.shape
    i, j = np.meshgrid(np.arange(M), np.arange(N), indexing='xy')
    i, j = i.ravel(), j.ravel()
    xl, xr = mesh.xs[i], mesh.xs[i + 1]
    yb, yt = mesh.ys[j], mesh.ys[j + 1]
    xc, yc = mesh.centers[:, 0], mesh.centers[:, 1]

    def pt(x, y):
        return np.stack([x, y], axis=-1)

    q = mesh.centers
    m1, m2, m3, m4 = pt(xc, yt), pt(xl, yc), pt(xc, yb), pt(xr, yc)
    p1, p2, p3, p4 = pt(xr, yt), pt(xl, yt), pt(xl, yb), pt(xr, yb)

    pieces = np.stack([np.stack(quad, axis=1) for quad in
                       ((q, m4, p1, m1), (q, m1, p2, m2), (q, m2, p3, m3), (q, m3, p4, m4))],
                      axis=1)
    segments = np.stack([np.stack([q, m], axis=1) for m in (m4, m1, m2, m3)], axis=1)
    dual = DualPartition('wilson', mesh, mesh.points, mesh.boundary_vertices,
                         mesh.cells, pieces, segments, WILSON_SIDES)
    log.debug('dual of %d rectangles: %d control volumes', mesh.ncells, dual.nsites)
    return dual


def build_dual(mesh):
    return build_cr_dual(mesh) if mesh.kind == 'tri' else build_wilson_dual(mesh)
