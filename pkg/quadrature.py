"""Quadrature on segments, triangles, squares and convex polygons.

Reference domains: the segment [-1, 1], the unit triangle (0,0), (1,0),
(0,1) and the square [-1, 1]^2. Vectorized helpers map a rule onto many
cells at once and return physical points and weights, so that callers can
evaluate arbitrary integrands (basis products, coefficients) on them.
"""

import numpy as np

from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (nq, dim) reference nodes
    weights: np.ndarray  # (nq,)
    exact_degree: int


def _check_degree(degree):
    if int(degree) != degree or degree < 0:
        raise ValueError('Invalid quadrature degree %r' % (degree,))
    return int(degree)


@lru_cache(maxsize=None)
def segment_rule(degree):
    """Gauss-Legendre rule on [-1, 1] exact for polynomials of `degree`."""
    degree = _check_degree(degree)
    n = max(1, (degree + 2) // 2)
    points, weights = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(points[:, None], weights, 2 * n - 1)


def _permutations(a, b, c):
    """Distinct barycentric permutations, as (x, y) = (b-coord 2, b-coord 3)."""
    bary = {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}
    return sorted((p[1], p[2]) for p in bary)


def _collapsed_rule(degree):
    """Gauss-Legendre rule collapsed onto the unit triangle."""
    n = max(1, (degree + 3) // 2)
    t, w = np.polynomial.legendre.leggauss(n)
    t, w = (t + 1.0) / 2.0, w / 2.0
    u, v = np.meshgrid(t, t, indexing='ij')
    wu, wv = np.meshgrid(w, w, indexing='ij')
    points = np.stack([u.ravel(), (v * (1.0 - u)).ravel()], axis=-1)
    weights = (wu * wv * (1.0 - u)).ravel()
    return QuadratureRule(points, weights, 2 * n - 2)


@lru_cache(maxsize=None)
def triangle_rule(degree):
    """Rule on the unit triangle exact for polynomials of `degree`.

    Degrees 1-5 use symmetric rules (centroid, 3-point, 4-point, 7-point);
    higher degrees use a collapsed Gauss-Legendre product rule.
    """
    degree = _check_degree(degree)

    if degree <= 1:
        return QuadratureRule(np.array([[1.0 / 3, 1.0 / 3]]), np.array([0.5]), 1)

    if degree == 2:
        points = np.array(_permutations(2.0 / 3, 1.0 / 6, 1.0 / 6))
        return QuadratureRule(points, np.full(3, 1.0 / 6), 2)

    if degree == 3:
        points = [(1.0 / 3, 1.0 / 3)] + _permutations(0.6, 0.2, 0.2)
        weights = [-27.0 / 96] + [25.0 / 96] * 3
        return QuadratureRule(np.array(points), np.array(weights), 3)

    if degree <= 5:
        s = np.sqrt(15.0)
        a1, a2 = (6.0 - s) / 21, (6.0 + s) / 21
        w1, w2 = (155.0 - s) / 2400, (155.0 + s) / 2400
        points = ([(1.0 / 3, 1.0 / 3)] + _permutations(1 - 2 * a1, a1, a1)
                  + _permutations(1 - 2 * a2, a2, a2))
        weights = [9.0 / 80] + [w1] * 3 + [w2] * 3
        return QuadratureRule(np.array(points), np.array(weights), 5)

    return _collapsed_rule(degree)


@lru_cache(maxsize=None)
def square_rule(degree):
    """Tensor Gauss-Legendre rule on [-1, 1]^2."""
    rule = segment_rule(degree)
    t, w = rule.points[:, 0], rule.weights
    x, y = np.meshgrid(t, t, indexing='ij')
    wx, wy = np.meshgrid(w, w, indexing='ij')
    points = np.stack([x.ravel(), y.ravel()], axis=-1)
    return QuadratureRule(points, (wx * wy).ravel(), rule.exact_degree)


def signed_area(polygon):
    """Shoelace signed area of polygon(s) with vertices on axis -2."""
    p = np.asarray(polygon, dtype=float)
    x, y = p[..., 0], p[..., 1]
    return 0.5 * np.sum(x * np.roll(y, -1, axis=-1) - np.roll(x, -1, axis=-1) * y,
                        axis=-1)


def segment_points(starts, ends, degree):
    """Map the segment rule onto segments.

    Args:
        starts, ends (ndarray): endpoints, shape (..., 2).
        degree (int): exactness degree.

    Returns:
        (points, weights): shapes (..., nq, 2) and (..., nq).
    """
    rule = segment_rule(degree)
    starts, ends = np.asarray(starts, float), np.asarray(ends, float)
    t = rule.points[:, 0]
    mid = 0.5 * (starts + ends)[..., None, :]
    half = 0.5 * (ends - starts)[..., None, :]
    points = mid + half * t[:, None]
    length = np.linalg.norm(ends - starts, axis=-1)
    weights = 0.5 * length[..., None] * rule.weights
    return points, weights


def triangle_points(triangles, degree):
    """Map the triangle rule onto triangles of shape (..., 3, 2)."""
    rule = triangle_rule(degree)
    tri = np.asarray(triangles, dtype=float)
    p0 = tri[..., 0:1, :]
    e1 = (tri[..., 1, :] - tri[..., 0, :])[..., None, :]
    e2 = (tri[..., 2, :] - tri[..., 0, :])[..., None, :]
    xi, eta = rule.points[:, 0:1], rule.points[:, 1:2]
    points = p0 + e1 * xi + e2 * eta
    jac = 2.0 * np.abs(signed_area(tri))
    weights = jac[..., None] * rule.weights
    return points, weights


def polygon_points(polygons, degree, check=True):
    """Fan-triangulate convex CCW polygons from their first vertex.

    Args:
        polygons (ndarray): shape (..., k, 2).
        degree (int): exactness degree of the triangle rule.
        check (bool): reject polygons whose fan is not positively oriented.

    Returns:
        (points, weights): shapes (..., (k-2)*nq, 2) and (..., (k-2)*nq).
    """
    poly = np.asarray(polygons, dtype=float)
    k = poly.shape[-2]
    if k < 3:
        raise ValueError('Polygon needs at least 3 vertices, got %d' % k)
    fans = np.stack([np.stack([poly[..., 0, :], poly[..., i, :], poly[..., i + 1, :]],
                              axis=-2) for i in range(1, k - 1)], axis=-3)
    if check and np.any(signed_area(fans) <= 0):
        raise ValueError('Polygon is not simple, convex and counter-clockwise')
    points, weights = triangle_points(fans, degree)
    shape = poly.shape[:-2]
    return points.reshape(shape + (-1, 2)), weights.reshape(shape + (-1,))


def integrate_segment(f, endpoints, degree):
    """Integrate f(x, y) along the segment between two points."""
    if degree < 1:
        raise ValueError('Segment quadrature degree must be >= 1')
    start, end = np.asarray(endpoints, dtype=float)
    points, weights = segment_points(start, end, degree)
    return float(np.sum(weights * f(points[..., 0], points[..., 1])))


def integrate_polygon(f, polygon, degree):
    """Integrate f(x, y) over a simple convex CCW polygon."""
    points, weights = polygon_points(polygon, degree)
    return float(np.sum(weights * f(points[..., 0], points[..., 1])))
