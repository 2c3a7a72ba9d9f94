"""Elliptic Dirichlet problem data.

Coefficient callbacks take two numpy arrays ``x`` and ``y`` of equal shape and
return arrays of that shape (scalars) or of shape ``x.shape + (2, 2)``
(diffusion matrices). All callbacks must be pure.
"""

import logging
import numpy as np

from dataclasses import dataclass
from dataclasses import field
from typing import Callable, Optional


log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle [a, b] x [c, d]."""

    a: float = 0.0
    b: float = 1.0
    c: float = 0.0
    d: float = 1.0

    @property
    def width(self):
        return self.b - self.a

    @property
    def height(self):
        return self.d - self.c

    @property
    def area(self):
        return self.width * self.height

    def check(self):
        """Raise ValueError unless the rectangle has positive size."""
        if not (self.width > 0 and self.height > 0):
            raise ValueError('Degenerate domain [%g,%g]x[%g,%g]' % (
                self.a, self.b, self.c, self.d))
        return self

    def sample(self, n=11):
        """Return an n x n grid of points covering the closed rectangle."""
        xs = np.linspace(self.a, self.b, n)
        ys = np.linspace(self.c, self.d, n)
        return np.meshgrid(xs, ys, indexing='ij')


def zero(x, y):
    return np.zeros(np.shape(x))


def constant(value):
    """Return a scalar callback equal to `value` everywhere."""

    def func(x, y):
        return np.full(np.shape(x), float(value))

    return func


def identity_diffusion(x, y):
    return np.broadcast_to(np.eye(2), np.shape(x) + (2, 2)).copy()


@dataclass(frozen=True)
class ExactSolution:
    """Value, gradient and Hessian callbacks of a known solution.

    `gradient` returns shape ``x.shape + (2,)`` and `hessian` returns shape
    ``x.shape + (2, 2)``.
    """

    value: Callable
    gradient: Callable
    hessian: Optional[Callable] = None


@dataclass(frozen=True)
class EllipticProblem:
    """-div(a grad u) + b u = f in the domain, u = 0 on its boundary."""

    diffusion: Callable = identity_diffusion
    reaction: Callable = zero
    source: Callable = zero
    domain: Rectangle = field(default_factory=Rectangle)
    exact: Optional[ExactSolution] = None
    samples: int = 11

    def __post_init__(self):
        self.domain.check()
        self.ellipticity()  # validates coefficients

    def ellipticity(self):
        """Return the sampled ellipticity constant r of the diffusion.

        Raises:
            ValueError: if the sampled diffusion is not symmetric positive
                definite or the sampled reaction is negative.
        """
        x, y = self.domain.sample(self.samples)
        a = np.asarray(self.diffusion(x, y), dtype=float)
        if a.shape != x.shape + (2, 2):
            raise ValueError('Diffusion must return shape %s, got %s' % (
                x.shape + (2, 2), a.shape))
        if not np.allclose(a, np.swapaxes(a, -1, -2), rtol=0, atol=1e-14):
            raise ValueError('Diffusion matrix is not symmetric')
        r = np.linalg.eigvalsh(a).min()
        if not r > 0:
            raise ValueError('Diffusion is not uniformly elliptic (r = %g)' % r)
        b = np.asarray(self.reaction(x, y), dtype=float)
        if b.min() < 0:
            raise ValueError('Reaction coefficient is negative (min %g)' % b.min())
        return r

    def is_poisson(self, tol=1e-14):
        """True iff the sampled diffusion is the identity and reaction is 0."""
        x, y = self.domain.sample(self.samples)
        a = np.asarray(self.diffusion(x, y), dtype=float)
        b = np.asarray(self.reaction(x, y), dtype=float)
        return bool(np.abs(a - np.eye(2)).max() <= tol and np.abs(b).max() <= tol)


def benchmark_problem():
    """Return the manufactured Poisson benchmark on the unit square.

    f = 2(x^2 + y^2 - x - y) with exact solution u = -x(x-1)y(y-1).
    """

    def source(x, y):
        return 2.0 * (x * x + y * y - x - y)

    def value(x, y):
        return -x * (x - 1.0) * y * (y - 1.0)

    def gradient(x, y):
        ux = -(2.0 * x - 1.0) * y * (y - 1.0)
        uy = -x * (x - 1.0) * (2.0 * y - 1.0)
        return np.stack([ux, uy], axis=-1)

    def hessian(x, y):
        uxx = -2.0 * y * (y - 1.0)
        uyy = -2.0 * x * (x - 1.0)
        uxy = -(2.0 * x - 1.0) * (2.0 * y - 1.0)
        row1 = np.stack([uxx, uxy], axis=-1)
        row2 = np.stack([uxy, uyy], axis=-1)
        return np.stack([row1, row2], axis=-2)

    exact = ExactSolution(value=value, gradient=gradient, hessian=hessian)
    return EllipticProblem(source=source, exact=exact)
