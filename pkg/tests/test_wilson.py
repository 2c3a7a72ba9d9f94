import numpy as np
import pytest

from numpy.testing import assert_allclose

import wilson
from dual import build_cr_dual, build_wilson_dual
from field import local_conservation_residual
from mesh import RectMesh, build_rect_mesh, build_structured_tri_mesh
from problem import EllipticProblem, ExactSolution, Rectangle, constant


def closed_form_reference():
    """A1, A2 from the line integrals along the cross through the centre."""
    cx, cy = wilson.CORNERS[:, 0], wilson.CORNERS[:, 1]
    A1, A2 = np.zeros((6, 6)), np.zeros((6, 6))
    A1[:4, :4] = np.outer(cx, cx) / 4 * (1 + np.outer(cy, cy) / 2)
    A2[:4, :4] = np.outer(cy, cy) / 4 * (1 + np.outer(cx, cx) / 2)
    A1[4, 4] = A2[5, 5] = 1.0 / 12
    return A1, A2


def quadratic_solution():
    def value(x, y):
        return x * x + y * y + x * y - 2 * x

    def gradient(x, y):
        return np.stack([2 * x + y - 2, 2 * y + x], axis=-1)

    def hessian(x, y):
        h = np.array([[2.0, 1.0], [1.0, 2.0]])
        return np.broadcast_to(h, np.shape(x) + (2, 2))

    return ExactSolution(value, gradient, hessian)


def test_duality_matrix_is_identity():
    assert_allclose(wilson.duality_matrix(), np.eye(6), atol=1e-14)


def test_reference_basis():
    values, _ = wilson.reference_basis(wilson.CORNERS[:, 0], wilson.CORNERS[:, 1])
    assert_allclose(values[:, :4], np.eye(4))
    assert_allclose(values[:, 4:], 0.0)
    xi, eta = np.array([0.3, -0.7]), np.array([0.1, 0.5])
    values, grads = wilson.reference_basis(xi, eta)
    assert_allclose(values[:, 0], (1 + xi) * (1 + eta) / 4)
    assert_allclose(values[:, 2], (1 - xi) * (1 - eta) / 4)
    assert_allclose(values[:, 4], (xi ** 2 - 1) / 8)
    assert_allclose(grads[:, 1], np.stack([-(1 + eta) / 4, (1 - xi) / 4], axis=-1))
    assert_allclose(grads[:, 5], np.stack([0 * xi, eta / 4], axis=-1))
    assert_allclose(values[:, :4].sum(axis=-1), 1.0)


def test_reference_matrices_match_closed_form():
    A1, A2 = wilson.reference_matrices()
    B1, B2 = closed_form_reference()
    assert_allclose(A1, B1, atol=1e-14)
    assert_allclose(A2, B2, atol=1e-14)
    assert_allclose(A1[0], [3 / 8, -3 / 8, -1 / 8, 1 / 8, 0, 0], atol=1e-14)
    assert A1[4, 4] == pytest.approx(1.0 / 12)
    assert A2[5, 5] == pytest.approx(1.0 / 12)


def test_reference_element_properties():
    ref = wilson.reference_element()
    for A in (ref.A1, ref.A2):
        assert_allclose(A @ ref.e, 0.0, atol=1e-15)
        assert_allclose(A.T @ ref.e, 0.0, atol=1e-15)
    for A in (ref.A1s, ref.A2s):
        ev = np.linalg.eigvalsh(A)
        assert ev.min() >= -1e-12
        assert np.sum(ev > 1e-10) == 3
    assert np.linalg.eigvalsh(ref.H(1.0)).min() == pytest.approx(1.0 / 12, abs=1e-12)
    assert_allclose(ref.E @ ref.E, ref.E, atol=1e-15)
    with pytest.raises(ValueError):
        ref.A1[0, 0] = 1.0


def test_element_stiffness():
    A1, A2 = wilson.reference_matrices()
    assert_allclose(wilson.element_stiffness(1.0), A1 + A2)
    assert_allclose(wilson.element_stiffness(2.0), 2 * A1 + A2 / 2)
    assert wilson.element_stiffness([0.5, 3.0]).shape == (2, 6, 6)
    for r in (0.0, -1.0):
        with pytest.raises(ValueError):
            wilson.element_stiffness(r)


@pytest.mark.parametrize('mesh', [build_rect_mesh(2, 4), build_rect_mesh(3, 3, Rectangle(0, 2, 0, 1)),
                                  RectMesh([0.0, 0.1, 0.4, 1.0], [0.0, 0.3, 1.0])],
                         ids=['r=0.5', 'wide', 'graded'])
def test_physical_forms_follow_shape_parameter(mesh):
    direct = wilson.bilinear_form(wilson.WilsonDofMap(mesh), build_wilson_dual(mesh))
    assert_allclose(direct, wilson.element_stiffness(mesh.ratios), atol=1e-12)


def test_ellipticity_certificate():
    assert wilson.ellipticity_certificate(build_rect_mesh(4, 4)) == pytest.approx(1.0 / 12)
    tall = wilson.ellipticity_certificate(build_rect_mesh(2, 4))
    wide = wilson.ellipticity_certificate(build_rect_mesh(4, 2))
    assert tall > 0
    assert tall == pytest.approx(wide, rel=1e-12)
    assert tall < 1.0 / 12


def test_interpolates_square_exactly():
    mesh = build_rect_mesh(1, 1, Rectangle(-1.0, 1.0, -1.0, 1.0))
    exact = ExactSolution(lambda x, y: x * x,
                          lambda x, y: np.stack([2 * x, 0 * y], axis=-1),
                          lambda x, y: np.broadcast_to([[2.0, 0.0], [0.0, 0.0]],
                                                       np.shape(x) + (2, 2)))
    u = wilson.interpolate_wilson(exact, mesh)
    assert_allclose(u.coefficients, [1, 1, 1, 1, 8, 0], atol=1e-14)
    points, _, values, _ = u.sample(4)
    assert_allclose(values, points[..., 0] ** 2, atol=1e-14)


@pytest.mark.parametrize('mesh', [build_rect_mesh(3, 2, Rectangle(0, 2, 0, 1)),
                                  RectMesh([0.0, 0.1, 0.4, 1.0], [0.0, 0.3, 1.0])],
                         ids=['uniform', 'graded'])
def test_interpolant_reproduces_quadratics(mesh):
    exact = quadratic_solution()
    u = wilson.interpolate_wilson(exact, mesh)
    points, _, values, grads = u.sample(4)
    x, y = points[..., 0], points[..., 1]
    assert_allclose(values, exact.value(x, y), atol=1e-13)
    assert_allclose(grads, exact.gradient(x, y), atol=1e-12)


def test_interpolation_needs_hessian():
    exact = ExactSolution(lambda x, y: x, lambda x, y: np.stack([1 + 0 * x, 0 * y], axis=-1))
    with pytest.raises(ValueError):
        wilson.interpolate_wilson(exact, build_rect_mesh(2, 2))


def test_split_conforming(rect44):
    mesh, _ = rect44
    dofmap = wilson.WilsonDofMap(mesh)
    w = wilson.SolutionField('wilson', np.random.default_rng(2).standard_normal(dofmap.n),
                             mesh, dofmap)
    conforming, bubble = wilson.split_conforming(w)
    assert_allclose(conforming.coefficients[dofmap.nvertices:], 0.0)
    assert_allclose(bubble.coefficients[:dofmap.nvertices], 0.0)
    _, _, total, _ = w.sample(2)
    _, _, first, _ = conforming.sample(2)
    _, _, second, _ = bubble.sample(2)
    assert_allclose(first + second, total, atol=1e-14)


def test_discrete_trial_seminorm(rect44):
    mesh, _ = rect44
    dofmap = wilson.WilsonDofMap(mesh)
    coef = np.zeros(dofmap.n)
    coef[:dofmap.nvertices] = 2.5
    w = wilson.SolutionField('wilson', coef, mesh, dofmap)
    assert wilson.discrete_trial_seminorm(w) == pytest.approx(0.0, abs=1e-14)

    coef = np.zeros(dofmap.n)
    coef[dofmap.cell_dofs[0, 4]] = 3.0
    coef[dofmap.cell_dofs[0, 0]] = 4.0
    # corner value 4 adds 16 - 16/4 on every cell sharing it, the bubble adds 9 once
    w = w.with_coefficients(coef)
    touched = np.sum(dofmap.cell_dofs[:, :4] == dofmap.cell_dofs[0, 0])
    expected = 9.0 + touched * 12.0
    assert wilson.discrete_trial_seminorm(w) == pytest.approx(np.sqrt(expected))


def test_vertex_and_moment_numbering(rect44):
    mesh, _ = rect44
    dofmap = wilson.WilsonDofMap(mesh)
    assert dofmap.n == 25 + 2 * 16
    assert_allclose(dofmap.cell_dofs[3, 4:], [25 + 6, 25 + 7])
    assert len(dofmap.boundary) == 16
    assert np.all(dofmap.boundary < 25)


def test_rejects_non_poisson_problems(rect44):
    mesh, dual = rect44
    with pytest.raises(ValueError):
        wilson.assemble_wilson(EllipticProblem(reaction=constant(1.0)), mesh, dual)
    with pytest.raises(ValueError):
        wilson.assemble_wilson(EllipticProblem(), mesh, build_wilson_dual(build_rect_mesh(4, 4)))
    tri = build_structured_tri_mesh(2, 2)
    with pytest.raises(ValueError):
        wilson.assemble_wilson(EllipticProblem(), mesh, build_cr_dual(tri))


def test_zero_source_gives_zero_solution(rect44):
    mesh, dual = rect44
    u = wilson.solve_wilson(wilson.assemble_wilson(EllipticProblem(), mesh, dual))
    assert_allclose(u.coefficients, 0.0, atol=1e-15)


def test_solution_is_locally_conservative(problem):
    mesh = build_rect_mesh(6, 3)
    dual = build_wilson_dual(mesh)
    system = wilson.assemble_wilson(problem, mesh, dual)
    u = wilson.solve_wilson(system)
    assert_allclose(u.boundary_values(), 0.0, atol=0)
    residual = local_conservation_residual(u, problem, dual)
    assert residual.shape == (len(mesh.points),)
    interior = ~mesh.boundary_vertices
    assert np.abs(residual[interior]).max() <= 1e-10 * np.abs(system.rhs).max()


def test_residual_is_negative_system_defect(problem):
    mesh = RectMesh([0.0, 0.1, 0.4, 1.0], [0.0, 0.3, 0.5, 1.0])
    dual = build_wilson_dual(mesh)
    system = wilson.assemble_wilson(problem, mesh, dual)
    dofmap = system.dofmap
    x = np.random.default_rng(7).standard_normal(dofmap.n)
    u = wilson.SolutionField('wilson', x, mesh, dofmap)
    residual = local_conservation_residual(u, problem, dual)
    interior = ~mesh.boundary_vertices
    defect = system.rhs - system.matrix @ x
    assert_allclose(residual[interior], defect[:dofmap.nvertices][interior], atol=1e-12)


def test_threads_do_not_change_the_system(problem):
    mesh = build_rect_mesh(5, 4)
    dual = build_wilson_dual(mesh)
    serial = wilson.assemble_wilson(problem, mesh, dual)
    threaded = wilson.assemble_wilson(problem, mesh, dual, threads=4)
    assert_allclose(threaded.matrix.toarray(), serial.matrix.toarray(), rtol=1e-14)
    assert_allclose(threaded.rhs, serial.rhs, rtol=1e-14, atol=1e-18)
