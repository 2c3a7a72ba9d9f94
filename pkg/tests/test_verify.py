import numpy as np
import pytest

import cr
import norms
import verify
import wilson
from dual import build_cr_dual
from mesh import build_structured_tri_mesh
from norms import broken_h1_norm
from problem import EllipticProblem


def test_all_checks_pass():
    results = verify.run_checks()
    failed = [r.name for r in results if not r.passed]
    assert failed == []
    report = verify.format_report(results)
    assert 'PASS wilson spectral floor: lambda_min(A1s+A2s+E) = 0.0833333333' in report
    assert all(line.startswith('PASS ') for line in report.splitlines())


def test_perturbed_reference_fails():
    results = {r.name: r for r in verify.run_checks(1e-3)}
    assert not results['wilson null space'].passed
    assert not results['wilson shape parameterization'].passed
    assert results['wilson duality'].passed


@pytest.mark.parametrize('M,N', [(2, 2), (1, 3), (1, 20)])
def test_norm_bracket_holds_for_random_fields(M, N):
    mesh = build_structured_tri_mesh(M, N)
    dual = build_cr_dual(mesh)
    c1, c2 = verify.cr_norm_bracket(mesh)
    assert 0 < c1 <= c2
    dofmap = cr.CRDofMap(mesh)
    rng = np.random.default_rng(8)

    for _ in range(20):
        w = cr.SolutionField('cr', rng.standard_normal(dofmap.n), mesh, dofmap)
        ratio = norms.test_space_seminorm(w, dual) / broken_h1_norm(w)
        assert c1 - 1e-12 <= ratio <= c2 + 1e-12


def test_norm_bracket_is_mesh_independent():
    coarse = verify.cr_norm_bracket(build_structured_tri_mesh(1, 3))
    fine = verify.cr_norm_bracket(build_structured_tri_mesh(4, 12))
    assert fine == pytest.approx(coarse, rel=1e-10)


def test_poisson_coercivity_is_one():
    mesh = build_structured_tri_mesh(2, 2)
    assert verify.cr_coercivity(EllipticProblem(), mesh, build_cr_dual(mesh)) == pytest.approx(1.0)


def test_coercivity_bound_holds_for_random_fields():
    def diffusion(x, y):
        a = np.zeros(np.shape(x) + (2, 2))
        a[..., 0, 0] = 1.0 + x * x
        a[..., 1, 1] = 1.0 + y
        return a

    problem = EllipticProblem(diffusion=diffusion)
    mesh = build_structured_tri_mesh(2, 4)
    dual = build_cr_dual(mesh)
    sigma = verify.cr_coercivity(problem, mesh, dual)
    assert sigma > 0
    dofmap = cr.CRDofMap(mesh)
    local, _ = cr.local_matrices(problem, dofmap, dual, np.arange(mesh.ncells))
    rng = np.random.default_rng(9)
    for _ in range(20):
        coef = rng.standard_normal(dofmap.n)
        w = cr.SolutionField('cr', coef, mesh, dofmap)
        c = w.cell_coefficients()
        form = np.einsum('ci,cij,cj->', c, local, c)
        assert form >= sigma * broken_h1_norm(w) ** 2 - 1e-12


def test_wilson_checks_on_custom_ratios():
    results = verify.wilson_checks(wilson.reference_element(), ratios=(0.1, 10.0))
    assert all(r.passed for r in results)
