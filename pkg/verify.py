"""Property checks for both schemes.

The Wilson checks work on the reference matrices (duality, null spaces,
rank, spectral floor, shape parameterization, local ellipticity). The C-R
checks bound the discrete norm equivalence and the coercivity constant by
per-triangle generalized eigenvalues, which makes them exact rather than
sampled.
"""

import logging
import numpy as np

from dataclasses import dataclass

import cr
import wilson
from dual import build_cr_dual, build_wilson_dual
from mesh import build_rect_mesh, build_structured_tri_mesh
from problem import EllipticProblem, Rectangle


log = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _constant_complement():
    """Orthonormal basis (3, 2) of the vectors orthogonal to (1, 1, 1)."""
    z = np.array([[1.0, -1.0, 0.0], [1.0, 1.0, -2.0]]).T
    return z / np.linalg.norm(z, axis=0)


def _generalized_eigvals(a, b):
    """Eigenvalues of the batched symmetric pencils (a, b), b positive definite."""
    chol = np.linalg.cholesky(b)
    tmp = np.linalg.solve(chol, a)
    c = np.linalg.solve(chol, np.swapaxes(tmp, -1, -2))
    return np.linalg.eigvalsh(0.5 * (c + np.swapaxes(c, -1, -2)))


def cr_stiffness(mesh):
    """Local C-R stiffness matrices |K| g_i.g_j, shape (ncells, 3, 3)."""
    g = cr.basis_gradients(mesh.cell_points)
    return mesh.areas[:, None, None] * np.einsum('cid,cjd->cij', g, g)


def cr_norm_bracket(mesh):
    """(c1, c2) with c1 ||v||_1,T <= |Pi v|_1,V <= c2 ||v||_1,T.

    On a triangle the squared test seminorm of Pi v is the sum of squared
    midpoint differences, 3|v|^2 on the complement of constants.
    """
    z = _constant_complement()
    mu = np.linalg.eigvalsh(np.einsum('ia,cij,jb->cab', z, cr_stiffness(mesh), z))
    return float(np.sqrt(3.0 / mu[:, 1].max())), float(np.sqrt(3.0 / mu[:, 0].min()))


def cr_coercivity(problem, mesh, dual):
    """Lower bound sigma of a_T(w, Pi w) / ||w||^2_1,T.

    Taken over the local vectors orthogonal to constants, which covers the
    whole trial space when b = 0.
    """
    z = _constant_complement()
    dofmap = cr.CRDofMap(mesh)
    local, _ = cr.local_matrices(problem, dofmap, dual, np.arange(mesh.ncells))
    sym = 0.5 * (local + np.swapaxes(local, 1, 2))
    a = np.einsum('ia,cij,jb->cab', z, sym, z)
    b = np.einsum('ia,cij,jb->cab', z, cr_stiffness(mesh), z)
    return float(_generalized_eigvals(a, b).min())


def _check(name, passed, detail):
    result = CheckResult(name, bool(passed), detail)
    log.info('%s %s: %s', 'PASS' if result.passed else 'FAIL', name, detail)
    return result


def wilson_checks(ref, ratios=(0.5, 1.0, 2.0, 0.2, 3.7), seed=0):
    e, E = ref.e, ref.E
    results = []

    D = wilson.duality_matrix()
    err = np.abs(D - np.eye(6)).max()
    results.append(_check('wilson duality', err <= 1e-13, 'max |eta_i(phi_j) - delta_ij| = %.3e' % err))

    err = max(np.abs(A @ e).max() for A in (ref.A1, ref.A2, ref.A1.T, ref.A2.T))
    results.append(_check('wilson null space', err <= 1e-14, 'max |A_i e|, |A_i^T e| = %.3e' % err))

    for label, A in (('A1', ref.A1s), ('A2', ref.A2s)):
        ev = np.linalg.eigvalsh(A)
        rank = int(np.sum(ev > 1e-10))
        results.append(_check('wilson %s semi-definite rank 3' % label,
                              rank == 3 and ev.min() >= -1e-10,
                              'eigenvalues %s' % ' '.join('%.6e' % v for v in ev)))

    lam = np.linalg.eigvalsh(ref.H(1.0)).min()
    results.append(_check('wilson spectral floor', abs(lam - 1.0 / 12) <= 1e-10,
                          'lambda_min(A1s+A2s+E) = %.10f' % lam))

    err = max(np.abs(E @ E - E).max(), np.abs(E @ e - e).max())
    rank = np.linalg.matrix_rank(E)
    results.append(_check('wilson E projection', err <= 1e-14 and rank == 1,
                          'max |E^2 - E|, |Ee - e| = %.3e, rank %d' % (err, rank)))

    worst = 0.0
    for r in ratios:
        mesh = build_rect_mesh(1, 1, Rectangle(0.0, 0.5, 0.0, 0.5 * r))
        direct = wilson.bilinear_form(wilson.WilsonDofMap(mesh), build_wilson_dual(mesh))[0]
        worst = max(worst, np.abs(wilson.element_stiffness(r, ref.A1, ref.A2) - direct).max())
    results.append(_check('wilson shape parameterization', worst <= 1e-12,
                          'max |r A1 + A2/r - A_K| = %.3e over r in %s' % (worst, list(ratios))))

    rng = np.random.default_rng(seed)
    worst = np.inf
    for r in ratios:
        Ak = wilson.element_stiffness(r, ref.A1, ref.A2)
        Ak = 0.5 * (Ak + Ak.T)
        floor = np.linalg.eigvalsh(ref.H(r)).min()
        w = rng.standard_normal((200, 6))
        d = w - w @ E
        gap = np.einsum('ki,ij,kj->k', w, Ak, w) - floor * np.sum(d * d, axis=1)
        worst = min(worst, gap.min())
    results.append(_check('wilson local ellipticity', worst >= -1e-12,
                          'min w^T A_K w - lambda_min(H(r)) |w - Ew|^2 = %.3e' % worst))
    return results


def cr_checks(families=((2, 2), (1, 3), (1, 20))):
    results = []

    ev = np.linalg.eigvalsh(cr.reference_mass_matrix())
    results.append(_check('cr reference mass matrix', ev.min() > 0,
                          'lambda_min = %.6e' % ev.min()))

    poisson = EllipticProblem()
    for M, N in families:
        coarse = cr_norm_bracket(build_structured_tri_mesh(M, N))
        fine = cr_norm_bracket(build_structured_tri_mesh(2 * M, 2 * N))
        drift = max(abs(f / c - 1.0) for c, f in zip(coarse, fine))
        results.append(_check('cr norm bracket (%d,%d)' % (M, N), coarse[0] > 0 and drift <= 0.1,
                              '[%.6e, %.6e] -> [%.6e, %.6e]' % (coarse + fine)))

        sigmas = []
        for k in (1, 2):
            mesh = build_structured_tri_mesh(k * M, k * N)
            sigmas.append(cr_coercivity(poisson, mesh, build_cr_dual(mesh)))
        drift = abs(sigmas[1] / sigmas[0] - 1.0)
        results.append(_check('cr coercivity (%d,%d)' % (M, N), sigmas[0] > 0 and drift <= 0.1,
                              'sigma %.6e -> %.6e' % tuple(sigmas)))
    return results


def run_checks(a1_perturbation=0.0):
    """Run every property check.

    Args:
        a1_perturbation (float): added to A1[0, 0] before checking, so that
            the failure path can be exercised.

    Returns:
        list of CheckResult.
    """
    ref = wilson.reference_element()
    if a1_perturbation:
        A1 = ref.A1.copy()
        A1[0, 0] += a1_perturbation
        ref = wilson.WilsonReferenceElement(A1, ref.A2, ref.e, ref.E)
    return wilson_checks(ref) + cr_checks()


def format_report(results):
    return ''.join('%s %s: %s\n' % ('PASS' if r.passed else 'FAIL', r.name, r.detail)
                   for r in results)
