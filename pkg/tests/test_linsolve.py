"""Linear solver contracts: residual guarantees, config validation, reuse."""

import time

import numpy as np
import pytest
import scipy.sparse as sp

from spfem.assembly import assemble_mass, assemble_stiffness, dirichlet_reduce
from spfem.errors import ConfigurationError
from spfem.fespace import FeSpace
from spfem.linsolve import (
    DIRECT,
    KRYLOV,
    PatternSolver,
    SolverConfig,
    reuse_pattern_solve,
    solve_complex,
    solve_spd,
)
from spfem.mesh import RectDomain, build_mesh


def test_two_by_two_hand_solution():
    A = sp.csr_matrix(np.array([[2.0, 1.0], [1.0, 2.0]]))
    x, report = solve_spd(A, np.array([3.0, 3.0]))
    assert np.abs(x - 1.0).max() < 1e-14
    assert report.rel_residual <= 1e-12


def test_identity_returns_rhs():
    A = sp.identity(7, format="csr")
    b = np.arange(7.0)
    x, _ = solve_spd(A, b)
    assert np.array_equal(x, b)


def test_complex_diagonal():
    d = np.array([1.0 + 1.0j, 2.0 - 1.0j, -3.0j])
    A = sp.diags(d).tocsr()
    b = np.array([2.0, 1.0 + 1.0j, 3.0])
    x, _ = solve_complex(A, b)
    assert np.abs(x - b / d).max() < 1e-14


def test_zero_rhs_short_circuits():
    A = sp.identity(5, format="csr")
    x, report = solve_spd(A, np.zeros(5))
    assert not x.any()
    assert report.iterations == 0 and report.rel_residual == 0.0


def test_residual_contract_reverified_independently():
    space = FeSpace(build_mesh(RectDomain.square(4.0), 12, 12), 2)
    K = assemble_stiffness(space)
    M = assemble_mass(space)
    A, _ = dirichlet_reduce(K + M, np.zeros(space.ndof), space.boundary_mask)
    rng = np.random.default_rng(5)
    for _ in range(5):
        b = rng.standard_normal(A.shape[0])
        x, report = solve_spd(A, b)
        res = np.linalg.norm(A @ x - b) / np.linalg.norm(b)
        assert res <= 1e-12
        assert report.rel_residual <= 1e-12


def test_solve_spd_rejects_asymmetric():
    A = sp.csr_matrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ConfigurationError):
        solve_spd(A, np.ones(2))


@pytest.mark.parametrize("bad", [0.0, -1e-9, 1e-5, 1.0])
def test_rel_tol_range_enforced(bad):
    with pytest.raises(ConfigurationError):
        SolverConfig(rel_tol=bad)


def test_unknown_method_rejected():
    with pytest.raises(ConfigurationError):
        SolverConfig(method="magic")


def _shifted_system(nc=16, k=1):
    space = FeSpace(build_mesh(RectDomain.square(2.0), nc, nc), k)
    K = assemble_stiffness(space)
    M = assemble_mass(space)
    A, _ = dirichlet_reduce(K + M, np.zeros(space.ndof), space.boundary_mask)
    return A


def test_pattern_solver_reuses_factorization():
    A = _shifted_system()
    h = PatternSolver.from_matrix(A, spd=True)
    b = np.ones(A.shape[0])
    _, r1 = h.solve(b)
    _, r2 = h.solve(2.0 * b)
    assert not r1.reused_factorization
    assert r2.reused_factorization
    h.update_values(A.data * 2.0)
    _, r3 = h.solve(b)
    assert not r3.reused_factorization


def test_pattern_solver_bit_identical_repeats():
    A = _shifted_system()
    rng = np.random.default_rng(1)
    b = rng.standard_normal(A.shape[0])
    h1 = PatternSolver.from_matrix(A, spd=True)
    h2 = PatternSolver.from_matrix(A, spd=True)
    x1, _ = h1.solve(b)
    x2, _ = h2.solve(b)
    assert np.array_equal(x1, x2)
    x3, _ = h1.solve(b)  # reused factorization path
    assert np.array_equal(x1, x3)


def test_reuse_pattern_solve_swaps_values():
    A = _shifted_system(8)
    h = PatternSolver.from_matrix(A, spd=True)
    b = np.ones(A.shape[0])
    x1, _ = reuse_pattern_solve(h, None, b)
    x2, _ = reuse_pattern_solve(h, A.data * 4.0, b)
    assert np.abs(x2 - x1 / 4.0).max() < 1e-10 * np.abs(x1).max()


def test_reused_solves_beat_fresh_factorizations():
    A = _shifted_system(48, 2)
    rng = np.random.default_rng(2)
    bs = [rng.standard_normal(A.shape[0]) for _ in range(8)]

    def timed(fresh):
        t0 = time.perf_counter()
        if fresh:
            for b in bs:
                solve_spd(A, b)
        else:
            h = PatternSolver.from_matrix(A, spd=True)
            for b in bs:
                h.solve(b)
        return time.perf_counter() - t0

    fresh = min(timed(True) for _ in range(5))
    reused = min(timed(False) for _ in range(5))
    assert reused < fresh


def test_krylov_spd_meets_residual():
    A = _shifted_system(12)
    b = np.ones(A.shape[0])
    cfg = SolverConfig(rel_tol=1e-10, method=KRYLOV)
    x, report = solve_spd(A, b, cfg)
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) <= 1e-10
    assert report.iterations > 0


def test_krylov_complex_meets_residual():
    A = _shifted_system(8)
    Ac = (A.astype(complex) * 1j).tocsr()
    b = np.ones(A.shape[0], dtype=complex)
    cfg = SolverConfig(rel_tol=1e-10, method=KRYLOV)
    x, _ = solve_complex(Ac, b, cfg)
    assert np.linalg.norm(Ac @ x - b) / np.linalg.norm(b) <= 1e-10


def test_direct_is_default_method():
    assert SolverConfig().method == DIRECT
