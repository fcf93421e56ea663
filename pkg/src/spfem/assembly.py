"""Sparse operator assembly with Dirichlet elimination.

Mass, stiffness, and weighted-mass matrices on one shared CSR sparsity
pattern, plus density load vectors. The shared pattern lets the time stepper
combine matrices by pure value arithmetic and rebuild the weighted-mass
values in place each step. Accumulation uses a fixed element order
(np.bincount over a precomputed scatter map), so repeated assemblies are
bit-identical.

Dirichlet conditions are imposed by row/column elimination, never penalties:
the conservation identities of the scheme hold only when discrete test
functions lie exactly in the zero-boundary space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError
from .fespace import FeSpace, Field, QuadratureRule, eval_field_at_quad, make_quadrature


@dataclass(frozen=True)
class Pattern:
    """Shared CSR structure for all matrices on one space.

    scatter maps (element, local i, local j) to a position in the CSR data
    array; duplicate-entry accumulation happens via bincount on it.
    """

    ndof: int
    indptr: np.ndarray
    indices: np.ndarray
    scatter: np.ndarray  # (ne, n_loc, n_loc) int

    @property
    def nnz(self) -> int:
        return self.indices.size


def build_pattern(space: FeSpace) -> Pattern:
    ed = space.elem_dofs
    ne, nloc = ed.shape
    rows = np.repeat(ed, nloc, axis=1)  # (ne, nloc*nloc), row-major (i outer)
    cols = np.tile(ed, (1, nloc))
    keys = rows.astype(np.int64) * space.ndof + cols.astype(np.int64)
    uniq, inv = np.unique(keys.ravel(), return_inverse=True)
    indices = (uniq % space.ndof).astype(np.int32)
    urows = (uniq // space.ndof).astype(np.int64)
    counts = np.bincount(urows, minlength=space.ndof)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
    scatter = inv.reshape(ne, nloc, nloc)
    return Pattern(space.ndof, indptr, indices, scatter)


def csr_from_pattern(pattern: Pattern, data: np.ndarray) -> sp.csr_matrix:
    n = pattern.ndof
    return sp.csr_matrix((data, pattern.indices, pattern.indptr), shape=(n, n))


def accumulate(pattern: Pattern, elem_mats: np.ndarray) -> np.ndarray:
    """Scatter per-element matrices (ne, nloc, nloc) into a CSR data array."""
    return np.bincount(
        pattern.scatter.ravel(), weights=elem_mats.ravel(), minlength=pattern.nnz
    )


def _mass_element(space: FeSpace, rule: QuadratureRule) -> np.ndarray:
    tab = space.tabulation(rule)
    w = rule.weights * space.det_jacobian
    return np.einsum("q,qi,qj->ij", w, tab.N, tab.N)


def _stiffness_element(space: FeSpace, rule: QuadratureRule) -> np.ndarray:
    tab = space.tabulation(rule)
    w = rule.weights * space.det_jacobian
    g = tab.dN * space.grad_scale  # physical gradients, same for all elements
    return np.einsum("q,qid,qjd->ij", w, g, g)


def assemble_mass(space: FeSpace, rule: QuadratureRule | None = None, pattern: Pattern | None = None) -> sp.csr_matrix:
    """Gram matrix M_ij = integral(phi_i phi_j); symmetric positive definite."""
    rule = rule or make_quadrature(space.k, "assembly")
    pattern = pattern or build_pattern(space)
    el = _mass_element(space, rule)
    data = accumulate(pattern, np.broadcast_to(el, (space.mesh.n_elements, *el.shape)))
    return csr_from_pattern(pattern, data)


def assemble_stiffness(space: FeSpace, rule: QuadratureRule | None = None, pattern: Pattern | None = None) -> sp.csr_matrix:
    """Stiffness K_ij = integral(grad phi_i . grad phi_j); semidefinite with
    zero row sums, positive definite after Dirichlet reduction."""
    rule = rule or make_quadrature(space.k, "assembly")
    pattern = pattern or build_pattern(space)
    el = _stiffness_element(space, rule)
    data = accumulate(pattern, np.broadcast_to(el, (space.mesh.n_elements, *el.shape)))
    return csr_from_pattern(pattern, data)


def quad_coords(space: FeSpace, rule: QuadratureRule) -> tuple[np.ndarray, np.ndarray]:
    """Physical quadrature coordinates, each (ne, nq)."""
    mesh = space.mesh
    ne = mesh.n_elements
    ex = np.arange(ne) % mesh.ncx
    ey = np.arange(ne) // mesh.ncx
    x0 = mesh.domain.xmin + ex * mesh.hx
    y0 = mesh.domain.ymin + ey * mesh.hy
    X = x0[:, None] + (rule.points[None, :, 0] + 1.0) * (mesh.hx / 2.0)
    Y = y0[:, None] + (rule.points[None, :, 1] + 1.0) * (mesh.hy / 2.0)
    return X, Y


def pointwise_values(space: FeSpace, w, rule: QuadratureRule) -> np.ndarray:
    """Evaluate a weight at quadrature points: (ne, nq) array.

    Accepts a scalar, a callable w(X, Y) of coordinate arrays, a Field on the
    same space, a precomputed (ne, nq) array, or a list of such terms to sum.
    """
    ne, nq = space.mesh.n_elements, rule.n_points
    if w is None:
        return np.zeros((ne, nq))
    if isinstance(w, (list, tuple)):
        total = np.zeros((ne, nq))
        for term in w:
            total = total + pointwise_values(space, term, rule)
        return total
    if isinstance(w, Field):
        if w.space is not space:
            raise ConfigurationError("weight field lives on a different space")
        return eval_field_at_quad(w, rule)
    if np.isscalar(w):
        return np.full((ne, nq), float(w))
    if callable(w):
        X, Y = quad_coords(space, rule)
        return np.broadcast_to(np.asarray(w(X, Y), dtype=float), (ne, nq))
    arr = np.asarray(w)
    if arr.shape == (ne, nq):
        return arr
    raise ConfigurationError(f"cannot interpret weight of type {type(w)!r}")


def weighted_mass_data(space: FeSpace, w_quad: np.ndarray, rule: QuadratureRule, pattern: Pattern) -> np.ndarray:
    """CSR data for W_ij = integral(w phi_i phi_j) from precomputed weight values.

    This is the per-step fast path: pattern and tabulation are fixed, only the
    weight values change.
    """
    tab = space.tabulation(rule)
    wq = w_quad * (rule.weights * space.det_jacobian)
    elem = np.einsum("eq,qi,qj->eij", wq, tab.N, tab.N)
    return accumulate(pattern, elem)


def assemble_weighted_mass(space: FeSpace, w, rule: QuadratureRule | None = None, pattern: Pattern | None = None) -> sp.csr_matrix:
    """W_ij = integral(w phi_i phi_j) with w evaluated at quadrature points."""
    rule = rule or make_quadrature(space.k, "assembly")
    pattern = pattern or build_pattern(space)
    w_quad = pointwise_values(space, w, rule)
    return csr_from_pattern(pattern, weighted_mass_data(space, w_quad, rule, pattern))


def assemble_density_load(space: FeSpace, rho, rule: QuadratureRule | None = None) -> np.ndarray:
    """Load vector b_i = integral(rho phi_i)."""
    rule = rule or make_quadrature(space.k, "assembly")
    rho_quad = pointwise_values(space, rho, rule)
    tab = space.tabulation(rule)
    contrib = (rho_quad * (rule.weights * space.det_jacobian)) @ tab.N  # (ne, nloc)
    return np.bincount(
        space.elem_dofs.ravel(), weights=contrib.ravel(), minlength=space.ndof
    )


@dataclass(frozen=True)
class DirichletReduction:
    """Precomputed elimination of boundary DOFs for one shared pattern."""

    mask: np.ndarray  # boundary flags, len ndof
    interior: np.ndarray  # interior DOF indices
    sel: np.ndarray  # positions in the full CSR data kept by the reduction
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def n_reduced(self) -> int:
        return self.interior.size

    def reduce_data(self, full_data: np.ndarray) -> np.ndarray:
        return full_data[self.sel]

    def reduce_matrix(self, full: sp.csr_matrix) -> sp.csr_matrix:
        n = self.n_reduced
        return sp.csr_matrix((full.data[self.sel], self.indices, self.indptr), shape=(n, n))

    def reduce_vec(self, v: np.ndarray) -> np.ndarray:
        return v[self.interior]

    def lift(self, v_reduced: np.ndarray) -> np.ndarray:
        out = np.zeros(self.mask.size, dtype=v_reduced.dtype)
        out[self.interior] = v_reduced
        return out


def build_reduction(pattern: Pattern, mask: np.ndarray) -> DirichletReduction:
    mask = np.asarray(mask, dtype=bool)
    if mask.size != pattern.ndof:
        raise ConfigurationError("mask length does not match ndof")
    interior = np.flatnonzero(~mask)
    renum = np.full(pattern.ndof, -1, dtype=np.int64)
    renum[interior] = np.arange(interior.size)

    # expand CSR to (row, col) entry lists; kept entries stay lexicographic
    counts = np.diff(pattern.indptr)
    rows = np.repeat(np.arange(pattern.ndof), counts)
    cols = pattern.indices
    keep = (~mask[rows]) & (~mask[cols])
    sel = np.flatnonzero(keep)
    r_red = renum[rows[sel]]
    c_red = renum[cols[sel]].astype(np.int32)
    n = interior.size
    indptr = np.concatenate([[0], np.cumsum(np.bincount(r_red, minlength=n))]).astype(np.int32)
    return DirichletReduction(mask, interior, sel, indptr, c_red)


def dirichlet_reduce(matrix: sp.csr_matrix, rhs: np.ndarray, mask: np.ndarray):
    """Remove boundary rows/columns of a square system with homogeneous data."""
    mask = np.asarray(mask, dtype=bool)
    if matrix.shape[0] != matrix.shape[1]:
        raise ConfigurationError("dirichlet_reduce expects a square matrix")
    if mask.size != matrix.shape[0]:
        raise ConfigurationError("mask length does not match matrix size")
    interior = np.flatnonzero(~mask)
    reduced = matrix[interior][:, interior].tocsr()
    return reduced, np.asarray(rhs)[interior]
