"""Q^k Lagrange finite element spaces on structured quad meshes.

Covers the reference basis (equispaced nodes on [-1,1], k = 1 or 2),
tensor-product Gauss-Legendre quadrature, global DOF numbering, Dirichlet
masks, nodal interpolation, and field evaluation. Local DOFs are numbered
lexicographically (x fastest) to match the global row-major layout; basis
tabulations are computed once per quadrature rule and shared by all
elements, which are congruent on these meshes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConfigurationError
from .mesh import StructuredQuadMesh, refine


def _lagrange_1d(nodes: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the 1D Lagrange basis on `nodes` at points x.

    Returns (vals, ders), each shaped (len(x), len(nodes)).
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.asarray(x, dtype=float)
    n = nodes.size
    vals = np.empty((x.size, n))
    ders = np.empty((x.size, n))
    for i in range(n):
        v = np.ones_like(x)
        d = np.zeros_like(x)
        for j in range(n):
            if j == i:
                continue
            w = 1.0 / (nodes[i] - nodes[j])
            d = d * (x - nodes[j]) * w + v * w
            v = v * (x - nodes[j]) * w
        vals[:, i] = v
        ders[:, i] = d
    return vals, ders


@dataclass(frozen=True)
class QkBasis:
    k: int
    nodes_1d: tuple[float, ...]

    @classmethod
    def for_degree(cls, k: int) -> "QkBasis":
        if k not in (1, 2):
            raise ConfigurationError(f"unsupported polynomial degree k={k} (need 1 or 2)")
        return cls(k, tuple(np.linspace(-1.0, 1.0, k + 1)))

    @property
    def n_loc(self) -> int:
        return (self.k + 1) ** 2

    def eval(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate all local shape functions at reference points pts (m, 2).

        Returns (N, dN): values (m, n_loc) and reference gradients
        (m, n_loc, 2). Local index = b*(k+1) + a for x-node a, y-node b.
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        vx, dx = _lagrange_1d(np.array(self.nodes_1d), pts[:, 0])
        vy, dy = _lagrange_1d(np.array(self.nodes_1d), pts[:, 1])
        m = pts.shape[0]
        N = np.einsum("mb,ma->mba", vy, vx).reshape(m, self.n_loc)
        dN = np.empty((m, self.n_loc, 2))
        dN[:, :, 0] = np.einsum("mb,ma->mba", vy, dx).reshape(m, self.n_loc)
        dN[:, :, 1] = np.einsum("mb,ma->mba", dy, vx).reshape(m, self.n_loc)
        return N, dN


def eval_basis(basis: QkBasis, ref_point) -> tuple[np.ndarray, np.ndarray]:
    """Shape function values and reference gradients at one point of [-1,1]^2."""
    N, dN = basis.eval(np.asarray(ref_point, dtype=float).reshape(1, 2))
    return N[0], dN[0]


@dataclass(frozen=True)
class QuadratureRule:
    q: int
    points: np.ndarray  # (q*q, 2), x fastest
    weights: np.ndarray  # (q*q,), sums to 4

    @property
    def n_points(self) -> int:
        return self.q * self.q


def gauss_rule(q: int) -> QuadratureRule:
    """Tensor-product Gauss-Legendre rule with q points per direction."""
    if q < 1:
        raise ConfigurationError(f"quadrature needs q >= 1, got {q}")
    x, w = leggauss(q)
    PX, PY = np.meshgrid(x, x, indexing="xy")
    W = np.outer(w, w)  # rows: y, cols: x
    return QuadratureRule(q, np.column_stack([PX.ravel(), PY.ravel()]), W.ravel())


def make_quadrature(k: int, purpose: str = "assembly") -> QuadratureRule:
    """Quadrature for a Q^k space.

    'assembly' uses q = k+2 points per direction, exact through per-direction
    degree 2k+3, which covers every form in the scheme (the stiffest is the
    field-weighted mass term of degree 3k). 'quartic_diagnostic' uses q = 2k+1
    for the |u|^4 integral of degree 4k, which only the original-energy
    diagnostic needs.
    """
    if k not in (1, 2):
        raise ConfigurationError(f"unsupported polynomial degree k={k}")
    if purpose == "assembly":
        return gauss_rule(k + 2)
    if purpose == "quartic_diagnostic":
        return gauss_rule(2 * k + 1)
    raise ConfigurationError(f"unknown quadrature purpose '{purpose}'")


@dataclass(frozen=True)
class Tabulation:
    """Basis data at one rule's points, shared by all (congruent) elements."""

    N: np.ndarray  # (nq, n_loc)
    dN: np.ndarray  # (nq, n_loc, 2), reference gradients


class FeSpace:
    """Global Q^k space: DOF numbering, boundary mask, cached tabulations.

    Global nodes form a (k*ncx+1) x (k*ncy+1) lattice numbered row-major with
    x fastest; ndof for k=2 on an 80x80 mesh is 161^2 = 25921.
    """

    def __init__(self, mesh: StructuredQuadMesh, k: int):
        self.mesh = mesh
        self.k = int(k)
        self.basis = QkBasis.for_degree(self.k)
        ncx, ncy = mesh.ncx, mesh.ncy
        self.nnx = self.k * ncx + 1
        self.nny = self.k * ncy + 1
        self.ndof = self.nnx * self.nny

        dom = mesh.domain
        sx = mesh.hx / self.k
        sy = mesh.hy / self.k
        x = dom.xmin + sx * np.arange(self.nnx)
        y = dom.ymin + sy * np.arange(self.nny)
        x[-1] = dom.xmax
        y[-1] = dom.ymax
        X, Y = np.meshgrid(x, y, indexing="xy")
        self.node_coords = np.column_stack([X.ravel(), Y.ravel()])

        # element -> global DOF map, local lexicographic order
        kk = self.k + 1
        a = np.arange(kk)
        local = (a[:, None] * self.nnx + a[None, :]).ravel()  # entry b*kk+a holds b*nnx + a
        ex = np.arange(ncx)
        ey = np.arange(ncy)
        EX, EY = np.meshgrid(ex, ey, indexing="xy")
        base = ((self.k * EY) * self.nnx + self.k * EX).ravel()
        self.elem_dofs = base[:, None] + local[None, :]

        i = np.arange(self.ndof)
        ix = i % self.nnx
        iy = i // self.nnx
        self.boundary_mask = (ix == 0) | (ix == self.nnx - 1) | (iy == 0) | (iy == self.nny - 1)

        self._tabs: dict[int, Tabulation] = {}

    @property
    def n_loc(self) -> int:
        return self.basis.n_loc

    @property
    def det_jacobian(self) -> float:
        return self.mesh.hx * self.mesh.hy / 4.0

    @property
    def grad_scale(self) -> np.ndarray:
        """Chain-rule factors (2/hx, 2/hy) mapping reference to physical gradients."""
        return np.array([2.0 / self.mesh.hx, 2.0 / self.mesh.hy])

    def tabulation(self, rule: QuadratureRule) -> Tabulation:
        tab = self._tabs.get(rule.q)
        if tab is None:
            N, dN = self.basis.eval(rule.points)
            tab = Tabulation(N, dN)
            self._tabs[rule.q] = tab
        return tab


@dataclass
class Field:
    """DOF-coefficient vector over a space. Values may be real or complex."""

    space: FeSpace
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != (self.space.ndof,):
            raise ConfigurationError(
                f"field length {self.values.shape} does not match ndof={self.space.ndof}"
            )

    def copy(self) -> "Field":
        return Field(self.space, self.values.copy())


def interpolate(space: FeSpace, f, kind: str = "auto") -> Field:
    """Nodal interpolation: DOF i gets f evaluated at node i.

    f must accept coordinate arrays (X, Y). Reproduces any global Q^k
    polynomial exactly. Boundary values are kept as-is; callers enforcing
    Dirichlet data zero them explicitly (see zero_boundary).
    """
    X = space.node_coords[:, 0]
    Y = space.node_coords[:, 1]
    vals = np.asarray(f(X, Y))
    if vals.shape != X.shape:
        vals = np.broadcast_to(vals, X.shape).copy()
    if kind == "real":
        vals = vals.real.astype(float) if np.iscomplexobj(vals) else vals.astype(float)
    elif kind == "complex":
        vals = vals.astype(complex)
    return Field(space, vals)


def zero_boundary(field: Field) -> Field:
    out = field.copy()
    out.values[field.space.boundary_mask] = 0
    return out


def eval_field(field: Field, element: int, ref_point, with_grad: bool = False):
    """Value (and optionally physical gradient) of a field inside one element."""
    N, dN = eval_basis(field.space.basis, ref_point)
    coeffs = field.values[field.space.elem_dofs[element]]
    val = N @ coeffs
    if not with_grad:
        return val
    grad = (dN * field.space.grad_scale).T @ coeffs
    return val, grad


def eval_field_at_quad(field: Field, rule: QuadratureRule) -> np.ndarray:
    """Field values at every element's quadrature points, shape (ne, nq)."""
    tab = field.space.tabulation(rule)
    return field.values[field.space.elem_dofs] @ tab.N.T


def eval_field_grad_at_quad(field: Field, rule: QuadratureRule) -> np.ndarray:
    """Physical gradients at quadrature points, shape (ne, nq, 2)."""
    tab = field.space.tabulation(rule)
    g = np.einsum("el,qld->eqd", field.values[field.space.elem_dofs], tab.dN)
    return g * field.space.grad_scale


def eval_at_points(field: Field, pts: np.ndarray) -> np.ndarray:
    """Evaluate a field at arbitrary physical points inside the domain.

    Uniform meshes allow direct cell lookup; points on the far edges land in
    the last cell. Shape (m,) matching pts (m, 2).
    """
    mesh = field.space.mesh
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    ex = np.clip(np.floor((pts[:, 0] - mesh.domain.xmin) / mesh.hx).astype(int), 0, mesh.ncx - 1)
    ey = np.clip(np.floor((pts[:, 1] - mesh.domain.ymin) / mesh.hy).astype(int), 0, mesh.ncy - 1)
    e = ey * mesh.ncx + ex
    x0 = mesh.domain.xmin + ex * mesh.hx
    y0 = mesh.domain.ymin + ey * mesh.hy
    ref = np.column_stack(
        [2.0 * (pts[:, 0] - x0) / mesh.hx - 1.0, 2.0 * (pts[:, 1] - y0) / mesh.hy - 1.0]
    )
    N, _ = field.space.basis.eval(ref)
    coeffs = field.values[field.space.elem_dofs[e]]
    return np.einsum("ml,ml->m", N, coeffs)


def eval_on_refined(coarse: Field, fine_space: FeSpace, rule: QuadratureRule) -> np.ndarray:
    """Values of a coarse field at the quadrature points of the once-refined mesh.

    Exact by nestedness: each fine element lies in exactly one coarse element,
    found by index arithmetic rather than geometric search. Returns (ne_fine, nq).
    """
    cmesh = coarse.space.mesh
    fmesh = fine_space.mesh
    if (fmesh.ncx, fmesh.ncy) != (2 * cmesh.ncx, 2 * cmesh.ncy) or fmesh.domain != cmesh.domain:
        raise ConfigurationError("fine space is not the refinement of the coarse field's mesh")

    ne_f = fmesh.n_elements
    out = np.empty((ne_f, rule.n_points), dtype=coarse.values.dtype)
    fe = np.arange(ne_f)
    fex = fe % fmesh.ncx
    fey = fe // fmesh.ncx
    parent = (fey // 2) * cmesh.ncx + fex // 2
    for sx in (0, 1):
        for sy in (0, 1):
            sub = (fex % 2 == sx) & (fey % 2 == sy)
            if not sub.any():
                continue
            shifted = np.column_stack(
                [(rule.points[:, 0] + 2 * sx - 1) / 2.0, (rule.points[:, 1] + 2 * sy - 1) / 2.0]
            )
            N, _ = coarse.space.basis.eval(shifted)
            out[sub] = coarse.values[coarse.space.elem_dofs[parent[sub]]] @ N.T
    return out
