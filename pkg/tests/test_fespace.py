"""Reference basis, quadrature, interpolation, and field evaluation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spfem.errors import ConfigurationError
from spfem.fespace import (
    FeSpace,
    QkBasis,
    eval_at_points,
    eval_basis,
    eval_field,
    eval_field_at_quad,
    eval_field_grad_at_quad,
    eval_on_refined,
    gauss_rule,
    interpolate,
    make_quadrature,
)
from spfem.mesh import RectDomain, build_mesh, refine

ref_coord = st.floats(-1.0, 1.0, allow_nan=False)


def test_q1_center_values():
    b = QkBasis.for_degree(1)
    N, _ = eval_basis(b, (0.0, 0.0))
    np.testing.assert_allclose(N, 0.25)


def test_q1_corner_is_kronecker():
    b = QkBasis.for_degree(1)
    N, _ = eval_basis(b, (-1.0, -1.0))
    np.testing.assert_allclose(N, [1.0, 0.0, 0.0, 0.0], atol=1e-15)


def test_q2_nodes_are_kronecker():
    b = QkBasis.for_degree(2)
    nodes = [(x, y) for y in (-1.0, 0.0, 1.0) for x in (-1.0, 0.0, 1.0)]
    for j, pt in enumerate(nodes):
        N, _ = eval_basis(b, pt)
        expected = np.zeros(9)
        expected[j] = 1.0
        np.testing.assert_allclose(N, expected, atol=1e-14)


def test_unsupported_degree():
    with pytest.raises(ConfigurationError):
        QkBasis.for_degree(3)


@given(xi=ref_coord, eta=ref_coord, k=st.sampled_from([1, 2]))
@settings(max_examples=100, deadline=None)
def test_partition_of_unity_and_gradient_sum(xi, eta, k):
    b = QkBasis.for_degree(k)
    N, dN = eval_basis(b, (xi, eta))
    assert abs(N.sum() - 1.0) < 1e-13
    assert np.abs(dN.sum(axis=0)).max() < 1e-13


def test_quadrature_sizes():
    assert make_quadrature(1, "assembly").q == 3
    assert make_quadrature(2, "assembly").q == 4
    assert make_quadrature(1, "quartic_diagnostic").q == 3
    assert make_quadrature(2, "quartic_diagnostic").q == 5


def test_quadrature_weight_sum():
    for q in (1, 2, 3, 4, 5):
        assert gauss_rule(q).weights.sum() == pytest.approx(4.0, rel=1e-14)


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5])
def test_quadrature_exactness_through_degree(q):
    rule = gauss_rule(q)
    # exact for per-direction degree <= 2q-1
    for p in range(2 * q):
        got = (rule.weights * rule.points[:, 0] ** p * rule.points[:, 1] ** p).sum()
        exact_1d = 0.0 if p % 2 else 2.0 / (p + 1)
        assert got == pytest.approx(exact_1d**2, abs=1e-14)


def test_quadrature_rejects_unknown_purpose():
    with pytest.raises(ConfigurationError):
        make_quadrature(1, "nope")


def test_space_ndof_nc80_q2():
    space = FeSpace(build_mesh(RectDomain.square(8.0), 80, 80), 2)
    assert space.ndof == 161**2 == 25921


def test_space_boundary_mask_counts():
    space = FeSpace(build_mesh(RectDomain.unit(), 4, 4), 2)
    nn = 2 * 4 + 1
    assert space.boundary_mask.sum() == 4 * nn - 4


def test_elem_dofs_distinct_and_shared():
    space = FeSpace(build_mesh(RectDomain.unit(), 3, 2), 2)
    for e in range(space.mesh.n_elements):
        assert len(set(space.elem_dofs[e])) == space.n_loc
    # neighbors share a full edge of k+1 nodes
    shared = set(space.elem_dofs[0]) & set(space.elem_dofs[1])
    assert len(shared) == 3


def test_interpolate_constant():
    space = FeSpace(build_mesh(RectDomain.unit(), 3, 3), 1)
    f = interpolate(space, lambda X, Y: 1.0)
    np.testing.assert_allclose(f.values, 1.0)


def test_interpolate_is_projection():
    space = FeSpace(build_mesh(RectDomain.square(2.0), 4, 3), 2)
    rng = np.random.default_rng(7)
    vals = rng.standard_normal(space.ndof)
    from spfem.fespace import Field

    f = Field(space, vals)

    def as_function(X, Y):
        return eval_at_points(f, np.column_stack([X, Y]))

    again = interpolate(space, as_function)
    np.testing.assert_allclose(again.values, vals, atol=1e-12)


def test_interpolate_origin_value_of_ring_profile():
    # u0 ~ (x + iy) * gaussian vanishes at the origin node
    space = FeSpace(build_mesh(RectDomain.square(8.0), 4, 4), 2)
    u0 = interpolate(
        space,
        lambda X, Y: (X + 1j * Y) * np.exp(-(X**2 + Y**2) / 4.0) / np.sqrt(2 * np.pi),
        kind="complex",
    )
    center = np.flatnonzero(
        (space.node_coords[:, 0] == 0.0) & (space.node_coords[:, 1] == 0.0)
    )
    assert len(center) == 1
    assert u0.values[center[0]] == 0.0


def test_q1_reproduces_bilinear_at_quad_points():
    space = FeSpace(build_mesh(RectDomain.unit(), 3, 3), 1)
    f = interpolate(space, lambda X, Y: X * Y)
    rule = make_quadrature(1, "assembly")
    got = eval_field_at_quad(f, rule)
    # physical quad coords per element
    for e in range(space.mesh.n_elements):
        x0, y0 = space.mesh.element_origin(e)
        xs = x0 + (rule.points[:, 0] + 1) / 2 * space.mesh.hx
        ys = y0 + (rule.points[:, 1] + 1) / 2 * space.mesh.hy
        np.testing.assert_allclose(got[e], xs * ys, atol=1e-13)


def test_eval_field_linear_reproduction_and_gradient():
    space = FeSpace(build_mesh(RectDomain.square(3.0), 5, 4), 1)
    f = interpolate(space, lambda X, Y: X)
    val, grad = eval_field(f, 7, (0.3, -0.2), with_grad=True)
    e = 7
    x0, y0 = space.mesh.element_origin(e)
    xc = x0 + (0.3 + 1) / 2 * space.mesh.hx
    assert val == pytest.approx(xc, abs=1e-13)
    np.testing.assert_allclose(grad, [1.0, 0.0], atol=1e-13)

    rule = make_quadrature(1, "assembly")
    grads = eval_field_grad_at_quad(f, rule)
    np.testing.assert_allclose(grads[..., 0], 1.0, atol=1e-13)
    np.testing.assert_allclose(grads[..., 1], 0.0, atol=1e-13)


def test_all_ones_field_evaluates_to_one_anywhere():
    space = FeSpace(build_mesh(RectDomain.unit(), 2, 2), 2)
    from spfem.fespace import Field

    f = Field(space, np.ones(space.ndof))
    assert eval_field(f, 1, (0.123, -0.77)) == pytest.approx(1.0, abs=1e-14)
    pts = np.array([[0.1, 0.2], [0.99, 0.01], [1.0, 1.0]])
    np.testing.assert_allclose(eval_at_points(f, pts), 1.0, atol=1e-14)


def test_eval_on_refined_is_nested_exact():
    coarse_mesh = build_mesh(RectDomain.square(2.0), 3, 3)
    fine_mesh = refine(coarse_mesh)
    for k in (1, 2):
        cs = FeSpace(coarse_mesh, k)
        fs = FeSpace(fine_mesh, k)
        rng = np.random.default_rng(k)
        from spfem.fespace import Field

        cf = Field(cs, rng.standard_normal(cs.ndof))
        rule = make_quadrature(k, "assembly")
        via_parent = eval_on_refined(cf, fs, rule)

        # brute force: evaluate at the fine rule's physical points
        brute = np.empty_like(via_parent)
        for e in range(fine_mesh.n_elements):
            x0, y0 = fine_mesh.element_origin(e)
            xs = x0 + (rule.points[:, 0] + 1) / 2 * fine_mesh.hx
            ys = y0 + (rule.points[:, 1] + 1) / 2 * fine_mesh.hy
            brute[e] = eval_at_points(cf, np.column_stack([xs, ys]))
        np.testing.assert_allclose(via_parent, brute, atol=1e-12)


def test_eval_on_refined_rejects_non_nested():
    cs = FeSpace(build_mesh(RectDomain.unit(), 3, 3), 1)
    fs = FeSpace(build_mesh(RectDomain.unit(), 5, 5), 1)
    from spfem.fespace import Field

    with pytest.raises(ConfigurationError):
        eval_on_refined(Field(cs, np.zeros(cs.ndof)), fs, make_quadrature(1))
