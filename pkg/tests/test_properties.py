"""Invariants checked against generated inputs (hypothesis)."""

import dataclasses
import json

import numpy as np
from hypothesis import given, settings, strategies as st

from spfem.assembly import (
    assemble_mass,
    assemble_stiffness,
    assemble_weighted_mass,
    build_pattern,
    build_reduction,
)
from spfem.config import resolve
from spfem.diagnostics import mass
from spfem.fespace import FeSpace, Field, eval_at_points, interpolate
from spfem.linsolve import solve_complex
from spfem.mesh import RectDomain, build_mesh
from spfem.scheme import (
    Operators,
    SchemeState,
    full_problem,
    init,
    poisson_update,
    step,
)


@st.composite
def domains(draw):
    xmin = draw(st.floats(-4, 4))
    ymin = draw(st.floats(-4, 4))
    w = draw(st.floats(0.5, 8))
    h = draw(st.floats(0.5, 8))
    return RectDomain(xmin, xmin + w, ymin, ymin + h)


@st.composite
def spaces(draw, max_nc=5):
    dom = draw(domains())
    ncx = draw(st.integers(1, max_nc))
    ncy = draw(st.integers(1, max_nc))
    k = draw(st.sampled_from([1, 2]))
    return FeSpace(build_mesh(dom, ncx, ncy), k)


def points_in(dom, data, max_size=8):
    pts = data.draw(
        st.lists(
            st.tuples(st.floats(dom.xmin, dom.xmax), st.floats(dom.ymin, dom.ymax)),
            min_size=1,
            max_size=max_size,
        )
    )
    return np.array(pts)


@settings(deadline=None, max_examples=40)
@given(spaces(), st.data())
def test_basis_is_a_partition_of_unity(space, data):
    ones = Field(space, np.ones(space.ndof))
    vals = eval_at_points(ones, points_in(space.mesh.domain, data))
    assert np.abs(vals - 1.0).max() <= 1e-12


@settings(deadline=None, max_examples=30)
@given(spaces(max_nc=4), st.data())
def test_interpolation_reproduces_tensor_polynomials(space, data):
    k = space.k
    coeffs = data.draw(
        st.lists(st.floats(-2, 2), min_size=(k + 1) ** 2, max_size=(k + 1) ** 2)
    )
    C = np.array(coeffs).reshape(k + 1, k + 1)

    def poly(X, Y):
        return sum(
            C[i, j] * X**i * Y**j for i in range(k + 1) for j in range(k + 1)
        )

    f = interpolate(space, poly)
    pts = points_in(space.mesh.domain, data, max_size=6)
    vals = eval_at_points(f, pts)
    exact = poly(pts[:, 0], pts[:, 1])
    scale = 1.0 + np.abs(exact).max() + np.abs(f.values).max()
    assert np.abs(vals - exact).max() <= 1e-11 * scale


@settings(deadline=None, max_examples=40)
@given(spaces(), st.integers(0, 2**31 - 1))
def test_mass_positive_stiffness_nonnegative(space, seed):
    rng = np.random.default_rng(seed)
    M = assemble_mass(space)
    K = assemble_stiffness(space)
    x = rng.standard_normal(space.ndof)
    assert x @ (M @ x) > 0
    assert x @ (K @ x) >= -1e-13 * np.abs(K.data).max() * (x @ x)
    for A in (M, K):
        D = (A - A.T).tocsr()
        asym = np.abs(D.data).max() if D.nnz else 0.0
        assert asym <= 1e-15 * np.abs(A.data).max()
    # constants carry no gradient energy
    kernel = np.abs(K @ np.ones(space.ndof)).max()
    assert kernel <= 1e-12 * np.abs(K.data).max() * space.n_loc


@settings(deadline=None, max_examples=40)
@given(spaces(), st.integers(0, 2**31 - 1))
def test_boundary_reduction_roundtrip(space, seed):
    rng = np.random.default_rng(seed)
    red = build_reduction(build_pattern(space), space.boundary_mask)
    v = rng.standard_normal(red.n_reduced) + 1j * rng.standard_normal(red.n_reduced)
    lifted = red.lift(v)
    assert lifted.shape == (space.ndof,)
    assert np.all(lifted[space.boundary_mask] == 0)
    assert np.array_equal(red.reduce_vec(lifted), v)


@settings(deadline=None, max_examples=15)
@given(st.integers(0, 2**31 - 1), st.sampled_from([1, 2]))
def test_wave_solve_meets_residual_bound(seed, k):
    rng = np.random.default_rng(seed)
    spec = full_problem("V1")
    space = FeSpace(build_mesh(spec.domain, 6, 6), k)
    ops = Operators(space)
    tau = float(10.0 ** rng.uniform(-3, -1))
    wvals = rng.uniform(-3.0, 3.0, size=space.ndof)
    Wd = assemble_weighted_mass(
        space, Field(space, wvals), ops.rule, ops.pattern
    ).data
    data = (1j / tau) * ops.M.data - 0.5 * (spec.alpha * ops.K.data + Wd)
    A = ops.reduced_csr(ops.reduction.reduce_data(data))
    n = A.shape[0]
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x, _report = solve_complex(A, b)
    assert np.linalg.norm(b - A @ x) <= 1e-12 * np.linalg.norm(b)


@settings(deadline=None, max_examples=10)
@given(
    st.sampled_from([None, "V1"]),
    st.sampled_from([0.02, 0.01]),
    st.integers(1, 3),
)
def test_zero_state_is_a_fixed_point(potname, tau, n_steps):
    spec = full_problem("V2") if potname is None else full_problem(potname)
    spec = dataclasses.replace(spec, u0=lambda X, Y: np.zeros_like(X, dtype=complex))
    space = FeSpace(build_mesh(spec.domain, 4, 4), 1)
    ops = Operators(space)
    state = init(spec, space, ops)
    for _ in range(n_steps):
        state, _ = step(state, spec, tau, ops)
    assert np.all(state.u.values == 0)
    assert np.all(state.psi.values == 0)


@settings(deadline=None, max_examples=8)
@given(st.floats(0.0, 2 * np.pi), st.sampled_from(["V0", "V1"]))
def test_global_phase_commutes_with_stepping(theta, potname):
    spec = full_problem(potname)
    rot = dataclasses.replace(
        spec, u0=lambda X, Y: np.exp(1j * theta) * spec.u0(X, Y)
    )
    space = FeSpace(build_mesh(spec.domain, 4, 4), 1)
    ops = Operators(space)
    s_a = init(spec, space, ops)
    s_b = init(rot, space, ops)
    for _ in range(2):
        s_a, _ = step(s_a, spec, 0.02, ops)
        s_b, _ = step(s_b, rot, 0.02, ops)
    gap = np.abs(s_b.u.values - np.exp(1j * theta) * s_a.u.values).max()
    assert gap <= 1e-13


@settings(deadline=None, max_examples=10)
@given(st.integers(0, 2**31 - 1), st.sampled_from([1, 2]))
def test_mass_invariant_for_arbitrary_interior_data(seed, k):
    rng = np.random.default_rng(seed)
    spec = full_problem("V1")
    space = FeSpace(build_mesh(spec.domain, 4, 4), k)
    ops = Operators(space)
    uvals = rng.standard_normal(space.ndof) + 1j * rng.standard_normal(space.ndof)
    uvals[space.boundary_mask] = 0
    psi = Field(space, np.abs(uvals) ** 2)
    phi, _ = poisson_update(psi, spec, ops)
    state = SchemeState(0, 0.0, Field(space, uvals), psi, phi)
    m0 = mass(state.u, ops.M)
    tau = 0.01
    for _ in range(3):
        state, _ = step(state, spec, tau, ops)
    assert state.t == 3 * tau
    assert abs(mass(state.u, ops.M) - m0) <= 1e-11 * max(m0, 1.0)


@settings(deadline=None, max_examples=6)
@given(st.integers(0, 2**31 - 1))
def test_stepping_is_deterministic(seed):
    rng = np.random.default_rng(seed)
    spec = full_problem("V1")
    space = FeSpace(build_mesh(spec.domain, 4, 4), 1)
    uvals = rng.standard_normal(space.ndof) + 1j * rng.standard_normal(space.ndof)
    uvals[space.boundary_mask] = 0
    finals = []
    for _ in range(2):
        ops = Operators(space)
        psi = Field(space, np.abs(uvals) ** 2)
        phi, _ = poisson_update(psi, spec, ops)
        state = SchemeState(0, 0.0, Field(space, uvals.copy()), psi, phi)
        for _ in range(2):
            state, _ = step(state, spec, 0.02, ops)
        finals.append(state.u.values)
    assert np.array_equal(finals[0], finals[1])


@settings(deadline=None, max_examples=25)
@given(
    st.sampled_from(["sp_full", "sp_constcoef"]),
    st.sampled_from([None, "V0", "V1", "V2"]),
    st.integers(1, 4),
    st.sampled_from([0.25, 0.125, 0.0625]),
    st.integers(2, 6),
    st.sampled_from([1, 2]),
    st.sampled_from(["relaxation", "iterative"]),
)
def test_resolved_echo_is_a_fixpoint(preset, potential, n_steps, tau, nc, k, scheme):
    if preset == "sp_constcoef" and potential not in (None, "V0"):
        potential = None
    problem = {"preset": preset}
    if potential is not None:
        problem["potential"] = potential
    raw = {
        "problem": problem,
        "mesh": {"nc": nc},
        "fem": {"k": k},
        "time": {"tau": tau, "T": tau * n_steps},
        "scheme": scheme,
    }
    setup = resolve(raw)
    again = resolve(json.loads(json.dumps(setup.echo)))
    assert again.echo == setup.echo
