"""Estimate the spatial order for both element degrees.

Doubling the mesh while keeping tau small enough that the O(tau^2) error
stays buried shows the element degree directly: degree-1 elements converge
at order 2 in the mesh size, degree-2 elements at order 3. Errors between
levels are measured by evaluating the coarse solution on the finer mesh.
"""

from spfem.diagnostics import convergence_orders, two_level_error_space
from spfem.fespace import FeSpace
from spfem.mesh import build_mesh
from spfem.scheme import Operators, full_problem, run


def main():
    spec = full_problem("V2")
    T, tau = 0.05, 2e-3
    ncs = [8, 16, 32]

    for k in (1, 2):
        prev = None
        errors = []
        for nc in ncs + [2 * ncs[-1]]:
            space = FeSpace(build_mesh(spec.domain, nc, nc), k)
            ops = Operators(space)
            state = run(spec, space, tau, T, ops=ops)
            if prev is not None:
                errors.append(two_level_error_space(prev, state.u, ops))
            prev = state.u
        orders = convergence_orders(errors)

        print(f"degree k={k}")
        print(f"{'cells/side':>11} {'two-level error':>16} {'order':>7}")
        for i, (nc, err) in enumerate(zip(ncs, errors)):
            order = "" if i == 0 else f"{orders[i - 1]:7.3f}"
            print(f"{nc:11d} {err:16.6e} {order:>7}")
        print()


if __name__ == "__main__":
    main()
