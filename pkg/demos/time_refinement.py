"""Estimate the temporal order of the stepper by self-refinement.

No closed-form solution exists for the coupled system, so each run is
compared against a rerun with tau halved on the same mesh. Halving tau
again then turns the error pairs into observed orders; the scheme is
second order, so the column should hover near 2.
"""

from spfem.diagnostics import convergence_orders, two_level_error_time
from spfem.fespace import FeSpace
from spfem.mesh import build_mesh
from spfem.scheme import Operators, full_problem, run


def main():
    spec = full_problem("V2")
    space = FeSpace(build_mesh(spec.domain, 16, 16), 2)
    ops = Operators(space)
    T = 0.1
    taus = [0.02, 0.01, 0.005]

    finals = [run(spec, space, tau, T, ops=ops).u for tau in taus + [taus[-1] / 2]]
    errors = [two_level_error_time(a, b, ops.M) for a, b in zip(finals, finals[1:])]
    orders = convergence_orders(errors)

    print(f"{'tau':>8} {'two-level error':>16} {'order':>7}")
    for i, (tau, err) in enumerate(zip(taus, errors)):
        order = "" if i == 0 else f"{orders[i - 1]:7.3f}"
        print(f"{tau:8g} {err:16.6e} {order:>7}")


if __name__ == "__main__":
    main()
