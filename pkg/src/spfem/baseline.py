"""Fixed-point Crank-Nicolson baseline.

Both nonlinearities are treated implicitly at the time midpoint, so each step
runs an inner iteration: freeze the midpoint density |(u^(s)+u^n)/2|^2,
L2-project it, resolve the Poisson potential, rebuild the weighted-mass
matrix, and solve the linear Crank-Nicolson system for the next iterate.
Termination is either a fixed iteration count or an M-weighted tolerance on
the iterate difference; exhausting the cap raises, it is never silently
accepted. Used for accuracy cross-checks and wall-time comparisons against
the relaxation stepper.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NonConvergence
from .fespace import Field, FeSpace, eval_field_at_quad
from .linsolve import SolveReport, SolverConfig
from .scheme import Operators, ProblemSpec, SchemeState, _notify, steps_for
from .fespace import interpolate, zero_boundary


@dataclass(frozen=True)
class IterationPolicy:
    """fixed_steps runs exactly s inner iterations; tolerance iterates until
    the M-weighted iterate difference drops below tol or the cap trips."""

    mode: str = "fixed_steps"  # or "tolerance"
    fixed_steps: int = 2
    tol: float = 1e-6
    max_iter: int = 100

    def __post_init__(self):
        if self.mode not in ("fixed_steps", "tolerance"):
            raise ConfigurationError(f"unknown iteration mode '{self.mode}'")
        if self.mode == "fixed_steps" and self.fixed_steps < 1:
            raise ConfigurationError("fixed_steps must be at least 1")
        if self.mode == "tolerance" and not (self.tol > 0 and self.max_iter >= 1):
            raise ConfigurationError("tolerance mode needs tol > 0 and max_iter >= 1")


@dataclass
class IterationStats:
    iterations_per_step: list[int] = field(default_factory=list)
    inner_solves: int = 0
    wall_ms: float = 0.0
    last_phi: Field | None = None
    last_rho: Field | None = None

    def record(self, count: int):
        self.iterations_per_step.append(count)
        self.inner_solves += count


def _m_norm(ops: Operators, v: np.ndarray) -> float:
    return float(np.sqrt(abs(np.real(np.conj(v) @ (ops.M_int @ v)))))


def _inner_solve(u_bar_int, u_n_int, spec, tau, ops):
    """One frozen-coefficient Crank-Nicolson solve around the midpoint iterate."""
    red = ops.reduction
    u_bar = ops.lift(u_bar_int)
    rho_quad = np.abs(eval_field_at_quad(u_bar, ops.rule)) ** 2
    # L2-projection of the density keeps the Poisson load variational
    rho_int, _ = ops.mass_solver.solve(ops.density_load_interior(rho_quad))
    rho_tilde = ops.lift(rho_int)
    rho_tilde_quad = eval_field_at_quad(rho_tilde, ops.rule)
    phi_int, _ = ops.poisson_solver.solve(
        spec.mu * ops.density_load_interior(rho_tilde_quad - spec.c)
    )
    phi = ops.lift(phi_int)

    from .assembly import weighted_mass_data

    w_quad = (
        spec.beta * eval_field_at_quad(phi, ops.rule)
        + ops.potential_quad(spec.potential)
        + spec.gamma * rho_tilde_quad
    )
    W_int_data = red.reduce_data(weighted_mass_data(ops.space, w_quad, ops.rule, ops.pattern))
    H_data = spec.alpha * ops.K_int_data + W_int_data
    ops.wave_solver.update_values((1j / tau) * ops.M_int_data - 0.5 * H_data)
    rhs = (1j / tau) * (ops.M_int @ u_n_int) + 0.5 * (ops.reduced_csr(H_data) @ u_n_int)
    u_next_int, report = ops.wave_solver.solve(rhs)
    return u_next_int, phi, rho_tilde, report


def step_iterative(
    u_n: Field,
    spec: ProblemSpec,
    tau: float,
    policy: IterationPolicy,
    ops: Operators,
    stats: IterationStats | None = None,
):
    """Advance u^n by one fixed-point Crank-Nicolson step.

    Returns (u_next, stats); stats accumulates when passed in. The converged
    midpoint potential and projected density of the last inner iterate are
    kept on the stats object for diagnostics.
    """
    if tau <= 0:
        raise ConfigurationError(f"tau must be positive, got {tau}")
    stats = stats if stats is not None else IterationStats()
    t0 = time.perf_counter()
    red = ops.reduction
    u_n_int = red.reduce_vec(u_n.values)

    u_s = u_n_int
    count = 0
    while True:
        u_bar = 0.5 * (u_s + u_n_int)
        u_next, phi, rho_tilde, _ = _inner_solve(u_bar, u_n_int, spec, tau, ops)
        count += 1
        if policy.mode == "fixed_steps":
            u_s = u_next
            if count >= policy.fixed_steps:
                break
        else:
            gap = _m_norm(ops, u_next - u_s)
            u_s = u_next
            if gap <= policy.tol:
                break
            if count >= policy.max_iter:
                stats.record(count)
                stats.wall_ms += (time.perf_counter() - t0) * 1e3
                raise NonConvergence(
                    f"fixed-point iteration hit max_iter={policy.max_iter} "
                    f"with gap {gap:.3e} above tol {policy.tol:.3e}",
                    stats,
                )

    stats.record(count)
    stats.wall_ms += (time.perf_counter() - t0) * 1e3
    stats.last_phi = phi
    stats.last_rho = rho_tilde
    return ops.lift(u_s), stats


def run_iterative(
    spec: ProblemSpec,
    space: FeSpace,
    tau: float,
    T: float,
    policy: IterationPolicy | None = None,
    observers=(),
    cfg: SolverConfig | None = None,
    ops: Operators | None = None,
):
    """Drive the baseline over N = T/tau steps.

    Observers get on_init(state, ops) and on_step(state, stats, wall_ms); the
    staggered-energy callback does not apply here. Returns (final state,
    IterationStats).
    """
    N = steps_for(T, tau)
    policy = policy or IterationPolicy()
    ops = ops or Operators(space, cfg)
    u = zero_boundary(interpolate(space, spec.u0, kind="complex"))
    state = SchemeState(0, 0.0, u, None, None)
    stats = IterationStats()
    _notify(observers, "on_init", state, ops)
    for n in range(N):
        t0 = time.perf_counter()
        u, stats = step_iterative(u, spec, tau, policy, ops, stats)
        wall_ms = (time.perf_counter() - t0) * 1e3
        state = SchemeState(n + 1, (n + 1) * tau, u, None, None)
        _notify(observers, "on_step", state, stats, wall_ms)
    return state, stats
