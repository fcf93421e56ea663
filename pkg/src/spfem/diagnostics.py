"""Observables: discrete mass, staggered modified energy, original-energy
approximation, relative-change traces, two-level error norms, and
convergence orders.

The modified energy pairs half-level fields,

    E^n = alpha*A0(u^n,u^n) + beta/(2 mu) * A1(Phi^{n+1/2}, Phi^{n-1/2})
        + Int V |u^n|^2 + gamma/2 * (Psi^{n+1/2}, Psi^{n-1/2}),

and is exactly what the relaxation stepper conserves; the potential term is
evaluated with the assembly quadrature so the reported number matches the
discrete algebra term for term. The original-energy approximation replaces
the staggered pairs with squares of time averages and a quartic |u|^4
integral on its own higher-order rule; it is conserved only approximately
and its drift is a property of the scheme, not a bug.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .fespace import Field, eval_field_at_quad, eval_on_refined
from .scheme import Operators, ProblemSpec, SchemeState


def mass(u: Field | np.ndarray, M) -> float:
    """Discrete mass Int |u_h|^2 = Re(u^H M u); imaginary residue is checked."""
    v = u.values if isinstance(u, Field) else np.asarray(u)
    z = np.vdot(v, M @ v)
    if abs(z.imag) > 1e-13 * max(abs(z.real), 1.0):
        raise ConfigurationError(f"mass has non-negligible imaginary residue {z.imag!r}")
    return float(z.real)


def _potential_integral(u: Field, spec: ProblemSpec, ops: Operators) -> float:
    """Int V |u_h|^2 with the assembly rule, matching the weighted-mass algebra."""
    if spec.potential is None:
        return 0.0
    V_quad = ops.potential_quad(spec.potential)
    u_quad = eval_field_at_quad(u, ops.rule)
    w = ops.rule.weights * ops.space.det_jacobian
    return float(((np.abs(u_quad) ** 2 * V_quad) @ w).sum())


def _k_pair(ops: Operators, a: Field, b: Field) -> float:
    return float(a.values @ (ops.K @ b.values))


def modified_energy(
    u: Field,
    psi_prev: Field,
    psi_next: Field,
    phi_prev: Field,
    phi_next: Field,
    ops: Operators,
    spec: ProblemSpec,
) -> float:
    """Staggered conserved energy at the level of u, pairing half levels."""
    grad = np.vdot(u.values, ops.K @ u.values)
    if abs(grad.imag) > 1e-12 * max(abs(grad.real), 1.0):
        raise ConfigurationError(f"gradient energy has imaginary residue {grad.imag!r}")
    e = spec.alpha * grad.real
    e += spec.beta / (2.0 * spec.mu) * _k_pair(ops, phi_next, phi_prev)
    e += _potential_integral(u, spec, ops)
    e += 0.5 * spec.gamma * float(psi_next.values @ (ops.M @ psi_prev.values))
    return float(e)


def original_energy(u: Field, phi_prev: Field, phi_next: Field, ops: Operators, spec: ProblemSpec) -> float:
    """Direct approximation of the continuous energy at level n.

    Uses the time-averaged potential (Phi^{n+1/2}+Phi^{n-1/2})/2 and the
    dedicated quartic quadrature for Int |u_h|^4.
    """
    grad = np.vdot(u.values, ops.K @ u.values)
    e = spec.alpha * grad.real
    phi_bar = Field(u.space, 0.5 * (phi_next.values + phi_prev.values))
    e += spec.beta / (2.0 * spec.mu) * _k_pair(ops, phi_bar, phi_bar)
    e += _potential_integral(u, spec, ops)
    if spec.gamma:
        u4 = np.abs(eval_field_at_quad(u, ops.quartic_rule)) ** 4
        w = ops.quartic_rule.weights * ops.space.det_jacobian
        e += 0.5 * spec.gamma * float((u4 @ w).sum())
    return float(e)


def relative_change(value: float, reference: float) -> tuple[float, bool]:
    """Nonnegative relative change |v - ref|/|ref|; falls back to the absolute
    change (flagged True) when the reference is numerically zero."""
    if abs(reference) < 1e-14:
        return abs(value - reference), True
    return abs(value - reference) / abs(reference), False


def two_level_error_time(u_a: Field, u_b: Field, M) -> float:
    """M-weighted L2 norm of the coefficient difference of two same-space runs."""
    if u_a.space is not u_b.space and u_a.space.ndof != u_b.space.ndof:
        raise ConfigurationError("two_level_error_time needs runs on one space")
    d = u_a.values - u_b.values
    return float(np.sqrt(abs(np.real(np.vdot(d, M @ d)))))


def two_level_error_space(coarse: Field, fine: Field, ops_fine: Operators) -> float:
    """L2 norm of (coarse - fine) over the fine mesh's quadrature points.

    Requires fine = refined coarse with the same degree; coarse evaluation is
    exact by nestedness.
    """
    rule = ops_fine.rule
    cv = eval_on_refined(coarse, fine.space, rule)
    fv = eval_field_at_quad(fine, rule)
    w = rule.weights * fine.space.det_jacobian
    return float(np.sqrt(((np.abs(cv - fv) ** 2) @ w).sum()))


def convergence_orders(errors) -> list[float]:
    """order_i = log2(e_i / e_{i+1}) for a factor-2 refinement sequence."""
    errors = list(errors)
    if len(errors) < 2:
        raise ConfigurationError("need at least two errors to compute an order")
    if any(e <= 0 for e in errors):
        raise ConfigurationError(f"orders undefined for non-positive errors: {errors}")
    return [float(np.log2(errors[i] / errors[i + 1])) for i in range(len(errors) - 1)]


@dataclass
class DiagnosticsRecord:
    n: int
    t: float
    mass: float
    mass_change: float
    energy_mod: float
    energy_mod_change: float
    energy_orig: float
    energy_orig_change: float
    wall_ms: float
    abs_change_fallback: bool = False

    CSV_HEADER = "n,t,mass,mass_change,energy_mod,energy_mod_change,energy_orig,energy_orig_change,wall_ms"


@dataclass
class ConvergenceRow:
    level: float
    error: float
    order: float | None  # None on the first row


class Recorder:
    """Observer assembling one DiagnosticsRecord per time level.

    Mass lands on the record at step completion; the staggered energy for
    level n arrives mid-step (or from the driver's trailing half-solve for the
    final level). Records are complete once the run's driver has finished.
    """

    def __init__(self, spec: ProblemSpec, ops: Operators):
        self.spec = spec
        self.ops = ops
        self.records: list[DiagnosticsRecord] = []
        self._mass0 = None
        self._emod0 = None
        self._eorig0 = None

    def _new_record(self, n: int, t: float) -> DiagnosticsRecord:
        return DiagnosticsRecord(n, t, np.nan, np.nan, np.nan, np.nan, np.nan, np.nan, 0.0)

    def _record_for(self, n: int, t: float) -> DiagnosticsRecord:
        while len(self.records) <= n:
            self.records.append(self._new_record(len(self.records), t if len(self.records) == n else np.nan))
        rec = self.records[n]
        rec.t = t
        return rec

    def _set_mass(self, rec: DiagnosticsRecord, state: SchemeState):
        rec.mass = mass(state.u, self.ops.M)
        if self._mass0 is None:
            self._mass0 = rec.mass
        rec.mass_change, flagged = relative_change(rec.mass, self._mass0)
        rec.abs_change_fallback = rec.abs_change_fallback or flagged

    def on_init(self, state: SchemeState, ops: Operators):
        rec = self._record_for(0, 0.0)
        rec.wall_ms = 0.0
        self._set_mass(rec, state)

    def on_energy(self, state: SchemeState, psi_next: Field, phi_next: Field):
        rec = self._record_for(state.n, state.t)
        rec.energy_mod = modified_energy(
            state.u, state.psi, psi_next, state.phi, phi_next, self.ops, self.spec
        )
        rec.energy_orig = original_energy(state.u, state.phi, phi_next, self.ops, self.spec)
        if self._emod0 is None:
            self._emod0 = rec.energy_mod
            self._eorig0 = rec.energy_orig
        rec.energy_mod_change, f1 = relative_change(rec.energy_mod, self._emod0)
        rec.energy_orig_change, f2 = relative_change(rec.energy_orig, self._eorig0)
        rec.abs_change_fallback = rec.abs_change_fallback or f1 or f2

    def on_step(self, state: SchemeState, artifacts, wall_ms: float):
        rec = self._record_for(state.n, state.t)
        rec.wall_ms = wall_ms
        self._set_mass(rec, state)

    @property
    def max_mass_change(self) -> float:
        return max(r.mass_change for r in self.records)

    @property
    def max_energy_mod_change(self) -> float:
        return max(r.energy_mod_change for r in self.records)

    @property
    def max_energy_orig_change(self) -> float:
        return max(r.energy_orig_change for r in self.records)


class MassOnlyRecorder(Recorder):
    """Recorder for the fixed-point baseline: mass and wall time only, the
    staggered energies stay NaN (the baseline has no half-level fields)."""

    def on_step(self, state: SchemeState, stats, wall_ms: float):
        rec = self._record_for(state.n, state.t)
        rec.wall_ms = wall_ms
        self._set_mass(rec, state)

    @property
    def max_energy_mod_change(self) -> float:  # pragma: no cover - guard
        raise ConfigurationError("baseline runs do not define the staggered energy")
