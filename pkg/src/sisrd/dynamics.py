"""Time integration of the epidemic system by an IMEX splitting.

Each step treats diffusion and the linear sinks implicitly and the
transfer terms explicitly.  With ``F = beta (S^n)^q (I^n)^p``:

    (1/dt + 1) S' - d_S Lap(S') = S^n/dt + recruitment - F + gamma I^n
    (1/dt) I' - d_I Lap(I') + eta I' = I^n/dt + F - gamma I^n

Both updates are symmetric positive definite solves.  Because the
transfer terms ``-F + gamma I`` and ``+F - gamma I`` appear explicitly
with opposite signs, they cancel exactly in the discrete total-mass
balance; integrating the two updates gives

    d/dt Int(S + I) = Int(recruitment) - Int(S') - Int(eta I')

up to solver roundoff, which each accepted step verifies to 1e-10
relative.  A step that produces a nonpositive susceptible value or a
negative infected value is rejected, and the adaptive driver halves dt
(growing it again by 1.1x after acceptances, capped at ``dt_max``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .coefficients import CoefficientSet
from .grid import ScalarField, integrate, shifted_operator
from .solvers import spd_solve

__all__ = [
    "MASS_BALANCE_RTOL",
    "SimState",
    "StepStats",
    "StepRejected",
    "TimeStepUnderflowError",
    "RunSummary",
    "step_imex",
    "run",
]

MASS_BALANCE_RTOL = 1e-10


class StepRejected(RuntimeError):
    """A candidate step violated positivity; the caller should shrink dt."""

    def __init__(self, min_S: float, min_I: float):
        super().__init__(f"step rejected: min S = {min_S:.3e}, min I = {min_I:.3e}")
        self.min_S = min_S
        self.min_I = min_I


class TimeStepUnderflowError(RuntimeError):
    """dt fell below its floor while the step kept being rejected."""


@dataclass(frozen=True)
class SimState:
    """Fields of the system at one instant; S > 0 and I >= 0 nodewise."""

    S: ScalarField
    I: ScalarField
    t: float = 0.0

    def __post_init__(self):
        if self.S.domain is not self.I.domain:
            raise ValueError("S and I must live on the same domain")

    @property
    def domain(self):
        return self.S.domain


@dataclass(frozen=True)
class StepStats:
    dt: float
    mass_defect: float  # relative defect of the discrete mass balance
    min_S: float
    min_I: float
    rejected: int = 0  # halvings needed before this step was accepted


@dataclass
class RunSummary:
    steps: int = 0
    rejected: int = 0
    converged_steady: bool = False
    reason: str = ""
    final_dt: float = 0.0
    times: list = field(default_factory=list)
    total_mass: list = field(default_factory=list)
    min_S: list = field(default_factory=list)
    max_S: list = field(default_factory=list)
    min_I: list = field(default_factory=list)
    max_I: list = field(default_factory=list)


def step_imex(
    state: SimState, c: CoefficientSet, dt: float, solver_tol: float = 1e-12
) -> tuple[SimState, StepStats]:
    """Advance one IMEX step; raises :class:`StepRejected` on lost positivity."""
    dom = state.domain
    if dom is not c.domain:
        raise ValueError("state and coefficients live on different domains")
    w = dom.cell_measures
    S = state.S.values
    I = state.I.values
    transfer = c.beta.values * S**c.q * I**c.p

    A_S = shifted_operator(dom, 1.0 / dt + 1.0, c.d_S)
    rhs_S = S / dt + c.recruitment.values - transfer + c.gamma.values * I
    S_new, _ = spd_solve(A_S, w * rhs_S, tol=solver_tol, x0=S)

    A_I = shifted_operator(dom, 1.0 / dt + c.eta.values, c.d_I)
    rhs_I = I / dt + transfer - c.gamma.values * I
    I_new, _ = spd_solve(A_I, w * rhs_I, tol=solver_tol, x0=I)

    min_S = float(S_new.min())
    min_I = float(I_new.min())
    if min_S <= 0.0 or min_I < 0.0:
        raise StepRejected(min_S, min_I)
    if c.p < 1.0 and min_I <= 0.0 and I.min() > 0.0:
        # strict positivity of I is part of the state contract when p < 1
        raise StepRejected(min_S, min_I)

    lhs = (float(np.dot(w, S_new - S)) + float(np.dot(w, I_new - I))) / dt
    rhs = float(np.dot(w, c.recruitment.values - S_new - c.eta.values * I_new))
    source = float(np.dot(w, c.recruitment.values))
    defect = abs(lhs - rhs) / source
    new_state = SimState(dom.field(S_new), dom.field(I_new), state.t + dt)
    return new_state, StepStats(dt, defect, min_S, min_I)


def run(
    state: SimState,
    c: CoefficientSet,
    *,
    t_final: Optional[float] = None,
    steady_tol: Optional[float] = None,
    dt_init: float = 0.01,
    dt_max: float = 0.1,
    dt_min: float = 1e-9,
    growth: float = 1.1,
    max_steps: int = 2_000_000,
    snapshot_every: int = 0,
    snapshot_writer: Optional[Callable[[SimState, int], None]] = None,
) -> tuple[SimState, RunSummary]:
    """Advance until ``t_final`` and/or a steady state is reached.

    The steady test is ``max(|dS|, |dI|)_inf / dt < steady_tol`` over one
    accepted step.  At least one stopping rule must be given.  Repeatedly
    rejected steps shrink dt; if dt falls below ``dt_min`` the run aborts
    with :class:`TimeStepUnderflowError`.
    """
    if t_final is None and steady_tol is None:
        raise ValueError("need t_final, steady_tol, or both")
    summary = RunSummary()
    dt = min(dt_init, dt_max)
    while True:
        if t_final is not None and state.t >= t_final - 1e-14:
            summary.reason = summary.reason or "t_final"
            break
        if summary.steps >= max_steps:
            summary.reason = "max_steps"
            break
        step_dt = dt
        if t_final is not None:
            step_dt = min(step_dt, t_final - state.t)
        rejected = 0
        while True:
            try:
                new_state, stats = step_imex(state, c, step_dt)
                break
            except StepRejected:
                rejected += 1
                step_dt *= 0.5
                if step_dt < dt_min:
                    raise TimeStepUnderflowError(
                        f"dt underflow at t = {state.t:.6g} after {rejected} halvings"
                    ) from None
        if stats.mass_defect > MASS_BALANCE_RTOL:
            raise RuntimeError(
                f"mass-balance defect {stats.mass_defect:.3e} exceeds "
                f"{MASS_BALANCE_RTOL:.1e} at t = {state.t:.6g}"
            )
        summary.rejected += rejected
        summary.steps += 1
        delta = max(
            float(np.max(np.abs(new_state.S.values - state.S.values))),
            float(np.max(np.abs(new_state.I.values - state.I.values))),
        )
        state = new_state
        summary.times.append(state.t)
        summary.total_mass.append(integrate(state.domain, state.S.values + state.I.values))
        summary.min_S.append(stats.min_S)
        summary.max_S.append(float(state.S.values.max()))
        summary.min_I.append(stats.min_I)
        summary.max_I.append(float(state.I.values.max()))
        if snapshot_every and snapshot_writer and summary.steps % snapshot_every == 0:
            snapshot_writer(state, summary.steps)
        dt = min(step_dt * growth, dt_max) if rejected == 0 else step_dt
        if steady_tol is not None and delta / stats.dt < steady_tol:
            summary.converged_steady = True
            summary.reason = "steady"
            break
    summary.final_dt = dt
    return state, summary
