"""Small-diffusion limit profiles, bracketing sequences, and bound audits.

As the diffusion rates shrink, endemic equilibria approach profiles that
can be computed without solving the full coupled system.  With
``h = (gamma+eta)/beta`` and the pointwise ceiling ``h^(1/q)``:

* ``d_I -> 0``, p = 1: infection persists for small ``d_I`` only if the
  disease-free profile exceeds the ceiling somewhere; on
  ``{S~ < h^(1/q)}`` the infected density vanishes, and the infected mass
  concentrates where the susceptible profile touches the ceiling
  (:func:`classify_small_di`).
* ``d_I -> 0``, p < 1: the susceptible limit solves the scalar problem
  ``d_S Lap(S) + recruitment - S - eta (S^q/h)^(1/(1-p)) = 0`` and the
  infected limit is the slaved field ``(S^q/h)^(1/(1-p))``
  (:func:`limit_small_di`).
* ``d_S -> 0``: the susceptible equation degenerates to the pointwise
  algebraic balance ``recruitment - S - beta S^q I^p + gamma I = 0``,
  leaving a single reaction-diffusion equation for I
  (:func:`limit_small_ds`).
* joint limit at fixed ratio ``sigma = d_I/d_S``: closed forms for p = 1
  when ``sigma >= max(eta)`` (envelope bounds otherwise), and for p < 1 a
  per-node scalar equation ``recruitment = eta t + h^(1/q) t^((1-p)/q)``
  (:func:`limit_joint_p1`, :func:`limit_joint_sublinear`).  The joint
  limits are also bracketed from below and above by explicit monotone
  iterations (:func:`monotone_joint_p1`, :func:`monotone_joint_sublinear`).

Every pointwise scalar equation is solved by bisection on a monotone map
with a verified sign change, so each returned root is its own certificate.
:func:`bounds_audit` checks a computed equilibrium against the a-priori
interior-extremum bounds (susceptible range for p = 1; infected range,
diffusion-weighted caps, and the positive floor root ``c0`` for p < 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .coefficients import CoefficientSet
from .equilibrium import EquilibriumResult, grid_tolerance, solve_dfe
from .grid import (
    DiscreteDomain,
    ScalarField,
    assemble_neumann_laplacian,
    shifted_operator,
)
from .solvers import NonConvergenceError, spd_solve

__all__ = [
    "LimitProfile",
    "MonotoneSequence",
    "BoundsReport",
    "bisect_increasing",
    "classify_small_di",
    "limit_small_di",
    "limit_small_ds",
    "eliminate_susceptible",
    "limit_joint_p1",
    "limit_joint_sublinear",
    "monotone_joint_p1",
    "monotone_joint_sublinear",
    "susceptible_floor_constant",
    "bounds_audit",
]


@dataclass(frozen=True)
class LimitProfile:
    """Predicted small-diffusion profile (or classification) for one regime."""

    regime: str  # "small_d_I" | "small_d_S" | "joint"
    S_limit: Optional[ScalarField]
    I_limit: Optional[ScalarField]
    masks: dict = dc_field(default_factory=dict)  # name -> boolean node mask
    envelopes: dict = dc_field(default_factory=dict)  # name -> ScalarField bound
    sigma: Optional[float] = None
    meta: dict = dc_field(default_factory=dict)


@dataclass(frozen=True)
class MonotoneSequence:
    """A bracketing iteration together with its independently computed limit."""

    direction: str  # "increasing" | "decreasing"
    u_iterates: list  # early iterates only (up to a storage cap)
    v_iterates: list
    final_u: np.ndarray
    final_v: np.ndarray
    u_limit: np.ndarray
    v_limit: np.ndarray
    sup_gaps: list  # sup-norm distance to the limit, one entry per iterate
    n_iterations: int
    converged: bool


@dataclass(frozen=True)
class BoundsReport:
    checks: list  # dicts: name, kind, bound, observed, margin, passed
    all_passed: bool
    tolerance: float
    c0: Optional[float] = None

    def failed(self) -> list:
        return [c for c in self.checks if not c["passed"]]


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------


def bisect_increasing(
    f: Callable[[np.ndarray], np.ndarray],
    lo,
    hi,
    iterations: int = 100,
) -> np.ndarray:
    """Vectorized bisection for a nondecreasing map with a sign change.

    ``f(lo) <= 0 <= f(hi)`` is verified up front; 100 halvings put the
    bracket width at the rounding floor for every practical scale.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float)).copy()
    hi = np.atleast_1d(np.asarray(hi, dtype=float)).copy()
    f_lo = f(lo)
    f_hi = f(hi)
    if np.any(f_lo > 0.0) or np.any(f_hi < 0.0):
        raise ValueError("bisection bracket does not straddle a sign change")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = f(mid) <= 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Scalar semilinear marcher (shared by the one-field limit problems)
# ---------------------------------------------------------------------------


def _march_semilinear(
    dom: DiscreteDomain,
    *,
    diffusion: float,
    linear_rate,
    source: Callable[[np.ndarray], np.ndarray],
    u0: np.ndarray,
    steady_tol: float = 1e-10,
    t_max: float = 4000.0,
    dt_init: float = 0.01,
    dt_max: float = 0.1,
    dt_min: float = 1e-9,
    growth: float = 1.1,
) -> tuple[np.ndarray, dict]:
    """March ``u_t = diffusion Lap(u) - linear_rate u + source(u)`` to steady state.

    The linear sink is implicit, the source explicit; steps that lose
    positivity are retried with half the step.  Stops when
    ``|du|_inf / dt < steady_tol``.
    """
    w = dom.cell_measures
    u = np.array(u0, dtype=float)
    t = 0.0
    dt = min(dt_init, dt_max)
    steps = 0
    rate = np.asarray(linear_rate, dtype=float)
    while t < t_max:
        attempt = dt
        while True:
            A = shifted_operator(dom, 1.0 / attempt + rate, diffusion)
            rhs = w * (u / attempt + source(u))
            u_new, _ = spd_solve(A, rhs, tol=1e-13, x0=u)
            if u_new.min() > 0.0:
                break
            attempt *= 0.5
            if attempt < dt_min:
                raise NonConvergenceError(
                    f"limit-profile march lost positivity at t = {t:.6g}"
                )
        delta = float(np.max(np.abs(u_new - u)))
        t += attempt
        steps += 1
        u = u_new
        dt = min(attempt * growth, dt_max)
        if delta / attempt < steady_tol:
            return u, {"steps": steps, "t": t, "steady": True}
    raise NonConvergenceError(f"limit-profile march not steady by t = {t_max:g}")


# ---------------------------------------------------------------------------
# d_I -> 0
# ---------------------------------------------------------------------------


def classify_small_di(c: CoefficientSet) -> LimitProfile:
    """Small-``d_I`` classification for p = 1.

    Returns the high-risk set ``{S~ > h^(1/q)}`` (somewhere nonempty iff
    endemic equilibria survive small ``d_I``), the vanishing set
    ``{S~ < h^(1/q)}`` where infection dies out, the ceiling field, and a
    pointwise infected-mass density estimate
    ``(d_S Lap(h^(1/q)) + recruitment - h^(1/q)) / eta`` (meaningful only
    where the coefficients are twice differentiable).
    """
    if c.p != 1.0:
        raise ValueError("the small-d_I classification applies only to p = 1")
    dom = c.domain
    S_dfe = solve_dfe(c)
    ceiling = c.risk_ceiling()
    support = S_dfe.values > ceiling
    vanishing = S_dfe.values < ceiling
    L = assemble_neumann_laplacian(dom)
    density = (c.d_S * (L @ ceiling) + c.recruitment.values - ceiling) / c.eta.values
    return LimitProfile(
        regime="small_d_I",
        S_limit=None,
        I_limit=None,
        masks={"high_risk": support, "vanishing": vanishing},
        envelopes={
            "ceiling": dom.field(ceiling),
            "dfe": S_dfe,
            "mass_density": dom.field(density),
        },
        meta={"no_ee_for_small_d_I": bool(not support.any())},
    )


def limit_small_di(c: CoefficientSet, steady_tol: float = 1e-10) -> LimitProfile:
    """Small-``d_I`` limit profile for 0 < p < 1.

    The susceptible limit solves the scalar semilinear problem
    ``d_S Lap(S) + recruitment - S - eta (S^q/h)^(1/(1-p)) = 0``;
    the infected limit is the pointwise slave ``(S^q/h)^(1/(1-p))``.
    """
    if not c.p < 1.0:
        raise ValueError("the small-d_I limit profile requires 0 < p < 1")
    dom = c.domain
    h = c.risk()
    expo = 1.0 / (1.0 - c.p)
    eta = c.eta.values
    lam = c.recruitment.values

    def slave(S: np.ndarray) -> np.ndarray:
        return (S**c.q / h) ** expo

    S0 = solve_dfe(c).values
    S_star, info = _march_semilinear(
        dom,
        diffusion=c.d_S,
        linear_rate=1.0,
        source=lambda S: lam - eta * slave(S),
        u0=S0,
        steady_tol=steady_tol,
    )
    I_star = slave(S_star)
    L = assemble_neumann_laplacian(dom)
    residual = c.d_S * (L @ S_star) + lam - S_star - eta * I_star
    return LimitProfile(
        regime="small_d_I",
        S_limit=dom.field(S_star),
        I_limit=dom.field(I_star),
        meta={"residual_sup": float(np.max(np.abs(residual))), **info},
    )


# ---------------------------------------------------------------------------
# d_S -> 0
# ---------------------------------------------------------------------------


def eliminate_susceptible(c: CoefficientSet, I: np.ndarray) -> np.ndarray:
    """Per-node root of ``recruitment - s - beta s^q I^p + gamma I = 0``.

    The map ``s -> s + beta s^q I^p`` is strictly increasing, so the root
    is unique; the bracket ``[0, recruitment + gamma I]`` always straddles.
    """
    lam = c.recruitment.values
    beta = c.beta.values
    gamma = c.gamma.values
    target = lam + gamma * I
    Ip = I**c.p

    def f(s: np.ndarray) -> np.ndarray:
        return s + beta * s**c.q * Ip - target

    return bisect_increasing(f, np.zeros_like(target), target)


def limit_small_ds(
    c: CoefficientSet, I0: float = 0.2, steady_tol: float = 1e-10
) -> LimitProfile:
    """Small-``d_S`` limit: S slaved to I by the algebraic balance.

    Marches ``I_t = d_I Lap(I) + beta S(I)^q I^p - (gamma+eta) I`` with the
    susceptible density eliminated pointwise at every step.  For p = 1 an
    endemic limit requires a negative principal eigenvalue; the request is
    refused otherwise.
    """
    from .spectral import compute_lambda0  # local import to avoid a cycle

    dom = c.domain
    if c.p == 1.0:
        lam0 = compute_lambda0(c).value
        if lam0 >= 0.0:
            raise ValueError(
                f"no endemic small-d_S limit: principal eigenvalue {lam0:.6g} >= 0"
            )
    beta = c.beta.values
    rate = c.gamma.values + c.eta.values

    def source(I: np.ndarray) -> np.ndarray:
        S = eliminate_susceptible(c, I)
        return beta * S**c.q * I**c.p

    I_star, info = _march_semilinear(
        dom,
        diffusion=c.d_I,
        linear_rate=rate,
        source=source,
        u0=np.full(dom.n_nodes, I0),
        steady_tol=steady_tol,
    )
    S_star = eliminate_susceptible(c, I_star)
    L = assemble_neumann_laplacian(dom)
    residual = c.d_I * (L @ I_star) + beta * S_star**c.q * I_star**c.p - rate * I_star
    return LimitProfile(
        regime="small_d_S",
        S_limit=dom.field(S_star),
        I_limit=dom.field(I_star),
        meta={"residual_sup": float(np.max(np.abs(residual))), **info},
    )


# ---------------------------------------------------------------------------
# Joint limit d_S, d_I -> 0 at fixed sigma = d_I/d_S
# ---------------------------------------------------------------------------


def limit_joint_p1(c: CoefficientSet, sigma: float) -> LimitProfile:
    """Joint limit for p = 1 at fixed diffusion ratio ``sigma``.

    For ``sigma >= max(eta)`` the limit is closed-form:
    ``S* = min(recruitment, h^(1/q))`` and
    ``I* = (recruitment - h^(1/q))_+ / eta``.  Below that threshold only
    envelope bounds are known, and they are returned as fields:
    constants ``min(recruitment_min, r_min^(1/q)) <= S* <= recruitment_max``,
    the cap ``I* <= (recruitment - h^(1/q))_+ / min(sigma, eta)``, and for
    q = 1 additionally ``I* >= (recruitment - h)_+ / eta`` with
    ``S* <= min(recruitment, h)``.  In all cases the mass identity
    ``S* + eta I* = recruitment`` holds in the limit.
    """
    if c.p != 1.0:
        raise ValueError("this joint limit requires p = 1")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    dom = c.domain
    lam = c.recruitment.values
    eta = c.eta.values
    ceiling = c.risk_ceiling()
    r = c.recovery_ratio()

    envelopes = {
        "S_lower": dom.field(min(lam.min(), (r.min()) ** (1.0 / c.q))),
        "S_upper": dom.field(lam.max()),
        "I_upper": dom.field(np.maximum(lam - ceiling, 0.0) / np.minimum(sigma, eta)),
    }
    if c.q == 1.0:
        h = c.risk()
        envelopes["I_lower"] = dom.field(np.maximum(lam - h, 0.0) / eta)
        envelopes["S_upper_pointwise"] = dom.field(np.minimum(lam, h))

    closed_form = sigma >= float(eta.max())
    if closed_form:
        S_star = np.minimum(lam, ceiling)
        I_star = np.maximum(lam - ceiling, 0.0) / eta
        S_field, I_field = dom.field(S_star), dom.field(I_star)
    else:
        S_field = I_field = None
    return LimitProfile(
        regime="joint",
        S_limit=S_field,
        I_limit=I_field,
        masks={"positive_infection": lam > ceiling},
        envelopes=envelopes,
        sigma=float(sigma),
        meta={"closed_form": closed_form},
    )


def limit_joint_sublinear(c: CoefficientSet, sigma: float) -> LimitProfile:
    """Joint limit for 0 < p < 1 at fixed ratio ``sigma > max(eta)``.

    Per node, ``I*`` is the unique positive root of
    ``recruitment = eta t + h^(1/q) t^((1-p)/q)`` and
    ``S* = h^(1/q) (I*)^((1-p)/q)``, so ``S* + eta I* = recruitment``.
    """
    if not c.p < 1.0:
        raise ValueError("this joint limit requires 0 < p < 1")
    eta = c.eta.values
    if not sigma > float(eta.max()):
        raise ValueError(f"sigma must exceed max(eta) = {float(eta.max()):.6g}")
    dom = c.domain
    lam = c.recruitment.values
    ceiling = c.risk_ceiling()
    expo = (1.0 - c.p) / c.q

    def f(t: np.ndarray) -> np.ndarray:
        return eta * t + ceiling * t**expo - lam

    hi = np.full(dom.n_nodes, lam.max() / eta.min() + 1.0)
    I_star = bisect_increasing(f, np.zeros(dom.n_nodes), hi)
    S_star = ceiling * I_star**expo
    return LimitProfile(
        regime="joint",
        S_limit=dom.field(S_star),
        I_limit=dom.field(I_star),
        sigma=float(sigma),
        meta={
            "mass_identity_sup": float(np.max(np.abs(S_star + eta * I_star - lam))),
        },
    )


# ---------------------------------------------------------------------------
# Monotone bracketing sequences for the joint limit
# ---------------------------------------------------------------------------

_SEQ_STORE_LIMIT = 200


def _require_sigma(c: CoefficientSet, sigma: float) -> None:
    eta_max = float(c.eta.values.max())
    if not sigma > eta_max:
        raise ValueError(f"sigma = {sigma:g} must exceed max(eta) = {eta_max:g}")


def _run_sequence(
    u0: np.ndarray,
    v0: np.ndarray,
    advance: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]],
    u_limit: np.ndarray,
    v_limit: np.ndarray,
    direction: str,
    tol: float,
    n_max: int,
) -> MonotoneSequence:
    u, v = u0.copy(), v0.copy()
    u_iter, v_iter = [u.copy()], [v.copy()]
    gaps = [max(float(np.max(np.abs(u - u_limit))), float(np.max(np.abs(v - v_limit))))]
    converged = False
    n = 0
    for n in range(1, n_max + 1):
        u_next, v_next = advance(u, v)
        step = max(float(np.max(np.abs(u_next - u))), float(np.max(np.abs(v_next - v))))
        u, v = u_next, v_next
        if len(u_iter) < _SEQ_STORE_LIMIT:
            u_iter.append(u.copy())
            v_iter.append(v.copy())
        gaps.append(
            max(float(np.max(np.abs(u - u_limit))), float(np.max(np.abs(v - v_limit))))
        )
        if step < tol:
            converged = True
            break
    return MonotoneSequence(
        direction=direction,
        u_iterates=u_iter,
        v_iterates=v_iter,
        final_u=u,
        final_v=v,
        u_limit=u_limit,
        v_limit=v_limit,
        sup_gaps=gaps,
        n_iterations=n,
        converged=converged,
    )


def monotone_joint_p1(
    c: CoefficientSet,
    sigma: float,
    direction: str = "increasing",
    tol: float = 1e-10,
    n_max: int = 100000,
) -> MonotoneSequence:
    """Explicit bracketing iteration for the p = 1 joint limit.

    Increasing from ``(u, v) = (recruitment, 0)`` or decreasing from the
    constant ``recruitment_max + (sigma+1) max(recruitment/eta)``; one
    round applies ``u = recruitment + (1 - eta/sigma) v`` and
    ``v' = (u - h^(1/q))_+``.  Both directions converge to
    ``v* = (sigma/eta)(recruitment - h^(1/q))_+`` and
    ``u* = min(recruitment, h^(1/q)) + v*``.
    """
    if c.p != 1.0:
        raise ValueError("this bracketing sequence requires p = 1")
    _require_sigma(c, sigma)
    dom = c.domain
    lam = c.recruitment.values
    eta = c.eta.values
    ceiling = c.risk_ceiling()
    factor = 1.0 - eta / sigma

    v_limit = (sigma / eta) * np.maximum(lam - ceiling, 0.0)
    u_limit = np.minimum(lam, ceiling) + v_limit

    if direction == "increasing":
        v0 = np.zeros(dom.n_nodes)
        u0 = lam + factor * v0

        def advance(u, v):
            v_next = np.maximum(u - ceiling, 0.0)
            u_next = lam + factor * v_next
            return u_next, v_next

    elif direction == "decreasing":
        start = lam.max() + (sigma + 1.0) * float((lam / eta).max())
        u0 = np.full(dom.n_nodes, start)
        v0 = np.full(dom.n_nodes, start)

        def advance(u, v):
            u_next = lam + factor * v
            v_next = np.maximum(u - ceiling, 0.0)
            return u_next, v_next

    else:
        raise ValueError("direction must be 'increasing' or 'decreasing'")
    seq = _run_sequence(u0, v0, advance, u_limit, v_limit, direction, tol, n_max)
    _check_monotone(seq)
    return seq


def monotone_joint_sublinear(
    c: CoefficientSet,
    sigma: float,
    direction: str = "increasing",
    tol: float = 1e-10,
    n_max: int = 100000,
) -> MonotoneSequence:
    """Bracketing iteration for the 0 < p < 1 joint limit.

    The inner update inverts the strictly increasing map
    ``v -> v + h^(1/q) (v/sigma)^((1-p)/q)`` by bisection.  Both directions
    converge to the root ``v*`` of
    ``recruitment = (eta/sigma) v + h^(1/q) (v/sigma)^((1-p)/q)`` with
    ``u* = recruitment + (1 - eta/sigma) v*``; the infected limit is
    ``v*/sigma``.
    """
    if not c.p < 1.0:
        raise ValueError("this bracketing sequence requires 0 < p < 1")
    _require_sigma(c, sigma)
    dom = c.domain
    lam = c.recruitment.values
    eta = c.eta.values
    ceiling = c.risk_ceiling()
    expo = (1.0 - c.p) / c.q
    factor = 1.0 - eta / sigma

    def solve_inner(target: np.ndarray) -> np.ndarray:
        def f(v: np.ndarray) -> np.ndarray:
            return v + ceiling * (v / sigma) ** expo - target

        return bisect_increasing(f, np.zeros_like(target), target)

    def f_limit(v: np.ndarray) -> np.ndarray:
        return (eta / sigma) * v + ceiling * (v / sigma) ** expo - lam

    hi = np.full(dom.n_nodes, sigma * (lam.max() / eta.min()) + 1.0)
    v_limit = bisect_increasing(f_limit, np.zeros(dom.n_nodes), hi)
    u_limit = lam + factor * v_limit

    if direction == "increasing":
        u0 = lam.copy()
        v0 = np.zeros(dom.n_nodes)

        def advance(u, v):
            v_next = solve_inner(u)
            u_next = lam + factor * v_next
            return u_next, v_next

    elif direction == "decreasing":
        start = lam.max() + (1.0 + sigma) * float((lam / eta).max())
        u0 = np.full(dom.n_nodes, start)
        v0 = np.full(dom.n_nodes, start)

        def advance(u, v):
            u_next = lam + factor * v
            v_next = solve_inner(u_next)
            return u_next, v_next

    else:
        raise ValueError("direction must be 'increasing' or 'decreasing'")
    seq = _run_sequence(u0, v0, advance, u_limit, v_limit, direction, tol, n_max)
    _check_monotone(seq)
    return seq


def _check_monotone(seq: MonotoneSequence, slack: float = 1e-12) -> None:
    """Componentwise monotonicity of the stored iterates, within rounding."""
    sign = 1.0 if seq.direction == "increasing" else -1.0
    for name, iterates in (("u", seq.u_iterates), ("v", seq.v_iterates)):
        for n in range(1, len(iterates)):
            worst = float(np.min(sign * (iterates[n] - iterates[n - 1])))
            if worst < -slack:
                raise RuntimeError(
                    f"{seq.direction} sequence lost monotonicity in {name} at "
                    f"iterate {n} (violation {worst:.3e})"
                )


# ---------------------------------------------------------------------------
# A-priori bound audit
# ---------------------------------------------------------------------------


def susceptible_floor_constant(c: CoefficientSet) -> float:
    """The positive root ``c0`` of ``c + c^q = target`` with

    ``target = recruitment_min / (1 + (d_S/d_I + 1/eta_min)^p *
    recruitment_max^p * beta_max)``; every p < 1 equilibrium satisfies
    ``min(S) >= c0``.
    """
    lam = c.recruitment.values
    target = lam.min() / (
        1.0
        + (c.d_S / c.d_I + 1.0 / c.eta.values.min()) ** c.p
        * lam.max() ** c.p
        * c.beta.values.max()
    )

    def f(t: np.ndarray) -> np.ndarray:
        return t + t**c.q - target

    root = bisect_increasing(f, np.zeros(1), np.full(1, target), iterations=200)
    return float(root[0])


def bounds_audit(c: CoefficientSet, eq: EquilibriumResult) -> BoundsReport:
    """Check an equilibrium against the a-priori interior-extremum bounds.

    p = 1: the susceptible range lies in
    ``[min(recruitment_min, r_min^(1/q)), max(recruitment_max, r_max^(1/q))]``.
    p < 1: the infected range is pinned by the susceptible extremes through
    ``[(beta/(gamma+eta)) S^q]^(1/(1-p))``, both fields obey the
    diffusion-weighted caps, and ``min(S) >= c0`` with the matching
    infected floor.  Margins are judged against the grid tolerance.
    """
    dom = c.domain
    tol = grid_tolerance(dom)
    S = eq.S.values
    I = eq.I.values
    lam = c.recruitment.values
    ratio = c.beta.values / (c.gamma.values + c.eta.values)
    checks: list[dict] = []

    def add(name: str, kind: str, bound: float, observed: float) -> None:
        margin = observed - bound if kind == "lower" else bound - observed
        checks.append(
            {
                "name": name,
                "kind": kind,
                "bound": float(bound),
                "observed": float(observed),
                "margin": float(margin),
                "passed": bool(margin >= -tol),
            }
        )

    c0 = None
    if c.p == 1.0:
        r = c.recovery_ratio()
        add("S_min_floor", "lower", min(lam.min(), r.min() ** (1.0 / c.q)), S.min())
        add("S_max_cap", "upper", max(lam.max(), r.max() ** (1.0 / c.q)), S.max())
    else:
        expo = 1.0 / (1.0 - c.p)
        add("I_min_vs_S_min", "lower", (ratio.min() * S.min() ** c.q) ** expo, I.min())
        add("I_max_vs_S_max", "upper", (ratio.max() * S.max() ** c.q) ** expo, I.max())
        add(
            "S_max_diffusion_cap",
            "upper",
            (1.0 + c.d_I / (c.d_S * c.eta.values.min())) * lam.max(),
            S.max(),
        )
        add(
            "I_max_diffusion_cap",
            "upper",
            (c.d_S / c.d_I + 1.0 / c.eta.values.min()) * lam.max(),
            I.max(),
        )
        c0 = susceptible_floor_constant(c)
        add("S_min_positive_floor", "lower", c0, S.min())
        add("I_min_positive_floor", "lower", (ratio.min() * c0**c.q) ** expo, I.min())
    return BoundsReport(
        checks=checks,
        all_passed=all(ch["passed"] for ch in checks),
        tolerance=tol,
        c0=c0,
    )
