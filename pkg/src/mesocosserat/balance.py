"""Inhomogeneous sector: Euler-Lagrange residuals, reductions and the wave scenario."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constitutive import (
    MaterialParameters,
    ParameterError,
    dissipative_currents,
    excitations,
    momenta,
    momentum_rates,
)
from .forms import DegreeError, Form, covariant_derivative, exterior_derivative, sample_points, wedge
from .kinematics import CosseratState
from .report import ResidualReport


class CasePreconditionError(ValueError):
    """The state does not satisfy the assumptions of a special case."""


class StabilityError(ValueError):
    """Explicit time step violates the CFL bound."""


ANALYTIC_TOL = 1e-10


@dataclass(frozen=True)
class SourceFields:
    """Force stress ``sigma`` and couple stress ``M``.

    ``sigma_dis``/``M_dis`` record the parts attributable to the dissipative
    currents (already included in ``sigma``/``M``), so that configurational
    balances can account for them.
    """

    sigma: Form
    M: Form
    sigma_dis: Form | None = None
    M_dis: Form | None = None

    def __add__(self, other: "SourceFields") -> "SourceFields":
        return SourceFields(self.sigma + other.sigma, self.M + other.M, self.sigma_dis, self.M_dis)


def _coupling(state: CosseratState, H: Form) -> Form:
    """Antisymmetric frame coupling (X^T - X) with X^i_j = e^i ^ H_j."""
    X = wedge(state.e, H, mode="outer")
    return X.transpose() - X


def balance_lhs(state: CosseratState, params: MaterialParameters) -> tuple[Form, Form]:
    """Conservative left sides (DH + dP/dt, DO + dQ/dt + (X^T - X))."""
    H, O = excitations(state, params)
    dP, dQ = momentum_rates(state, params)
    force = covariant_derivative(H, state.omega) + dP
    couple = covariant_derivative(O, state.omega) + dQ + _coupling(state, H)
    return force, couple


def induced_sources(state: CosseratState, params: MaterialParameters, dissipative: bool = False,
                    coupling: str = "literal") -> SourceFields:
    """Sources that put ``state`` exactly on shell.

    With ``dissipative`` the linear dissipative currents are added and
    recorded separately.
    """
    sigma, M = balance_lhs(state, params)
    if not dissipative:
        return SourceFields(sigma, M)
    s_dis, m_dis = dissipative_currents(state, params, coupling)
    return SourceFields(sigma + s_dis, M + m_dis, s_dis, m_dis)


def _check_degrees(state: CosseratState, sources: SourceFields):
    n = state.dim
    for name, f in (("sigma", sources.sigma), ("M", sources.M)):
        if f.degree != n - 1:
            raise DegreeError(f"source {name} has degree {f.degree}, balance needs {n - 1}")


def _eval_kwargs(state, points):
    if state.analytic:
        return {"t": state.t, "points": sample_points(state.dim) if points is None else points}
    return {}


def el_residuals(state: CosseratState, params: MaterialParameters, sources: SourceFields,
                 dissipative: bool = False, coupling: str = "literal", reduced: bool = False,
                 tol: float | None = None, points=None) -> ResidualReport:
    """Norms of the force and couple Euler-Lagrange residuals.

    force:  DH + dP/dt (+ Sigma_dis) - Sigma
    couple: DO + dQ/dt + (X^T - X) (+ M_dis) - M

    ``reduced`` evaluates the scalar-connection reduction used by the 2D
    examples: connection terms are dropped (dH + dP/dt = Sigma) and the couple
    balance keeps the two terms dO (+ M_dis) = M, the momentum rate and
    frame coupling being absorbed into the scenario. The full residuals are
    then kept as the non-gating entries ``force_full`` and ``couple_full``.
    """
    _check_degrees(state, sources)
    tol = (ANALYTIC_TOL if state.analytic else None) if tol is None else tol
    force, couple = balance_lhs(state, params)
    if dissipative:
        s_dis, m_dis = dissipative_currents(state, params, coupling)
        force, couple = force + s_dis, couple + m_dis
    kw = _eval_kwargs(state, points)
    rep = ResidualReport()
    if reduced:
        H, O = excitations(state, params)
        dP = momentum_rates(state, params)[0]
        red_f = exterior_derivative(H) + dP
        red_c = exterior_derivative(O)
        if dissipative:
            red_f, red_c = red_f + s_dis, red_c + m_dis
        rep.add_form("force", red_f - sources.sigma, tol=tol, **kw)
        rep.add_form("couple", red_c - sources.M, tol=tol, **kw)
        rep.add_form("force_full", force - sources.sigma, tol=tol, gating=False, **kw)
        rep.add_form("couple_full", couple - sources.M, tol=tol, gating=False, **kw)
    else:
        rep.add_form("force", force - sources.sigma, tol=tol, **kw)
        rep.add_form("couple", couple - sources.M, tol=tol, **kw)
    return rep


def special_case(state: CosseratState, params: MaterialParameters, case: str,
                 sources: SourceFields | None = None, reduced: bool = False,
                 tol: float | None = None, points=None) -> ResidualReport:
    """Residuals of a reduced balance.

    static:      DH = Sigma, DO + (X^T - X) = M           (needs P = Q = 0)
    stress-free: DH + dP/dt = 0, DO + dQ/dt + (X^T - X) = 0
    compatible:  dP/dt = Sigma, dQ/dt = M, H = O = 0      (needs T = Omega = 0)

    With ``reduced`` the balances take the scalar-connection form (static
    dH = Sigma, dO = M with only P = 0 required; stress-free dH + dP/dt = 0,
    dO + dQ/dt = 0).
    """
    kw = _eval_kwargs(state, points)
    ptol = 1e-12 if tol is None else tol
    tol = (ANALYTIC_TOL if state.analytic else None) if tol is None else tol
    zero = Form.zero(state.dim - 1, "vector", state.space), Form.zero(state.dim - 1, "matrix", state.space)
    sources = sources or SourceFields(*zero)
    _check_degrees(state, sources)
    H, O = excitations(state, params)
    dP, dQ = momentum_rates(state, params)
    rep = ResidualReport()
    if case == "static":
        P, Q = momenta(state, params)
        if P.sup_norm(**kw) > ptol or (not reduced and Q.sup_norm(**kw) > ptol):
            raise CasePreconditionError("static case needs vanishing momenta")
        D = exterior_derivative if reduced else (lambda a: covariant_derivative(a, state.omega))
        rep.add_form("force", D(H) - sources.sigma, tol=tol, **kw)
        couple = D(O)
        if not reduced:
            couple = couple + _coupling(state, H)
        rep.add_form("couple", couple - sources.M, tol=tol, **kw)
    elif case == "stress-free":
        if reduced:
            force = exterior_derivative(H) + dP
            couple = exterior_derivative(O) + dQ
        else:
            force, couple = balance_lhs(state, params)
        rep.add_form("force", force, tol=tol, **kw)
        rep.add_form("couple", couple, tol=tol, **kw)
        rep.add("excitation_H", H.sup_norm(**kw), gating=False)
    elif case == "compatible":
        if not state.is_compatible(ptol, kw.get("points")):
            raise CasePreconditionError("compatible case needs T = 0 and Omega = 0")
        rep.add_form("force", dP - sources.sigma, tol=tol, **kw)
        rep.add_form("couple", dQ - sources.M, tol=tol, **kw)
        rep.add_form("excitation_H", H, tol=0.0, **kw)
        rep.add_form("excitation_O", O, tol=0.0, **kw)
    else:
        raise ValueError(f"unknown case {case!r}; expected static, stress-free or compatible")
    return rep


# --------------------------------------------------------------------------- #
# linearised wave scenario
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class DispersionResult:
    predicted_speed: float
    measured_speed: float
    predicted_decay: float
    measured_decay: float
    n: int
    dt: float

    @property
    def speed_ratio(self) -> float:
        return self.measured_speed / self.predicted_speed


def dispersion_check(params: MaterialParameters, k: float = 2 * math.pi, n: int = 256,
                     cfl: float = 0.5, dt: float | None = None, periods: int = 4,
                     damped: bool = False, length: float = 1.0) -> DispersionResult:
    """Phase speed and decay of a travelling mode of rho J_tt + gamma J_t - a J_xx = 0.

    Periodic 1D leapfrog with a = mu_T, rho = rho_T and gamma = gamma_T when
    ``damped`` (else 0). The complex amplitude of mode ``k`` is tracked over
    an integer number of periods; the speed is the fitted phase rate over k.
    Without damping the prediction is sqrt(a/rho); with damping the decay
    rate prediction is gamma/(2 rho) and the speed prediction is the damped
    frequency over k.
    """
    a, rho = params.mu_T, params.rho_T
    gamma = params.gamma_T if damped else 0.0
    if rho <= 0:
        raise ParameterError("wave speed needs rho_T > 0")
    if a <= 0:
        raise ParameterError("wave speed needs mu_T > 0")
    c = math.sqrt(a / rho)
    h = length / n
    if dt is None:
        dt = cfl * h / c
    if c * dt / h > 1.0:
        raise StabilityError(f"CFL number {c * dt / h:.3f} > 1; use dt <= {h / c:.3e}")
    beta = gamma / (2 * rho)
    w2 = c * c * k * k - beta * beta
    if w2 <= 0:
        raise ParameterError("mode is overdamped; no propagation to measure")
    omega = math.sqrt(w2)

    x = h * np.arange(n)
    exact = lambda t: np.exp(-beta * t) * np.cos(k * x - omega * t)
    prev, cur = exact(0.0), exact(dt)
    steps = int(round(periods * 2 * math.pi / omega / dt))
    r = c * c * dt * dt / (h * h)
    g = gamma * dt / (2 * rho)
    mode = np.exp(-1j * k * x)
    amps = [np.vdot(np.conj(mode), prev), np.vdot(np.conj(mode), cur)]
    for _ in range(steps - 1):
        lap = np.roll(cur, -1) - 2 * cur + np.roll(cur, 1)
        nxt = (2 * cur - (1 - g) * prev + r * lap) / (1 + g)
        prev, cur = cur, nxt
        amps.append(np.vdot(np.conj(mode), cur))
    amps = np.asarray(amps) * (2.0 / n)
    times = dt * np.arange(len(amps))
    phase = np.unwrap(np.angle(amps))
    rate = np.polyfit(times, phase, 1)[0]
    decay = -np.polyfit(times, np.log(np.abs(amps)), 1)[0]
    predicted = c if gamma == 0 else omega / k
    return DispersionResult(predicted, float(abs(rate) / k), beta, float(decay), n, dt)
