"""Homogeneous sector: torsion, curvature, Bianchi residuals and defect transport."""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .forms import (
    MATRIX,
    VECTOR,
    Form,
    Grid,
    covariant_derivative,
    exterior_derivative,
    wedge,
)


class IntegratorConsistencyError(RuntimeError):
    """Transported and recomputed defect measures drifted apart."""


@dataclass(frozen=True, eq=False)
class CosseratState:
    """Coframe, connection and their rates at time ``t``.

    For analytic backing the forms are closures in the symbol ``t`` and
    ``t`` is the time at which they are evaluated. ``Jdot``/``Kdot`` are the
    second time derivatives (needed for the momentum rates). ``T_rate`` and
    ``Omega_rate`` optionally carry exact time derivatives of the defect
    measures for grid states sampled from a closure.
    """

    e: Form
    omega: Form
    J: Form | None = None
    K: Form | None = None
    t: float = 0.0
    Jdot: Form | None = None
    Kdot: Form | None = None
    T_rate: Form | None = None
    Omega_rate: Form | None = None
    name: str = ""

    def __post_init__(self):
        e, w = self.e, self.omega
        if e.kind != VECTOR or e.degree != 1:
            raise ValueError("coframe must be a frame-vector 1-form")
        if w.kind != MATRIX or w.degree != 1:
            raise ValueError("connection must be a matrix 1-form")
        if e.space != w.space:
            raise ValueError("coframe and connection live on different backings")
        for name, kind in (("J", VECTOR), ("Jdot", VECTOR), ("K", MATRIX), ("Kdot", MATRIX)):
            f = getattr(self, name)
            if f is None:
                if name in ("J", "K"):
                    object.__setattr__(self, name, Form.zero(1, kind, e.space))
                continue
            if f.kind != kind or f.degree != 1 or f.space != e.space:
                raise ValueError(f"{name} must be a {kind} 1-form on the state's backing")

    @classmethod
    def from_closure(cls, e: Form, omega: Form, t: float = 0.0, name: str = "") -> "CosseratState":
        """Analytic state whose rates are the exact time derivatives of ``e`` and ``omega``."""
        J, K = e.time_derivative(), omega.time_derivative()
        return cls(e, omega, J, K, t, J.time_derivative(), K.time_derivative(), name=name)

    @property
    def space(self):
        return self.e.space

    @property
    def dim(self) -> int:
        return self.e.dim

    @property
    def analytic(self) -> bool:
        return self.space.backing == "analytic"

    @cached_property
    def torsion(self) -> Form:
        return covariant_derivative(self.e, self.omega)

    @cached_property
    def curvature(self) -> Form:
        return exterior_derivative(self.omega) + wedge(self.omega, self.omega)

    def replace(self, **changes) -> "CosseratState":
        """Copy with fields replaced; defect measures are recomputed lazily."""
        return dataclasses.replace(self, **changes)

    def at(self, t: float) -> "CosseratState":
        return self.replace(t=t)

    def is_compatible(self, tol: float = 1e-12, points=None) -> bool:
        return self.torsion.sup_norm(self.t, points) <= tol and self.curvature.sup_norm(self.t, points) <= tol

    def sample(self, grid: Grid, t: float | None = None) -> "CosseratState":
        """Grid state at time ``t`` with exact defect rates attached."""
        if not self.analytic:
            raise ValueError("sample() needs an analytic state")
        t = self.t if t is None else t
        s = lambda f: None if f is None else f.sample(grid, t)
        T_rate = self.torsion.time_derivative()
        O_rate = self.curvature.time_derivative()
        return CosseratState(s(self.e), s(self.omega), s(self.J), s(self.K), t, s(self.Jdot), s(self.Kdot),
                             s(T_rate), s(O_rate), self.name)


def torsion(state: CosseratState) -> Form:
    """T = De = de + omega ^ e."""
    return state.torsion


def curvature(state: CosseratState) -> Form:
    """Omega = d omega + omega ^ omega."""
    return state.curvature


def transport_rhs(state: CosseratState) -> tuple[Form, Form]:
    """(dT/dt, dOmega/dt) = (DJ + K ^ e, DK)."""
    dT = covariant_derivative(state.J, state.omega) + wedge(state.K, state.e)
    dO = covariant_derivative(state.K, state.omega)
    return dT, dO


def bianchi_residuals(state: CosseratState) -> tuple[Form, Form]:
    """Residuals of the Bianchi identities.

    3D: (DT - Omega ^ e, D Omega). In 2D those are 3-forms and vanish, so the
    time-differentiated pair (dT/dt - DJ - K^e, dOmega/dt - DK) is returned
    instead; grid states need ``T_rate``/``Omega_rate`` for that.
    """
    T, Om = state.torsion, state.curvature
    if state.dim == 3:
        return (covariant_derivative(T, state.omega) - wedge(Om, state.e),
                covariant_derivative(Om, state.omega))
    if state.analytic:
        T_rate, O_rate = T.time_derivative(), Om.time_derivative()
    elif state.T_rate is not None and state.Omega_rate is not None:
        T_rate, O_rate = state.T_rate, state.Omega_rate
    else:
        warnings.warn("grid state without time-derivative data: only the (trivial) spatial "
                      "residuals are available in 2D", stacklevel=2)
        return (covariant_derivative(T, state.omega) - wedge(Om, state.e),
                covariant_derivative(Om, state.omega))
    dT, dO = transport_rhs(state)
    return T_rate - dT, O_rate - dO


# --------------------------------------------------------------------------- #
# transport integration
# --------------------------------------------------------------------------- #

@dataclass
class Trajectory:
    """Snapshots from :func:`integrate_transport`.

    ``states`` carry (e, omega, J, K); ``transported`` holds the (T, Omega)
    evolved by the transport equations alongside; ``divergence`` is the max
    deviation between transported and recomputed torsion/curvature per step.
    """

    states: list[CosseratState]
    transported: list[tuple[Form, Form]]
    divergence: list[float]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def max_divergence(self) -> float:
        return max(self.divergence, default=0.0)

    def __len__(self):
        return len(self.states)


RateFn = Callable[[float], tuple[Form, Form]]


def _analytic_rates(state: CosseratState, grid: Grid) -> RateFn:
    return lambda t: (state.J.sample(grid, t), state.K.sample(grid, t))


def integrate_transport(state: CosseratState, dt: float, steps: int, rates: RateFn | None = None,
                        grid: Grid | None = None, tol: float | None = 1e-8) -> Trajectory:
    """Evolve (e, omega, T, Omega) with classical RK4 under prescribed rates.

    (e, omega) follow ``rates(t) -> (J, K)``; (T, Omega) follow the transport
    equations. After every step the torsion and curvature recomputed from the
    evolved (e, omega) are compared to the transported ones, and
    :class:`IntegratorConsistencyError` is raised beyond ``tol``.

    Analytic states are sampled onto ``grid`` (default 33 points per axis)
    and their own J, K closures are used as the rates.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if state.analytic:
        grid = grid or Grid.uniform(state.dim, 33)
        rates = rates or _analytic_rates(state, grid)
        state = CosseratState(state.e.sample(grid, state.t), state.omega.sample(grid, state.t),
                              state.J.sample(grid, state.t), state.K.sample(grid, state.t),
                              state.t, name=state.name)
    elif rates is None:
        J, K = state.J, state.K
        rates = lambda t: (J, K)

    def rhs(t, e, w, T, Om):
        J, K = rates(t)
        dT = covariant_derivative(J, w) + wedge(K, e)
        dO = covariant_derivative(K, w)
        return J, K, dT, dO

    y = (state.e, state.omega, state.torsion, state.curvature)
    t = state.t
    states, transported, divergence = [state], [(y[2], y[3])], [0.0]
    for _ in range(steps):
        k1 = rhs(t, *y)
        k2 = rhs(t + dt / 2, *(a + (dt / 2) * k for a, k in zip(y, k1)))
        k3 = rhs(t + dt / 2, *(a + (dt / 2) * k for a, k in zip(y, k2)))
        k4 = rhs(t + dt, *(a + dt * k for a, k in zip(y, k3)))
        y = tuple(a + (dt / 6) * (p + 2 * q + 2 * r + s)
                  for a, p, q, r, s in zip(y, k1, k2, k3, k4))
        t += dt
        J, K = rates(t)
        snap = CosseratState(y[0], y[1], J, K, t, name=state.name)
        div = max((snap.torsion - y[2]).sup_norm(), (snap.curvature - y[3]).sup_norm())
        states.append(snap)
        transported.append((y[2], y[3]))
        divergence.append(div)
        if tol is not None and div > tol:
            raise IntegratorConsistencyError(
                f"transported and recomputed defect measures differ by {div:.3e} at t={t:.6g} (tol {tol:.1e})")
    return Trajectory(states, transported, divergence)
