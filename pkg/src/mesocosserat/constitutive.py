"""Quadratic constitutive closure, dissipation and energy bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable, Sequence

import numpy as np

from .forms import (
    VECTOR,
    Form,
    exterior_derivative,
    hodge_star,
    inner,
    pair,
)
from .kinematics import CosseratState


class ParameterError(ValueError):
    """Invalid material parameters."""


class InsufficientDataError(ValueError):
    """Too few snapshots for a time-differenced quantity."""


@dataclass(frozen=True)
class MaterialParameters:
    mu_T: float = 1.0
    mu_R: float = 1.0
    rho_T: float = 1.0
    rho_R: float = 1.0
    gamma_T: float = 1.0
    gamma_R: float = 1.0
    A: tuple | None = None      # anisotropic torsion modulus A_ij (replaces mu_T)
    rho: tuple | None = None    # anisotropic inertia rho_ij (replaces rho_T)

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("A", "rho"):
                if v is not None:
                    m = np.asarray(v, dtype=float)
                    if m.ndim != 2 or m.shape[0] != m.shape[1]:
                        raise ParameterError(f"{f.name} must be a square matrix")
                    if not np.allclose(m, m.T):
                        raise ParameterError(f"{f.name} must be symmetric")
                    if np.linalg.eigvalsh(m).min() < -1e-12:
                        raise ParameterError(f"{f.name} must be positive semidefinite")
                    object.__setattr__(self, f.name, tuple(map(tuple, m.tolist())))
                continue
            if not np.isfinite(v) or v < 0:
                raise ParameterError(f"{f.name} must be finite and non-negative, got {v}")

    @classmethod
    def from_mapping(cls, values: dict) -> "MaterialParameters":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ParameterError(f"unknown material parameter(s): {', '.join(sorted(unknown))}")
        return cls(**values)

    def require_dissipative(self):
        if self.gamma_T <= 0 or self.gamma_R <= 0:
            raise ParameterError("dissipative extension needs gamma_T > 0 and gamma_R > 0")


def _modulus(f: Form, scalar: float, matrix: tuple | None) -> Form:
    """scalar * f, or the frame-index mixing sum_j M_ij f^j when a matrix is given."""
    if matrix is None:
        return scalar * f
    m = np.asarray(matrix)
    if f.kind != VECTOR or m.shape != (f.dim, f.dim):
        raise ParameterError(f"anisotropic modulus of shape {m.shape} does not fit the frame")
    out = {}
    for ((j,), b), c in f.comps.items():
        for i in range(f.dim):
            if m[i, j] != 0:
                key = ((i,), b)
                out[key] = out[key] + m[i, j] * c if key in out else m[i, j] * c
    return Form(f.degree, f.kind, f.space, out)


def excitations(state: CosseratState, params: MaterialParameters) -> tuple[Form, Form]:
    """H = mu_T *T (or A_ij *T^j) and O = mu_R *Omega."""
    H = _modulus(hodge_star(state.torsion), params.mu_T, params.A)
    O = params.mu_R * hodge_star(state.curvature)
    return H, O


def momenta(state: CosseratState, params: MaterialParameters) -> tuple[Form, Form]:
    """P = rho_T *J (or rho_ij *J^j) and Q = rho_R *K."""
    return (_modulus(hodge_star(state.J), params.rho_T, params.rho),
            params.rho_R * hodge_star(state.K))


def momentum_rates(state: CosseratState, params: MaterialParameters) -> tuple[Form, Form]:
    """(dP/dt, dQ/dt) from the second rates carried by the state."""
    if state.analytic:
        P, Q = momenta(state, params)
        return P.time_derivative(), Q.time_derivative()
    if state.Jdot is None or state.Kdot is None:
        raise InsufficientDataError("grid state carries no Jdot/Kdot; momentum rates unavailable")
    return (_modulus(hodge_star(state.Jdot), params.rho_T, params.rho),
            params.rho_R * hodge_star(state.Kdot))


def dissipative_currents(state: CosseratState, params: MaterialParameters,
                         coupling: str = "literal") -> tuple[Form, Form]:
    """Linear dissipative currents (Sigma_dis, M_dis).

    ``coupling="literal"`` gives gamma_T J and gamma_R K as written.
    ``coupling="hodge"`` gives gamma_T *J and gamma_R *K, which have the
    degree of the stresses in any dimension and make J.Sigma_dis the
    dissipation density times the volume form.
    """
    if coupling == "literal":
        return params.gamma_T * state.J, params.gamma_R * state.K
    if coupling == "hodge":
        return params.gamma_T * hodge_star(state.J), params.gamma_R * hodge_star(state.K)
    raise ValueError(f"unknown coupling {coupling!r}")


def dissipation_density(state: CosseratState, params: MaterialParameters) -> Form:
    """R = gamma_T <J,J> + gamma_R <K,K> as a 0-form."""
    if params.gamma_T < 0 or params.gamma_R < 0:
        raise ParameterError("dissipation coefficients must be non-negative")
    return params.gamma_T * inner(state.J, state.J) + params.gamma_R * inner(state.K, state.K)


def energy_density(state: CosseratState, params: MaterialParameters) -> Form:
    """E = 1/2 (J.P + K.Q + T.H + Omega.O) expressed as a 0-form."""
    H, O = excitations(state, params)
    P, Q = momenta(state, params)
    vol = pair(state.J, P) + pair(state.K, Q) + pair(state.torsion, H) + pair(state.curvature, O)
    return 0.5 * hodge_star(vol)


def energy_flux(state: CosseratState, params: MaterialParameters) -> Form:
    """Power flux F = -(J.H + <K|O>), an (n-1)-form; its d is the flux divergence."""
    H, O = excitations(state, params)
    return -(pair(state.J, H) + pair(state.K, O))


def external_power(state: CosseratState, sigma: Form, M: Form) -> Form:
    """P_ext = J.Sigma + <K|M> as a 0-form (sources of stress degree n-1)."""
    return hodge_star(pair(state.J, sigma) + pair(state.K, M))


def total_energy(state: CosseratState, params: MaterialParameters) -> float:
    """Domain integral of E on a grid state (rectangle rule; exact for periodic trig fields)."""
    if state.analytic:
        raise ValueError("total_energy needs a grid state")
    E = energy_density(state, params).get((), ())
    grid = state.space
    weights = np.ones(grid.shape)
    for ax, per in enumerate(grid.periodic):
        if not per:
            w = np.ones(grid.shape[ax])
            w[0] = w[-1] = 0.5
            shape = [1] * grid.dim
            shape[ax] = -1
            weights = weights * w.reshape(shape)
    return float(np.sum(np.asarray(E) * weights) * np.prod(grid.spacing))


def energy_balance_residual(trajectory: Sequence[CosseratState], params: MaterialParameters,
                            P_ext: Callable[[CosseratState], Form] | None = None) -> list[Form]:
    """Pointwise residual dE/dt + dF - P_ext + R at each interior snapshot.

    dE/dt is a centred difference over neighbouring snapshots (uniform time
    step required). ``P_ext(state)`` returns the external power 0-form;
    ``None`` means no external loading.
    """
    states = list(getattr(trajectory, "states", trajectory))
    if len(states) < 3:
        raise InsufficientDataError("energy balance needs at least 3 snapshots")
    if any(s.analytic for s in states):
        raise ValueError("energy balance differences grid snapshots; sample analytic states first")
    times = np.array([s.t for s in states])
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError("energy balance needs uniformly spaced snapshots")
    dt = steps[0]
    energies = [energy_density(s, params) for s in states]
    out = []
    for k in range(1, len(states) - 1):
        s = states[k]
        dE = (energies[k + 1] - energies[k - 1]) * (1.0 / (2 * dt))
        div = hodge_star(exterior_derivative(energy_flux(s, params)))
        res = dE + div + dissipation_density(s, params)
        if P_ext is not None:
            res = res - P_ext(s)
        out.append(res)
    return out
