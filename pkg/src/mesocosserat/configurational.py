"""Noether sector: configurational currents, sources and line-defect forces.

For a material generator X write f = i_X e and Df = D(i_X e). With the
quadratic Lagrangian

    L = 1/2 (T.H + <Omega|O>) - 1/2 (J.P + <K|Q>)

and sources (Sigma, M), the currents are

    Phi_X = i_X T . H + <i_X Omega | O>
    S_X   = i_X L + <i_X K | Q> - f.Sigma - Df.H - Phi_X
    Pi_X  = (i_X T + Df) . P + <i_X Omega | Q>
    R_X   = i_X T . Sigma + <i_X Omega | M>

and satisfy, whenever the Euler-Lagrange balances hold,

    dS_X + d/dt Pi_X = R_X - B_X - F^dis_X

with the transport correction

    B_X = f . D Sigma - <i_X K | D Q> - (i_X K ^ e) . P

and, for dissipative sources, F^dis_X = (i_X T + Df) . Sigma_dis + <i_X Omega | M_dis>.
B_X vanishes for constant generators on states whose stresses are
covariantly divergence-free and whose rotation rate does not act on the
generator. The sign of S_X follows the Eshelby convention (S = L - ...).

The defect-conjugate current obeys the exact lemma

    dPhi_X = d(i_X W) - R_X - (Omega f) . H + i_X T . dP/dt + <i_X Omega | dQ/dt>

with W = 1/2 (T.H + <Omega|O>) the static energy form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .balance import SourceFields, _eval_kwargs, induced_sources
from .constitutive import MaterialParameters, excitations, momenta, momentum_rates
from .forms import (
    Form,
    VectorField,
    covariant_derivative,
    coordinate_form,
    covariant_lie_derivative,
    exterior_derivative,
    interior_product,
    pair,
    wedge,
)
from .kinematics import CosseratState, transport_rhs
from .report import ResidualReport

ANALYTIC_TOL = 1e-8
_PHI_SIGN = 1.0  # mutation-test hook, see suite.inject_sign_error


class DegenerateGeneratorError(ValueError):
    """Rotation generator with A == B."""


@dataclass(frozen=True)
class NoetherCurrents:
    """Currents for one generator.

    For a translation E_A: ``S`` is S_A, ``Phi`` is Phi_A, ``S_ext`` is
    S_A + Phi_A. For a rotation J_AB the same slots hold the moment current
    M_AB, the defect-conjugate rotational current Psi_AB and M_AB + Psi_AB.
    """

    generator: VectorField
    S: Form
    Pi: Form
    Phi: Form
    S_ext: Form
    R: Form
    B: Form
    F_dis: Form | None = None


def _generator(state: CosseratState, A) -> VectorField:
    if isinstance(A, VectorField):
        return A
    return VectorField.basis_vector(state.space, int(A))


def _ctx(state: CosseratState, params: MaterialParameters):
    H, O = excitations(state, params)
    P, Q = momenta(state, params)
    return H, O, P, Q


def lagrangian(state: CosseratState, params: MaterialParameters) -> Form:
    """L = 1/2 (T.H + <Omega|O>) - 1/2 (J.P + <K|Q>), an n-form."""
    H, O, P, Q = _ctx(state, params)
    W = 0.5 * (pair(state.torsion, H) + pair(state.curvature, O))
    return W - 0.5 * (pair(state.J, P) + pair(state.K, Q))


def translational_source(state: CosseratState, sources: SourceFields, A,
                         index_order: str = "ij") -> Form:
    """R_X = i_X T . Sigma + <i_X Omega | M>.

    ``index_order="ji"`` pairs the rotational term with the transposed couple
    stress, <i_X Omega | M^T>, which flips the sign of that term for an
    antisymmetric M. The balances use ``"ij"``.
    """
    X = _generator(state, A)
    M = sources.M
    if index_order == "ji":
        M = M.transpose()
    elif index_order != "ij":
        raise ValueError(f"index_order must be 'ij' or 'ji', got {index_order!r}")
    return (pair(interior_product(X, state.torsion), sources.sigma)
            + pair(interior_product(X, state.curvature), M))


def currents(state: CosseratState, params: MaterialParameters, sources: SourceFields,
             X: VectorField) -> NoetherCurrents:
    """All configurational currents for the generator ``X``."""
    H, O, P, Q = _ctx(state, params)
    e, w, T, Om, K = state.e, state.omega, state.torsion, state.curvature, state.K
    i = lambda a: interior_product(X, a)
    f = i(e)
    Df = covariant_derivative(f, w)
    iT, iOm = i(T), i(Om)
    Phi = pair(iT, H) + pair(iOm, O)
    S = (i(lagrangian(state, params)) + pair(i(K), Q)
         - wedge(f, sources.sigma, mode="dot") - pair(Df, H) - _PHI_SIGN * Phi)
    Pi = pair(iT + Df, P) + pair(iOm, Q)
    R = pair(iT, sources.sigma) + pair(iOm, sources.M)
    B = (wedge(f, covariant_derivative(sources.sigma, w), mode="dot")
         - pair(i(K), covariant_derivative(Q, w))
         - pair(wedge(i(K), e), P))
    F_dis = None
    if sources.sigma_dis is not None:
        F_dis = pair(iT + Df, sources.sigma_dis) + pair(iOm, sources.M_dis)
    return NoetherCurrents(X, S, Pi, Phi, S + Phi, R, B, F_dis)


def translational_currents(state: CosseratState, params: MaterialParameters,
                           sources: SourceFields | None, A) -> NoetherCurrents:
    """Currents for the translation generator E_A (A an axis index or a VectorField)."""
    sources = sources or induced_sources(state, params)
    return currents(state, params, sources, _generator(state, A))


def momentum_current_rate(state: CosseratState, params: MaterialParameters, X: VectorField) -> Form:
    """d/dt Pi_X.

    Analytic states differentiate the closure directly. Grid states use the
    product rule with dT/dt = DJ + K^e, dOmega/dt = DK and
    d/dt D(i_X e) = D(i_X J) + K i_X e, which hold exactly for the discrete
    operators too.
    """
    H, O, P, Q = _ctx(state, params)
    i = lambda a: interior_product(X, a)
    f = i(state.e)
    Df = covariant_derivative(f, state.omega)
    if state.analytic:
        Pi = pair(i(state.torsion) + Df, P) + pair(i(state.curvature), Q)
        return Pi.time_derivative()
    dP, dQ = momentum_rates(state, params)
    dT, dOm = transport_rhs(state)
    dDf = covariant_derivative(i(state.J), state.omega) + wedge(state.K, f)
    return (pair(i(dT) + dDf, P) + pair(i(state.torsion) + Df, dP)
            + pair(i(dOm), Q) + pair(i(state.curvature), dQ))


def _default_tol(state):
    return ANALYTIC_TOL if state.analytic else None


def _on_shell_warning(state, params, sources, kw):
    ref = induced_sources(state, params)
    sig = sources.sigma - (sources.sigma_dis if sources.sigma_dis is not None else 0 * ref.sigma)
    M = sources.M - (sources.M_dis if sources.M_dis is not None else 0 * ref.M)
    gap = max((sig - ref.sigma).sup_norm(**kw), (M - ref.M).sup_norm(**kw))
    scale = max(1.0, ref.sigma.sup_norm(**kw), ref.M.sup_norm(**kw))
    if gap > 1e-8 * scale:
        warnings.warn(f"sources are off shell (gap {gap:.3e}); the Noether identity is not expected to hold",
                      stacklevel=3)


def _balance_report(state, params, sources, X, tol, points, prefix="") -> tuple[NoetherCurrents, ResidualReport]:
    kw = _eval_kwargs(state, points)
    cur = currents(state, params, sources, X)
    dPi = momentum_current_rate(state, params, X)
    dS = exterior_derivative(cur.S)
    main = dS + dPi - cur.R + cur.B
    if cur.F_dis is not None:
        main = main + cur.F_dis
    rep = ResidualReport()
    rep.add_form(prefix + "balance", main, tol=tol, **kw)
    # literal statements, kept for information
    rep.add_form(prefix + "literal_split", dS + dPi - cur.R, gating=False, **kw)
    rep.add_form(prefix + "literal_extended", exterior_derivative(cur.S_ext) + dPi, gating=False, **kw)
    rep.add_form(prefix + "transport_correction", cur.B, gating=False, **kw)
    rep.add_form(prefix + "source", cur.R, gating=False, **kw)
    return cur, rep


def noether_translation_residual(state: CosseratState, params: MaterialParameters, A,
                                 sources: SourceFields | None = None, tol: float | None = None,
                                 points=None) -> ResidualReport:
    """Residual of dS_A + d/dt Pi_A - R_A + B_A (+ F^dis_A) = 0.

    ``balance`` is gating. ``literal_split`` (dS + dPi/dt - R) and
    ``literal_extended`` (dS_ext + dPi/dt) are reported without gating:
    they close only when the transport correction vanishes.
    """
    kw = _eval_kwargs(state, points)
    if sources is None:
        sources = induced_sources(state, params)
    else:
        _on_shell_warning(state, params, sources, kw)
    tol = _default_tol(state) if tol is None else tol
    return _balance_report(state, params, sources, _generator(state, A), tol, points)[1]


def phi_cancellation_check(state: CosseratState, params: MaterialParameters, A,
                           sources: SourceFields | None = None, tol: float | None = None,
                           points=None) -> ResidualReport:
    """Term-by-term expansion of dPhi_X.

    Leibniz step: dPhi = D(i T).H - i T.DH + <D i Omega|O> - <i Omega|DO>;
    Cartan step: D(i T) = L^D_X T - i DT, with DT = Omega ^ e and DOmega = 0;
    closure: dPhi = d(i W) - R - (Omega f).H + i T.dP/dt + <i Omega|dQ/dt>
    with R built from the induced sources.
    """
    kw = _eval_kwargs(state, points)
    tol = _default_tol(state) if tol is None else tol
    X = _generator(state, A)
    sources = sources or induced_sources(state, params)
    H, O, P, Q = _ctx(state, params)
    dP, dQ = momentum_rates(state, params)
    w, T, Om = state.omega, state.torsion, state.curvature
    i = lambda a: interior_product(X, a)
    iT, iOm = i(T), i(Om)
    Phi = pair(iT, H) + pair(iOm, O)
    dPhi = exterior_derivative(Phi)

    leibniz = (pair(covariant_derivative(iT, w), H) - pair(iT, covariant_derivative(H, w))
               + pair(covariant_derivative(iOm, w), O) - pair(iOm, covariant_derivative(O, w)))
    bianchi_T = covariant_derivative(T, w) - wedge(Om, state.e)
    # D(i T) = L^D_X T - i(DT), with the Bianchi identity DT = Omega ^ e inserted
    cartan = covariant_derivative(iT, w) - (covariant_lie_derivative(X, T, w) - i(wedge(Om, state.e)))
    f = i(state.e)
    W = 0.5 * (pair(T, H) + pair(Om, O))
    R = pair(iT, sources.sigma) + pair(iOm, sources.M)
    closure = exterior_derivative(i(W)) - R - pair(wedge(Om, f), H) + pair(iT, dP) + pair(iOm, dQ)

    rep = ResidualReport()
    rep.add_form("leibniz", dPhi - leibniz, tol=tol, **kw)
    if state.dim == 3:
        rep.add_form("bianchi_T", bianchi_T, tol=tol, gating=state.analytic, **kw)
        rep.add_form("bianchi_Omega", covariant_derivative(Om, w), tol=tol, gating=state.analytic, **kw)
    rep.add_form("cartan", cartan, tol=tol, gating=state.analytic, **kw)
    rep.add_form("cancellation", dPhi - closure, tol=tol, **kw)
    rep.add_form("literal_dPhi_equals_R", dPhi - R, gating=False, **kw)
    for name, term in (("dPhi", dPhi), ("D_iT.H", pair(covariant_derivative(iT, w), H)),
                       ("iT.DH", pair(iT, covariant_derivative(H, w))),
                       ("D_iOmega.O", pair(covariant_derivative(iOm, w), O)),
                       ("iOmega.DO", pair(iOm, covariant_derivative(O, w))), ("R", R)):
        rep.add_form("term:" + name, term, gating=False, **kw)
    return rep


def rotational_currents_and_residual(state: CosseratState, params: MaterialParameters, pair_AB,
                                     sources: SourceFields | None = None, tol: float | None = None,
                                     points=None) -> tuple[NoetherCurrents, ResidualReport]:
    """Moment balance for the rotation generator J_AB = X_A E_B - X_B E_A.

    The moment current M_AB is the configurational current of J_AB; it
    splits into the orbital part X_A S_B - X_B S_A and the coframe term
    -(theta_A f_B - theta_B f_A).H with theta_A = dX_A, so that

        dM_AB = theta_A ^ S_B - theta_B ^ S_A + X_A dS_B - X_B dS_A + ...

    Reported: ``balance`` (dM + dPi_AB/dt - R_AB + B_AB = 0), ``decomposition``
    (M_AB against the orbital split) and ``source_antisymmetry``
    (R_AB + R_BA).
    """
    A, B = pair_AB
    if A == B:
        raise DegenerateGeneratorError("rotation generator needs A != B")
    kw = _eval_kwargs(state, points)
    tol = _default_tol(state) if tol is None else tol
    sources = sources or induced_sources(state, params)
    X = VectorField.rotation(state.space, A, B)
    cur, rep = _balance_report(state, params, sources, X, tol, points)
    H = excitations(state, params)[0]
    cA = currents(state, params, sources, _generator(state, A))
    cB = currents(state, params, sources, _generator(state, B))
    XA, XB = state.space.coordinate(A), state.space.coordinate(B)
    thA, thB = coordinate_form(state.space, A), coordinate_form(state.space, B)
    fA, fB = interior_product(cA.generator, state.e), interior_product(cB.generator, state.e)
    lam = pair(wedge(thA, fB) - wedge(thB, fA), H)
    split = cB.S * XA - cA.S * XB - lam
    rep.add_form("decomposition", cur.S - split, tol=tol, **kw)
    R_BA = translational_source(state, sources, VectorField.rotation(state.space, B, A))
    rep.add_form("source_antisymmetry", cur.R + R_BA, tol=tol, **kw)
    return cur, rep


# --------------------------------------------------------------------------- #
# line defects
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class LineDefect:
    """Concentrated line defect: Burgers vector b^A, Frank tensor kappa^AB."""

    burgers: np.ndarray
    frank: np.ndarray
    position: np.ndarray = None
    direction: np.ndarray = None

    def __post_init__(self):
        b = np.asarray(self.burgers, dtype=float)
        k = np.asarray(self.frank, dtype=float)
        n = b.shape[0]
        if k.shape != (n, n):
            raise ValueError(f"Frank tensor must be {n}x{n}")
        if not np.allclose(k, -k.T, atol=0):
            raise ValueError("Frank tensor must be antisymmetric")
        object.__setattr__(self, "burgers", b)
        object.__setattr__(self, "frank", k)
        pos = np.zeros(n) if self.position is None else np.asarray(self.position, dtype=float)
        object.__setattr__(self, "position", pos)
        if self.direction is not None:
            object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))


def line_defect_force(defect: LineDefect, sigma: np.ndarray, M: np.ndarray) -> np.ndarray:
    """f_A = b^B Sigma_BA + kappa^BC M^CB_A.

    ``sigma[B, A]`` holds Sigma_BA and ``M[C, B, A]`` holds M^CB_A.
    """
    sigma = np.asarray(sigma, dtype=float)
    M = np.asarray(M, dtype=float)
    return defect.burgers @ sigma + np.einsum("bc,cba->a", defect.frank, M)


def line_defect_moment(defect: LineDefect, X: np.ndarray, sigma: np.ndarray,
                       M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """m_CD = b^A (X_C Sigma_AD - X_D Sigma_AC) + kappa^AB (X_C M^BA_D - X_D M^BA_C)
    and its axial vector m_E = 1/2 eps_ECD m_CD (3D)."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] != 3:
        raise ValueError("the configurational moment needs the 3D index set")
    sigma = np.asarray(sigma, dtype=float)
    M = np.asarray(M, dtype=float)
    bS = np.einsum("a,ad->d", defect.burgers, sigma)
    kM = np.einsum("ab,bad->d", defect.frank, M)
    v = bS + kM
    m = np.outer(X, v) - np.outer(v, X)
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
    axial = 0.5 * np.einsum("ecd,cd->e", eps, m)
    return m, axial
