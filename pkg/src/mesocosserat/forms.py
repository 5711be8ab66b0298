"""Differential-form algebra on 2D/3D Euclidean space.

Forms carry a value kind (scalar, frame vector, frame matrix) and are backed
either by sympy expressions in ``(t, x, y[, z])`` ("analytic") or by arrays of
samples on a structured :class:`Grid`. Both backings share one operator API:
:func:`wedge`, :func:`exterior_derivative`, :func:`hodge_star`,
:func:`interior_product`, :func:`covariant_derivative` and
:func:`covariant_lie_derivative`.

Components are stored sparsely in a dict keyed by ``(value_index, basis)``
where ``basis`` is a strictly increasing tuple of axis indices (``(0, 1)`` is
dx^dy) and ``value_index`` is ``()``, ``(i,)`` or ``(i, j)``. Missing keys are
zero. Matrix values are kept as full n x n frames so that non-antisymmetric
intermediates such as ``e^i ^ H_j`` are representable; connections and
curvatures are built from axial storage (:func:`so_matrix`) so that
antisymmetry holds by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Callable, Iterable, Mapping

import numpy as np
import sympy as sp

SCALAR, VECTOR, MATRIX = "scalar", "vector", "matrix"
KINDS = (SCALAR, VECTOR, MATRIX)


class KindMismatchError(TypeError):
    """Raised when two value kinds cannot be composed."""


class DegreeError(ValueError):
    """Raised when a form has the wrong degree for an operation."""


class SpaceMismatchError(ValueError):
    """Raised when forms live on different backings."""


# --------------------------------------------------------------------------- #
# backings
# --------------------------------------------------------------------------- #

T_SYM = sp.Symbol("t", real=True)
X_SYMS = sp.symbols("x y z", real=True)


class AnalyticSpace:
    """Closed-form backing: coefficients are sympy expressions."""

    backing = "analytic"

    def __init__(self, dim: int):
        if dim not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {dim}")
        self.dim = dim
        self.t = T_SYM
        self.coords = X_SYMS[:dim]

    def __eq__(self, other):
        return isinstance(other, AnalyticSpace) and other.dim == self.dim

    def __hash__(self):
        return hash(("analytic", self.dim))

    def __repr__(self):
        return f"AnalyticSpace(dim={self.dim})"

    def coordinate(self, axis: int):
        return self.coords[axis]

    def diff(self, c, axis: int):
        return sp.diff(c, self.coords[axis])

    def time_diff(self, c):
        return sp.diff(c, self.t)

    def is_zero(self, c) -> bool:
        return c == 0

    def coerce(self, c):
        return sp.sympify(c)

    def evaluate(self, c, t: float, points) -> np.ndarray:
        """Evaluate ``c`` at time ``t`` on ``points`` (array of shape (dim, ...)).

        Walks the expression DAG with numpy, memoising shared subexpressions
        for the current ``(t, points)`` pair; this is much cheaper than code
        generation for the large expressions produced by the form algebra.
        """
        pts = np.asarray(points, dtype=float)
        if pts[0].size > 20000:
            # large grids: no persistent memo, intermediate arrays would pile up
            memo = {self.t: np.full(pts.shape[1:], float(t))}
            memo.update({x: pts[i] for i, x in enumerate(self.coords)})
            return np.broadcast_to(np.asarray(_numeric(sp.sympify(c), memo), dtype=float), pts.shape[1:]).copy()
        key = (float(t), pts.shape, pts.tobytes())
        if getattr(self, "_memo_key", None) != key:
            self._memo_key = key
            self._memo = {self.t: np.full(pts.shape[1:], float(t))}
            self._memo.update({x: pts[i] for i, x in enumerate(self.coords)})
        out = _numeric(sp.sympify(c), self._memo)
        return np.broadcast_to(np.asarray(out, dtype=float), pts.shape[1:]).copy()


_UNARY = {sp.sin: np.sin, sp.cos: np.cos, sp.exp: np.exp, sp.tan: np.tan,
          sp.sinh: np.sinh, sp.cosh: np.cosh, sp.log: np.log}


def _numeric(expr, memo: dict):
    """Memoised numpy evaluation of a sympy expression tree."""
    hit = memo.get(expr)
    if hit is not None:
        return hit
    if expr.is_Number or expr.is_NumberSymbol:
        val = float(expr)
    elif expr.is_Add:
        args = expr.args
        val = _numeric(args[0], memo)
        for a in args[1:]:
            val = val + _numeric(a, memo)
    elif expr.is_Mul:
        args = expr.args
        val = _numeric(args[0], memo)
        for a in args[1:]:
            val = val * _numeric(a, memo)
    elif expr.is_Pow:
        base, ex = expr.args
        b = _numeric(base, memo)
        if ex.is_Integer:
            val = b ** int(ex)
        else:
            val = b ** _numeric(ex, memo)
    elif expr.func in _UNARY:
        val = _UNARY[expr.func](_numeric(expr.args[0], memo))
    else:
        syms = sorted(expr.free_symbols, key=str)
        fn = sp.lambdify(syms, expr, modules="numpy")
        val = fn(*(memo[s] for s in syms))
    memo[expr] = val
    return val


@dataclass(frozen=True)
class Grid:
    """Collocated structured grid on a box.

    Non-periodic axes include both end points, so spacing is
    ``extent / (points - 1)``; periodic axes drop the right end point and use
    ``extent / points``.
    """

    dim: int
    points: tuple[int, ...]
    lower: tuple[float, ...] = ()
    upper: tuple[float, ...] = ()
    periodic: tuple[bool, ...] = ()

    backing = "grid"

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.dim}")
        pts = tuple(int(p) for p in self.points)
        if len(pts) == 1:
            pts = pts * self.dim
        if len(pts) != self.dim or any(p < 3 for p in pts):
            raise ValueError(f"need {self.dim} axes with >= 3 points each, got {self.points}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "lower", tuple(self.lower) or (0.0,) * self.dim)
        object.__setattr__(self, "upper", tuple(self.upper) or (1.0,) * self.dim)
        object.__setattr__(self, "periodic", tuple(self.periodic) or (False,) * self.dim)

    @classmethod
    def uniform(cls, dim: int, n: int, periodic: bool = False) -> "Grid":
        return cls(dim, (n,) * dim, periodic=(periodic,) * dim)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(
            (hi - lo) / (n if per else n - 1)
            for lo, hi, n, per in zip(self.lower, self.upper, self.points, self.periodic)
        )

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(
            lo + h * np.arange(n)
            for lo, h, n in zip(self.lower, self.spacing, self.points)
        )

    @cached_property
    def mesh(self) -> np.ndarray:
        """Coordinates, shape ``(dim, *points)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"))

    def coordinate(self, axis: int) -> np.ndarray:
        return self.mesh[axis]

    def diff(self, c, axis: int) -> np.ndarray:
        if np.ndim(c) == 0:
            return np.zeros(self.shape)
        h = self.spacing[axis]
        if self.periodic[axis]:
            return (np.roll(c, -1, axis=axis) - np.roll(c, 1, axis=axis)) / (2.0 * h)
        return np.gradient(c, h, axis=axis, edge_order=2)

    def time_diff(self, c):
        raise NotImplementedError("grid-backed forms carry no time derivative data")

    def is_zero(self, c) -> bool:
        return np.ndim(c) == 0 and c == 0

    def coerce(self, c):
        return np.broadcast_to(np.asarray(c, dtype=float), self.shape).copy()

    def evaluate(self, c, t=None, points=None) -> np.ndarray:
        return np.broadcast_to(np.asarray(c, dtype=float), self.shape)


Space = AnalyticSpace | Grid


# --------------------------------------------------------------------------- #
# basis bookkeeping
# --------------------------------------------------------------------------- #

def basis(dim: int, degree: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(dim), degree))


def _perm_sign(seq: Iterable[int]) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _wedge_basis(I: tuple[int, ...], J: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    if set(I) & set(J):
        return 0, ()
    cat = I + J
    return _perm_sign(cat), tuple(sorted(cat))


def _value_indices(kind: str, n: int) -> list[tuple[int, ...]]:
    if kind == SCALAR:
        return [()]
    if kind == VECTOR:
        return [(i,) for i in range(n)]
    return [(i, j) for i in range(n) for j in range(n)]


# --------------------------------------------------------------------------- #
# the form type
# --------------------------------------------------------------------------- #

@dataclass(frozen=True, eq=False)
class Form:
    """An immutable p-form with scalar, frame-vector or frame-matrix values."""

    degree: int
    kind: str
    space: Space
    comps: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown value kind {self.kind!r}")
        n = self.space.dim
        if self.degree < 0:
            raise DegreeError("negative degree")
        if self.degree > n and self.comps:
            raise DegreeError(f"degree {self.degree} > dim {n} must be the zero form")
        valid = set(_value_indices(self.kind, n))
        bases = set(basis(n, self.degree)) if self.degree <= n else set()
        clean = {}
        for (v, b), c in self.comps.items():
            if v not in valid or b not in bases:
                raise ValueError(f"bad component key {(v, b)} for {self.kind} {self.degree}-form")
            if not self.space.is_zero(c):
                clean[(v, b)] = c
        object.__setattr__(self, "comps", clean)

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, degree: int, kind: str, space: Space) -> "Form":
        return cls(degree, kind, space, {})

    @classmethod
    def scalar(cls, space: Space, coeffs: Mapping[tuple[int, ...], object], degree: int | None = None) -> "Form":
        """Scalar form from ``{basis: coefficient}``."""
        if degree is None:
            degree = len(next(iter(coeffs))) if coeffs else 0
        return cls(degree, SCALAR, space, {((), b): space.coerce(c) if space.backing == "grid" else sp.sympify(c)
                                             for b, c in coeffs.items()})

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def n_basis(self) -> int:
        return comb(self.dim, self.degree) if self.degree <= self.dim else 0

    def get(self, value_index: tuple[int, ...] = (), b: tuple[int, ...] | None = None):
        if b is None:
            b = tuple(range(self.degree))
        return self.comps.get((tuple(value_index), tuple(b)), 0 if self.space.backing == "analytic" else 0.0)

    def component(self, *value_index: int) -> "Form":
        """Scalar form holding the ``value_index`` entry."""
        vi = tuple(value_index)
        return Form(self.degree, SCALAR, self.space,
                    {((), b): c for (v, b), c in self.comps.items() if v == vi})

    def axial(self):
        """so(2) scalar or so(3) axial-vector components of an antisymmetric matrix form."""
        if self.kind != MATRIX:
            raise KindMismatchError("axial() needs a matrix-valued form")
        if self.dim == 2:
            return {b: self.get((0, 1), b) for b in basis(self.dim, self.degree)}
        # A_ij = -eps_ijk v_k  ->  v_0 = A_21, v_1 = A_02, v_2 = A_10
        return {b: (self.get((2, 1), b), self.get((0, 2), b), self.get((1, 0), b))
                for b in basis(self.dim, self.degree)}

    # arithmetic -----------------------------------------------------------
    def _check_like(self, other: "Form"):
        if not isinstance(other, Form):
            raise TypeError(f"expected Form, got {type(other).__name__}")
        if other.space != self.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")
        if other.kind != self.kind:
            raise KindMismatchError(f"cannot add {self.kind} and {other.kind}")
        if other.degree != self.degree:
            raise DegreeError(f"cannot add degree {self.degree} and {other.degree}")

    def __add__(self, other: "Form") -> "Form":
        self._check_like(other)
        out = dict(self.comps)
        for k, c in other.comps.items():
            out[k] = out[k] + c if k in out else c
        return Form(self.degree, self.kind, self.space, out)

    def __neg__(self) -> "Form":
        return Form(self.degree, self.kind, self.space, {k: -c for k, c in self.comps.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def __mul__(self, s) -> "Form":
        """Multiply by a number or a same-backing scalar coefficient field."""
        if isinstance(s, Form):
            raise TypeError("use wedge() to multiply forms")
        return Form(self.degree, self.kind, self.space, {k: c * s for k, c in self.comps.items()})

    __rmul__ = __mul__

    def map(self, fn: Callable) -> "Form":
        return Form(self.degree, self.kind, self.space, {k: fn(c) for k, c in self.comps.items()})

    def time_derivative(self) -> "Form":
        """Partial time derivative; analytic backing only."""
        return self.map(self.space.time_diff)

    def transpose(self) -> "Form":
        if self.kind != MATRIX:
            raise KindMismatchError("transpose needs a matrix-valued form")
        return Form(self.degree, MATRIX, self.space,
                    {((j, i), b): c for ((i, j), b), c in self.comps.items()})

    # evaluation -----------------------------------------------------------
    def evaluate(self, t: float | None = None, points=None) -> dict:
        """Map each component key to its sampled values."""
        if self.space.backing == "analytic":
            return {k: self.space.evaluate(c, t, points) for k, c in self.comps.items()}
        return {k: np.asarray(c, dtype=float) for k, c in self.comps.items()}

    def sup_norm(self, t: float | None = None, points=None) -> float:
        vals = self.evaluate(t, points)
        return max((float(np.max(np.abs(v))) for v in vals.values()), default=0.0)

    def l2_norm(self, t: float | None = None, points=None) -> float:
        """Root-mean-square over samples, summed over components."""
        vals = self.evaluate(t, points)
        return float(np.sqrt(sum(np.mean(v ** 2) for v in vals.values())))

    def sample(self, grid: Grid, t: float) -> "Form":
        """Sample an analytic form onto ``grid`` at time ``t``."""
        if self.space.backing != "analytic":
            raise SpaceMismatchError("sample() needs an analytic form")
        if grid.dim != self.dim:
            raise SpaceMismatchError("grid dimension differs from form dimension")
        return Form(self.degree, self.kind, grid,
                    {k: grid.coerce(self.space.evaluate(c, t, grid.mesh)) for k, c in self.comps.items()})

    def __repr__(self):
        return f"Form(degree={self.degree}, kind={self.kind}, space={self.space!r}, ncomps={len(self.comps)})"


def coordinate_form(space: Space, axis: int, kind: str = SCALAR) -> Form:
    """The basis 1-form d(x_axis)."""
    return Form(1, SCALAR, space, {((), (axis,)): 1 if space.backing == "analytic" else space.coerce(1.0)})


def zero_like(f: Form, degree: int | None = None, kind: str | None = None) -> Form:
    return Form.zero(f.degree if degree is None else degree, kind or f.kind, f.space)


def frame_vector(space: Space, forms: list[Form]) -> Form:
    """Stack ``n`` scalar p-forms into a frame-vector-valued p-form."""
    if len(forms) != space.dim:
        raise ValueError(f"need {space.dim} components, got {len(forms)}")
    deg = forms[0].degree
    comps = {}
    for i, f in enumerate(forms):
        if f.kind != SCALAR or f.degree != deg:
            raise KindMismatchError("frame_vector needs scalar forms of one degree")
        comps.update({((i,), b): c for ((), b), c in f.comps.items()})
    return Form(deg, VECTOR, space, comps)


def frame_matrix(space: Space, rows: list[list[Form]]) -> Form:
    n = space.dim
    deg = rows[0][0].degree
    comps = {}
    for i in range(n):
        for j in range(n):
            f = rows[i][j]
            if f.kind != SCALAR or f.degree != deg:
                raise KindMismatchError("frame_matrix needs scalar forms of one degree")
            comps.update({((i, j), b): c for ((), b), c in f.comps.items()})
    return Form(deg, MATRIX, space, comps)


def so_matrix(space: Space, axial: Form | list[Form]) -> Form:
    """Antisymmetric matrix form from axial storage.

    2D: a single scalar form ``w`` gives ``W[0,1] = w, W[1,0] = -w``.
    3D: three scalar forms ``v`` give ``W_ij = -eps_ijk v_k``.
    """
    n = space.dim
    if n == 2:
        w = axial if isinstance(axial, Form) else axial[0]
        zero = zero_like(w)
        return frame_matrix(space, [[zero, w], [-w, zero]])
    v = list(axial)
    zero = zero_like(v[0])
    return frame_matrix(space, [[zero, -v[2], v[1]], [v[2], zero, -v[0]], [-v[1], v[0], zero]])


# --------------------------------------------------------------------------- #
# vector fields
# --------------------------------------------------------------------------- #

@dataclass(frozen=True, eq=False)
class VectorField:
    """Material vector field with one coefficient per spatial axis."""

    space: Space
    components: tuple

    def __post_init__(self):
        if len(self.components) != self.space.dim:
            raise ValueError(f"need {self.space.dim} components, got {len(self.components)}")

    @classmethod
    def basis_vector(cls, space: Space, axis: int) -> "VectorField":
        """The constant generator E_A = d/dX_A."""
        return cls(space, tuple(1 if a == axis else 0 for a in range(space.dim)))

    @classmethod
    def rotation(cls, space: Space, a: int, b: int) -> "VectorField":
        """J_AB = X_A E_B - X_B E_A."""
        if a == b:
            raise ValueError("degenerate rotation generator: A == B")
        comps = [0] * space.dim
        comps[b] = space.coordinate(a)
        comps[a] = -space.coordinate(b)
        return cls(space, tuple(comps))

    def is_zero(self) -> bool:
        return all(self.space.is_zero(c) if not isinstance(c, int) else c == 0 for c in self.components)

    def __mul__(self, s) -> "VectorField":
        return VectorField(self.space, tuple(c * s for c in self.components))

    __rmul__ = __mul__

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.space, tuple(a + b for a, b in zip(self.components, other.components)))


# --------------------------------------------------------------------------- #
# operators
# --------------------------------------------------------------------------- #

def _result_kind(ka: str, kb: str, mode: str | None) -> str:
    if ka == SCALAR:
        return kb
    if kb == SCALAR:
        return ka
    if (ka, kb) == (MATRIX, VECTOR):
        return VECTOR
    if (ka, kb) == (VECTOR, MATRIX):
        return VECTOR
    if (ka, kb) == (MATRIX, MATRIX):
        return SCALAR if mode == "trace" else MATRIX
    if (ka, kb) == (VECTOR, VECTOR):
        if mode == "dot":
            return SCALAR
        if mode == "outer":
            return MATRIX
        raise KindMismatchError("vector ^ vector needs mode='dot' or mode='outer'")
    raise KindMismatchError(f"cannot wedge {ka} with {kb}")


def _value_product(ka, kb, mode, va, vb, n):
    """Yield (result value index) for a pair of value indices, or None."""
    if ka == SCALAR:
        return vb
    if kb == SCALAR:
        return va
    if (ka, kb) == (MATRIX, VECTOR):
        return (va[0],) if va[1] == vb[0] else None
    if (ka, kb) == (VECTOR, MATRIX):
        return (vb[1],) if va[0] == vb[0] else None
    if (ka, kb) == (MATRIX, MATRIX):
        if mode == "trace":
            return () if va[1] == vb[0] and va[0] == vb[1] else None
        return (va[0], vb[1]) if va[1] == vb[0] else None
    if mode == "dot":
        return () if va == vb else None
    return (va[0], vb[0])


def wedge(a: Form, b: Form, mode: str | None = None) -> Form:
    """Graded wedge product with frame-index contraction.

    Value kinds compose as: scalar with anything scales; matrix ^ vector gives
    ``A^i_k ^ v^k``; vector ^ matrix gives ``v_k ^ B^k_j``; matrix ^ matrix
    composes ``A^i_k ^ B^k_j`` or, with ``mode="trace"``, pairs to
    ``A^i_j ^ B^j_i``; vector ^ vector requires ``mode="dot"`` (``a_i ^ b^i``)
    or ``mode="outer"`` (``a^i ^ b_j``).
    """
    if a.space != b.space:
        raise SpaceMismatchError(f"{a.space} vs {b.space}")
    kind = _result_kind(a.kind, b.kind, mode)
    deg = a.degree + b.degree
    n = a.dim
    if deg > n:
        return Form.zero(deg, kind, a.space)
    out: dict = {}
    for (va, ba), ca in a.comps.items():
        for (vb, bb), cb in b.comps.items():
            v = _value_product(a.kind, b.kind, mode, va, vb, n)
            if v is None:
                continue
            s, bc = _wedge_basis(ba, bb)
            if s == 0:
                continue
            term = ca * cb if s > 0 else -(ca * cb)
            key = (v, bc)
            out[key] = out[key] + term if key in out else term
    return Form(deg, kind, a.space, out)


def exterior_derivative(a: Form) -> Form:
    """Componentwise d; degree-n input returns the zero (n+1)-form."""
    n = a.dim
    if a.degree >= n:
        return Form.zero(a.degree + 1, a.kind, a.space)
    out: dict = {}
    for (v, b), c in a.comps.items():
        for axis in range(n):
            if axis in b:
                continue
            s, bc = _wedge_basis((axis,), b)
            dc = a.space.diff(c, axis)
            term = dc if s > 0 else -dc
            key = (v, bc)
            out[key] = out[key] + term if key in out else term
    return Form(a.degree + 1, a.kind, a.space, out)


def hodge_star(a: Form) -> Form:
    """Euclidean Hodge star with orientation (x, y[, z]), so *(dx^dy) = 1 in 2D."""
    n = a.dim
    if a.degree > n:
        raise DegreeError("degree exceeds dimension")
    out = {}
    for (v, b), c in a.comps.items():
        comp = tuple(i for i in range(n) if i not in b)
        s = _perm_sign(b + comp)
        out[(v, comp)] = c if s > 0 else -c
    return Form(n - a.degree, a.kind, a.space, out)


def interior_product(X: VectorField, a: Form) -> Form:
    """Contraction of ``X`` into the first slot of ``a``."""
    if a.degree == 0:
        raise DegreeError("interior product of a 0-form")
    if X.space != a.space:
        raise SpaceMismatchError(f"{X.space} vs {a.space}")
    out: dict = {}
    for (v, b), c in a.comps.items():
        for pos, axis in enumerate(b):
            xc = X.components[axis]
            if isinstance(xc, (int, float)) and xc == 0:
                continue
            rest = b[:pos] + b[pos + 1:]
            term = c * xc if pos % 2 == 0 else -(c * xc)
            key = (v, rest)
            out[key] = out[key] + term if key in out else term
    return Form(a.degree - 1, a.kind, a.space, out)


def covariant_derivative(a: Form, omega: Form | None) -> Form:
    """Exterior covariant derivative with respect to the connection ``omega``.

    vector:  D a = d a + omega ^ a
    matrix:  D a = d a + omega ^ a - (-1)^p a ^ omega
    scalar:  D a = d a
    For lower-index vectors the same formula applies because ``omega`` is
    antisymmetric in the Euclidean frame.
    """
    da = exterior_derivative(a)
    if omega is None or a.kind == SCALAR:
        return da
    if omega.kind != MATRIX or omega.degree != 1:
        raise KindMismatchError("connection must be a matrix-valued 1-form")
    if a.kind == VECTOR:
        return da + wedge(omega, a)
    sign = -1 if a.degree % 2 == 0 else 1
    return da + wedge(omega, a) + sign * wedge(a, omega)


def covariant_lie_derivative(X: VectorField, a: Form, omega: Form | None) -> Form:
    """L^D_X a = i_X D a + D i_X a."""
    first = interior_product(X, covariant_derivative(a, omega))
    if a.degree == 0:
        return first
    return first + covariant_derivative(interior_product(X, a), omega)


def lie_derivative(X: VectorField, a: Form) -> Form:
    """Ordinary Lie derivative via Cartan's formula."""
    return covariant_lie_derivative(X, a, None)


def sample_points(dim: int, n: int = 10, lower: float = 0.0, upper: float = 1.0) -> np.ndarray:
    """``n**dim`` tensor-product sample points strictly inside the box, shape (dim, N)."""
    axis = lower + (upper - lower) * (np.arange(n) + 0.5) / n
    return np.stack([m.ravel() for m in np.meshgrid(*([axis] * dim), indexing="ij")])


def so_pair(a: Form, b: Form) -> Form:
    """so(n) pairing <A|B> = -1/2 tr(A ^ B).

    For antisymmetric matrices this is the dot product of the axial
    representations, so <W|*W> is a non-negative density.
    """
    return -0.5 * wedge(a, b, mode="trace")


def pair(a: Form, b: Form) -> Form:
    """Natural pairing of two like-valued forms: dot for vectors, :func:`so_pair` for matrices."""
    if a.kind != b.kind:
        raise KindMismatchError(f"cannot pair {a.kind} with {b.kind}")
    if a.kind == VECTOR:
        return wedge(a, b, mode="dot")
    if a.kind == MATRIX:
        return so_pair(a, b)
    return wedge(a, b)


def inner(a: Form, b: Form) -> Form:
    """Pointwise Euclidean inner product <a, b> as a scalar 0-form.

    Sums over basis components and frame indices; antisymmetric matrices
    count each independent (axial) component once.
    """
    if a.degree != b.degree:
        raise DegreeError("inner product needs equal degrees")
    return hodge_star(pair(a, hodge_star(b)))
