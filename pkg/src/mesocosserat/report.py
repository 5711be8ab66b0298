"""Residual bookkeeping and convergence orders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def observed_orders(norms: Sequence[float], ratio: float = 2.0) -> list[float | None]:
    """Pairwise orders log(e_k / e_{k+1}) / log(ratio).

    ``None`` marks a pair where the norm did not decrease (or hit zero).
    """
    out: list[float | None] = []
    for a, b in zip(norms[:-1], norms[1:]):
        if a > 0 and b > 0 and b < a:
            out.append(math.log(a / b) / math.log(ratio))
        else:
            out.append(None)
    return out


def refinement_ratio(resolutions: Sequence[int]) -> float:
    """Spacing ratio between successive node counts (33 -> 65 gives 2)."""
    r = [(b - 1) / (a - 1) for a, b in zip(resolutions[:-1], resolutions[1:])]
    if not np.allclose(r, r[0]):
        raise ValueError(f"resolutions {list(resolutions)} are not uniformly refined")
    return float(r[0])


@dataclass
class Residual:
    sup: float
    l2: float
    tol: float | None = None
    gating: bool = True

    @property
    def passed(self) -> bool:
        return self.tol is None or self.sup <= self.tol


@dataclass
class ResidualReport:
    """Named residual norms, convergence orders and pass flags.

    Non-gating entries are carried for information (e.g. the literal form of
    an identity that is known not to close) and never fail the report.
    """

    residuals: dict[str, Residual] = field(default_factory=dict)
    orders: dict[str, float | None] = field(default_factory=dict)
    order_min: dict[str, float] = field(default_factory=dict)
    notes: dict[str, str] = field(default_factory=dict)

    def add(self, name: str, sup: float, l2: float | None = None, tol: float | None = None,
            gating: bool = True) -> "ResidualReport":
        self.residuals[name] = Residual(float(sup), float(sup if l2 is None else l2), tol, gating)
        return self

    def add_form(self, name: str, form, t=None, points=None, tol=None, gating=True) -> "ResidualReport":
        return self.add(name, form.sup_norm(t, points), form.l2_norm(t, points), tol, gating)

    def add_order(self, name: str, norms: Sequence[float], ratio: float = 2.0,
                  minimum: float | None = None) -> "ResidualReport":
        """Record the finest-pair order from ``norms`` (at least three resolutions)."""
        if len(norms) < 3:
            raise ValueError("convergence orders need at least three resolutions")
        orders = observed_orders(norms, ratio)
        self.orders[name] = orders[-1]
        if minimum is not None:
            self.order_min[name] = minimum
        return self

    def merge(self, other: "ResidualReport", prefix: str = "") -> "ResidualReport":
        for k, v in other.residuals.items():
            self.residuals[prefix + k] = v
        for k, v in other.orders.items():
            self.orders[prefix + k] = v
        for k, v in other.order_min.items():
            self.order_min[prefix + k] = v
        for k, v in other.notes.items():
            self.notes[prefix + k] = v
        return self

    @property
    def pass_flags(self) -> dict[str, bool]:
        flags = {k: r.passed for k, r in self.residuals.items()}
        for k, lo in self.order_min.items():
            o = self.orders.get(k)
            flags[f"order:{k}"] = o is not None and o >= lo
        return flags

    @property
    def failures(self) -> list[str]:
        out = [k for k, r in self.residuals.items() if r.gating and not r.passed]
        out += [f"order:{k}" for k, lo in self.order_min.items()
                if self.orders.get(k) is None or self.orders[k] < lo]
        return sorted(out)

    @property
    def passed(self) -> bool:
        return not self.failures

    def __getitem__(self, name: str) -> Residual:
        return self.residuals[name]

    def to_dict(self) -> dict:
        return {
            "residuals": {
                k: {"sup": r.sup, "l2": r.l2, "tol": r.tol, "gating": r.gating, "passed": r.passed}
                for k, r in sorted(self.residuals.items())
            },
            "orders": {k: self.orders[k] for k in sorted(self.orders)},
            "order_min": {k: self.order_min[k] for k in sorted(self.order_min)},
            "notes": {k: self.notes[k] for k in sorted(self.notes)},
            "passed": self.passed,
            "failures": self.failures,
        }
