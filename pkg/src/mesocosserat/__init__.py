"""Numerical laboratory for mesoscopic Cosserat media written in differential forms.

Coframe and connection fields are held as vector- and so(n)-valued forms on
either a symbolic (sympy) or a structured-grid (numpy) backing. The modules
compute torsion and curvature, constitutive excitations, Euler-Lagrange and
Noether balances as residual reports, and the worked example scenarios.
"""

from .balance import el_residuals, induced_sources
from .constitutive import MaterialParameters
from .forms import AnalyticSpace, Form, Grid, VectorField
from .kinematics import CosseratState, integrate_transport
from .report import ResidualReport

__version__ = "0.1.0"

__all__ = [
    "AnalyticSpace",
    "CosseratState",
    "Form",
    "Grid",
    "MaterialParameters",
    "ResidualReport",
    "VectorField",
    "el_residuals",
    "induced_sources",
    "integrate_transport",
]
