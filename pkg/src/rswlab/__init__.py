"""rswlab: a pseudospectral laboratory for rotating shallow-water models.

Periodic spectral solvers for the Boussinesq-Coriolis system and its
weak-rotation, linear (inertia-gravity), Ostrovsky, KdV and Green-Naghdi
relatives, plus a validation harness that measures the convergence orders
the asymptotic theory predicts.
"""

from .core import (BoussinesqState, DimensionlessParams, Field, GNMediumState,
                   GNState, Grid1D, LinearState, Regime, ScalarWave,
                   state_sobolev_norm, symmetrizer_energy, validate_regime)
from .models import (ModelContext, boussinesq_rhs, geostrophic_residual,
                     gn_medium_rhs, gn_rhs, kdv_rhs, ostrovsky_rhs,
                     poincare_semigroup, weak_rotation_rhs)
from .spectral import (SpectralPlan, antideriv, dealias, deriv,
                       invert_one_minus_mu3_dxx)
from .timeint import StepperConfig, ifrk4_step, integrate, rk4_step

__all__ = [
    "BoussinesqState", "DimensionlessParams", "Field", "GNMediumState",
    "GNState", "Grid1D", "LinearState", "Regime", "ScalarWave",
    "state_sobolev_norm", "symmetrizer_energy", "validate_regime",
    "ModelContext", "boussinesq_rhs", "geostrophic_residual", "gn_medium_rhs",
    "gn_rhs", "kdv_rhs", "ostrovsky_rhs", "poincare_semigroup",
    "weak_rotation_rhs", "SpectralPlan", "antideriv", "dealias", "deriv",
    "invert_one_minus_mu3_dxx", "StepperConfig", "ifrk4_step", "integrate",
    "rk4_step",
]

__version__ = "0.1.0"
