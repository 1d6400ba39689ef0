"""Named initial profiles: Gaussian family and sech^2 bumps.

Derivatives of the Gaussian are analytic, so gaussian_d1 / gaussian_d2 are
exactly the first and second derivatives of `gaussian` with the same
(amplitude, width, center).  gaussian_d2 is zero-mean up to the (negligible)
periodic truncation, which puts it in the antiderivative-friendly class the
scalar wave equations require.
"""

from __future__ import annotations

import numpy as np

from .core import Field, Grid1D


def gaussian(x, amplitude=1.0, width=1.0, center=0.0):
    s = (x - center) / width
    return amplitude * np.exp(-0.5 * s ** 2)


def gaussian_d1(x, amplitude=1.0, width=1.0, center=0.0):
    s = (x - center) / width
    return -amplitude / width * s * np.exp(-0.5 * s ** 2)


def gaussian_d2(x, amplitude=1.0, width=1.0, center=0.0):
    s = (x - center) / width
    return amplitude / width ** 2 * (s ** 2 - 1.0) * np.exp(-0.5 * s ** 2)


def sech2(x, amplitude=1.0, width=1.0, center=0.0):
    return amplitude / np.cosh((x - center) / width) ** 2


PROFILES = {
    "gaussian": gaussian,
    "gaussian_d1": gaussian_d1,
    "gaussian_d2": gaussian_d2,
    "sech2": sech2,
    "zero": lambda x, amplitude=0.0, width=1.0, center=0.0: np.zeros_like(x),
}


def make_field(grid: Grid1D, name: str, amplitude=1.0, width=1.0, center=0.0) -> Field:
    if name not in PROFILES:
        raise KeyError(f"unknown profile {name!r}; choices: {sorted(PROFILES)}")
    return Field(grid, PROFILES[name](grid.x, amplitude, width, center))
