"""Dimensionless parameters, asymptotic regimes, periodic grid and field containers.

All models live on one periodic interval [-L/2, L/2) sampled at n uniform
points.  Fields are real valued; their discrete Fourier transform (rfft) is
cached on first use so that repeated spectral operations on the same field
cost a single FFT.

The five dimensionless numbers are the wave nonlinearity eps, the bathymetry
amplitude beta, the transversality gamma (always 0 here), the shallowness mu,
and the rotation ratio inv_ro = eps/Ro.  Only eps/Ro ever enters a model
equation, so it is stored directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonPositiveDepth

MU_MAX_DEFAULT = 1.0

# Order constants for the inequality-style regime conditions ("eps = O(mu)"
# is checked as eps <= c * mu).  c is configurable per Regime and recorded in
# study reports.
ORDER_CONSTANT_DEFAULT = 1.0

_REL_TOL = 1e-12


@dataclass(frozen=True)
class DimensionlessParams:
    """The quintuple (eps, beta, gamma, mu, eps/Ro)."""

    eps: float
    beta: float
    gamma: float
    mu: float
    inv_ro: float
    mu_max: float = MU_MAX_DEFAULT

    def violations(self) -> list[str]:
        """Names of the global parameter constraints this set breaks."""
        out = []
        if not (0.0 < self.mu <= self.mu_max):
            out.append(f"0 < mu <= mu_max violated (mu={self.mu:g}, mu_max={self.mu_max:g})")
        if not (0.0 < self.eps <= 1.0):
            out.append(f"0 < eps <= 1 violated (eps={self.eps:g})")
        if not (0.0 <= self.gamma <= 1.0):
            out.append(f"0 <= gamma <= 1 violated (gamma={self.gamma:g})")
        if not (0.0 <= self.beta <= 1.0):
            out.append(f"0 <= beta <= 1 violated (beta={self.beta:g})")
        if not (0.0 <= self.inv_ro <= 1.0):
            out.append(f"0 <= eps/Ro <= 1 violated (eps/Ro={self.inv_ro:g})")
        return out


@dataclass(frozen=True)
class Regime:
    """An asymptotic regime: a tag plus the ceiling mu0 for mu.

    Tags: Bouss, Poin, Ost, KdV, GN, GNMedium.
    """

    tag: str
    mu0: float = MU_MAX_DEFAULT
    order_constant: float = ORDER_CONSTANT_DEFAULT

    _TAGS = ("Bouss", "Poin", "Ost", "KdV", "GN", "GNMedium")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise ValueError(f"unknown regime tag {self.tag!r}; expected one of {self._TAGS}")


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= _REL_TOL * max(1.0, abs(a), abs(b))


def validate_regime(params: DimensionlessParams, regime: Regime) -> tuple[bool, list[str]]:
    """Check params against the global constraints and the regime's scalings.

    Equalities (eps = mu, eps/Ro = sqrt(mu), ...) are checked to relative
    round-off; order conditions eps = O(mu) as eps <= c*mu with the regime's
    order constant c.  Returns (ok, violations).
    """
    bad = params.violations()
    c = regime.order_constant
    p = params
    if p.mu > regime.mu0:
        bad.append(f"mu <= mu0 violated (mu={p.mu:g}, mu0={regime.mu0:g})")

    tag = regime.tag
    if tag in ("Poin", "Ost", "KdV"):
        if not _close(p.eps, p.mu):
            bad.append(f"eps = mu violated (eps={p.eps:g}, mu={p.mu:g})")
        if p.beta != 0.0:
            bad.append(f"beta = 0 violated (beta={p.beta:g})")
        if p.gamma != 0.0:
            bad.append(f"gamma = 0 violated (gamma={p.gamma:g})")
        target = {"Poin": 1.0, "Ost": math.sqrt(p.mu), "KdV": p.mu}[tag]
        name = {"Poin": "1", "Ost": "sqrt(mu)", "KdV": "mu"}[tag]
        if not _close(p.inv_ro, target):
            bad.append(f"eps/Ro = {name} violated (eps/Ro={p.inv_ro:g}, {name}={target:g})")
    elif tag == "Bouss":
        if p.eps > c * p.mu:
            bad.append(f"eps = O(mu) violated (eps={p.eps:g} > {c:g}*mu={c * p.mu:g})")
        if p.beta > c * p.mu:
            bad.append(f"beta = O(mu) violated (beta={p.beta:g} > {c:g}*mu={c * p.mu:g})")
        if p.gamma != 0.0:
            bad.append(f"gamma = 0 violated (gamma={p.gamma:g})")
    elif tag in ("GN", "GNMedium"):
        if p.beta > c * p.mu:
            bad.append(f"beta = O(mu) violated (beta={p.beta:g} > {c:g}*mu={c * p.mu:g})")
        if p.gamma != 0.0:
            bad.append(f"gamma = 0 violated (gamma={p.gamma:g})")
        if tag == "GNMedium":
            root = math.sqrt(p.mu)
            if p.eps > c * root:
                bad.append(f"eps = O(sqrt(mu)) violated (eps={p.eps:g} > {c:g}*sqrt(mu)={c * root:g})")
            if p.inv_ro > c * root:
                bad.append(
                    f"eps/Ro = O(sqrt(mu)) violated (eps/Ro={p.inv_ro:g} > {c:g}*sqrt(mu)={c * root:g})"
                )
    return (not bad, bad)


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid with points x_j = -L/2 + j*dx, j = 0..n-1."""

    n: int
    length: float

    def __post_init__(self):
        if self.n < 16 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 16, got {self.n}")
        if not self.length > 0.0:
            raise ValueError(f"domain length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """All n discrete frequencies 2*pi*m/L in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @cached_property
    def rfft_wavenumbers(self) -> np.ndarray:
        """Frequencies 2*pi*m/L, m = 0..n/2, matching numpy.fft.rfft layout."""
        return 2.0 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)

    @property
    def xi_max(self) -> float:
        return float(self.rfft_wavenumbers[-1])


class Field:
    """A real scalar field on a Grid1D with a lazily cached spectral dual.

    Treated as immutable: the value array is marked read-only and operations
    return new Fields.  Constructing from a spectrum keeps the spectrum, so
    projections such as dealiasing are exactly idempotent.
    """

    __slots__ = ("grid", "values", "_hat")

    def __init__(self, grid: Grid1D, values, hat=None):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.n,):
            raise ValueError(f"field shape {values.shape} does not match grid n={grid.n}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite entries")
        values = values.copy() if values.flags.writeable else values
        values.flags.writeable = False
        self.grid = grid
        self.values = values
        self._hat = hat

    @classmethod
    def from_hat(cls, grid: Grid1D, hat) -> "Field":
        hat = np.asarray(hat, dtype=np.complex128)
        values = np.fft.irfft(hat, n=grid.n)
        return cls(grid, values, hat=hat)

    @classmethod
    def zeros(cls, grid: Grid1D) -> "Field":
        return cls(grid, np.zeros(grid.n))

    @property
    def hat(self) -> np.ndarray:
        """rfft of the values (unnormalized numpy convention), cached."""
        if self._hat is None:
            self._hat = np.fft.rfft(self.values)
        return self._hat

    def __add__(self, other):
        other = other.values if isinstance(other, Field) else other
        return Field(self.grid, self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        other = other.values if isinstance(other, Field) else other
        return Field(self.grid, self.values - other)

    def __rsub__(self, other):
        return Field(self.grid, other - self.values)

    def __mul__(self, other):
        other = other.values if isinstance(other, Field) else other
        return Field(self.grid, self.values * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = other.values if isinstance(other, Field) else other
        return Field(self.grid, self.values / other)

    def __neg__(self):
        return Field(self.grid, -self.values)

    def mean(self) -> float:
        return float(self.values.mean())

    def __repr__(self):
        return f"Field(n={self.grid.n}, L={self.grid.length:g}, max|f|={np.abs(self.values).max():.3g})"


@dataclass(frozen=True)
class ScalarWave:
    """A zero-mean-tracked scalar wave profile (Ostrovsky / KdV unknown)."""

    k: Field
    zero_mean_tol: float = 1e-10

    @property
    def antiderivative_defined(self) -> bool:
        amp = float(np.abs(self.k.values).max())
        return amp == 0.0 or abs(self.k.mean()) <= self.zero_mean_tol * amp


@dataclass(frozen=True)
class LinearState:
    """(zeta, u, v) for the linearized rotating system."""

    zeta: Field
    u: Field
    v: Field

    def stack(self) -> np.ndarray:
        return np.stack([self.zeta.values, self.u.values, self.v.values])

    @classmethod
    def from_stack(cls, grid: Grid1D, arr: np.ndarray) -> "LinearState":
        return cls(*(Field(grid, row) for row in arr))

    labels = ("zeta", "u", "v")


@dataclass(frozen=True)
class BoussinesqState:
    """(zeta, u, v, W) with W = V_sharp / h the renormalized shear moment."""

    zeta: Field
    u: Field
    v: Field
    w1: Field
    w2: Field

    def stack(self) -> np.ndarray:
        return np.stack([f.values for f in (self.zeta, self.u, self.v, self.w1, self.w2)])

    @classmethod
    def from_stack(cls, grid: Grid1D, arr: np.ndarray) -> "BoussinesqState":
        return cls(*(Field(grid, row) for row in arr))

    labels = ("zeta", "u", "v", "w1", "w2")


@dataclass(frozen=True)
class GNState:
    """State of the rotating Green-Naghdi cascade.

    V_sharp = (vs1, vs2); E is a symmetric rank-2 tensor stored by its three
    independent components and F a fully symmetric rank-3 tensor stored by its
    four independent components, so symmetry is structural.
    """

    zeta: Field
    u: Field
    v: Field
    vs1: Field
    vs2: Field
    e_xx: Field
    e_xy: Field
    e_yy: Field
    f_111: Field
    f_112: Field
    f_122: Field
    f_222: Field

    labels = ("zeta", "u", "v", "vs1", "vs2", "e_xx", "e_xy", "e_yy",
              "f_111", "f_112", "f_122", "f_222")

    def stack(self) -> np.ndarray:
        return np.stack([getattr(self, name).values for name in self.labels])

    @classmethod
    def from_stack(cls, grid: Grid1D, arr: np.ndarray) -> "GNState":
        return cls(*(Field(grid, row) for row in arr))


@dataclass(frozen=True)
class GNMediumState:
    """(zeta, u, v, E) for the medium-amplitude weak-rotation reduction."""

    zeta: Field
    u: Field
    v: Field
    e_xx: Field
    e_xy: Field
    e_yy: Field

    labels = ("zeta", "u", "v", "e_xx", "e_xy", "e_yy")

    def stack(self) -> np.ndarray:
        return np.stack([getattr(self, name).values for name in self.labels])

    @classmethod
    def from_stack(cls, grid: Grid1D, arr: np.ndarray) -> "GNMediumState":
        return cls(*(Field(grid, row) for row in arr))


# ---------------------------------------------------------------------------
# Quadrature, norms and energies
# ---------------------------------------------------------------------------

def integral(f: Field) -> float:
    """Exact spectral quadrature of f over one period (= dx * sum)."""
    return float(f.values.sum() * f.grid.dx)


def inner(f: Field, g: Field) -> float:
    """L2 inner product over one period."""
    return float((f.values * g.values).sum() * f.grid.dx)


def l2_norm(f: Field) -> float:
    return math.sqrt(max(inner(f, f), 0.0))


def linf_norm(f: Field) -> float:
    return float(np.abs(f.values).max())


def spectral_l2(f: Field) -> float:
    """L2 norm evaluated from the rfft coefficients (Parseval route)."""
    return math.sqrt(_spectral_l2_sq(f))


def _spectral_l2_sq(f: Field) -> float:
    n = f.grid.n
    h = f.hat
    w = np.full(h.shape, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    return float((w * np.abs(h) ** 2).sum() * f.grid.dx / n)


def sobolev_norm(f: Field, s: float) -> float:
    """H^s norm with the spectral weight (1 + xi^2)^s."""
    n = f.grid.n
    h = f.hat
    xi = f.grid.rfft_wavenumbers
    w = np.full(h.shape, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    val = (w * (1.0 + xi ** 2) ** s * np.abs(h) ** 2).sum() * f.grid.dx / n
    return math.sqrt(max(float(val), 0.0))


def lambda_s(f: Field, s: float) -> Field:
    """Apply (1 - dxx)^{s/2} spectrally."""
    xi = f.grid.rfft_wavenumbers
    return Field.from_hat(f.grid, (1.0 + xi ** 2) ** (s / 2.0) * f.hat)


def depth(zeta: Field, params: DimensionlessParams, b: Field, h_min: float) -> Field:
    """Water column h = 1 + eps*zeta - beta*b; raises if it dips below h_min."""
    h = 1.0 + params.eps * zeta.values - params.beta * b.values
    hm = float(h.min())
    if hm < h_min:
        raise NonPositiveDepth(f"min depth {hm:g} < h_min {h_min:g}")
    return Field(zeta.grid, h)


def state_sobolev_norm(state: BoussinesqState, s: int, mu: float) -> float:
    """Energy-space norm of (zeta, u, v, W) with mu-weighted slopes of u and W.

    sqrt(|zeta|_Hs^2 + |u|_Hs^2 + mu|dx u|_Hs^2 + |v|_Hs^2
         + |W|_Hs^2 + mu|dx W|_Hs^2)
    """
    from .spectral import deriv  # local import to avoid a cycle

    total = sobolev_norm(state.zeta, s) ** 2
    total += sobolev_norm(state.u, s) ** 2 + mu * sobolev_norm(deriv(state.u, 1), s) ** 2
    total += sobolev_norm(state.v, s) ** 2
    for w in (state.w1, state.w2):
        total += sobolev_norm(w, s) ** 2 + mu * sobolev_norm(deriv(w, 1), s) ** 2
    return math.sqrt(max(total, 0.0))


def symmetrizer_energy(state: BoussinesqState, s: int, params: DimensionlessParams,
                       b: Field, h_min: float = 1e-6) -> float:
    """Quadratic energy of the symmetrized first three equations.

    (L^s z, L^s z) + (h L^s u, L^s u) + (mu/3)(h dx L^s u, dx L^s u)
    + (h L^s v, L^s v), with L = (1 - dxx)^{1/2} applied spectrally.
    """
    from .spectral import deriv

    h = depth(state.zeta, params, b, h_min)
    lz = lambda_s(state.zeta, s)
    lu = lambda_s(state.u, s)
    lv = lambda_s(state.v, s)
    lux = deriv(lu, 1)
    e = inner(lz, lz)
    e += inner(h * lu, lu)
    e += (params.mu / 3.0) * inner(h * lux, lux)
    e += inner(h * lv, lv)
    return e
