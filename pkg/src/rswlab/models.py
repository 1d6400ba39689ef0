"""Right-hand sides of the rotating shallow-water model hierarchy.

Implemented systems, all on a flat or slowly varying bottom with h = 1 +
eps*zeta - beta*b and rotation entering only through inv_ro = eps/Ro:

* Boussinesq-Coriolis for (zeta, u, v, W), W the depth-renormalized shear
  moment, whose transport equation is pure advection plus rotation:

      zeta_t + (h u)_x               = 0
      (1 - mu/3 dxx) u_t + zeta_x + eps u u_x - inv_ro v
                + inv_ro mu^{3/2}/24 (W2)_xx = 0
      v_t + eps u v_x + inv_ro u    = 0
      W_t + eps u W_x + inv_ro W-perp = 0,   W-perp = (-W2, W1)

* its weak-rotation form (W terms dropped),
* the linear strong-rotation system and its exact Fourier semigroup,
* the scalar Ostrovsky and KdV equations on the unit-speed frame,
* the Green-Naghdi cascade with shear tensors E (rank 2) and F (rank 3),
  and its medium-amplitude weak-rotation reduction.

The inertia operator (1 + mu*T), T = -1/(3h) dx(h^3 dx .), is inverted with
preconditioned conjugate gradients on the symmetrized form h + mu*T*h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (BoussinesqState, DimensionlessParams, Field, GNMediumState,
                   GNState, Grid1D, LinearState, ScalarWave, depth, l2_norm)
from .errors import EllipticSolveFailure, NonZeroMean
from .spectral import (SpectralPlan, antideriv, dealias, deriv,
                       invert_one_minus_mu3_dxx)

H_MIN_DEFAULT = 0.05


@dataclass(frozen=True)
class ModelContext:
    """Parameters, bathymetry and spectral plan shared by the evaluators."""

    params: DimensionlessParams
    b: Field
    plan: SpectralPlan
    h_min: float = H_MIN_DEFAULT

    @classmethod
    def flat(cls, params: DimensionlessParams, grid: Grid1D,
             h_min: float = H_MIN_DEFAULT) -> "ModelContext":
        return cls(params, Field.zeros(grid), SpectralPlan(grid), h_min)


# ---------------------------------------------------------------------------
# Boussinesq-Coriolis family
# ---------------------------------------------------------------------------

def boussinesq_rhs(state: BoussinesqState, ctx: ModelContext) -> BoussinesqState:
    """Time derivative of the Boussinesq-Coriolis system (renormalized W form)."""
    p = ctx.params
    pl = ctx.plan
    h = depth(state.zeta, p, ctx.b, ctx.h_min)
    u, v, w1, w2 = state.u, state.v, state.w1, state.w2
    ro = p.inv_ro

    d_zeta = -deriv(pl.product(h, u), 1)

    rhs_u = (-deriv(state.zeta, 1)
             - p.eps * pl.product(u, deriv(u, 1))
             + ro * v
             - ro * p.mu ** 1.5 / 24.0 * deriv(w2, 2))
    d_u = invert_one_minus_mu3_dxx(rhs_u, p.mu)

    d_v = -p.eps * pl.product(u, deriv(v, 1)) - ro * u

    # rotation by W-perp = (-W2, W1)
    d_w1 = -p.eps * pl.product(u, deriv(w1, 1)) + ro * w2
    d_w2 = -p.eps * pl.product(u, deriv(w2, 1)) - ro * w1

    return BoussinesqState(d_zeta, d_u, d_v, d_w1, d_w2)


def weak_rotation_rhs(state: LinearState, ctx: ModelContext) -> LinearState:
    """Boussinesq-Coriolis with the shear moment dropped (weak rotation)."""
    p = ctx.params
    pl = ctx.plan
    h = depth(state.zeta, p, ctx.b, ctx.h_min)
    u, v = state.u, state.v
    ro = p.inv_ro

    d_zeta = -deriv(pl.product(h, u), 1)
    rhs_u = -deriv(state.zeta, 1) - p.eps * pl.product(u, deriv(u, 1)) + ro * v
    d_u = invert_one_minus_mu3_dxx(rhs_u, p.mu)
    d_v = -p.eps * pl.product(u, deriv(v, 1)) - ro * u
    return LinearState(d_zeta, d_u, d_v)


# ---------------------------------------------------------------------------
# Linear system: exact semigroup and the inertia-gravity wave condition
# ---------------------------------------------------------------------------

def _semigroup_matrix(xi: np.ndarray, t: float):
    """Entries of the 3x3 Fourier propagator of the linear rotating system.

    The generator A(xi) = [[0, -i xi, 0], [-i xi, 0, 1], [0, -1, 0]] is
    skew-Hermitian, so the propagator is unitary for every mode.
    """
    om = np.sqrt(xi ** 2 + 1.0)
    c, s = np.cos(om * t), np.sin(om * t)
    om2 = om ** 2
    s11 = (xi ** 2 * c + 1.0) / om2
    s12 = -1j * xi * s / om
    s13 = 1j * xi * (c - 1.0) / om2
    s22 = c
    s23 = s / om
    s31 = -s13
    s33 = (xi ** 2 + c) / om2
    return s11, s12, s13, s22, s23, s31, s33


def poincare_semigroup(state0: LinearState, t: float) -> LinearState:
    """Exact solution of the linear rotating system at time t, mode by mode.

    The (unresolved) Nyquist mode of an even grid is annihilated so that the
    propagator commutes exactly with the real transform round trip.
    """
    grid = state0.zeta.grid
    xi = grid.rfft_wavenumbers
    zh, uh, vh = state0.zeta.hat.copy(), state0.u.hat.copy(), state0.v.hat.copy()
    if grid.n % 2 == 0:
        zh[-1] = uh[-1] = vh[-1] = 0.0
    s11, s12, s13, s22, s23, s31, s33 = _semigroup_matrix(xi, t)
    zt = s11 * zh + s12 * uh + s13 * vh
    ut = s12 * zh + s22 * uh + s23 * vh
    vt = s31 * zh - s23 * uh + s33 * vh
    return LinearState(Field.from_hat(grid, zt), Field.from_hat(grid, ut),
                       Field.from_hat(grid, vt))


def geostrophic_residual(state: LinearState) -> tuple[Field, float]:
    """zeta - dx v and its L2 norm; zero iff the state is a sum of two
    inertia-gravity plane waves."""
    r = state.zeta - deriv(state.v, 1)
    return r, l2_norm(r)


# ---------------------------------------------------------------------------
# Scalar wave equations in the co-moving frame
# ---------------------------------------------------------------------------

def kdv_nonlinear(k: Field) -> Field:
    """-(3/2) k k_x, dealiased."""
    return -1.5 * dealias(k * deriv(k, 1))


def kdv_rhs(wave: ScalarWave) -> Field:
    """-(3/2) k k_x - (1/6) k_xxx."""
    k = wave.k
    return kdv_nonlinear(k) - (1.0 / 6.0) * deriv(k, 3)


def ostrovsky_rhs(wave: ScalarWave) -> Field:
    """-(3/2) k k_x - (1/6) k_xxx + (1/2) dx^{-1} k; requires zero mean."""
    if not wave.antiderivative_defined:
        raise NonZeroMean("Ostrovsky evolution needs a zero-mean profile")
    k = wave.k
    return kdv_nonlinear(k) - (1.0 / 6.0) * deriv(k, 3) + 0.5 * antideriv(k, wave.zero_mean_tol)


def kdv_symbol(grid: Grid1D) -> np.ndarray:
    """Fourier symbol of the linear KdV part -(1/6) dxxx (per rfft mode)."""
    xi = grid.rfft_wavenumbers
    sym = -(1.0 / 6.0) * (1j * xi) ** 3
    if grid.n % 2 == 0:
        sym[-1] = 0.0
    return sym


def ostrovsky_symbol(grid: Grid1D) -> np.ndarray:
    """Symbol of -(1/6) dxxx + (1/2) dx^{-1}, zero mode excluded."""
    xi = grid.rfft_wavenumbers
    sym = -(1.0 / 6.0) * (1j * xi) ** 3
    sym[1:] = sym[1:] + 0.5 / (1j * xi[1:])
    if grid.n % 2 == 0:
        sym[-1] = 0.0
    return sym


# ---------------------------------------------------------------------------
# Green-Naghdi cascade
# ---------------------------------------------------------------------------

def rank2_rotation(e_xx: Field, e_xy: Field, e_yy: Field):
    """Coriolis exchange of a symmetric rank-2 tensor:
    (V-perp (x) V + V (x) V-perp) integrated -> trace-free result."""
    return -2.0 * e_xy, e_xx - e_yy, 2.0 * e_xy


def rank3_rotation(f_111: Field, f_112: Field, f_122: Field, f_222: Field):
    """Coriolis exchange of a fully symmetric rank-3 tensor (one V-perp per
    slot); index 1 swaps to 2 with sign -1 and 2 to 1 with sign +1."""
    return (-3.0 * f_112,
            f_111 - 2.0 * f_122,
            2.0 * f_112 - f_222,
            3.0 * f_122)


def tensor_transport(e_xx: Field, e_xy: Field, e_yy: Field, du: Field, dv: Field):
    """The bilinear stretching term l(E, dx Vbar) of the rank-2 equation."""
    l_xx = 3.0 * dealias(du * e_xx) + 2.0 * dealias(dv * e_xy)
    l_xy = 2.0 * dealias(du * e_xy) + dealias(dv * e_yy)
    l_yy = dealias(du * e_yy)
    return l_xx, l_xy, l_yy


def apply_inertia(f: Field, h: Field, mu: float) -> Field:
    """(1 + mu*T) f with T = -1/(3h) dx(h^3 dx f)."""
    h3 = h * h * h
    inner_term = deriv(dealias(h3 * deriv(f, 1)), 1)
    return f - (mu / 3.0) * (inner_term / h)


def solve_inertia(rhs: Field, h: Field, mu: float, tol: float = 1e-12,
                  maxiter: int = 200) -> Field:
    """Invert (1 + mu*T) by preconditioned CG on the symmetric form.

    Multiplying by h gives B f = h f - (mu/3) dx(h^3 dx f), which is SPD;
    the constant-coefficient inverse (1 + mu xi^2/3)^{-1} preconditions it.
    """
    if mu == 0.0:
        return rhs
    grid = rhs.grid
    h3 = h * h * h

    def apply_b(f: Field) -> Field:
        return h * f - (mu / 3.0) * deriv(dealias(h3 * deriv(f, 1)), 1)

    def precond(r: Field) -> Field:
        return invert_one_minus_mu3_dxx(r, mu)

    bvec = h * rhs
    bnorm = l2_norm(bvec)
    if bnorm == 0.0:
        return Field.zeros(grid)
    x = precond(bvec)
    r = bvec - apply_b(x)
    z = precond(r)
    p = z
    rz = np.dot(r.values, z.values)
    for _ in range(maxiter):
        if l2_norm(r) <= tol * bnorm:
            return x
        bp = apply_b(p)
        alpha = rz / np.dot(p.values, bp.values)
        x = x + alpha * p
        r = r - alpha * bp
        z = precond(r)
        rz_new = np.dot(r.values, z.values)
        p = z + (rz_new / rz) * p
        rz = rz_new
    if l2_norm(r) <= tol * bnorm:
        return x
    raise EllipticSolveFailure(
        f"inertia solve stalled at relative residual {l2_norm(r) / bnorm:.3e} "
        f"after {maxiter} iterations")


def gn_rhs(state: GNState, ctx: ModelContext) -> GNState:
    """Time derivative of the full rotating Green-Naghdi cascade."""
    p = ctx.params
    pl = ctx.plan
    h = depth(state.zeta, p, ctx.b, ctx.h_min)
    u, v = state.u, state.v
    vs1, vs2 = state.vs1, state.vs2
    ro = p.inv_ro
    mu = p.mu
    h3 = h * h * h

    du = deriv(u, 1)
    dv = deriv(v, 1)
    d2u = deriv(u, 2)

    d_zeta = -deriv(pl.product(h, u), 1)

    # u equation: invert the inertia operator on everything but the advection
    q_u = (2.0 / 3.0) * (deriv(dealias(h3 * dealias(du * du)), 1) / h)
    c1 = -(1.0 / 6.0) * (deriv(
        2.0 * dealias(dealias(h3 * vs1) * d2u) + dealias(deriv(dealias(h3 * vs1), 1) * du),
        1) / h)
    coriolis_shear = ro * mu ** 1.5 / 24.0 * (deriv(dealias(h3 * vs2), 2) / h)
    rhs_u = (-deriv(state.zeta, 1)
             + ro * v
             - p.eps * mu * q_u
             - p.eps * mu * deriv(state.e_xx, 1)
             - p.eps * mu ** 1.5 * c1
             - coriolis_shear)
    d_u = solve_inertia(rhs_u, h, mu) - p.eps * pl.product(u, du)

    c2 = -(1.0 / 24.0) * (deriv(dealias(dealias(h3 * vs2) * d2u), 1) / h)
    d_v = (-p.eps * pl.product(u, dv)
           - ro * u
           - p.eps * mu * deriv(state.e_xy, 1)
           - p.eps * mu ** 1.5 * c2)

    # shear moment: advection, stretching, rotation by V-sharp-perp
    d_vs1 = -p.eps * (dealias(vs1 * du) + pl.product(u, deriv(vs1, 1))) + ro * vs2
    d_vs2 = -p.eps * (dealias(vs2 * du) + pl.product(u, deriv(vs2, 1))) - ro * vs1

    # rank-2 tensor
    l_xx, l_xy, l_yy = tensor_transport(state.e_xx, state.e_xy, state.e_yy, du, dv)
    s_xx, s_xy, s_yy = rank2_rotation(state.e_xx, state.e_xy, state.e_yy)
    drive = p.eps * math.sqrt(mu) * dv + ro * math.sqrt(mu)
    d_xy = dealias(drive * dealias(d2u * vs1))
    d_yy = 2.0 * dealias(drive * dealias(d2u * vs2))
    rtmu = p.eps * math.sqrt(mu)
    d_exx = (-p.eps * pl.product(u, deriv(state.e_xx, 1)) - p.eps * l_xx
             - rtmu * deriv(state.f_111, 1) - ro * s_xx)
    d_exy = (-p.eps * pl.product(u, deriv(state.e_xy, 1)) - p.eps * l_xy
             - rtmu * deriv(state.f_112, 1) - ro * s_xy + d_xy)
    d_eyy = (-p.eps * pl.product(u, deriv(state.e_yy, 1)) - p.eps * l_yy
             - rtmu * deriv(state.f_122, 1) - ro * s_yy + d_yy)

    # rank-3 tensor, canonical components (111), (112), (122), (222)
    f111, f112, f122, f222 = state.f_111, state.f_112, state.f_122, state.f_222
    fs111, fs112, fs122, fs222 = rank3_rotation(f111, f112, f122, f222)

    def f_slot(fijk: Field, couple: Field) -> Field:
        return (-p.eps * (pl.product(u, deriv(fijk, 1)) + dealias(du * fijk) + couple))

    d_f111 = f_slot(f111, 3.0 * dealias(f111 * du)) - ro * fs111
    d_f112 = f_slot(f112, 2.0 * dealias(f112 * du) + dealias(f111 * dv)) - ro * fs112
    d_f122 = f_slot(f122, dealias(f122 * du) + 2.0 * dealias(f112 * dv)) - ro * fs122
    d_f222 = f_slot(f222, 3.0 * dealias(f122 * dv)) - ro * fs222

    return GNState(d_zeta, d_u, d_v, d_vs1, d_vs2, d_exx, d_exy, d_eyy,
                   d_f111, d_f112, d_f122, d_f222)


def gn_medium_rhs(state: GNMediumState, ctx: ModelContext) -> GNMediumState:
    """Medium-amplitude, weak-rotation reduction: (zeta, u, v, E) only."""
    p = ctx.params
    pl = ctx.plan
    h = depth(state.zeta, p, ctx.b, ctx.h_min)
    u, v = state.u, state.v
    ro = p.inv_ro
    mu = p.mu
    h3 = h * h * h

    du = deriv(u, 1)
    dv = deriv(v, 1)

    d_zeta = -deriv(pl.product(h, u), 1)

    q_u = (2.0 / 3.0) * (deriv(dealias(h3 * dealias(du * du)), 1) / h)
    rhs_u = (-deriv(state.zeta, 1)
             + ro * v
             - p.eps * mu * q_u
             - p.eps * mu * deriv(state.e_xx, 1))
    d_u = solve_inertia(rhs_u, h, mu) - p.eps * pl.product(u, du)

    d_v = -p.eps * pl.product(u, dv) - ro * u - p.eps * mu * deriv(state.e_xy, 1)

    l_xx, l_xy, l_yy = tensor_transport(state.e_xx, state.e_xy, state.e_yy, du, dv)
    s_xx, s_xy, s_yy = rank2_rotation(state.e_xx, state.e_xy, state.e_yy)
    d_exx = -p.eps * pl.product(u, deriv(state.e_xx, 1)) - p.eps * l_xx - ro * s_xx
    d_exy = -p.eps * pl.product(u, deriv(state.e_xy, 1)) - p.eps * l_xy - ro * s_xy
    d_eyy = -p.eps * pl.product(u, deriv(state.e_yy, 1)) - p.eps * l_yy - ro * s_yy

    return GNMediumState(d_zeta, d_u, d_v, d_exx, d_exy, d_eyy)
