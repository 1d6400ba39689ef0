"""Two-scale modulated traveling-wave machinery.

The leading approximation to the weak-rotation long-wave dynamics is a
right-moving profile evolving on the slow time tau = mu*t:

    zeta_app(t, x) = u_app(t, x) = k(x - t, mu*t),

with k a solution of the slow scalar equation (Ostrovsky or KdV).  The
transverse velocity is corrected at order sqrt(mu) by an antiderivative of k,
and the order-mu correctors w_pm = zeta_(1) +- u_(1) solve constant-speed
transport equations whose forcings are built from k snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Field, Grid1D, ScalarWave, l2_norm, linf_norm
from .errors import NonZeroMean, NotAnOstrovskySolution, SlowTimeOutOfRange
from .models import ostrovsky_rhs
from .spectral import antideriv, deriv, shift
from .timeint import Trajectory


@dataclass(frozen=True)
class SlowTrajectory:
    """Snapshots k(., tau) of a slow scalar integration on a shared grid."""

    taus: np.ndarray
    snapshots: tuple
    grid: Grid1D

    def __post_init__(self):
        if len(self.taus) != len(self.snapshots):
            raise ValueError("taus and snapshots must have equal length")
        if len(self.taus) >= 2 and not np.all(np.diff(self.taus) > 0):
            raise ValueError("taus must be strictly increasing")

    @classmethod
    def from_trajectory(cls, traj: Trajectory, grid: Grid1D) -> "SlowTrajectory":
        snaps = tuple(Field(grid, s if s.ndim == 1 else s[0]) for s in traj.states)
        return cls(np.asarray(traj.times, dtype=float), snaps, grid)

    @property
    def tau_max(self) -> float:
        return float(self.taus[-1])

    def interp(self, tau: float) -> Field:
        """Linear interpolation in tau between stored snapshots."""
        taus = self.taus
        tol = 1e-9 * max(1.0, abs(self.tau_max))
        if tau < taus[0] - tol or tau > taus[-1] + tol:
            raise SlowTimeOutOfRange(
                f"tau={tau:g} outside stored range [{taus[0]:g}, {taus[-1]:g}]")
        if len(taus) == 1:
            return self.snapshots[0]
        tau = min(max(tau, taus[0]), taus[-1])
        j = int(np.searchsorted(taus, tau, side="right")) - 1
        j = min(max(j, 0), len(taus) - 2)
        t0, t1 = taus[j], taus[j + 1]
        w = 0.0 if t1 == t0 else (tau - t0) / (t1 - t0)
        a, b = self.snapshots[j], self.snapshots[j + 1]
        return Field(self.grid, (1.0 - w) * a.values + w * b.values)

    def interp_refinement_error(self) -> float:
        """Max error of half-resolution linear interpolation at the skipped
        nodes, relative to profile amplitude; bounds the interpolation error
        of the full-resolution table."""
        if len(self.taus) < 3:
            return 0.0
        amp = max(linf_norm(s) for s in self.snapshots)
        if amp == 0.0:
            return 0.0
        worst = 0.0
        for j in range(1, len(self.taus) - 1, 2):
            t0, t1, t2 = self.taus[j - 1], self.taus[j], self.taus[j + 1]
            w = (t1 - t0) / (t2 - t0)
            guess = (1.0 - w) * self.snapshots[j - 1].values + w * self.snapshots[j + 1].values
            worst = max(worst, float(np.abs(guess - self.snapshots[j].values).max()))
        return worst / amp


def leading_ansatz(traj: SlowTrajectory, mu: float, t: float) -> tuple[Field, Field]:
    """(zeta_app, u_app)(t, .) = k(x - t, mu*t), via exact spectral shift."""
    prof = traj.interp(mu * t)
    shifted = shift(prof, t)
    return shifted, shifted


def v_corrector(traj: SlowTrajectory, v0: Field, t: float, mu: float) -> Field:
    """Transverse-velocity corrector v0 - dx^{-1}k0 + dx^{-1}k(x-t, mu*t)."""
    k0 = traj.snapshots[0]
    base = antideriv(k0)
    moving = shift(antideriv(traj.interp(mu * t)), t)
    return v0 - base + moving


def slow_residual(traj: SlowTrajectory) -> float:
    """Max L2 norm of d_tau k - rhs(k) over interior snapshots, with d_tau
    from centered differences of the stored table."""
    if len(traj.taus) < 3:
        return 0.0
    worst = 0.0
    for j in range(1, len(traj.taus) - 1):
        dtau = traj.taus[j + 1] - traj.taus[j - 1]
        fd = (traj.snapshots[j + 1].values - traj.snapshots[j - 1].values) / dtau
        rhs = ostrovsky_rhs(ScalarWave(traj.snapshots[j]))
        worst = max(worst, l2_norm(Field(traj.grid, fd - rhs.values)))
    return worst


def _oscillatory_linear_integral(alpha: np.ndarray, s_nodes: np.ndarray,
                                 samples: np.ndarray) -> np.ndarray:
    """Integral of exp(i*alpha*s) f(s) ds with f piecewise linear through
    samples[j] at s_nodes[j]; exact per interval, vectorized over modes.

    alpha: (n_modes,); samples: (n_nodes, n_modes) complex.
    """
    out = np.zeros(alpha.shape, dtype=np.complex128)
    for j in range(len(s_nodes) - 1):
        d = s_nodes[j + 1] - s_nodes[j]
        if d == 0.0:
            continue
        a = samples[j]
        slope = (samples[j + 1] - samples[j]) / d
        theta = alpha * d
        small = np.abs(theta) < 1e-6
        th = np.where(small, 1.0, theta)
        e = np.exp(1j * th)
        phi1 = np.where(small, 1.0 + 0.5j * theta - theta ** 2 / 6.0,
                        (e - 1.0) / (1j * th))
        phi2 = np.where(small, 0.5 + 1j * theta / 3.0 - theta ** 2 / 8.0,
                        (e * (1j * th - 1.0) + 1.0) / (1j * th) ** 2)
        out += np.exp(1j * alpha * s_nodes[j]) * d * (a * phi1 + slope * d * phi2)
    return out


def _bracket_tables(traj: SlowTrajectory):
    """Spectra of the moving forcings at every snapshot, with d_tau k taken
    from the slow equation itself (exact on its solution manifold)."""
    bplus, bminus = [], []
    for snap in traj.snapshots:
        rhs = ostrovsky_rhs(ScalarWave(snap))
        kkx = snap * deriv(snap, 1)
        kxxx = deriv(snap, 3)
        akinv = antideriv(snap)
        bp = 2.0 * rhs + 3.0 * kkx + (1.0 / 3.0) * kxxx - akinv
        bm = kkx - (1.0 / 3.0) * kxxx + akinv
        bplus.append(bp.hat)
        bminus.append(bm.hat)
    return np.asarray(bplus), np.asarray(bminus)


def solve_correctors(traj: SlowTrajectory, v0: Field, g: Field, t_end: float,
                     mu: float, out_times=None, residual_tol: float = 1e-3
                     ) -> tuple[Trajectory, Trajectory]:
    """Solve the two transport equations for w_pm = zeta_(1) +- u_(1).

        (d_t + d_x) w_plus  = -B_plus(x - t, mu t) + g(x)
        (d_t - d_x) w_minus = -B_minus(x - t, mu t) - g(x)

    with B_plus = 2 d_tau k + 3 k k_x + (1/3) k_xxx - dx^{-1}k (identically
    zero when k solves the slow equation) and B_minus = k k_x - (1/3) k_xxx
    + dx^{-1}k.  Homogeneous parts use exact spectral characteristics; the
    moving-forcing Duhamel integral uses piecewise-linear snapshots under
    exact oscillatory kernels; the stationary part is in closed form.
    """
    grid = traj.grid
    amp = max(linf_norm(s) for s in traj.snapshots)
    res = slow_residual(traj)
    if amp > 0.0 and res > residual_tol * amp:
        raise NotAnOstrovskySolution(
            f"snapshot residual {res:.3e} exceeds {residual_tol:g} * amplitude {amp:.3e}")

    expected_g = v0 - antideriv(traj.snapshots[0])
    if linf_norm(g - expected_g) > 1e-8 * max(1.0, linf_norm(g)):
        raise ValueError("g must equal v0 - dx^{-1} k0")
    gamp = linf_norm(g)
    if gamp > 0.0 and abs(g.mean()) > 1e-8 * gamp:
        raise NonZeroMean("stationary forcing g must be zero-mean")

    xi = grid.rfft_wavenumbers
    ghat = g.hat.copy()
    ghat[0] = 0.0
    if grid.n % 2 == 0:
        ghat[-1] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_ixi = np.where(xi == 0.0, 0.0, 1.0 / (1j * xi))

    bplus_hats, bminus_hats = _bracket_tables(traj)
    s_all = traj.taus / mu  # snapshot times in the fast variable

    if out_times is None:
        out_times = [t_end]
    out_times = sorted(float(t) for t in out_times)
    if out_times and out_times[-1] > s_all[-1] + 1e-9 * max(1.0, s_all[-1]):
        raise SlowTimeOutOfRange("out_times exceed the stored slow horizon")

    def node_table(hats, s_nodes):
        rows = []
        for s in s_nodes:
            tau = mu * s
            j = int(np.searchsorted(traj.taus, tau, side="right")) - 1
            j = min(max(j, 0), len(traj.taus) - 2)
            t0, t1 = traj.taus[j], traj.taus[j + 1]
            w = 0.0 if t1 == t0 else (tau - t0) / (t1 - t0)
            rows.append((1.0 - w) * hats[j] + w * hats[j + 1])
        return np.asarray(rows)

    wp_traj = Trajectory([], [], grid, ("w_plus",))
    wm_traj = Trajectory([], [], grid, ("w_minus",))
    for t_out in out_times:
        keep = s_all <= t_out + 1e-12
        s_nodes = s_all[keep]
        if len(s_nodes) == 0 or s_nodes[-1] < t_out - 1e-12:
            s_nodes = np.append(s_nodes, t_out)

        # w_plus, speed +1: kernel e^{-i xi (t-s)} meets the e^{-i xi s}
        # travel phase resonantly, leaving a plain integral of B_plus.
        mov_p = _oscillatory_linear_integral(
            np.zeros_like(xi), s_nodes, node_table(bplus_hats, s_nodes))
        stat_p = ghat * (1.0 - np.exp(-1j * xi * t_out)) * inv_ixi
        wp_hat = -np.exp(-1j * xi * t_out) * mov_p + stat_p

        # w_minus, speed -1: kernel e^{+i xi (t-s)} leaves phase e^{-2 i xi s}.
        mov_m = _oscillatory_linear_integral(
            -2.0 * xi, s_nodes, node_table(bminus_hats, s_nodes))
        stat_m = -ghat * (np.exp(1j * xi * t_out) - 1.0) * inv_ixi
        wm_hat = -np.exp(1j * xi * t_out) * mov_m + stat_m

        if grid.n % 2 == 0:
            wp_hat[-1] = 0.0
            wm_hat[-1] = 0.0
        wp_traj.times.append(t_out)
        wp_traj.states.append(np.fft.irfft(wp_hat, n=grid.n))
        wm_traj.times.append(t_out)
        wm_traj.states.append(np.fft.irfft(wm_hat, n=grid.n))
    return wp_traj, wm_traj
