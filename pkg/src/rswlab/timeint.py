"""Deterministic time stepping: classical RK4 and integrating-factor RK4.

IFRK4 advances the stiff linear part of a scalar dispersive equation exactly
through its Fourier symbol and applies RK4 to the transformed nonlinearity,
so it is exact for the purely linear equation at any step size.  Observation
times are hit exactly by shortening the final step into each of them; no
interpolation is ever used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Field, Grid1D, ScalarWave
from .errors import ConfigError, NonFinite, NonZeroMean

RK4_IMAG_STABILITY = 2.8


@dataclass(frozen=True)
class StepperConfig:
    """Step size, horizon and scheme choice for one integration."""

    dt: float
    t_end: float
    scheme: str = "rk4"
    observe_dt: float | None = None
    cfl_guard: float = RK4_IMAG_STABILITY

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ConfigError(f"stepper.dt must be positive, got {self.dt}")
        if self.t_end < 0.0:
            raise ConfigError(f"stepper.t_end must be nonnegative, got {self.t_end}")
        if self.scheme not in ("rk4", "ifrk4"):
            raise ConfigError(f"stepper.scheme must be rk4 or ifrk4, got {self.scheme!r}")
        if self.observe_dt is not None and self.observe_dt <= 0.0:
            raise ConfigError("stepper.observe_dt must be positive when given")

    def check_dispersive(self, grid: Grid1D):
        """Explicit RK4 on a third-derivative term needs dt*xi_max^3/6 bounded."""
        if self.scheme == "rk4":
            stiff = self.dt * grid.xi_max ** 3 / 6.0
            if stiff > self.cfl_guard:
                raise ConfigError(
                    f"rk4 on a dispersive equation needs dt*xi_max^3/6 <= "
                    f"{self.cfl_guard:g}, got {stiff:g}; use scheme = ifrk4")


def _require_finite(arr, where: str):
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"non-finite values in {where}")


def rk4_step(rhs, y, dt):
    """One classical 4-stage explicit step; y is any ndarray-like."""
    k1 = np.asarray(rhs(y))
    _require_finite(k1, "rk4 stage 1")
    k2 = np.asarray(rhs(y + 0.5 * dt * k1))
    _require_finite(k2, "rk4 stage 2")
    k3 = np.asarray(rhs(y + 0.5 * dt * k2))
    _require_finite(k3, "rk4 stage 3")
    k4 = np.asarray(rhs(y + dt * k3))
    _require_finite(k4, "rk4 stage 4")
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _require_finite(out, "rk4 update")
    return out


def rk4_stepper(rhs):
    return lambda y, dt: rk4_step(rhs, y, dt)


def _ifrk4_hat_step(symbol, nhat, vhat, dt):
    """IFRK4 update in spectral space.

    nhat(hat) evaluates the transform of the nonlinear term; symbol is the
    per-mode multiplier of the linear part.  With nhat == 0 the update is the
    exact propagator exp(symbol*dt).
    """
    e_half = np.exp(0.5 * dt * symbol)
    e_full = e_half * e_half
    g1 = nhat(vhat)
    g2 = nhat(e_half * (vhat + 0.5 * dt * g1))
    g3 = nhat(e_half * vhat + 0.5 * dt * g2)
    g4 = nhat(e_full * vhat + dt * e_half * g3)
    return (e_full * vhat
            + (dt / 6.0) * (e_full * g1 + 2.0 * e_half * (g2 + g3) + g4))


def ifrk4_step(symbol: np.ndarray, nonlinear, wave: ScalarWave, dt: float,
               require_zero_mean: bool = False) -> ScalarWave:
    """One integrating-factor RK4 step of a scalar wave.

    nonlinear maps Field -> Field in physical space; symbol is the rfft-mode
    multiplier of the linear part.  When the symbol embeds the antiderivative
    term the profile must be zero-mean.
    """
    if require_zero_mean and not wave.antiderivative_defined:
        raise NonZeroMean("integrating-factor step with a nonlocal symbol needs zero mean")
    grid = wave.k.grid

    def nhat(vhat):
        f = nonlinear(Field.from_hat(grid, vhat))
        return f.hat

    out = _ifrk4_hat_step(symbol, nhat, wave.k.hat, dt)
    _require_finite(out, "ifrk4 update")
    return ScalarWave(Field.from_hat(grid, out), wave.zero_mean_tol)


def ifrk4_stepper(grid: Grid1D, symbol: np.ndarray, nonlinear,
                  require_zero_mean: bool = False):
    """Array-in/array-out stepper for integrate(); state is the value array."""

    def nhat(vhat):
        return nonlinear(Field.from_hat(grid, vhat)).hat

    def step(y, dt):
        wave = ScalarWave(Field(grid, y))
        if require_zero_mean and not wave.antiderivative_defined:
            raise NonZeroMean("integrating-factor step with a nonlocal symbol needs zero mean")
        out = _ifrk4_hat_step(symbol, nhat, wave.k.hat, dt)
        _require_finite(out, "ifrk4 update")
        return np.fft.irfft(out, n=grid.n)

    return step


@dataclass
class Trajectory:
    """Snapshots of one integration at the observation times."""

    times: list
    states: list
    grid: Grid1D | None = None
    labels: tuple = ()

    def __len__(self):
        return len(self.times)


def observation_times(config: StepperConfig) -> list[float]:
    t_end = config.t_end
    if config.observe_dt is None or t_end == 0.0:
        return [0.0, t_end] if t_end > 0.0 else [0.0]
    d = config.observe_dt
    m = int(np.floor(t_end / d + 1e-12))
    times = [i * d for i in range(m + 1)]
    if times[-1] < t_end - 1e-12 * max(1.0, t_end):
        times.append(t_end)
    else:
        times[-1] = t_end
    return times


def integrate(step, y0, config: StepperConfig, observers=(), grid: Grid1D | None = None,
              labels: tuple = ()) -> Trajectory:
    """March y0 to t_end, snapshotting at the configured observation times.

    step(y, dt) -> y advances one step.  Observers are callables (t, y)
    invoked at every observation time, including t = 0 and t = t_end.
    """
    y = np.array(y0, dtype=np.float64, copy=True)
    times = observation_times(config)
    traj = Trajectory([], [], grid, labels)

    def observe(t, y):
        traj.times.append(t)
        traj.states.append(y.copy())
        for obs in observers:
            obs(t, y)

    observe(times[0], y)
    t = 0.0
    for t_next in times[1:]:
        span = t_next - t
        nfull = int(np.floor(span / config.dt * (1.0 + 1e-14)))
        rem = span - nfull * config.dt
        if rem <= 1e-12 * config.dt:
            rem = 0.0
        try:
            for _ in range(nfull):
                y = step(y, config.dt)
                t += config.dt
            if rem > 0.0:
                y = step(y, rem)
        except NonFinite as exc:
            raise NonFinite(str(exc), t=t) from None
        t = t_next
        observe(t, y)
    return traj
