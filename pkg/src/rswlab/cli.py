"""Scenario-driven command-line runner.

Configs are flat UTF-8 ``key = value`` files with dotted section keys::

    model.name = kdv
    grid.n = 512
    grid.length = 40
    params.mu = 0.1
    regime.tag = KdV
    initial.k = sech2 1.3333333333333333 1.0 0.0
    stepper.dt = 0.01
    stepper.t_end = 10
    stepper.scheme = ifrk4
    output.observe_dt = 1.0

`rswlab run config` writes run.json, series.csv and optional snapshot CSVs;
`rswlab study config` writes study.json and study.csv.  Exit codes: 0 on
success/pass, 2 on configuration or validation failure, 3 on numerical
failure.  Nothing is random; identical configs give byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .core import (BoussinesqState, DimensionlessParams, Field, GNMediumState,
                   GNState, Grid1D, LinearState, Regime, validate_regime)
from .errors import (ConfigError, DomainTooSmall, EllipticSolveFailure,
                     NonFinite, NonPositiveDepth, NonZeroMean,
                     NotAnOstrovskySolution, RegimeViolation, RswError,
                     SlowTimeOutOfRange)
from .models import (ModelContext, boussinesq_rhs, gn_medium_rhs, gn_rhs,
                     kdv_nonlinear, kdv_symbol, ostrovsky_symbol,
                     poincare_semigroup, weak_rotation_rhs)
from .profiles import PROFILES, make_field
from .studies import (approximation_study, decay_study,
                      default_approximation_config, monitor_invariants,
                      reduction_residual_study)
from .timeint import (StepperConfig, Trajectory, ifrk4_stepper, integrate,
                      observation_times, rk4_stepper)

from dataclasses import replace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_CONFIG_ERRORS = (ConfigError, RegimeViolation, DomainTooSmall)
_NUMERICAL_ERRORS = (NonPositiveDepth, NonZeroMean, NonFinite,
                     EllipticSolveFailure, SlowTimeOutOfRange,
                     NotAnOstrovskySolution)

MODELS = ("boussinesq", "weak_rotation", "gn", "gn_medium", "ostrovsky",
          "kdv", "poincare_linear")

_STATE_FIELDS = {
    "boussinesq": BoussinesqState.labels,
    "weak_rotation": LinearState.labels,
    "poincare_linear": LinearState.labels,
    "gn": GNState.labels,
    "gn_medium": GNMediumState.labels,
    "ostrovsky": ("k",),
    "kdv": ("k",),
}


def fmt(x: float) -> str:
    """17 significant digits, scientific; round-trip exact for float64."""
    return f"{x:.16e}"


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def parse_config(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    conf = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            conf[key.strip()] = value.strip()
    return conf


def _get(conf: dict, key: str, default=None, required=False):
    if key in conf:
        return conf[key]
    if required:
        raise ConfigError(f"missing required key {key}")
    return default


def _get_float(conf, key, default=None, required=False):
    raw = _get(conf, key, default=None, required=required)
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key {key} must be a number, got {raw!r}") from None


def _get_int(conf, key, default=None, required=False):
    raw = _get(conf, key, default=None, required=required)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"key {key} must be an integer, got {raw!r}") from None


def _parse_params(conf: dict) -> DimensionlessParams:
    mu = _get_float(conf, "params.mu", required=True)
    p = DimensionlessParams(
        eps=_get_float(conf, "params.eps", mu),
        beta=_get_float(conf, "params.beta", 0.0),
        gamma=_get_float(conf, "params.gamma", 0.0),
        mu=mu,
        inv_ro=_get_float(conf, "params.inv_ro", 1.0),
        mu_max=_get_float(conf, "params.mu_max", 1.0),
    )
    bad = p.violations()
    if bad:
        raise RegimeViolation("; ".join(bad))
    return p


def _parse_initial_field(grid: Grid1D, spec: str, base_dir: str) -> Field:
    """'<profile> [amplitude [width [center]]]' or 'file <path>'."""
    parts = spec.split()
    name = parts[0]
    if name == "file":
        if len(parts) != 2:
            raise ConfigError("file profile needs exactly one path")
        path = os.path.join(base_dir, parts[1])
        if not os.path.exists(path):
            raise ConfigError(f"initial-data file not found: {path}")
        vals = np.loadtxt(path, delimiter=",", ndmin=2)[:, -1]
        if len(vals) != grid.n:
            raise ConfigError(f"initial-data file has {len(vals)} rows, grid needs {grid.n}")
        return Field(grid, vals)
    if name == "geostrophic":
        raise ConfigError("geostrophic is only valid for initial.zeta")
    if name not in PROFILES:
        raise ConfigError(f"unknown profile {name!r} (choices {sorted(PROFILES)} or file)")
    args = [float(v) for v in parts[1:4]]
    amp = args[0] if len(args) > 0 else 1.0
    width = args[1] if len(args) > 1 else 1.0
    center = args[2] if len(args) > 2 else 0.0
    return make_field(grid, name, amp, width, center)


def _build_initial(conf: dict, grid: Grid1D, model: str, base_dir: str):
    from .spectral import deriv

    fields = {}
    names = _STATE_FIELDS[model]
    for name in names:
        key = f"initial.{name}"
        if key in conf and conf[key].split()[0] == "geostrophic":
            continue  # resolved after v is known
        fields[name] = (_parse_initial_field(grid, conf[key], base_dir)
                        if key in conf else Field.zeros(grid))
    if "initial.zeta" in conf and conf["initial.zeta"].split()[0] == "geostrophic":
        if "v" not in fields:
            raise ConfigError("initial.zeta = geostrophic requires an initial.v")
        fields["zeta"] = deriv(fields["v"], 1)
    return fields


# ---------------------------------------------------------------------------
# Scenario runner
# ---------------------------------------------------------------------------

def _write_series_csv(path: str, report) -> None:
    names = ["mass", "l2", "linf", "energy"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(names) + "\n")
        for i, t in enumerate(report.times):
            row = [fmt(t)]
            for n in names:
                row.append(fmt(report.series[n][i]) if n in report.series else "")
            fh.write(",".join(row) + "\n")


def _write_snapshots(outdir: str, traj: Trajectory, labels) -> None:
    snapdir = os.path.join(outdir, "snapshots")
    os.makedirs(snapdir, exist_ok=True)
    x = traj.grid.x
    for idx, (t, arr) in enumerate(zip(traj.times, traj.states)):
        arr2 = arr if arr.ndim == 2 else arr[None, :]
        path = os.path.join(snapdir, f"t_{idx:04d}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x," + ",".join(labels) + "\n")
            for j in range(len(x)):
                fh.write(",".join([fmt(x[j])] + [fmt(arr2[c, j]) for c in range(arr2.shape[0])]) + "\n")


def run_scenario(config_path: str, out_override: str | None = None) -> int:
    started = time.time()
    conf = parse_config(config_path)
    base_dir = os.path.dirname(os.path.abspath(config_path))

    model = _get(conf, "model.name", required=True)
    if model not in MODELS:
        raise ConfigError(f"model.name must be one of {MODELS}, got {model!r}")
    n = _get_int(conf, "grid.n", required=True)
    length = _get_float(conf, "grid.length", required=True)
    try:
        grid = Grid1D(n, length)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    params = _parse_params(conf)
    regime_tag = _get(conf, "regime.tag", required=True)
    try:
        regime = Regime(regime_tag, mu0=_get_float(conf, "regime.mu0", 1.0),
                        order_constant=_get_float(conf, "regime.order_constant", 1.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ok, bad = validate_regime(params, regime)
    if not ok:
        raise RegimeViolation("; ".join(bad))

    scheme = _get(conf, "stepper.scheme", "ifrk4" if model in ("kdv", "ostrovsky") else "rk4")
    step_cfg = StepperConfig(
        dt=_get_float(conf, "stepper.dt", 0.5 * grid.dx),
        t_end=_get_float(conf, "stepper.t_end", required=True),
        scheme=scheme,
        observe_dt=_get_float(conf, "output.observe_dt", None),
        cfl_guard=_get_float(conf, "stepper.cfl_guard", 2.8),
    )

    init = _build_initial(conf, grid, model, base_dir)
    bathy = (_parse_initial_field(grid, conf["bathymetry"], base_dir)
             if "bathymetry" in conf else Field.zeros(grid))
    if regime_tag in ("Poin", "Ost", "KdV") and float(np.abs(bathy.values).max()) != 0.0:
        raise RegimeViolation(f"regime {regime_tag} runs over a flat bottom; "
                              "remove the bathymetry key")
    ctx = ModelContext(params, bathy, __plan_for(grid, conf),
                       h_min=_get_float(conf, "model.h_min", 0.05))

    labels = _STATE_FIELDS[model]
    if model in ("kdv", "ostrovsky"):
        step_cfg.check_dispersive(grid)
        symbol = kdv_symbol(grid) if model == "kdv" else ostrovsky_symbol(grid)
        if scheme == "ifrk4":
            step = ifrk4_stepper(grid, symbol, kdv_nonlinear,
                                 require_zero_mean=(model == "ostrovsky"))
        else:
            from .models import kdv_rhs, ostrovsky_rhs
            from .core import ScalarWave
            rhs_fn = kdv_rhs if model == "kdv" else ostrovsky_rhs
            step = rk4_stepper(lambda arr: rhs_fn(ScalarWave(Field(grid, arr))).values)
        traj = integrate(step, init["k"].values, step_cfg, grid=grid, labels=labels)
    elif model == "poincare_linear":
        s0 = LinearState(init["zeta"], init["u"], init["v"])
        times = observation_times(step_cfg)
        traj = Trajectory(list(times), [poincare_semigroup(s0, t).stack() for t in times],
                          grid, labels)
    else:
        state_cls = {"boussinesq": BoussinesqState, "weak_rotation": LinearState,
                     "gn": GNState, "gn_medium": GNMediumState}[model]
        rhs_fn = {"boussinesq": boussinesq_rhs, "weak_rotation": weak_rotation_rhs,
                  "gn": gn_rhs, "gn_medium": gn_medium_rhs}[model]
        y0 = state_cls(*(init[name] for name in labels)).stack()
        step = rk4_stepper(lambda arr: rhs_fn(state_cls.from_stack(grid, arr), ctx).stack())
        traj = integrate(step, y0, step_cfg, grid=grid, labels=labels)

    monitor_model = model if model in ("kdv", "ostrovsky") else "auto"
    report = monitor_invariants(traj, params=params, b=ctx.b, model=monitor_model)

    outdir = out_override or _get(conf, "output.dir", "out")
    outdir = outdir if os.path.isabs(outdir) else os.path.join(base_dir, outdir)
    os.makedirs(outdir, exist_ok=True)
    _write_series_csv(os.path.join(outdir, "series.csv"), report)
    if _get(conf, "output.snapshots", "no").lower() in ("yes", "true", "1"):
        _write_snapshots(outdir, traj, labels)
    run_info = {
        "config": conf,
        "model": model,
        "grid": {"n": grid.n, "length": grid.length},
        "invariants": report.flags,
        "wall_seconds": time.time() - started,
    }
    with open(os.path.join(outdir, "run.json"), "w", encoding="utf-8") as fh:
        json.dump(run_info, fh, indent=2, sort_keys=True)
    return EXIT_OK


def __plan_for(grid: Grid1D, conf: dict):
    from .spectral import SpectralPlan
    return SpectralPlan(grid, _get_float(conf, "model.dealias_fraction", 2.0 / 3.0))


# ---------------------------------------------------------------------------
# Study runner
# ---------------------------------------------------------------------------

STUDIES = ("approximation_poin", "approximation_ost", "approximation_kdv",
           "reduction_gn_to_boussinesq", "reduction_boussinesq_to_weak",
           "reduction_gn_medium_to_weak", "decay")


def run_study(config_path: str, out_override: str | None = None) -> int:
    conf = parse_config(config_path)
    base_dir = os.path.dirname(os.path.abspath(config_path))
    kind = _get(conf, "study.kind", required=True)
    if kind not in STUDIES:
        raise ConfigError(f"study.kind must be one of {STUDIES}, got {kind!r}")

    mu_list = None
    if "study.mu_list" in conf:
        try:
            mu_list = tuple(float(v) for v in conf["study.mu_list"].split(","))
        except ValueError:
            raise ConfigError("study.mu_list must be comma-separated reals") from None

    if kind == "decay":
        n = _get_int(conf, "grid.n", 4096)
        length = _get_float(conf, "grid.length", 800.0)
        grid = Grid1D(n, length)
        from .profiles import gaussian
        u0 = Field(grid, gaussian(grid.x, 1.0, _get_float(conf, "initial.width", 1.0)))
        t_lo = _get_float(conf, "study.t_min", 5.0)
        t_hi = _get_float(conf, "study.t_max", 100.0)
        t_grid = np.linspace(t_lo, t_hi, _get_int(conf, "study.t_samples", 25))
        rep = decay_study(LinearState(Field.zeros(grid), u0, Field.zeros(grid)), t_grid)
        payload = rep.as_dict()
        lo = _get_float(conf, "study.exponent_min", 0.4)
        hi = _get_float(conf, "study.exponent_max", 0.6)
        passed = (not rep.degenerate) and lo <= rep.exponent <= hi
        payload["passed"] = passed
        rows = list(zip(rep.times, rep.linf_values))
        header = "t,linf"
    elif kind.startswith("approximation_"):
        regime = {"approximation_poin": "Poin", "approximation_ost": "Ost",
                  "approximation_kdv": "KdV"}[kind]
        if mu_list is not None and len(mu_list) < 3:
            raise ConfigError("need >= 3 mu values")
        cfg = default_approximation_config(regime)
        overrides = {}
        if _get_int(conf, "grid.n") is not None:
            overrides["n"] = _get_int(conf, "grid.n")
        if _get_float(conf, "grid.length") is not None:
            overrides["length"] = _get_float(conf, "grid.length")
        if _get_float(conf, "study.horizon_constant") is not None:
            overrides["horizon_constant"] = _get_float(conf, "study.horizon_constant")
        if _get(conf, "study.resolution_check") is not None:
            overrides["resolution_check"] = conf["study.resolution_check"].lower() in ("yes", "true", "1")
        if _get_int(conf, "study.threads") is not None:
            overrides["threads"] = _get_int(conf, "study.threads")
        if overrides:
            cfg = replace(cfg, **overrides)
        rep = approximation_study(regime, mu_values=mu_list, config=cfg)
        payload = rep.as_dict()
        passed = rep.passed
        rows = list(zip(rep.mu_values, rep.errors))
        header = "mu,error"
    else:
        pair = kind.removeprefix("reduction_")
        if mu_list is not None and len(mu_list) < 3:
            raise ConfigError("need >= 3 mu values")
        kwargs = {}
        if _get_int(conf, "grid.n") is not None:
            kwargs["grid"] = Grid1D(_get_int(conf, "grid.n"),
                                    _get_float(conf, "grid.length", 30.0))
        rep = reduction_residual_study(pair, mu_values=mu_list or (0.2, 0.1, 0.05, 0.025),
                                       **kwargs)
        payload = rep.as_dict()
        passed = rep.passed
        rows = list(zip(rep.mu_values, rep.errors))
        header = "mu,error"

    outdir = out_override or _get(conf, "output.dir", "out")
    outdir = outdir if os.path.isabs(outdir) else os.path.join(base_dir, outdir)
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "study.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    with open(os.path.join(outdir, "study.csv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for a, bv in rows:
            fh.write(f"{fmt(a)},{fmt(bv)}\n")
    return EXIT_OK if passed else EXIT_CONFIG


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rswlab",
                                     description="rotating shallow-water model laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one simulation scenario")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory override")
    p_study = sub.add_parser("study", help="run a convergence/validation study")
    p_study.add_argument("config")
    p_study.add_argument("--out", default=None, help="output directory override")
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            return run_scenario(args.config, args.out)
        return run_study(args.config, args.out)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RswError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
