"""Command line front end for the rate calculus, simulators, certifiers and
the steady interval solver.

Every subcommand resolves its inputs from an optional JSON config file plus
command line flags (flags win), runs the corresponding module pipeline, and
writes its outputs together with a ``manifest.json`` recording the resolved
config, the master seed, the tool version and content hashes of every output
file. Passing a manifest back through ``--config`` re-runs the experiment
with the embedded settings, which reproduces all CSV outputs bit for bit.

Exit codes: 0 pass/converged, 2 invalid input or config (schema messages name
the offending field), 3 certified failure (a computed certificate says no),
4 inconclusive (an estimate or fit exists but certifies nothing).
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bgk_interval import Grid1D, solve_steady
from .config import MODEL_CATALOG, model_from_config
from .errors import (
    InvalidInputError,
    NonConvergedError,
    SchemaError,
)
from .experiments import (
    curve_to_csv,
    curve_to_svg,
    decay_fit,
    simulate_ensemble,
    snapshot_to_csv,
    tv_decay_curve,
)
from .rates import (
    ConcaveRateFn,
    HarrisInput,
    degenerate_boltzmann_rate,
    doeblin_rate,
    drift_to_discrete,
    harris_rate,
    subgeometric_envelope,
)
from .verification import drift_verify, gcc_check, minorisation_estimate
from .weights import weight_catalog

EXIT_PASS = 0
EXIT_SCHEMA = 2
EXIT_FAIL = 3
EXIT_INCONCLUSIVE = 4


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("HARRIS_KINETICS_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_config(path: Optional[str]):
    """Config dict plus, when given a manifest, its embedded master seed."""
    if path is None:
        return {}, None
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError("config", f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise SchemaError("config", f"not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise SchemaError("config", "top level must be a JSON object")
    if "subcommand" in data and "config" in data:
        inner = data["config"]
        if not isinstance(inner, dict):
            raise SchemaError("config", "manifest config block must be an object")
        return inner, data.get("master_seed")
    return data, data.get("master_seed")


def _section(cfg: dict, name: str) -> dict:
    sec = cfg.get(name, {})
    if not isinstance(sec, dict):
        raise SchemaError(name, "section must be a JSON object")
    return dict(sec)


def _pick(*values):
    for v in values:
        if v is not None:
            return v
    return None


def _resolve_model(args, cfg: dict, section: dict):
    """Model instance plus the verbatim config dict that rebuilds it."""
    spec = _pick(getattr(args, "model", None), section.get("model"), cfg.get("model"))
    if spec is None:
        raise SchemaError("model", "no model given (flag --model or config key)")
    if isinstance(spec, str):
        if spec not in MODEL_CATALOG:
            known = ", ".join(sorted(MODEL_CATALOG))
            raise SchemaError("model", f"unknown catalog name {spec!r}; known: {known}")
        model_cfg = copy.deepcopy(MODEL_CATALOG[spec])
    elif isinstance(spec, dict):
        model_cfg = copy.deepcopy(spec)
    else:
        raise SchemaError("model", "must be a catalog name or a config object")
    return model_from_config(model_cfg), model_cfg


def _resolve_weight(model, args, section: dict):
    tag = _pick(getattr(args, "weight", None), section.get("weight"))
    if tag is None:
        return None
    params = section.get("weight_params", {})
    if not isinstance(params, dict):
        raise SchemaError("weight_params", "must be a JSON object")
    # accept relaxed spellings like "bgk_r2" for the catalog tag "R2"
    candidates = [tag, tag.upper(), tag.rsplit("_", 1)[-1].upper()]
    last = None
    for cand in dict.fromkeys(candidates):
        try:
            return weight_catalog(model, cand, **params)
        except InvalidInputError as exc:
            if last is None:
                last = exc
    raise last


def _parse_floats(text: str, field: str) -> np.ndarray:
    try:
        return np.asarray([float(p) for p in text.split(",")], dtype=float)
    except ValueError:
        raise SchemaError(field, f"expected comma-separated numbers, got {text!r}")


class _Emitter:
    """Collects output files and their content hashes for the manifest."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.records = []

    def write(self, name: str, text: str) -> Path:
        data = text.encode("utf-8")
        path = self.out_dir / name
        path.write_bytes(data)
        self.records.append(
            {"path": name, "sha256": hashlib.sha256(data).hexdigest()}
        )
        return path

    def manifest(self, subcommand: str, config: dict, master_seed, threads, started):
        doc = {
            "subcommand": subcommand,
            "version": __version__,
            "master_seed": master_seed,
            "threads": threads,
            "config": config,
            "started": started,
            "finished": _now(),
            "outputs": self.records,
        }
        (self.out_dir / "manifest.json").write_text(_dumps(doc))
        return doc


def _rate_bound_doc(bound) -> dict:
    return {
        "kind": bound.kind,
        "C": bound.C,
        "lam": bound.lam,
        "provenance": bound.provenance,
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

_RATE_MODES = ("doeblin", "drift", "harris", "degenerate_boltzmann", "subgeometric")


def _cmd_rates(args) -> int:
    cfg, _ = _load_config(args.config)
    section = _section(cfg, "rates")
    params = {k: v for k, v in section.items() if k != "mode"}
    for pair in args.params:
        if "=" not in pair:
            raise SchemaError("rates", f"expected key=value, got {pair!r}")
        key, _, val = pair.partition("=")
        try:
            params[key] = float(val)
        except ValueError:
            raise SchemaError(f"rates.{key}", f"expected a number, got {val!r}")

    flags = [m for m in _RATE_MODES if getattr(args, m)]
    if len(flags) > 1:
        raise SchemaError("rates.mode", f"multiple modes given: {flags}")
    mode = flags[0] if flags else section.get("mode")
    if mode not in _RATE_MODES:
        raise SchemaError(
            "rates.mode", f"pick one of {' '.join('--' + m for m in _RATE_MODES)}"
        )

    def need(*keys):
        vals = []
        for key in keys:
            if key not in params:
                raise SchemaError(f"rates.{key}", "missing required field")
            vals.append(float(params[key]))
        return vals

    started = _now()
    emit = _Emitter(_out_dir(args))
    if mode == "doeblin":
        alpha, tau = need("alpha", "tau")
        doc = _rate_bound_doc(doeblin_rate(alpha, tau))
    elif mode == "drift":
        zeta, d_const, tau = need("zeta", "D", "tau")
        step = drift_to_discrete(zeta, d_const, tau)
        doc = {"gamma": step.gamma, "K": step.K, "K_loose": step.K_loose}
    elif mode == "harris":
        gamma, k_const, alpha, r_level, tau, alpha0 = need(
            "gamma", "K", "alpha", "R", "tau", "alpha0"
        )
        gamma0 = params.get("gamma0")
        inp = HarrisInput(
            gamma=gamma,
            K=k_const,
            alpha=alpha,
            R=r_level,
            tau=tau,
            alpha0=alpha0,
            gamma0=None if gamma0 is None else float(gamma0),
        )
        doc = _rate_bound_doc(harris_rate(inp))
    elif mode == "degenerate_boltzmann":
        beta, kappa, tau, sigma_inf = need("beta", "kappa", "tau", "sigma_inf")
        doc = _rate_bound_doc(degenerate_boltzmann_rate(beta, kappa, tau, sigma_inf))
    else:
        xi, c_const, mu_phi = need("xi", "C", "mu_phi")
        tmax = float(params.get("tmax", 1e4))
        if tmax <= 1.0:
            raise SchemaError("rates.tmax", "must exceed 1")
        bound = subgeometric_envelope(ConcaveRateFn.power(xi), c_const, mu_phi)
        doc = _rate_bound_doc(bound)
        t_grid = np.geomspace(1e-2, tmax, 241)
        lines = ["t,bound"]
        for t in t_grid:
            lines.append(f"{float(t)!r},{float(bound.evaluate(float(t)))!r}")
        emit.write("envelope.csv", "\n".join(lines) + "\n")

    payload = _dumps(doc)
    emit.write("rate_bound.json", payload)
    resolved = {"rates": {"mode": mode, **params}}
    emit.manifest("rates", resolved, None, 1, started)
    sys.stdout.write(payload)
    return EXIT_PASS


def _time_grid(args, section, default_points: int):
    explicit = section.get("t_grid")
    if explicit is not None:
        return np.asarray([float(t) for t in explicit], dtype=float)
    tmax = float(_pick(args.tmax, section.get("tmax"), 20.0))
    points = int(_pick(args.points, section.get("points"), default_points))
    if tmax <= 0.0:
        raise SchemaError("tmax", "must be positive")
    if points < 2:
        raise SchemaError("points", "need at least 2 grid times")
    # dense early, log-spaced late: serves both geometric and power decay
    return np.concatenate([[0.0], np.geomspace(tmax / 100.0, tmax, points - 1)])


def _cmd_simulate(args) -> int:
    cfg, man_seed = _load_config(args.config)
    section = _section(cfg, "simulate")
    model, model_cfg = _resolve_model(args, cfg, section)
    seed = int(_pick(args.seed, man_seed, 0))
    threads = int(_pick(args.threads, cfg.get("threads"), os.cpu_count() or 1))
    t_grid = _time_grid(args, section, default_points=5)
    n_paths = int(_pick(args.n, section.get("n_paths"), 1000))
    initial = str(_pick(args.initial, section.get("initial"), "equilibrium"))
    dt = _pick(args.dt, section.get("dt"))

    initial_point = None
    x0 = _pick(
        None if args.x0 is None else _parse_floats(args.x0, "x0"), section.get("x0")
    )
    v0 = _pick(
        None if args.v0 is None else _parse_floats(args.v0, "v0"), section.get("v0")
    )
    if initial == "point":
        x0 = np.zeros(model.d) if x0 is None else np.asarray(x0, float)
        v0 = 0.5 * np.ones(model.d) if v0 is None else np.asarray(v0, float)
        initial_point = (x0, v0)

    started = _now()
    snap = simulate_ensemble(
        model,
        n_paths=n_paths,
        t_grid=t_grid,
        master_seed=seed,
        initial=initial,
        initial_point=initial_point,
        dt=None if dt is None else float(dt),
        threads=threads,
    )
    emit = _Emitter(_out_dir(args))
    emit.write("ensemble.csv", snapshot_to_csv(snap))
    resolved = {
        "model": model_cfg,
        "simulate": {
            "n_paths": n_paths,
            "t_grid": [float(t) for t in snap.t_grid],
            "initial": initial,
            "dt": None if dt is None else float(dt),
        },
    }
    if initial_point is not None:
        resolved["simulate"]["x0"] = [float(c) for c in initial_point[0]]
        resolved["simulate"]["v0"] = [float(c) for c in initial_point[1]]
    emit.manifest("simulate", resolved, seed, threads, started)
    alive = float(np.mean(snap.alive[-1]))
    print(
        f"simulated {n_paths} paths to t={float(snap.t_grid[-1]):g} "
        f"({snap.t_grid.size} snapshots, {alive:.1%} alive)"
    )
    return EXIT_PASS


def _cmd_verify_drift(args) -> int:
    cfg, man_seed = _load_config(args.config)
    section = _section(cfg, "verify_drift")
    model, model_cfg = _resolve_model(args, cfg, section)
    phi = _resolve_weight(model, args, section)
    if phi is None:
        raise SchemaError("weight", "verify-drift needs a weight tag (--weight)")
    seed = int(_pick(args.seed, man_seed, 0))
    n = int(_pick(args.n, section.get("n"), 2048))
    sampler = str(_pick(args.sampler, section.get("sampler"), "grid"))
    zeta_target = _pick(args.zeta, section.get("zeta_target"))
    d_target = _pick(args.D, section.get("d_target"))

    started = _now()
    report = drift_verify(
        model,
        phi,
        zeta_target=None if zeta_target is None else float(zeta_target),
        d_target=None if d_target is None else float(d_target),
        sampler=sampler,
        n=n,
        rng=np.random.default_rng(seed),
    )
    doc = {
        "passed": report.passed,
        "mode": report.mode,
        "zeta_hat": report.zeta_hat,
        "d_hat": report.d_hat,
        "margin": report.margin,
        "n_samples": report.n_samples,
        "tail_controlled": report.tail_controlled,
        "degenerate_weight": report.degenerate_weight,
        "weight": phi.name,
        "worst_point": {
            "x": list(map(float, report.worst_point.x)),
            "v": list(map(float, report.worst_point.v)),
        },
        "sampling": report.sampling,
    }
    emit = _Emitter(_out_dir(args))
    emit.write("drift_report.json", _dumps(doc))
    resolved = {
        "model": model_cfg,
        "verify_drift": {
            "weight": phi.name,
            "weight_params": section.get("weight_params", {}),
            "zeta_target": None if zeta_target is None else float(zeta_target),
            "d_target": None if d_target is None else float(d_target),
            "sampler": sampler,
            "n": n,
        },
    }
    emit.manifest("verify-drift", resolved, seed, 1, started)
    print(report.summary())
    return EXIT_PASS if report.passed else EXIT_FAIL


def _cmd_minorisation(args) -> int:
    cfg, man_seed = _load_config(args.config)
    section = _section(cfg, "minorisation")
    model, model_cfg = _resolve_model(args, cfg, section)
    phi = _resolve_weight(model, args, section)
    seed = int(_pick(args.seed, man_seed, 0))
    tau = float(_pick(args.tau, section.get("tau"), 1.0))
    r_level = float(_pick(args.r_level, section.get("r_level"), 10.0))
    n_paths = int(_pick(args.n, section.get("n_paths"), 20000))
    n_init = int(_pick(args.n_init, section.get("n_init"), 4))
    bins = _pick(args.bins, section.get("bins"), 6)
    confidence = float(_pick(args.confidence, section.get("confidence"), 0.99))

    eta_box = _pick(
        None if args.eta_box is None else json.loads(args.eta_box),
        section.get("eta_box"),
    )
    if eta_box is None:
        raise SchemaError(
            "minorisation.eta_box", "missing reference box [[lo,hi],...]"
        )
    if phi is None and "initial_points" not in section:
        raise SchemaError(
            "minorisation.weight", "need a weight tag or explicit initial_points"
        )
    initial_points = None
    if "initial_points" in section:
        pts = section["initial_points"]
        initial_points = (
            np.asarray(pts["x"], dtype=float),
            np.asarray(pts["v"], dtype=float),
        )

    started = _now()
    report = minorisation_estimate(
        model,
        phi,
        r_level=r_level,
        tau=tau,
        eta_box=eta_box,
        bins=int(bins) if not isinstance(bins, (list, tuple)) else tuple(bins),
        n_paths=n_paths,
        n_init=n_init,
        rng=np.random.default_rng(seed),
        confidence=confidence,
        initial_points=initial_points,
    )
    doc = {
        "alpha_hat": report.alpha_hat,
        "raw_alpha": report.raw_alpha,
        "tau": report.tau,
        "confidence": report.confidence,
        "bins": list(report.bins),
        "n_paths": report.n_paths,
        "n_init": report.n_init,
        "eta_box": [list(iv) for iv in report.eta_box],
        "small_set": report.small_set,
        "per_init_alpha": list(report.per_init_alpha),
        "n_empty_bins": len(report.empty_bins),
    }
    if 0.0 < report.alpha_hat < 1.0:
        doc["rate_bound"] = _rate_bound_doc(doeblin_rate(report.alpha_hat, tau))
    emit = _Emitter(_out_dir(args))
    emit.write("minorisation.json", _dumps(doc))
    resolved = {
        "model": model_cfg,
        "minorisation": {
            "weight": None if phi is None else phi.name,
            "weight_params": section.get("weight_params", {}),
            "r_level": r_level,
            "tau": tau,
            "eta_box": [list(map(float, iv)) for iv in eta_box],
            "bins": list(report.bins),
            "n_paths": n_paths,
            "n_init": n_init,
            "confidence": confidence,
        },
    }
    emit.manifest("minorisation", resolved, seed, 1, started)
    print(report.summary())
    return EXIT_PASS if report.alpha_hat > 0.0 else EXIT_INCONCLUSIVE


def _cmd_gcc(args) -> int:
    cfg, _ = _load_config(args.config)
    section = _section(cfg, "gcc")
    model, model_cfg = _resolve_model(args, cfg, section)
    sigma = getattr(model, "sigma", None)
    if sigma is None:
        raise SchemaError("model", "gcc needs a model with a scattering field")
    # default horizon: the slowest default speed (0.25) crosses the widest
    # possible scattering gap (0.6 of the torus) within 3 time units
    t_horizon = float(_pick(args.tmax, section.get("t_horizon"), 3.0))
    nx = int(_pick(args.nx, section.get("nx"), 32))
    n_sub = int(_pick(None, section.get("n_sub"), 1000))
    speeds = section.get("speeds", [0.25, 0.5, 0.75, 1.0])
    with_potential = bool(section.get("use_potential", False))
    potential = getattr(model, "potential", None) if with_potential else None

    x_grid = np.linspace(0.0, 1.0, nx, endpoint=False)[:, None]
    v_vals = sorted({float(s) for s in speeds} | {-float(s) for s in speeds})
    v_grid = np.asarray(v_vals, dtype=float)[:, None]

    started = _now()
    report = gcc_check(
        sigma,
        potential=potential,
        t_horizon=t_horizon,
        x_grid=x_grid,
        v_grid=v_grid,
        n_sub=n_sub,
    )
    doc = {
        "kappa_hat": report.kappa_hat,
        "t_horizon": report.t_horizon,
        "grid": report.grid,
        "with_potential": report.with_potential,
    }
    emit = _Emitter(_out_dir(args))
    emit.write("gcc.json", _dumps(doc))
    resolved = {
        "model": model_cfg,
        "gcc": {
            "t_horizon": t_horizon,
            "nx": nx,
            "speeds": [float(s) for s in speeds],
            "n_sub": n_sub,
            "use_potential": with_potential,
        },
    }
    emit.manifest("gcc", resolved, None, 1, started)
    print(report.summary())
    return EXIT_PASS if report.kappa_hat > 0.0 else EXIT_FAIL


def _cmd_tv_decay(args) -> int:
    cfg, man_seed = _load_config(args.config)
    section = _section(cfg, "tv_decay")
    model, model_cfg = _resolve_model(args, cfg, section)
    phi = _resolve_weight(model, args, section)
    seed = int(_pick(args.seed, man_seed, 0))
    threads = int(_pick(args.threads, cfg.get("threads"), os.cpu_count() or 1))
    t_grid = _time_grid(args, section, default_points=15)
    n_paths = int(_pick(args.n, section.get("n_paths"), 10000))
    bins = int(_pick(args.bins, section.get("bins"), 16))
    reference = str(_pick(args.reference, section.get("reference"), "equilibrium"))
    fit_kind = str(_pick(args.fit_kind, section.get("fit_kind"), "exponential"))
    initial = str(_pick(args.initial, section.get("initial"), "point"))
    dt = _pick(args.dt, section.get("dt"))

    initial_point = None
    if "x0" in section or args.x0 is not None:
        x0 = (
            _parse_floats(args.x0, "x0")
            if args.x0 is not None
            else np.asarray(section["x0"], float)
        )
        v0 = (
            _parse_floats(args.v0, "v0")
            if args.v0 is not None
            else np.asarray(section.get("v0", 0.5 * np.ones(model.d)), float)
        )
        initial_point = (x0, v0)

    started = _now()
    curve = tv_decay_curve(
        model,
        n_paths=n_paths,
        t_grid=t_grid,
        master_seed=seed,
        phi=phi,
        initial=initial,
        initial_point=initial_point,
        bins=bins,
        reference=reference,
        threads=threads,
        dt=None if dt is None else float(dt),
    )
    emit = _Emitter(_out_dir(args))
    emit.write("curve.csv", curve_to_csv(curve))

    resolved = {
        "model": model_cfg,
        "tv_decay": {
            "n_paths": n_paths,
            "t_grid": [float(t) for t in t_grid],
            "bins": bins,
            "weight": None if phi is None else phi.name,
            "weight_params": section.get("weight_params", {}),
            "reference": reference,
            "fit_kind": fit_kind,
            "initial": initial,
            "dt": None if dt is None else float(dt),
        },
    }
    if initial_point is not None:
        resolved["tv_decay"]["x0"] = [float(c) for c in initial_point[0]]
        resolved["tv_decay"]["v0"] = [float(c) for c in initial_point[1]]

    window = curve.auto_window()
    try:
        fit = decay_fit(curve.times, curve.values, kind=fit_kind, window=window)
    except InvalidInputError as exc:
        emit.write("curve.svg", curve_to_svg(curve, title="TV decay"))
        emit.manifest("tv-decay", resolved, seed, threads, started)
        json.dump(
            {"error": type(exc).__name__, "message": str(exc)},
            sys.stderr,
        )
        sys.stderr.write("\n")
        print("curve written; fit inconclusive (too few points above noise)")
        return EXIT_INCONCLUSIVE
    curve.fit = fit
    emit.write(
        "curve.svg",
        curve_to_svg(curve, title="TV decay", log_time=fit_kind == "power"),
    )
    fit_doc = {
        "kind": fit.kind,
        "rate_or_exponent": fit.rate_or_exponent,
        "intercept": fit.intercept,
        "residual": fit.residual,
        "half_width": fit.half_width,
        "window": list(fit.window),
        "n_points": int(window[1] - window[0]),
        "noise_floor_last": float(curve.noise_floor[-1]),
        "weight": curve.weight_name,
    }
    emit.write("fit.json", _dumps(fit_doc))
    emit.manifest("tv-decay", resolved, seed, threads, started)
    print(
        f"{fit.kind} fit: rate_or_exponent={fit.rate_or_exponent:.4f} "
        f"+/- {fit.half_width:.4f}, residual={fit.residual:.4f}, "
        f"window={fit.window}"
    )
    return EXIT_PASS if fit.rate_or_exponent > 0.0 else EXIT_FAIL


def _cmd_steady(args) -> int:
    cfg, _ = _load_config(args.config)
    section = _section(cfg, "steady")
    t0 = _pick(args.T0, section.get("T0"))
    t1 = _pick(args.T1, section.get("T1"))
    kappa = _pick(args.kappa, section.get("kappa"))
    for name, val in (("T0", t0), ("T1", t1), ("kappa", kappa)):
        if val is None:
            raise SchemaError(f"steady.{name}", "missing required field")
    t0, t1, kappa = float(t0), float(t1), float(kappa)
    nx = int(_pick(args.nx, section.get("nx"), 64))
    nv = int(_pick(args.nv, section.get("nv"), 128))
    v_max = _pick(args.vmax, section.get("v_max"))
    if v_max is None:
        v_max = 8.0 * float(np.sqrt(max(t0, t1)))
    tol = float(_pick(args.tol, section.get("tol"), 1e-10))
    max_iter = int(_pick(None, section.get("max_iter"), 20000))
    full_table = bool(args.full_table or section.get("full_table", False))

    grid = Grid1D(nx=nx, nv=nv, v_max=float(v_max))
    started = _now()
    report = solve_steady(t0, t1, kappa, grid=grid, tol=tol, max_iter=max_iter)

    emit = _Emitter(_out_dir(args))
    emit.write("profile.csv", report.to_csv())
    if full_table:
        emit.write("f.csv", report.f_to_csv())
    doc = {
        "converged": report.converged,
        "iterations": report.iterations,
        "residual": report.residual,
        "T0": report.T0,
        "T1": report.T1,
        "kappa": report.kappa,
        "r_tilde_0": report.r_tilde_0,
        "r_tilde_1": report.r_tilde_1,
        "max_abs_u": float(np.max(np.abs(report.u))),
        "rho_range": [float(report.rho.min()), float(report.rho.max())],
        "P_range": [float(report.P.min()), float(report.P.max())],
        "T_range": [float(report.T_f.min()), float(report.T_f.max())],
        "regime_combos": report.regime_combos,
        "quadrature_gate": max(grid.quadrature_gate(t0), grid.quadrature_gate(t1)),
    }
    emit.write("steady.json", _dumps(doc))
    resolved = {
        "steady": {
            "T0": t0,
            "T1": t1,
            "kappa": kappa,
            "nx": nx,
            "nv": nv,
            "v_max": float(v_max),
            "tol": tol,
            "max_iter": max_iter,
            "full_table": full_table,
        }
    }
    emit.manifest("steady", resolved, None, 1, started)
    print(
        f"converged in {report.iterations} sweeps (residual {report.residual:.2e}); "
        f"max|u|={doc['max_abs_u']:.2e} rho=[{doc['rho_range'][0]:.4f},"
        f"{doc['rho_range'][1]:.4f}] P=[{doc['P_range'][0]:.4f},{doc['P_range'][1]:.4f}]"
    )
    return EXIT_PASS


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (or a manifest.json)")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--threads", type=int, help="worker pool size")
    common.add_argument(
        "--out", help="output directory (default $HARRIS_KINETICS_OUT or .)"
    )

    model_flags = argparse.ArgumentParser(add_help=False)
    model_flags.add_argument("--model", help="catalog model name")

    parser = argparse.ArgumentParser(
        prog="harris-kinetics",
        description="Convergence-rate workbench for kinetic models",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("rates", parents=[common], help="closed-form rate bounds")
    for m in _RATE_MODES:
        p.add_argument(f"--{m.replace('_', '-')}", dest=m, action="store_true")
    p.add_argument("params", nargs="*", help="key=value constants")
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser(
        "simulate", parents=[common, model_flags], help="ensemble trajectories"
    )
    p.add_argument("--N", dest="n", type=int, help="number of trajectories")
    p.add_argument("--tmax", type=float)
    p.add_argument("--points", type=int, help="snapshot count")
    p.add_argument("--initial", choices=["equilibrium", "point", "gaussian"])
    p.add_argument("--x0", help="comma-separated initial position")
    p.add_argument("--v0", help="comma-separated initial velocity")
    p.add_argument("--dt", type=float, help="diffusion step size")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser(
        "verify-drift", parents=[common, model_flags], help="drift certificate"
    )
    p.add_argument("--weight", help="weight catalog tag")
    p.add_argument("--zeta", type=float, help="target drift rate")
    p.add_argument("--D", type=float, help="target drift offset")
    p.add_argument("--n", type=int, help="sample count")
    p.add_argument("--sampler", choices=["grid", "random"])
    p.set_defaults(func=_cmd_verify_drift)

    p = sub.add_parser(
        "minorisation", parents=[common, model_flags], help="small-set mass estimate"
    )
    p.add_argument("--weight", help="weight catalog tag")
    p.add_argument("--tau", type=float, help="minorisation time")
    p.add_argument("--r-level", dest="r_level", type=float, help="sublevel radius")
    p.add_argument("--N", dest="n", type=int, help="paths per initial point")
    p.add_argument("--n-init", dest="n_init", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--confidence", type=float)
    p.add_argument("--eta-box", dest="eta_box", help="JSON [[lo,hi],...]")
    p.set_defaults(func=_cmd_minorisation)

    p = sub.add_parser(
        "gcc", parents=[common, model_flags], help="geometric control check"
    )
    p.add_argument("--tmax", type=float, help="control horizon")
    p.add_argument("--nx", type=int, help="positions tested")
    p.set_defaults(func=_cmd_gcc)

    p = sub.add_parser(
        "tv-decay", parents=[common, model_flags], help="TV decay experiment"
    )
    p.add_argument("--N", dest="n", type=int, help="number of trajectories")
    p.add_argument("--tmax", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--bins", type=int, help="histogram bins per axis")
    p.add_argument("--weight", help="weight catalog tag")
    p.add_argument("--reference", choices=["equilibrium", "long_run"])
    p.add_argument("--fit-kind", dest="fit_kind", choices=["exponential", "power"])
    p.add_argument("--initial", choices=["equilibrium", "point", "gaussian"])
    p.add_argument("--x0", help="comma-separated initial position")
    p.add_argument("--v0", help="comma-separated initial velocity")
    p.add_argument("--dt", type=float, help="diffusion step size")
    p.set_defaults(func=_cmd_tv_decay)

    p = sub.add_parser(
        "steady", parents=[common], help="two-wall steady interval solve"
    )
    p.add_argument("--T0", type=float, help="left wall temperature")
    p.add_argument("--T1", type=float, help="right wall temperature")
    p.add_argument("--kappa", type=float, help="rarefaction parameter")
    p.add_argument("--nx", type=int)
    p.add_argument("--nv", type=int)
    p.add_argument("--vmax", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument(
        "--full-table", dest="full_table", action="store_true",
        help="also write the (x,v) table f.csv",
    )
    p.set_defaults(func=_cmd_steady)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        json.dump(
            {"error": "SchemaError", "field": exc.field, "message": str(exc)},
            sys.stderr,
        )
        sys.stderr.write("\n")
        return EXIT_SCHEMA
    except NonConvergedError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_INCONCLUSIVE
    except InvalidInputError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
