"""Ensemble simulation and total-variation decay measurement.

simulate_ensemble runs N independent trajectories on per-trajectory random
streams and snapshots them on a time grid. weighted_tv compares two
snapshots through a common histogram, weighting bins by a Lyapunov weight.
decay_fit extracts exponential or power-law rates with confidence half
widths, and compare_to_theory joins a measured curve with a theoretical
rate bound.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, MassClippedError
from .models.base import PhaseState
from .rng import RngStream
from .weights import WeightFn

__all__ = [
    "EnsembleSnapshot",
    "TvEstimate",
    "DecayCurve",
    "FitRecord",
    "ComparisonReport",
    "simulate_ensemble",
    "weighted_tv",
    "decay_fit",
    "compare_to_theory",
    "tv_decay_curve",
    "curve_to_csv",
    "curve_to_svg",
]


# ---------------------------------------------------------------------------
# ensemble simulation
# ---------------------------------------------------------------------------


@dataclass
class EnsembleSnapshot:
    """States of N trajectories at the times in t_grid.

    x and v are (len(t_grid), N, d) arrays; alive marks trajectories not yet
    absorbed (always True for conservative models).
    """

    t_grid: np.ndarray
    x: np.ndarray
    v: np.ndarray
    alive: np.ndarray
    master_seed: int
    model_config: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.x.shape[1]

    def states_at(self, k: int) -> list:
        """PhaseState records for snapshot index k (alive trajectories only)."""
        out = []
        for i in range(self.n_paths):
            if self.alive[k, i]:
                s = PhaseState(self.x[k, i], self.v[k, i], t=float(self.t_grid[k]))
                out.append(s)
        return out


def _initial_states(model, initial, initial_point, n_paths, gen):
    d = model.d
    if callable(initial):
        xv = np.asarray(initial(gen, n_paths), dtype=float)
        if xv.shape != (n_paths, 2 * d):
            raise InvalidInputError("custom initial sampler must return (n, 2d)")
        return xv[:, :d].copy(), xv[:, d:].copy()
    if initial == "equilibrium":
        xv = model.equilibrium_sampler(gen, n_paths)
        return xv[:, :d].copy(), xv[:, d:].copy()
    if initial == "point":
        if initial_point is None:
            raise InvalidInputError("initial='point' needs initial_point=(x, v)")
        x0 = np.atleast_1d(np.asarray(initial_point[0], dtype=float))
        v0 = np.atleast_1d(np.asarray(initial_point[1], dtype=float))
        if x0.shape != (d,) or v0.shape != (d,):
            raise InvalidInputError("initial_point components must have shape (d,)")
        return np.tile(x0, (n_paths, 1)), np.tile(v0, (n_paths, 1))
    if initial == "gaussian":
        return gen.standard_normal((n_paths, d)), gen.standard_normal((n_paths, d))
    raise InvalidInputError(f"unknown initial condition {initial!r}")


def _run_paths_stepwise(model, x0, v0, t_grid, master_seed, offset):
    """Event-driven trajectories, one random stream per path."""
    n, d = x0.shape
    nt = len(t_grid)
    x = np.empty((nt, n, d))
    v = np.empty((nt, n, d))
    alive = np.ones((nt, n), dtype=bool)
    for i in range(n):
        stream = RngStream(master_seed, offset + i)
        state = PhaseState(x0[i], v0[i], t=0.0)
        prev_t = 0.0
        for k, t in enumerate(t_grid):
            if state.alive and t > prev_t:
                state = model.step(state, t - prev_t, stream)
            prev_t = t
            x[k, i] = state.x
            v[k, i] = state.v
            alive[k, i] = state.alive
    return x, v, alive


def _run_paths_diffusion(model, x0, v0, t_grid, master_seed, offset, dt):
    """Vectorized Euler-Maruyama for the diffusion models.

    All paths share one stream keyed by (master_seed, offset); per-path
    streams would force a Python loop with no statistical benefit since the
    driving noise is drawn as one (n, d) block per step either way.
    """
    n, d = x0.shape
    nt = len(t_grid)
    limit = model.dt_limit
    if dt is None:
        dt = limit
    if dt > limit:
        from .errors import StabilityLimitError

        raise StabilityLimitError(dt, limit)
    gen = RngStream(master_seed, offset).gen
    x, v = x0.copy(), v0.copy()
    out_x = np.empty((nt, n, d))
    out_v = np.empty((nt, n, d))
    t_now = 0.0
    for k, t in enumerate(t_grid):
        span = t - t_now
        n_sub = int(math.ceil(span / dt - 1e-12)) if span > 0 else 0
        for j in range(n_sub):
            h = min(dt, span - j * dt)
            x, v = model.em_step_many(x, v, h, gen)
        t_now = t
        out_x[k], out_v[k] = x, v
    alive = np.ones((nt, n), dtype=bool)
    return out_x, out_v, alive


def _simulate_chunk(args):
    (model_cfg, x0, v0, t_grid, master_seed, offset, dt) = args
    from .config import model_from_config

    model = model_from_config(model_cfg)
    if hasattr(model, "em_step_many"):
        return _run_paths_diffusion(model, x0, v0, t_grid, master_seed, offset, dt)
    return _run_paths_stepwise(model, x0, v0, t_grid, master_seed, offset)


def simulate_ensemble(
    model,
    n_paths: int,
    t_grid: Sequence[float],
    rng=None,
    master_seed: Optional[int] = None,
    initial="equilibrium",
    initial_point=None,
    dt: Optional[float] = None,
    threads: int = 1,
) -> EnsembleSnapshot:
    """N independent trajectories snapshotted on t_grid.

    Trajectory i consumes the stream (master_seed, i + 1), so a run is
    bit-reproducible from (model config, initial, n_paths, t_grid, seed)
    regardless of thread count for the event-driven models. Initial
    conditions come from stream index 0.
    """
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    if t_grid.size == 0 or t_grid[0] < 0.0:
        raise InvalidInputError("t_grid must be nonempty, nonnegative, increasing")
    if np.any(np.diff(t_grid) <= 0.0):
        raise InvalidInputError("t_grid times must be distinct")
    if n_paths < 1:
        raise InvalidInputError("n_paths must be >= 1")
    if master_seed is None:
        if isinstance(rng, RngStream):
            master_seed = rng.master_seed
        elif rng is None:
            master_seed = 0
        else:
            # a bare generator has no address; derive a seed from it
            master_seed = int(rng.integers(0, 2**63))
    master_seed = int(master_seed)

    init_gen = RngStream(master_seed, 0).gen
    x0, v0 = _initial_states(model, initial, initial_point, n_paths, init_gen)

    diffusion = hasattr(model, "em_step_many")
    if threads > 1 and not diffusion and n_paths >= 4 * threads:
        cfg = model.to_config()
        bounds = np.linspace(0, n_paths, threads + 1).astype(int)
        jobs = [
            (cfg, x0[a:b], v0[a:b], t_grid, master_seed, 1 + a, dt)
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_simulate_chunk, jobs))
        x = np.concatenate([p[0] for p in parts], axis=1)
        v = np.concatenate([p[1] for p in parts], axis=1)
        alive = np.concatenate([p[2] for p in parts], axis=1)
    elif diffusion:
        x, v, alive = _run_paths_diffusion(model, x0, v0, t_grid, master_seed, 1, dt)
    else:
        x, v, alive = _run_paths_stepwise(model, x0, v0, t_grid, master_seed, 1)

    cfg = model.to_config() if hasattr(model, "to_config") else {}
    return EnsembleSnapshot(
        t_grid=t_grid, x=x, v=v, alive=alive, master_seed=master_seed, model_config=cfg
    )


# ---------------------------------------------------------------------------
# weighted total variation between empirical laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TvEstimate:
    """Histogram TV distance between two samples.

    value_l1 is sum_b phi(center_b) |p_b - q_b| (the L1 convention; equals
    twice the TV distance when phi is identically 1). value_tv is the
    unweighted L1 value halved. Clipped mass is reported per side.
    """

    value_l1: float
    value_tv: float
    noise_floor: float
    clipped_a: float
    clipped_b: float
    clip_warning: bool
    box: tuple
    bins: tuple
    weight_name: str

    def __float__(self):
        return self.value_l1


def _auto_box(samples_a, samples_b, coverage=0.995):
    lo_q, hi_q = (1.0 - coverage) / 2.0, 1.0 - (1.0 - coverage) / 2.0
    both = np.vstack([samples_a, samples_b])
    lo = np.quantile(both, lo_q, axis=0)
    hi = np.quantile(both, hi_q, axis=0)
    pad = 1e-9 + 0.02 * (hi - lo)
    return lo - pad, hi + pad


def weighted_tv(
    a: EnsembleSnapshot,
    b: EnsembleSnapshot,
    phi: Optional[WeightFn] = None,
    bins: int = 32,
    snapshot_index: int = -1,
    snapshot_index_b: Optional[int] = None,
    box=None,
) -> TvEstimate:
    """Weighted L1 distance between two snapshots on a common binning.

    snapshot_index selects the time slice of a (and of b unless
    snapshot_index_b is given; a reference ensemble usually has one slice).
    The box defaults to an axis-aligned region holding 99.5% of the pooled
    samples. More than 1% clipped mass on either side sets a warning flag;
    more than 10% raises.
    """
    d = a.x.shape[2]
    if b.x.shape[2] != d:
        raise InvalidInputError("snapshots live in different dimensions")
    kb = snapshot_index if snapshot_index_b is None else snapshot_index_b
    za = np.hstack([a.x[snapshot_index], a.v[snapshot_index]])
    zb = np.hstack([b.x[kb], b.v[kb]])
    za = za[a.alive[snapshot_index]]
    zb = zb[b.alive[kb]]
    if za.shape[0] == 0 or zb.shape[0] == 0:
        raise InvalidInputError("a snapshot has no alive trajectories to compare")
    dim = 2 * d
    if box is None:
        lo, hi = _auto_box(za, zb)
    else:
        lo = np.asarray([c[0] for c in box], dtype=float)
        hi = np.asarray([c[1] for c in box], dtype=float)
    if isinstance(bins, int):
        bins = (bins,) * dim
    bins = tuple(int(m) for m in bins)
    edges = [np.linspace(lo[i], hi[i], bins[i] + 1) for i in range(dim)]

    ha, _ = np.histogramdd(za, bins=edges)
    hb, _ = np.histogramdd(zb, bins=edges)
    na, nb = za.shape[0], zb.shape[0]
    clipped_a = 1.0 - float(ha.sum()) / na
    clipped_b = 1.0 - float(hb.sum()) / nb
    worst_clip = max(clipped_a, clipped_b)
    if worst_clip > 0.10:
        raise MassClippedError(
            f"{100 * worst_clip:.1f}% of the mass fell outside the binning box"
        )
    p = ha.ravel() / na
    q = hb.ravel() / nb

    if phi is None:
        w = np.ones(p.size)
        weight_name = "flat"
    else:
        centers = [0.5 * (e[1:] + e[:-1]) for e in edges]
        mesh = np.stack(np.meshgrid(*centers, indexing="ij"), axis=-1).reshape(-1, dim)
        w = np.asarray(phi.value(mesh[:, :d], mesh[:, d:]), dtype=float).ravel()
        weight_name = phi.name

    diff = np.abs(p - q)
    value_l1 = float(np.dot(w, diff))
    value_tv = 0.5 * float(np.sum(diff))
    # multinomial sampling noise on the unweighted L1 value: per-bin
    # std of (p_hat - q_hat) is about sqrt(p/na + q/nb), folded through
    # E|N(0,s)| = s sqrt(2/pi)
    s = np.sqrt(p / na + q / nb)
    noise = float(math.sqrt(2.0 / math.pi) * np.sum(s))
    return TvEstimate(
        value_l1=value_l1,
        value_tv=value_tv,
        noise_floor=noise,
        clipped_a=clipped_a,
        clipped_b=clipped_b,
        clip_warning=bool(worst_clip > 0.01),
        box=tuple(zip(lo.tolist(), hi.tolist())),
        bins=bins,
        weight_name=weight_name,
    )


# ---------------------------------------------------------------------------
# decay fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FitRecord:
    kind: str
    rate_or_exponent: float
    intercept: float
    residual: float
    half_width: float
    window: tuple

    def predict(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "exponential":
            return math.exp(self.intercept) * np.exp(-self.rate_or_exponent * t)
        return math.exp(self.intercept) * (1.0 + t) ** (-self.rate_or_exponent)


@dataclass
class DecayCurve:
    times: np.ndarray
    values: np.ndarray
    noise_floor: np.ndarray
    weight_name: str
    fit: Optional[FitRecord] = None

    def auto_window(self, factor: float = 3.0) -> tuple:
        """Largest index range whose values sit above factor x noise floor."""
        ok = self.values > factor * self.noise_floor
        if not np.any(ok):
            return (0, 0)
        idx = np.flatnonzero(ok)
        return (int(idx[0]), int(idx[-1]) + 1)


def decay_fit(
    times,
    values,
    kind: str = "exponential",
    window: Optional[tuple] = None,
) -> FitRecord:
    """Least squares on log(values) against t or log(1+t).

    Returns the decay rate (exponential) or the power exponent, both
    reported positive for decaying data, with a 95% half-width from the
    usual normal-theory slope variance.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if kind not in ("exponential", "power"):
        raise InvalidInputError(f"unknown fit kind {kind!r}")
    if window is None:
        window = (0, t.size)
    a, b = window
    t, y = t[a:b], y[a:b]
    if t.size < 5:
        raise InvalidInputError("need at least 5 points in the fit window")
    if np.any(y <= 0.0):
        raise InvalidInputError(
            "non-positive values in fit window; shrink the window above the noise floor"
        )
    u = t if kind == "exponential" else np.log1p(t)
    w = np.log(y)
    A = np.vstack([u, np.ones_like(u)]).T
    coef, res, _, _ = np.linalg.lstsq(A, w, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    fitted = A @ coef
    dof = max(t.size - 2, 1)
    s2 = float(np.sum((w - fitted) ** 2)) / dof
    su = float(np.sum((u - np.mean(u)) ** 2))
    half_width = 1.96 * math.sqrt(s2 / max(su, 1e-300))
    residual = math.sqrt(float(np.mean((w - fitted) ** 2)))
    return FitRecord(
        kind=kind,
        rate_or_exponent=-slope,
        intercept=intercept,
        residual=residual,
        half_width=half_width,
        window=(int(a), int(b)),
    )


# ---------------------------------------------------------------------------
# joining measurement to theory
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    verdict: str
    times: tuple
    measured: tuple
    bound_values: tuple
    ratio: tuple
    initial_distance: float

    def summary(self) -> str:
        return f"{self.verdict} over {len(self.times)} grid times"


def compare_to_theory(curve: DecayCurve, bound, passed: bool = True) -> ComparisonReport:
    """Check bound(t) * initial distance against the measured curve.

    bound is a RateBound-like object exposing evaluate(t). The verdict is
    DOMINATES when the theoretical envelope lies above every measured value
    past the noise floor, else CROSSES.
    """
    if curve.fit is None:
        raise InvalidInputError("curve has no fit; run decay_fit first")
    if not passed:
        raise InvalidInputError("no certified constants: the source report FAILED")
    a, b = curve.auto_window()
    t = curve.times[a:b]
    y = curve.values[a:b]
    if t.size == 0:
        raise InvalidInputError("no measured values above the noise floor")
    c0 = float(curve.values[0])
    env = np.asarray([float(bound.evaluate(float(s))) for s in t])
    theory = env * c0
    ratio = theory / np.maximum(y, 1e-300)
    verdict = "DOMINATES" if bool(np.all(theory >= y * (1.0 - 1e-12))) else "CROSSES"
    return ComparisonReport(
        verdict=verdict,
        times=tuple(t.tolist()),
        measured=tuple(y.tolist()),
        bound_values=tuple(theory.tolist()),
        ratio=tuple(ratio.tolist()),
        initial_distance=c0,
    )


# ---------------------------------------------------------------------------
# end-to-end decay curve helper
# ---------------------------------------------------------------------------


def tv_decay_curve(
    model,
    n_paths: int,
    t_grid,
    master_seed: int = 0,
    phi: Optional[WeightFn] = None,
    initial="point",
    initial_point=None,
    bins: int = 32,
    reference: str = "equilibrium",
    threads: int = 1,
    dt: Optional[float] = None,
) -> DecayCurve:
    """TV distance to a reference ensemble at each time of t_grid.

    The reference is a fresh equilibrium ensemble of the same size when the
    model has an explicit stationary law; otherwise a long-run ensemble at
    4 x max(t_grid) started from the same initial condition (labeled proxy).
    """
    if initial == "point" and initial_point is None:
        d = model.d
        initial_point = (np.zeros(d), np.full(d, 0.5))
    moving = simulate_ensemble(
        model,
        n_paths,
        t_grid,
        master_seed=master_seed,
        initial=initial,
        initial_point=initial_point,
        threads=threads,
        dt=dt,
    )
    weight_name = phi.name if phi is not None else "flat"
    t_grid = moving.t_grid
    if reference == "equilibrium":
        ref = simulate_ensemble(
            model,
            n_paths,
            [max(float(t_grid[-1]), 1.0)],
            master_seed=master_seed + 1,
            initial="equilibrium",
            threads=threads,
            dt=dt,
        )
        ref_label = 0
    elif reference == "long_run":
        ref = simulate_ensemble(
            model,
            n_paths,
            [4.0 * float(t_grid[-1])],
            master_seed=master_seed + 1,
            initial=initial,
            initial_point=initial_point,
            threads=threads,
            dt=dt,
        )
        ref_label = 0
    else:
        raise InvalidInputError(f"unknown reference {reference!r}")

    # common box from the reference ensemble so every snapshot is compared
    # on the same binning
    zr = np.hstack([ref.x[ref_label], ref.v[ref_label]])
    lo, hi = _auto_box(zr, zr)
    # widen with the final moving snapshot so early transients clip less
    zm = np.hstack([moving.x[-1], moving.v[-1]])
    lo2, hi2 = _auto_box(zm, zm)
    box = list(zip(np.minimum(lo, lo2).tolist(), np.maximum(hi, hi2).tolist()))

    values, floors = [], []
    for k in range(t_grid.size):
        est = weighted_tv(
            moving,
            ref,
            phi=phi,
            bins=bins,
            snapshot_index=k,
            snapshot_index_b=ref_label,
            box=box,
        )
        values.append(est.value_tv if phi is None else est.value_l1)
        floors.append(est.noise_floor * (0.5 if phi is None else 1.0))
    return DecayCurve(
        times=t_grid.copy(),
        values=np.asarray(values),
        noise_floor=np.asarray(floors),
        weight_name=weight_name,
    )


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------


def curve_to_csv(curve: DecayCurve) -> str:
    lines = ["t,tv,phi_tag"]
    for t, v in zip(curve.times, curve.values):
        lines.append(f"{float(t)!r},{float(v)!r},{curve.weight_name}")
    return "\n".join(lines) + "\n"


def snapshot_to_csv(snap: EnsembleSnapshot) -> str:
    d = snap.x.shape[2]
    cols = ["traj_id", "t"] + [f"x{i + 1}" for i in range(d)] + [
        f"v{i + 1}" for i in range(d)
    ]
    lines = [",".join(cols)]
    for k, t in enumerate(snap.t_grid):
        for i in range(snap.n_paths):
            if not snap.alive[k, i]:
                continue
            row = [str(i), repr(float(t))]
            row += [repr(float(c)) for c in snap.x[k, i]]
            row += [repr(float(c)) for c in snap.v[k, i]]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def curve_to_svg(curve: DecayCurve, title: str = "", log_time: bool = False) -> str:
    """Self-contained SVG line chart of the decay curve (log value axis)."""
    width, height, margin = 640, 420, 56
    mask = curve.values > 0
    t = curve.times[mask]
    y = np.log10(curve.values[mask])
    if t.size == 0:
        t = np.array([0.0, 1.0])
        y = np.array([0.0, 0.0])
    u = np.log10(1.0 + t) if log_time else t
    u0, u1 = float(np.min(u)), float(np.max(u))
    y0, y1 = float(np.min(y)), float(np.max(y))
    if u1 - u0 < 1e-12:
        u1 = u0 + 1.0
    if y1 - y0 < 1e-12:
        y1 = y0 + 1.0

    def sx(val):
        return margin + (val - u0) / (u1 - u0) * (width - 2 * margin)

    def sy(val):
        return height - margin - (val - y0) / (y1 - y0) * (height - 2 * margin)

    pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(u, y))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>',
    ]
    if curve.fit is not None:
        yf = np.log10(np.maximum(curve.fit.predict(t), 1e-300))
        pf = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(u, yf))
        parts.append(
            f'<polyline points="{pf}" fill="none" stroke="#d62728" '
            'stroke-width="1.2" stroke-dasharray="6 4"/>'
        )
    axis = (
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>'
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
        f'y2="{height - margin}" stroke="black"/>'
    )
    parts.append(axis)
    xlabel = "log10(1+t)" if log_time else "t"
    parts.append(
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" '
        f'font-size="13">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{height / 2:.0f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {height / 2:.0f})">log10 distance</text>'
    )
    if title:
        parts.append(
            f'<text x="{width / 2:.0f}" y="24" text-anchor="middle" '
            f'font-size="15">{title}</text>'
        )
    # tick labels at the ends
    parts.append(
        f'<text x="{sx(u0):.0f}" y="{height - margin + 18}" font-size="11" '
        f'text-anchor="middle">{u0:.3g}</text>'
    )
    parts.append(
        f'<text x="{sx(u1):.0f}" y="{height - margin + 18}" font-size="11" '
        f'text-anchor="middle">{u1:.3g}</text>'
    )
    parts.append(
        f'<text x="{margin - 6}" y="{sy(y0):.0f}" font-size="11" '
        f'text-anchor="end">{y0:.3g}</text>'
    )
    parts.append(
        f'<text x="{margin - 6}" y="{sy(y1):.0f}" font-size="11" '
        f'text-anchor="end">{y1:.3g}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
