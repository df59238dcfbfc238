"""Numerical certification of drift and minorisation hypotheses.

drift_verify samples the phase space and checks the inequality
L*phi <= -zeta phi + D pointwise, either against caller-supplied targets or
by fitting the constants; minorisation_estimate lower-bounds the density a
model spreads over a reference box after a fixed horizon, with one-sided
binomial confidence deductions; gcc_check computes the minimal path
integral of a scattering field along transport characteristics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import beta as beta_dist

from .errors import InvalidInputError
from .models.base import PhaseState, wrap_torus
from .models.generator import generator_apply_many
from .weights import WeightFn

__all__ = [
    "DriftReport",
    "MinorisationReport",
    "GccReport",
    "drift_verify",
    "minorisation_estimate",
    "gcc_check",
]

_FD_TOL = 1e-9


# ---------------------------------------------------------------------------
# drift certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DriftReport:
    zeta_hat: float
    d_hat: float
    margin: float
    worst_point: PhaseState
    n_samples: int
    passed: bool
    mode: str
    tail_controlled: bool
    degenerate_weight: bool
    sampling: dict = field(default_factory=dict)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} mode={self.mode} zeta={self.zeta_hat:.6g} "
            f"D={self.d_hat:.6g} margin={self.margin:.3e} n={self.n_samples}"
        )


def _positions_in_domain(model, n, gen, x_radius, sampler):
    d = model.d
    kind = model.kind
    domain = getattr(model, "domain", None)
    if kind in ("linear_bgk", "linear_boltzmann") and domain == "torus":
        return gen.random((n, d)) if sampler == "random" else _lattice(n, d, 0.0, 1.0)
    if kind == "degenerate_boltzmann":
        return gen.random((n, d)) if sampler == "random" else _lattice(n, d, 0.0, 1.0)
    if kind == "knudsen":
        geometry = model.geometry
        cfg = geometry.to_config()
        if cfg["kind"] == "interval":
            lo, hi = np.zeros(1), np.ones(1)
        elif cfg["kind"] == "disk":
            r = geometry.radius
            lo, hi = -r * np.ones(2), r * np.ones(2)
        else:
            lo, hi = np.zeros(d), np.ones(d)
        out = np.empty((n, d))
        filled = 0
        while filled < n:
            cand = lo + (hi - lo) * gen.random((2 * (n - filled) + 8, d))
            keep = np.array([geometry.contains(c) for c in cand])
            cand = cand[keep][: n - filled]
            out[filled : filled + cand.shape[0]] = cand
            filled += cand.shape[0]
        return out
    # whole-space: uniform ball of radius x_radius
    if sampler == "grid":
        return _lattice(n, d, -x_radius, x_radius)
    w = gen.standard_normal((n, d))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    r = x_radius * gen.random(n) ** (1.0 / d)
    return w * r[:, None]


def _velocities(model, n, gen, v_radius, sampler):
    d = model.d
    if model.kind == "run_tumble":
        radius = model.r0
    elif model.kind == "degenerate_boltzmann" and model.scatter == "uniform":
        radius = model.v_ball
    else:
        radius = v_radius
    if sampler == "grid":
        return _lattice(n, d, -radius, radius)
    w = gen.standard_normal((n, d))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    r = radius * gen.random(n) ** (1.0 / d)
    return w * r[:, None]


def _lattice(n, d, lo, hi):
    per_axis = max(2, int(round(n ** (1.0 / d))))
    axes = [np.linspace(lo, hi, per_axis)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    return grid[:n] if grid.shape[0] >= n else grid


_SUBLEVEL = 1e3


def _position_kind(model) -> str:
    if model.kind == "knudsen":
        return "knudsen"
    if model.kind == "degenerate_boltzmann" or getattr(model, "domain", None) == "torus":
        return "torus"
    return "free"


def _velocity_cap(model) -> Optional[float]:
    if model.kind == "run_tumble":
        return float(model.r0)
    if model.kind == "degenerate_boltzmann" and model.scatter == "uniform":
        return float(model.v_ball)
    return None


def _sublevel_radius(model, phi, gen, cap: float) -> float:
    """Largest probe radius with phi <= _SUBLEVEL, capped."""
    d = model.d
    kind = _position_kind(model)
    v_cap = _velocity_cap(model)
    if kind == "free":
        probe_x = gen.standard_normal((16, d))
        probe_v = gen.standard_normal((16, d))
        norm = np.sqrt(
            np.sum(probe_x**2, axis=1) + np.sum(probe_v**2, axis=1)
        )[:, None]
        probe_x, probe_v = probe_x / norm, probe_v / norm
    else:
        probe_x = (
            gen.random((16, d))
            if kind == "torus"
            else _positions_in_domain(model, 16, gen, cap, "random")
        )
        probe_v = gen.standard_normal((16, d))
        probe_v /= np.linalg.norm(probe_v, axis=1, keepdims=True)

    def level(t):
        if kind == "free":
            x, v = t * probe_x, t * probe_v
        else:
            x, v = probe_x, t * probe_v
        if v_cap is not None:
            s = np.linalg.norm(v, axis=1, keepdims=True)
            v = np.where(s > v_cap, v * (v_cap / np.maximum(s, 1e-300)), v)
        return float(np.max(phi.value(x, v)))

    if level(cap) <= _SUBLEVEL:
        return cap
    lo, hi = 0.0, cap
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        if level(mid) <= _SUBLEVEL:
            lo = mid
        else:
            hi = mid
    return max(lo, 0.5)


def _shell(d: int, n: int, r_in: float, r_out: float, gen) -> np.ndarray:
    w = gen.standard_normal((n, d))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    return w * (r_in + (r_out - r_in) * gen.random(n))[:, None]


def _grid_with_far_field(model, phi, n, gen, x_cap, v_cap_arg):
    """Tensor lattice on the {phi <= 1e3} box plus random far-field points."""
    d = model.d
    kind = _position_kind(model)
    v_cap = _velocity_cap(model)
    r = _sublevel_radius(model, phi, gen, max(x_cap, v_cap_arg))
    rx = min(r, x_cap)
    rv = min(r, v_cap_arg)
    if v_cap is not None:
        rv = min(rv, v_cap)

    if kind == "free":
        dims = 2 * d
        m = max(2, int(round(n ** (1.0 / dims))))
        axes = [np.linspace(-rx, rx, m)] * d + [np.linspace(-rv, rv, m)] * d
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dims)
        x, v = pts[:, :d], pts[:, d:]
    else:
        dims = 2 * d
        m = max(2, int(round(n ** (1.0 / dims))))
        x_axes = [np.linspace(0.0, 1.0, m, endpoint=False)] * d
        axes = x_axes + [np.linspace(-rv, rv, m)] * d
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dims)
        x, v = pts[:, :d], pts[:, d:]
        if kind == "knudsen":
            geometry = model.geometry
            cfg = geometry.to_config()
            if cfg["kind"] == "disk":
                x = (2.0 * x - 1.0) * geometry.radius
            keep = np.array([geometry.contains(p) for p in x])
            x, v = x[keep], v[keep]

    n_far = min(10_000, 4 * n)
    if kind == "free":
        far = _shell(2 * d, n_far, max(rx, rv), 2.0 * max(rx, rv), gen)
        fx, fv = far[:, :d], far[:, d:]
        if v_cap is not None:
            s = np.linalg.norm(fv, axis=1, keepdims=True)
            fv = np.where(s > v_cap, fv * (v_cap / np.maximum(s, 1e-300)), fv)
    else:
        fx = (
            gen.random((n_far, d))
            if kind == "torus"
            else _positions_in_domain(model, n_far, gen, x_cap, "random")
        )
        hi = 2.0 * rv if v_cap is None else min(2.0 * rv, v_cap)
        lo = rv if hi > rv else 0.7 * hi
        fv = _shell(d, n_far, lo, hi, gen)
    return np.vstack([x, fx]), np.vstack([v, fv]), {"lattice": x.shape[0], "far": n_far, "box": (rx, rv)}


def _radii(model, x, v):
    if getattr(model, "domain", None) == "torus" or model.kind in (
        "degenerate_boltzmann",
        "knudsen",
    ):
        return np.sqrt(np.sum(v * v, axis=-1))
    return np.sqrt(np.sum(x * x, axis=-1) + np.sum(v * v, axis=-1))


def drift_verify(
    model,
    phi: WeightFn,
    zeta_target: Optional[float] = None,
    d_target: Optional[float] = None,
    sampler: str = "grid",
    n: int = 2048,
    rng=None,
    x_radius: float = 8.0,
    v_radius: float = 8.0,
) -> DriftReport:
    """Check L*phi <= -zeta phi + D on sampled phase-space points.

    The default sampler lays a tensor lattice over the box where phi <= 1e3
    and adds random far-field points, since the inequality binds in the far
    field; sampler="random" draws everything uniformly instead.

    Three modes. With zeta_target and d_target the inequality is tested as
    given and the margin min(-L*phi - zeta phi + D) decides. With only
    zeta_target the smallest admissible D is reported and the check demands
    that the binding point is interior to the sampled range (otherwise the
    tail is not controlled at this zeta). With neither, a line search picks
    the largest zeta whose binding point stays interior.
    """
    if sampler not in ("random", "grid"):
        raise InvalidInputError(f"unknown sampler {sampler!r}")
    if n < 16:
        raise InvalidInputError("n must be at least 16")
    gen = getattr(rng, "gen", rng) or np.random.default_rng(0)
    if sampler == "random":
        x = _positions_in_domain(model, n, gen, x_radius, "random")
        v = _velocities(model, x.shape[0], gen, v_radius, "random")
        grid_meta = {}
    else:
        x, v, grid_meta = _grid_with_far_field(model, phi, n, gen, x_radius, v_radius)
    n_eff = x.shape[0]

    phi_vals = np.asarray(phi.value(x, v), dtype=float)
    phi.assert_admissible(x, v)
    g = generator_apply_many(model, phi, x, v)
    radii = _radii(model, x, v)
    r_max = float(np.max(radii))
    sampling = {
        "sampler": sampler,
        "x_radius": x_radius,
        "v_radius": v_radius,
        "n": n_eff,
        **grid_meta,
    }

    degenerate = bool(
        np.all(np.abs(phi_vals - 1.0) < 1e-12) and np.all(np.abs(g) < 1e-9)
    )
    if degenerate:
        z = PhaseState(x=x[0].copy(), v=v[0].copy())
        return DriftReport(
            zeta_hat=1.0,
            d_hat=1.0,
            margin=0.0,
            worst_point=z,
            n_samples=n_eff,
            passed=True,
            mode="degenerate",
            tail_controlled=True,
            degenerate_weight=True,
            sampling=sampling,
        )

    def evaluate(zeta, big_d):
        slack = -g - zeta * phi_vals + big_d
        worst = int(np.argmin(slack))
        return float(slack[worst]), worst

    def tail_ok(zeta):
        s = g + zeta * phi_vals
        binding = int(np.argmax(s))
        return radii[binding] <= 0.9 * r_max, binding, float(max(s[binding], 0.0))

    if zeta_target is not None and d_target is not None:
        margin, worst = evaluate(zeta_target, d_target)
        z = PhaseState(x=x[worst].copy(), v=v[worst].copy())
        controlled, _, _ = tail_ok(zeta_target)
        return DriftReport(
            zeta_hat=float(zeta_target),
            d_hat=float(d_target),
            margin=margin,
            worst_point=z,
            n_samples=n_eff,
            passed=bool(margin >= -_FD_TOL),
            mode="targets",
            tail_controlled=controlled,
            degenerate_weight=False,
            sampling=sampling,
        )

    if zeta_target is not None:
        controlled, binding, d_hat = tail_ok(zeta_target)
        margin, worst = evaluate(zeta_target, d_hat)
        z = PhaseState(x=x[binding].copy(), v=v[binding].copy())
        return DriftReport(
            zeta_hat=float(zeta_target),
            d_hat=d_hat,
            margin=margin,
            worst_point=z,
            n_samples=n_eff,
            passed=bool(controlled and margin >= -_FD_TOL),
            mode="fit_d",
            tail_controlled=controlled,
            degenerate_weight=False,
            sampling=sampling,
        )

    # line search: largest zeta with an interior binding point; the lower
    # end must reach the tiny confinement rates of nearly-flat weights
    zeta_grid = np.geomspace(1e-7, 4.0, 120)
    best = None
    for zeta in zeta_grid:
        controlled, binding, d_hat = tail_ok(float(zeta))
        if controlled:
            best = (float(zeta), d_hat, binding)
    if best is None:
        binding = int(np.argmax(g + zeta_grid[0] * phi_vals))
        z = PhaseState(x=x[binding].copy(), v=v[binding].copy())
        return DriftReport(
            zeta_hat=float(zeta_grid[0]),
            d_hat=float(np.max(g + zeta_grid[0] * phi_vals)),
            margin=0.0,
            worst_point=z,
            n_samples=n_eff,
            passed=False,
            mode="fit_both",
            tail_controlled=False,
            degenerate_weight=False,
            sampling=sampling,
        )
    zeta_hat, d_hat, binding = best
    margin, _ = evaluate(zeta_hat, d_hat)
    z = PhaseState(x=x[binding].copy(), v=v[binding].copy())
    return DriftReport(
        zeta_hat=zeta_hat,
        d_hat=d_hat,
        margin=margin,
        worst_point=z,
        n_samples=n_eff,
        passed=bool(margin >= -_FD_TOL),
        mode="fit_both",
        tail_controlled=True,
        degenerate_weight=False,
        sampling=sampling,
    )


# ---------------------------------------------------------------------------
# minorisation estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinorisationReport:
    alpha_hat: float
    tau: float
    small_set: dict
    eta_box: tuple
    bins: tuple
    n_paths: int
    n_init: int
    raw_alpha: float
    confidence: float
    empty_bins: tuple = ()
    per_init_alpha: tuple = ()

    def summary(self) -> str:
        return (
            f"alpha_hat={self.alpha_hat:.6g} (raw {self.raw_alpha:.6g}) "
            f"tau={self.tau} bins={self.bins} paths={self.n_paths}x{self.n_init}"
        )


def _cp_lower(count: int, n: int, confidence: float) -> float:
    """One-sided Clopper-Pearson lower bound on a binomial proportion."""
    if count <= 0:
        return 0.0
    if count >= n:
        return float((1.0 - confidence) ** (1.0 / n))
    return float(beta_dist.ppf(1.0 - confidence, count, n - count + 1))


def _spread_initial_points(model, phi, r_level, n_init, gen, x_radius, v_radius):
    """Cover {phi <= R} with n_init far-apart points (greedy max-min)."""
    cand_x = _positions_in_domain(model, 64 * n_init, gen, x_radius, "random")
    cand_v = _velocities(model, cand_x.shape[0], gen, v_radius, "random")
    vals = np.asarray(phi.value(cand_x, cand_v), dtype=float)
    keep = vals <= r_level
    if not np.any(keep):
        raise InvalidInputError(
            f"small set {{phi <= {r_level}}} captured no sampled points"
        )
    pts = np.hstack([cand_x[keep], cand_v[keep]])
    chosen = [0]
    dist = np.linalg.norm(pts - pts[0], axis=1)
    while len(chosen) < min(n_init, pts.shape[0]):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(pts - pts[nxt], axis=1))
    sel = pts[chosen]
    d = model.d
    return sel[:, :d], sel[:, d:]


def minorisation_estimate(
    model,
    phi: Optional[WeightFn],
    r_level: float,
    tau: float,
    eta_box: Sequence,
    bins,
    n_paths: int = 20000,
    n_init: int = 4,
    rng=None,
    confidence: float = 0.99,
    initial_points=None,
) -> MinorisationReport:
    """Empirical lower bound on the mass a model spreads over eta_box.

    For each initial point the model is run n_paths times to horizon tau
    and the end states are binned over eta_box. The reported alpha_hat is
    the worst (over initial points) of  n_bins_total * min_b p_low(b),
    where p_low is a one-sided binomial lower confidence bound for the
    probability of landing in bin b. This certifies S_tau(delta_z) >=
    alpha * Uniform(eta_box) on the bin sigma-algebra.
    """
    if tau <= 0.0:
        raise InvalidInputError("tau must be positive")
    box = [(float(lo), float(hi)) for lo, hi in eta_box]
    dim = len(box)
    if dim != 2 * model.d:
        raise InvalidInputError("eta_box must cover all position/velocity axes")
    for lo, hi in box:
        if not hi > lo:
            raise InvalidInputError("eta_box intervals must be increasing")
    if isinstance(bins, int):
        bins = (bins,) * dim
    bins = tuple(int(b) for b in bins)
    if any(b < 1 for b in bins):
        raise InvalidInputError("bins must be positive")
    total_bins = int(np.prod(bins))

    gen = getattr(rng, "gen", rng) or np.random.default_rng(0)
    if initial_points is not None:
        init_x, init_v = initial_points
        init_x = np.atleast_2d(np.asarray(init_x, float))
        init_v = np.atleast_2d(np.asarray(init_v, float))
    else:
        if phi is None:
            raise InvalidInputError("need a weight or explicit initial points")
        init_x, init_v = _spread_initial_points(
            model, phi, r_level, n_init, gen, x_radius=8.0, v_radius=8.0
        )
    n_init_eff = init_x.shape[0]

    from .experiments import simulate_ensemble

    edges = [np.linspace(lo, hi, b + 1) for (lo, hi), b in zip(box, bins)]
    alphas, raw_alphas = [], []
    worst_empty: tuple = ()
    for i in range(n_init_eff):
        snap = simulate_ensemble(
            model,
            n_paths=n_paths,
            t_grid=[tau],
            rng=gen,
            initial="point",
            initial_point=(init_x[i], init_v[i]),
        )
        z = np.hstack([snap.x[0], snap.v[0]])
        hist, _ = np.histogramdd(z, bins=edges)
        counts = hist.ravel().astype(int)
        kept = int(np.sum(counts))
        p_low = np.array([_cp_lower(c, n_paths, confidence) for c in counts])
        alphas.append(total_bins * float(np.min(p_low)))
        raw_alphas.append(total_bins * float(np.min(counts)) / n_paths)
        if np.any(counts == 0):
            idx = np.argwhere(hist == 0)
            worst_empty = tuple(map(tuple, idx[:16]))
        del kept
    alpha_hat = float(min(alphas))
    raw_alpha = float(min(raw_alphas))
    small_set = {"r_level": r_level if phi is not None else None}
    if phi is not None:
        small_set["weight"] = phi.name
    return MinorisationReport(
        alpha_hat=alpha_hat,
        tau=float(tau),
        small_set=small_set,
        eta_box=tuple(box),
        bins=bins,
        n_paths=n_paths,
        n_init=n_init_eff,
        raw_alpha=raw_alpha,
        confidence=confidence,
        empty_bins=worst_empty,
        per_init_alpha=tuple(alphas),
    )


# ---------------------------------------------------------------------------
# geometric control condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GccReport:
    kappa_hat: float
    t_horizon: float
    grid: dict
    with_potential: bool

    def summary(self) -> str:
        tag = "curved" if self.with_potential else "straight"
        return f"kappa_hat={self.kappa_hat:.6g} T={self.t_horizon} ({tag} paths)"


def _simpson_weights(n_sub: int, h: float) -> np.ndarray:
    if n_sub % 2 != 0:
        raise InvalidInputError("Simpson rule needs an even number of subintervals")
    w = np.ones(n_sub + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def gcc_check(
    sigma,
    potential=None,
    t_horizon: float = 1.0,
    x_grid=None,
    v_grid=None,
    n_sub: int = 1000,
) -> GccReport:
    """Minimal path integral of sigma along transport on the torus.

    Straight characteristics x + vt when no potential is given; otherwise
    the Hamiltonian flow integrated by RK4 with dt = T / n_sub. The path
    integral uses composite Simpson on the same n_sub subintervals.
    """
    if t_horizon <= 0.0:
        raise InvalidInputError("t_horizon must be positive")
    x0 = np.atleast_2d(np.asarray(x_grid, dtype=float))
    v0 = np.atleast_2d(np.asarray(v_grid, dtype=float))
    d = x0.shape[1]
    if v0.shape[1] != d:
        raise InvalidInputError("x_grid and v_grid dimensions differ")
    # all (x, v) pairs
    X = np.repeat(x0, v0.shape[0], axis=0)
    V = np.tile(v0, (x0.shape[0], 1))
    h = t_horizon / n_sub
    weights = _simpson_weights(n_sub, h)

    vals = np.empty((n_sub + 1, X.shape[0]))
    if potential is None or potential.is_zero:
        for k in range(n_sub + 1):
            vals[k] = np.asarray(sigma(wrap_torus(X + k * h * V)), dtype=float)
        with_potential = False
    else:
        x, v = X.copy(), V.copy()

        def acc(pos):
            return -potential.gradient_torus(pos)

        vals[0] = np.asarray(sigma(wrap_torus(x)), dtype=float)
        for k in range(1, n_sub + 1):
            k1x, k1v = v, acc(x)
            k2x, k2v = v + 0.5 * h * k1v, acc(x + 0.5 * h * k1x)
            k3x, k3v = v + 0.5 * h * k2v, acc(x + 0.5 * h * k2x)
            k4x, k4v = v + h * k3v, acc(x + h * k3x)
            x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            vals[k] = np.asarray(sigma(wrap_torus(x)), dtype=float)
        with_potential = True

    integrals = weights @ vals
    kappa_hat = float(np.min(integrals))
    return GccReport(
        kappa_hat=max(kappa_hat, 0.0),
        t_horizon=float(t_horizon),
        grid={"n_x": x0.shape[0], "n_v": v0.shape[0], "d": d, "n_sub": n_sub},
        with_potential=with_potential,
    )
