"""Pointwise evaluation of the Markov generator applied to a weight.

For each model the generator splits into a transport part (evaluated with
the weight's analytic derivatives when present, central finite differences
otherwise), a jump part (state-dependent rate times the quadrature average
of the weight over the post-jump law, minus the weight), and a diffusion
part (velocity Laplacian plus friction drift).

The flat weight is annihilated exactly: every term is a derivative or a
centered difference of averages, so generator_apply(model, flat, z) = 0.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.integrate import quad

from ..errors import InvalidInputError, InvalidWeightError, UnsupportedModelError
from .base import PhaseState
from .quadrature import gauss_maxwellian, uniform_ball_rule, uniform_sphere_rule

__all__ = ["generator_apply", "generator_apply_many"]

_GH_NODES = {1: 48, 2: 24, 3: 14}
_CHUNK = 64


def _as_batch(x, v, d: int):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if x.shape != v.shape or x.shape[-1] != d:
        raise InvalidInputError("x and v must both have shape (n, d)")
    return x, v


def _phi_values(phi, x, v):
    vals = np.asarray(phi.value(x, v), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise InvalidWeightError("weight is non-finite at an evaluation point")
    return vals


def _fd_scale(x, v):
    return 1e-4 * (1.0 + np.sqrt(np.sum(x * x, axis=-1) + np.sum(v * v, axis=-1)))


def _fd_directional(phi, x, v, dir_x, dir_v):
    """Directional derivative (dir_x . grad_x + dir_v . grad_v) phi, centered."""
    norm = np.sqrt(np.sum(dir_x * dir_x, axis=-1) + np.sum(dir_v * dir_v, axis=-1))
    safe = np.where(norm > 0.0, norm, 1.0)[..., None]
    h = (_fd_scale(x, v) / safe[..., 0])[..., None]
    up = _phi_values(phi, x + h * dir_x, v + h * dir_v)
    dn = _phi_values(phi, x - h * dir_x, v - h * dir_v)
    out = (up - dn) / (2.0 * h[..., 0])
    return np.where(norm > 0.0, out, 0.0)


def _fd_lap_v(phi, x, v):
    h = _fd_scale(x, v)
    center = _phi_values(phi, x, v)
    out = np.zeros_like(center)
    d = v.shape[-1]
    for i in range(d):
        e = np.zeros_like(v)
        e[..., i] = h
        out += (_phi_values(phi, x, v + e) - 2.0 * center + _phi_values(phi, x, v - e))
    return out / h**2


def _transport(phi, x, v, force: Optional[np.ndarray]):
    """v . grad_x phi - force . grad_v phi (force = grad Phi or full drift)."""
    if phi.has_gradients:
        out = np.sum(v * phi.grad_x(x, v), axis=-1)
        if force is not None:
            out -= np.sum(force * phi.grad_v(x, v), axis=-1)
        return out
    if force is None and phi.has_transport:
        return phi.transport_term(x, v)
    out = _fd_directional(phi, x, v, v, np.zeros_like(v))
    if force is not None:
        out -= _fd_directional(phi, x, v, np.zeros_like(x), force)
    return out


def _jump_average_batch(phi, x, nodes, weights):
    """Quadrature average of phi(x_i, nodes) for each row x_i."""
    n, d = x.shape
    k = nodes.shape[0]
    out = np.empty(n)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        xs = np.repeat(x[lo:hi], k, axis=0)
        vs = np.tile(nodes, (hi - lo, 1))
        vals = _phi_values(phi, xs, vs).reshape(hi - lo, k)
        out[lo:hi] = vals @ weights
    return out


def _bgk_generator(model, phi, x, v):
    force = None if model.domain == "torus" else model.potential.gradient(x)
    nodes, weights = gauss_maxwellian(model.d, _GH_NODES[model.d])
    mean_post = _jump_average_batch(phi, x, nodes, weights)
    center = _phi_values(phi, x, v)
    return _transport(phi, x, v, force) + model.jump_rate * (mean_post - center)


def _boltzmann_post_mean_1d(model, phi, x, v):
    """Adaptive collision average in d = 1, exact kink handling at w = v."""
    g = model.gamma_hard
    out_num = np.empty(x.shape[0])
    out_rate = np.empty(x.shape[0])
    c = 1.0 / math.sqrt(2.0 * math.pi)
    for i in range(x.shape[0]):
        vi = float(v[i, 0])
        xi = x[i : i + 1]

        def hmean(w):
            # average of phi over the two collision outcomes sigma = +-1
            rel = abs(vi - w)
            vp = 0.5 * (vi + w) + 0.5 * rel
            vm = 0.5 * (vi + w) - 0.5 * rel
            pa = float(phi.value(xi, np.array([[vp]]))[0])
            pb = float(phi.value(xi, np.array([[vm]]))[0])
            return 0.5 * (pa + pb)

        def num(w):
            return abs(vi - w) ** g * math.exp(-0.5 * w * w) * c * hmean(w)

        def den(w):
            return abs(vi - w) ** g * math.exp(-0.5 * w * w) * c

        lo, hi = vi - 14.0, vi + 14.0
        kwargs = dict(limit=200, epsabs=1e-11, epsrel=1e-10, points=[vi])
        out_num[i], _ = quad(num, lo, hi, **kwargs)
        out_rate[i], _ = quad(den, lo, hi, **kwargs)
    return out_num, out_rate


def _boltzmann_generator(model, phi, x, v):
    force = None if model.domain == "torus" else model.potential.gradient(x)
    center = _phi_values(phi, x, v)
    transport = _transport(phi, x, v, force)
    g = model.gamma_hard
    d = model.d
    if d == 1:
        num, rate = _boltzmann_post_mean_1d(model, phi, x, v)
        return transport + (num - rate * center)
    w_nodes, w_weights = gauss_maxwellian(d, _GH_NODES[d])
    s_nodes, s_weights = uniform_sphere_rule(d)
    n = x.shape[0]
    k, s = w_nodes.shape[0], s_nodes.shape[0]
    out = np.empty(n)
    for lo in range(0, n, 8):
        hi = min(lo + 8, n)
        vv = v[lo:hi]
        rel = vv[:, None, :] - w_nodes[None, :, :]  # (m, k, d)
        rel_norm = np.sqrt(np.sum(rel * rel, axis=-1))  # (m, k)
        mid = 0.5 * (vv[:, None, :] + w_nodes[None, :, :])
        post = (
            mid[:, :, None, :] + 0.5 * rel_norm[:, :, None, None] * s_nodes[None, None]
        )  # (m, k, s, d)
        xs = np.repeat(x[lo:hi], k * s, axis=0)
        vals = _phi_values(phi, xs, post.reshape(-1, d)).reshape(hi - lo, k, s)
        sphere_avg = vals @ s_weights  # (m, k)
        kern = w_weights[None, :] * rel_norm**g  # (m, k)
        out[lo:hi] = np.sum(kern * (sphere_avg - center[lo:hi, None]), axis=-1)
    return transport + out


def _degenerate_generator(model, phi, x, v):
    force = None if model.potential.is_zero else model.potential.gradient_torus(x)
    if model.scatter == "maxwellian":
        nodes, weights = gauss_maxwellian(model.d, _GH_NODES[model.d])
    else:
        nodes, weights = uniform_ball_rule(model.d, model.v_ball)
    mean_post = _jump_average_batch(phi, x, nodes, weights)
    center = _phi_values(phi, x, v)
    sig = np.atleast_1d(np.asarray(model.sigma(x), dtype=float))
    return _transport(phi, x, v, force) + sig * (mean_post - center)


def _runtumble_generator(model, phi, x, v):
    nodes, weights = uniform_ball_rule(model.d, model.r0)
    mean_post = _jump_average_batch(phi, x, nodes, weights)
    center = _phi_values(phi, x, v)
    grad = model.signal.gradient(x)
    m = np.sum(v * grad, axis=-1)
    from .run_tumble import psi_value

    rate = 1.0 - model.chi * psi_value(model.psi, m)
    return _transport(phi, x, v, None) + rate * (mean_post - center)


def _kfp_generator(model, phi, x, v):
    drift_v = model.potential.gradient(x) + model.friction(v)
    out = _transport(phi, x, v, drift_v)
    if phi.has_velocity_laplacian:
        out += phi.laplacian_v(x, v)
    else:
        out += _fd_lap_v(phi, x, v)
    return out


def _fhn_generator(model, phi, x, v):
    dx, dv = model.drift(x, v)
    if phi.has_gradients:
        out = np.sum(dx * phi.grad_x(x, v), axis=-1) + np.sum(
            dv * phi.grad_v(x, v), axis=-1
        )
    else:
        out = _fd_directional(phi, x, v, dx, dv)
    if phi.has_velocity_laplacian:
        out += phi.laplacian_v(x, v)
    else:
        out += _fd_lap_v(phi, x, v)
    return out


def _knudsen_generator(model, phi, x, v):
    return _transport(phi, x, v, None)


_DISPATCH = {
    "linear_bgk": _bgk_generator,
    "linear_boltzmann": _boltzmann_generator,
    "degenerate_boltzmann": _degenerate_generator,
    "run_tumble": _runtumble_generator,
    "kinetic_fokker_planck": _kfp_generator,
    "fitzhugh_nagumo": _fhn_generator,
    "knudsen": _knudsen_generator,
}


def generator_apply_many(model, phi, x, v) -> np.ndarray:
    """Generator of the model applied to phi at a batch of (n, d) states."""
    kind = getattr(model, "kind", None)
    if kind not in _DISPATCH:
        raise UnsupportedModelError(f"no generator evaluation for model kind {kind!r}")
    x, v = _as_batch(x, v, model.d)
    out = _DISPATCH[kind](model, phi, x, v)
    if not np.all(np.isfinite(out)):
        raise InvalidWeightError("generator evaluation produced non-finite values")
    return out


def generator_apply(model, phi, z: PhaseState) -> float:
    """Generator of the model applied to phi at a single state."""
    return float(generator_apply_many(model, phi, z.x[None, :], z.v[None, :])[0])
