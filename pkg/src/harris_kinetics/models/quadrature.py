"""Shared quadrature rules on Gaussian, ball, and sphere domains.

All rules return (nodes, weights) pairs; weights are normalized so that the
rule computes an average against the target probability law (Maxwellian,
uniform ball, uniform sphere). Node counts are small enough to batch many
evaluation points at once.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..errors import InvalidInputError

__all__ = ["gauss_maxwellian", "uniform_ball_rule", "uniform_sphere_rule"]


@lru_cache(maxsize=32)
def _hermite(n: int):
    # probabilists' rule: sum w_i f(t_i) ~ int f(t) e^(-t^2/2) dt
    t, w = np.polynomial.hermite_e.hermegauss(n)
    return t, w / math.sqrt(2.0 * math.pi)


@lru_cache(maxsize=32)
def gauss_maxwellian(d: int, n: int):
    """Nodes/weights averaging against the standard Gaussian on R^d."""
    t, w = _hermite(n)
    if d == 1:
        return t[:, None].copy(), w.copy()
    grids = np.meshgrid(*([t] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.ones(nodes.shape[0])
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    for g in wgrids:
        weights = weights * g.ravel()
    return nodes, weights


@lru_cache(maxsize=32)
def uniform_sphere_rule(d: int, n_polar: int = 16, n_azimuth: int = 32):
    """Nodes/weights averaging over the unit sphere S^(d-1)."""
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    if d == 2:
        theta = 2.0 * math.pi * (np.arange(n_azimuth) + 0.5) / n_azimuth
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return nodes, np.full(n_azimuth, 1.0 / n_azimuth)
    if d == 3:
        # product rule: Gauss-Legendre in cos(polar), midpoint in azimuth
        mu, wmu = np.polynomial.legendre.leggauss(n_polar)
        phi = 2.0 * math.pi * (np.arange(n_azimuth) + 0.5) / n_azimuth
        sin_t = np.sqrt(1.0 - mu**2)
        nodes = np.empty((n_polar * n_azimuth, 3))
        weights = np.empty(n_polar * n_azimuth)
        idx = 0
        for i in range(n_polar):
            for j in range(n_azimuth):
                nodes[idx] = (
                    sin_t[i] * math.cos(phi[j]),
                    sin_t[i] * math.sin(phi[j]),
                    mu[i],
                )
                weights[idx] = wmu[i] / (2.0 * n_azimuth)
                idx += 1
        return nodes, weights
    raise InvalidInputError("sphere rule supports d in {1, 2, 3}")


@lru_cache(maxsize=32)
def uniform_ball_rule(d: int, radius: float, n_radial: int = 24):
    """Nodes/weights averaging over the uniform law on B(0, radius)."""
    if not radius > 0.0:
        raise InvalidInputError("radius must be positive")
    r, wr = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * radius * (r + 1.0)
    wr = 0.5 * radius * wr
    # radial density of the uniform ball law: d r^(d-1) / radius^d
    wr = wr * d * r ** (d - 1.0) / radius**d
    if d == 1:
        nodes = np.concatenate([r, -r])[:, None]
        weights = 0.5 * np.concatenate([wr, wr])
        return nodes, weights
    sph_nodes, sph_w = uniform_sphere_rule(d)
    nodes = r[:, None, None] * sph_nodes[None, :, :]
    weights = wr[:, None] * sph_w[None, :]
    return nodes.reshape(-1, d), weights.ravel()
