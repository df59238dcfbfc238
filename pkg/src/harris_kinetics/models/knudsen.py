"""Collisionless gas in a bounded domain with reflecting wall kernels.

Particles fly in straight lines and are re-emitted at the wall by one of
three kernels: a Maxwell mix of specular reflection and full accommodation to
a wall Maxwellian, a Cercignani-Lampis kernel with separate normal/tangential
accommodation, or an absorbing wall.

Sampling conventions (outward unit normal n at the landing point x, incoming
velocity u with u.n >= 0, wall temperature T):

* diffuse emission carries the flux-weighted wall Maxwellian: the inward
  normal speed s has density (s/T) exp(-s^2/(2T)) and each tangential
  component is N(0, T);
* the Cercignani-Lampis normal speed is the norm of a 2-vector Gaussian with
  mean length sqrt(1-r_perp)*|u.n| and per-component variance T*r_perp (a Rice
  law), and each tangential component is N((1-r_par)*u_par, T*r_par*(2-r_par)).
  (r_perp, r_par) = (1, 1) reduces to diffuse emission.

Both kernels are normalised against the flux measure |v.n| dv; the sampled
density is available in closed form for importance checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.special import i0e

from ..errors import InvalidInputError, UnsupportedModelError
from .base import PhaseState
from .geometry import Box, Disk, Interval, first_collision_time

__all__ = [
    "BoundarySpec",
    "KnudsenGas",
    "sample_maxwell_boundary",
    "sample_cl_kernel",
    "cl_sampled_density",
    "specular_reflect",
]


@dataclass(frozen=True)
class BoundarySpec:
    """Wall kernel selector.

    kind "maxwell" mixes specular reflection (probability 1 - accommodation)
    with diffuse emission; "diffuse" is maxwell at accommodation 1;
    "cercignani_lampis" uses (r_perp, r_par); "absorbing" kills the particle.
    accommodation may be a constant or a callable of the landing point.
    """

    kind: str = "diffuse"
    accommodation: Union[float, Callable] = 1.0
    r_perp: float = 1.0
    r_par: float = 1.0

    def __post_init__(self):
        if self.kind not in ("maxwell", "diffuse", "cercignani_lampis", "absorbing"):
            raise InvalidInputError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "cercignani_lampis":
            if not 0.0 < self.r_perp <= 1.0:
                raise InvalidInputError("r_perp must lie in (0, 1]")
            if not 0.0 < self.r_par < 2.0:
                raise InvalidInputError("r_par must lie in (0, 2)")
        if isinstance(self.accommodation, (int, float)) and not (
            0.0 <= float(self.accommodation) <= 1.0
        ):
            raise InvalidInputError("accommodation must lie in [0, 1]")

    def accommodation_at(self, x: np.ndarray) -> float:
        a = self.accommodation
        return float(a(x)) if callable(a) else float(a)

    def to_config(self) -> dict:
        cfg = {"kind": self.kind}
        if self.kind == "maxwell" and not callable(self.accommodation):
            cfg["accommodation"] = float(self.accommodation)
        if self.kind == "cercignani_lampis":
            cfg["r_perp"] = self.r_perp
            cfg["r_par"] = self.r_par
        return cfg


def _tangent_frame(n: np.ndarray) -> np.ndarray:
    """Rows form an orthonormal basis of the tangent plane at normal n."""
    d = n.size
    if d == 1:
        return np.zeros((0, 1))
    if d == 2:
        return np.array([[-n[1], n[0]]])
    e = np.zeros(3)
    e[int(np.argmin(np.abs(n)))] = 1.0
    t1 = e - np.dot(e, n) * n
    t1 /= math.sqrt(float(np.dot(t1, t1)))
    t2 = np.cross(n, t1)
    return np.stack([t1, t2])


def specular_reflect(u: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Mirror u across the tangent plane with unit normal n."""
    u = np.asarray(u, dtype=float)
    n = np.asarray(n, dtype=float)
    return u - 2.0 * float(np.dot(u, n)) * n


def _diffuse_draw(n: np.ndarray, T: float, rng) -> np.ndarray:
    gen = rng.gen if hasattr(rng, "gen") else rng
    # inverse-CDF Rayleigh keeps the draw order explicit and stable
    s = math.sqrt(-2.0 * T * math.log(1.0 - gen.random()))
    v = -s * n
    tang = _tangent_frame(n)
    if tang.shape[0]:
        v = v + math.sqrt(T) * gen.standard_normal(tang.shape[0]) @ tang
    return v


def sample_maxwell_boundary(u_in, n, accommodation: float, T: float, rng):
    """Re-emission velocity for the Maxwell wall kernel.

    Parameters
    ----------
    u_in : array
        Incoming velocity at the wall, u_in . n >= 0.
    n : array
        Outward unit normal at the landing point.
    accommodation : float
        Probability of diffuse emission; the rest reflects specularly.
    T : float
        Wall temperature, > 0.
    rng : RngStream or numpy Generator

    Returns
    -------
    array
        Outgoing velocity with v . n < 0 almost surely.
    """
    u = np.atleast_1d(np.asarray(u_in, dtype=float))
    n = np.atleast_1d(np.asarray(n, dtype=float))
    if not T > 0.0:
        raise InvalidInputError("wall temperature must be positive")
    if not 0.0 <= accommodation <= 1.0:
        raise InvalidInputError("accommodation must lie in [0, 1]")
    gen = rng.gen if hasattr(rng, "gen") else rng
    if gen.random() < accommodation:
        return _diffuse_draw(n, T, rng)
    return specular_reflect(u, n)


def sample_cl_kernel(u_in, n, r_perp: float, r_par: float, T: float, rng):
    """Re-emission velocity for the Cercignani-Lampis kernel.

    Exact sampling: tangential components are Gaussian with mean
    (1-r_par) u_par and variance T r_par (2-r_par); the inward normal speed is
    |w| for a 2-vector Gaussian w with mean length sqrt(1-r_perp) |u.n| and
    per-component variance T r_perp.
    """
    u = np.atleast_1d(np.asarray(u_in, dtype=float))
    n = np.atleast_1d(np.asarray(n, dtype=float))
    if not 0.0 < r_perp <= 1.0:
        raise InvalidInputError("r_perp must lie in (0, 1]")
    if not 0.0 < r_par < 2.0:
        raise InvalidInputError("r_par must lie in (0, 2)")
    if not T > 0.0:
        raise InvalidInputError("wall temperature must be positive")
    gen = rng.gen if hasattr(rng, "gen") else rng
    u_norm = float(np.dot(u, n))
    nu = math.sqrt(max(1.0 - r_perp, 0.0)) * abs(u_norm)
    sig = math.sqrt(T * r_perp)
    xi1, xi2 = gen.standard_normal(2)
    s = math.hypot(nu + sig * xi1, sig * xi2)
    v = -s * n
    tang = _tangent_frame(n)
    if tang.shape[0]:
        u_par = tang @ u
        mean = (1.0 - r_par) * u_par
        std = math.sqrt(T * r_par * (2.0 - r_par))
        v = v + (mean + std * gen.standard_normal(tang.shape[0])) @ tang
    return v


def cl_sampled_density(u_in, n, v_out, r_perp: float, r_par: float, T: float) -> float:
    """Density of the velocity produced by sample_cl_kernel.

    This is the kernel times the flux factor |v.n|, so integrating it over
    the inward half space gives exactly 1; used for normalisation checks.
    """
    u = np.atleast_1d(np.asarray(u_in, dtype=float))
    v = np.atleast_1d(np.asarray(v_out, dtype=float))
    n = np.atleast_1d(np.asarray(n, dtype=float))
    s = -float(np.dot(v, n))
    if s <= 0.0:
        return 0.0
    nu = math.sqrt(max(1.0 - r_perp, 0.0)) * abs(float(np.dot(u, n)))
    sig2 = T * r_perp
    # Rice density via the scaled Bessel i0e(z) = I0(z) e^{-z}:
    # (s/sig2) exp(-(s^2+nu^2)/2sig2) I0(s nu/sig2)
    #   = (s/sig2) exp(-(s-nu)^2/2sig2) i0e(s nu/sig2)
    z = s * nu / sig2
    dens = (s / sig2) * math.exp(-((s - nu) ** 2) / (2.0 * sig2)) * float(i0e(z))
    tang = _tangent_frame(n)
    if tang.shape[0]:
        u_par = tang @ u
        v_par = tang @ v
        var = T * r_par * (2.0 - r_par)
        diff = v_par - (1.0 - r_par) * u_par
        dens *= math.exp(-float(np.dot(diff, diff)) / (2.0 * var)) / (
            2.0 * math.pi * var
        ) ** (tang.shape[0] / 2.0)
    return dens


@dataclass(frozen=True)
class KnudsenGas:
    """Free flight in a bounded domain with a wall re-emission kernel."""

    geometry: Union[Interval, Disk, Box]
    boundary: BoundarySpec
    wall_temp: Union[float, Callable] = 1.0

    def __post_init__(self):
        if isinstance(self.wall_temp, (int, float)) and not self.wall_temp > 0.0:
            raise InvalidInputError("wall_temp must be positive")

    @property
    def d(self) -> int:
        return self.geometry.d

    @property
    def kind(self) -> str:
        return "knudsen"

    def wall_temp_at(self, x: np.ndarray) -> float:
        T = self.wall_temp
        return float(T(x)) if callable(T) else float(T)

    def first_collision_time(self, x, v) -> float:
        return first_collision_time(self.geometry, x, v)

    def _emit(self, x: np.ndarray, u: np.ndarray, rng):
        """Boundary re-emission; returns None on absorption."""
        n = self.geometry.outward_normal(x)
        T = self.wall_temp_at(x)
        b = self.boundary
        if b.kind == "absorbing":
            return None
        if b.kind == "diffuse":
            return _diffuse_draw(n, T, rng)
        if b.kind == "maxwell":
            return sample_maxwell_boundary(u, n, b.accommodation_at(x), T, rng)
        return sample_cl_kernel(u, n, b.r_perp, b.r_par, T, rng)

    def step(self, state: PhaseState, dt: float, rng) -> PhaseState:
        """Advance by dt, resolving every wall collision inside the step."""
        if dt < 0.0:
            raise InvalidInputError("dt must be nonnegative")
        out = state.copy()
        if not out.alive:
            out.t += dt
            return out
        remaining = float(dt)
        x, v = out.x, out.v
        while remaining > 0.0:
            tau = self.first_collision_time(x, v)
            if tau > remaining:
                x = x + v * remaining
                remaining = 0.0
                break
            x = x + v * tau
            remaining -= tau
            if isinstance(self.geometry, Disk):
                # renormalise onto the circle to keep later normals exact
                r = math.sqrt(float(np.dot(x, x)))
                if r > 0.0:
                    x = x * (self.geometry.radius / r)
            v_new = self._emit(x, v, rng)
            if v_new is None:
                out.alive = False
                break
            v = np.asarray(v_new, dtype=float)
        out.x, out.v = x, v
        out.t += dt
        return out

    def equilibrium_sampler(self, rng, n: int):
        raise UnsupportedModelError(
            "knudsen gas has no closed-form equilibrium sampler; use a long run"
        )

    def to_config(self) -> dict:
        cfg = {
            "model": "knudsen",
            "geometry": self.geometry.to_config(),
            "boundary": self.boundary.to_config(),
        }
        if not callable(self.wall_temp):
            cfg["wall_temp"] = float(self.wall_temp)
        return cfg
