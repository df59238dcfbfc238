"""Linear scattering models.

``LinearBoltzmann``: jumps at the state-dependent collision frequency
Lambda_gamma(v) = E |v - v*|^gamma over a Maxwellian background, post-jump
velocity from the sigma-representation midpoint rule. Hard potentials
(gamma in [0, 1]) only.

``DegenerateBoltzmann``: torus transport with scattering modulated by a
nonnegative spatial field sigma(x); the velocity is redrawn from a bounded
uniform set or a Maxwellian. Where sigma vanishes, no jumps occur.

Both simulate jumps by thinning against explicit rate bounds, so jump times
are exact in law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.special import gammaln, i0e

from ..errors import InvalidInputError, NoEquilibriumError
from .base import PhaseState, Potential, wrap_torus
from .bgk import verlet_flow

__all__ = [
    "collision_frequency",
    "collision_rate_bound",
    "LinearBoltzmann",
    "DegenerateBoltzmann",
    "SigmaField",
    "SigmaConstant",
    "SigmaStrip",
]


# ---------------------------------------------------------------------------
# collision frequency over a Maxwellian background
# ---------------------------------------------------------------------------


def _chi_moment(gamma: float, d: int) -> float:
    # E |Z|^gamma for Z ~ N(0, I_d)
    return math.exp(
        0.5 * gamma * math.log(2.0) + gammaln((d + gamma) / 2.0) - gammaln(d / 2.0)
    )


def collision_frequency(v, gamma_hard: float, d: Optional[int] = None) -> float:
    """Mean relative speed to the power gamma against a unit Maxwellian.

    Lambda_gamma(v) = E |v - Z|^gamma, Z ~ N(0, I_d). gamma_hard = 0 returns
    the exact constant 1. Positive gamma reduces to a one-dimensional radial
    integral (the relative speed is a noncentral chi variable) evaluated
    adaptively with the kink split out, accurate to ~1e-10 for |v| <= 20.
    """
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    if d is None:
        d = v_arr.size
    if d < 1:
        raise InvalidInputError("d must be >= 1")
    if not 0.0 <= gamma_hard <= 1.0:
        raise InvalidInputError("gamma_hard must lie in [0, 1]")
    if gamma_hard == 0.0:
        return 1.0
    r = float(np.linalg.norm(v_arr)) if v_arr.size == d else float(abs(v_arr[0]))
    g = gamma_hard
    hi = r + 14.0
    if d == 1:
        # int_0^inf s^g (phi(r+s) + phi(r-s)) ds, kink isolated at s = 0
        c = 1.0 / math.sqrt(2.0 * math.pi)

        def f1(s):
            return s**g * c * (
                math.exp(-0.5 * (r + s) ** 2) + math.exp(-0.5 * (r - s) ** 2)
            )

        val, _ = quad(f1, 0.0, hi, limit=200, epsabs=1e-12, epsrel=1e-11)
        return val
    if d == 2:

        def f2(s):
            return s ** (g + 1.0) * math.exp(-0.5 * (s - r) ** 2) * i0e(r * s)

        val, _ = quad(f2, 0.0, hi, limit=200, epsabs=1e-12, epsrel=1e-11)
        return val
    if d == 3:
        if r < 1e-8:
            return _chi_moment(g, 3)

        def f3(s):
            return (
                s ** (g + 1.0)
                * (math.exp(-0.5 * (s - r) ** 2) - math.exp(-0.5 * (s + r) ** 2))
            )

        val, _ = quad(f3, 0.0, hi, limit=200, epsabs=1e-12, epsrel=1e-11)
        return val / (r * math.sqrt(2.0 * math.pi))
    raise InvalidInputError("collision_frequency supports d in {1, 2, 3}")


def collision_rate_bound(speed2: float, gamma_hard: float, d: int) -> float:
    """Valid thinning bound (d + |v|^2)^(gamma/2) >= Lambda_gamma(v)."""
    return (d + max(speed2, 0.0)) ** (gamma_hard / 2.0)


class _FrequencyTable:
    """Cubic-spline cache of Lambda_gamma over speeds [0, r_max]."""

    def __init__(self, gamma_hard: float, d: int, r_max: float = 60.0):
        self.gamma_hard = gamma_hard
        self.d = d
        self.r_max = r_max
        r = np.linspace(0.0, r_max, 1201)
        vals = [collision_frequency(np.array([ri]), gamma_hard, d) for ri in r]
        self._spline = CubicSpline(r, np.asarray(vals))

    def __call__(self, speed: float) -> float:
        if speed <= self.r_max:
            return float(self._spline(speed))
        return collision_frequency(np.array([speed]), self.gamma_hard, self.d)


# ---------------------------------------------------------------------------
# linear Boltzmann
# ---------------------------------------------------------------------------


def _uniform_sphere(d: int, gen) -> np.ndarray:
    if d == 1:
        return np.array([1.0 if gen.random() < 0.5 else -1.0])
    w = gen.standard_normal(d)
    return w / math.sqrt(float(np.dot(w, w)))


@dataclass
class LinearBoltzmann:
    """Scattering against a Maxwellian background with hard potentials."""

    d: int = 1
    gamma_hard: float = 1.0
    b_const: float = 1.0
    domain: str = "torus"
    potential: Potential = field(default_factory=Potential)
    flow_substep: float = 1e-2

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise InvalidInputError("d must be in {1, 2, 3}")
        if not 0.0 <= self.gamma_hard <= 1.0:
            raise InvalidInputError("gamma_hard must lie in [0, 1]")
        if not self.b_const > 0.0:
            raise InvalidInputError("b_const must be positive")
        if self.domain not in ("torus", "whole_space"):
            raise InvalidInputError(f"unknown domain {self.domain!r}")
        if self.domain == "whole_space" and self.potential.is_zero:
            raise InvalidInputError("whole-space transport needs a confining potential")
        if self.domain == "torus" and not self.potential.is_zero:
            raise InvalidInputError("the torus variant has no external potential")
        self._m1 = _chi_moment(1.0, self.d)
        self._freq = None

    @property
    def kind(self) -> str:
        return "linear_boltzmann"

    def frequency(self, speed: float) -> float:
        if self.gamma_hard == 0.0:
            return 1.0
        if self._freq is None:
            self._freq = _FrequencyTable(self.gamma_hard, self.d)
        return self._freq(speed)

    def flow(self, x, v, dt: float):
        if self.domain == "torus":
            return wrap_torus(x + v * dt), v
        return verlet_flow(self.potential, x, v, dt, self.flow_substep)

    def _rate_bound(self, x, v) -> float:
        if self.gamma_hard == 0.0:
            return 1.0
        if self.domain == "torus":
            s2 = float(np.dot(v, v))
        else:
            # speed bounded along the flight by energy conservation
            H = float(self.potential.value(x)) + 0.5 * float(np.dot(v, v))
            s2 = 2.0 * (H - self.potential.min_value) + 1.0
        return collision_rate_bound(s2, self.gamma_hard, self.d)

    def _draw_background(self, v: np.ndarray, gen) -> np.ndarray:
        """Background velocity from the law tilted by |v - v*|^gamma."""
        g = self.gamma_hard
        speed = math.sqrt(float(np.dot(v, v)))
        p_plain = (1.0 + speed) / (1.0 + speed + self._m1)
        while True:
            if gen.random() < p_plain:
                w = gen.standard_normal(self.d)
            else:
                # radial tilt by |v*|: chi(d+1) radius, uniform direction
                radius = math.sqrt(gen.chisquare(self.d + 1))
                w = radius * _uniform_sphere(self.d, gen)
            rel = math.sqrt(float(np.dot(v - w, v - w)))
            if gen.random() * (1.0 + speed + math.sqrt(float(np.dot(w, w)))) <= rel**g:
                return w

    def collide(self, v: np.ndarray, gen) -> np.ndarray:
        """One accepted collision: midpoint rule in the sigma representation."""
        w = self._draw_background(v, gen)
        sigma = _uniform_sphere(self.d, gen)
        rel = math.sqrt(float(np.dot(v - w, v - w)))
        return 0.5 * (v + w) + 0.5 * rel * sigma

    def step(self, state: PhaseState, dt: float, rng) -> PhaseState:
        if dt < 0.0:
            raise InvalidInputError("dt must be nonnegative")
        gen = rng.gen if hasattr(rng, "gen") else rng
        out = state.copy()
        x, v = out.x, out.v
        remaining = float(dt)
        bound = self._rate_bound(x, v)
        while remaining > 0.0:
            gap = gen.exponential() / bound
            if gap >= remaining:
                x, v = self.flow(x, v, remaining)
                break
            x, v = self.flow(x, v, gap)
            remaining -= gap
            speed = math.sqrt(float(np.dot(v, v)))
            if gen.random() * bound < self.frequency(speed):
                v = self.collide(v, gen)
                bound = self._rate_bound(x, v)
        out.x, out.v, out.t = x, v, out.t + dt
        return out

    def equilibrium_sampler(self, rng, n: int) -> np.ndarray:
        from .equilibrium import sample_position_boltzmann

        gen = rng.gen if hasattr(rng, "gen") else rng
        v = gen.standard_normal((n, self.d))
        if self.domain == "torus":
            x = gen.random((n, self.d))
        else:
            x = sample_position_boltzmann(self.potential, self.d, n, gen)
        return np.hstack([x, v])

    def to_config(self) -> dict:
        return {
            "model": "linear_boltzmann",
            "d": self.d,
            "gamma_hard": self.gamma_hard,
            "b_const": self.b_const,
            "domain": self.domain,
            "potential": self.potential.to_config(),
        }


# ---------------------------------------------------------------------------
# spatial scattering fields
# ---------------------------------------------------------------------------


class SigmaField:
    """Nonnegative continuous scattering field on the torus."""

    sup: float

    def __call__(self, x):
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class SigmaConstant(SigmaField):
    amplitude: float = 1.0

    def __post_init__(self):
        if self.amplitude < 0.0:
            raise InvalidInputError("amplitude must be nonnegative")

    @property
    def sup(self) -> float:
        return self.amplitude

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], self.amplitude) if x.ndim > 1 else self.amplitude

    def to_config(self) -> dict:
        return {"kind": "constant", "amplitude": self.amplitude}


@dataclass(frozen=True)
class SigmaStrip(SigmaField):
    """Raised-cosine bump supported on a strip {lo <= x_axis <= hi} (periodic)."""

    lo: float = 0.4
    hi: float = 0.6
    taper: float = 0.05
    amplitude: float = 1.0
    axis: int = 0

    def __post_init__(self):
        if not 0.0 <= self.lo < self.hi <= 1.0:
            raise InvalidInputError("need 0 <= lo < hi <= 1")
        if not 0.0 < self.taper <= (self.hi - self.lo) / 2.0:
            raise InvalidInputError("taper must be positive and fit inside the strip")
        if self.amplitude < 0.0:
            raise InvalidInputError("amplitude must be nonnegative")

    @property
    def sup(self) -> float:
        return self.amplitude

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        u = np.mod(x[..., self.axis] if x.ndim > 1 else x[self.axis], 1.0)
        lo, hi, w = self.lo, self.hi, self.taper
        out = np.zeros_like(np.asarray(u, dtype=float))
        out = np.where((u >= lo + w) & (u <= hi - w), 1.0, out)
        rise = (u > lo) & (u < lo + w)
        out = np.where(rise, 0.5 * (1.0 - np.cos(np.pi * (u - lo) / w)), out)
        fall = (u > hi - w) & (u < hi)
        out = np.where(fall, 0.5 * (1.0 - np.cos(np.pi * (hi - u) / w)), out)
        val = self.amplitude * out
        return float(val) if np.ndim(val) == 0 else val

    def to_config(self) -> dict:
        return {
            "kind": "strip",
            "lo": self.lo,
            "hi": self.hi,
            "taper": self.taper,
            "amplitude": self.amplitude,
            "axis": self.axis,
        }


# ---------------------------------------------------------------------------
# degenerate scattering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DegenerateBoltzmann:
    """Torus transport with sigma(x)-modulated velocity redraws.

    scatter "uniform" redraws v uniformly on the centered ball of radius
    v_ball; "maxwellian" redraws from N(0, I). An optional potential bends
    the flights (evaluated on the fundamental domain).
    """

    d: int = 1
    sigma: SigmaField = field(default_factory=SigmaConstant)
    scatter: str = "uniform"
    v_ball: float = 1.0
    potential: Potential = field(default_factory=Potential)
    flow_substep: float = 1e-2

    def __post_init__(self):
        if self.d < 1:
            raise InvalidInputError("d must be >= 1")
        if self.scatter not in ("uniform", "maxwellian"):
            raise InvalidInputError(f"unknown scatter {self.scatter!r}")
        if not self.v_ball > 0.0:
            raise InvalidInputError("v_ball must be positive")
        if self.sigma.sup <= 0.0:
            raise InvalidInputError("sigma must not vanish identically")

    @property
    def kind(self) -> str:
        return "degenerate_boltzmann"

    def flow(self, x, v, dt: float):
        if self.potential.is_zero:
            return wrap_torus(x + v * dt), v
        n_sub = max(1, int(math.ceil(dt / self.flow_substep)))
        h = dt / n_sub
        for _ in range(n_sub):
            v = v - 0.5 * h * self.potential.gradient_torus(x)
            x = wrap_torus(x + h * v)
            v = v - 0.5 * h * self.potential.gradient_torus(x)
        return x, v

    def draw_scatter(self, gen) -> np.ndarray:
        if self.scatter == "maxwellian":
            return gen.standard_normal(self.d)
        from .equilibrium import uniform_ball

        return uniform_ball(self.d, self.v_ball, 1, gen)[0]

    def step(self, state: PhaseState, dt: float, rng) -> PhaseState:
        if dt < 0.0:
            raise InvalidInputError("dt must be nonnegative")
        gen = rng.gen if hasattr(rng, "gen") else rng
        out = state.copy()
        x, v = out.x, out.v
        remaining = float(dt)
        bound = self.sigma.sup
        while remaining > 0.0:
            gap = gen.exponential() / bound
            if gap >= remaining:
                x, v = self.flow(x, v, remaining)
                break
            x, v = self.flow(x, v, gap)
            remaining -= gap
            if gen.random() * bound < float(self.sigma(x)):
                v = self.draw_scatter(gen)
        out.x, out.v, out.t = x, v, out.t + dt
        return out

    def equilibrium_sampler(self, rng, n: int) -> np.ndarray:
        from .equilibrium import sample_position_torus, uniform_ball

        if self.scatter == "uniform" and not self.potential.is_zero:
            # uniform redraws do not preserve the Hamiltonian measure
            raise NoEquilibriumError(
                "no product equilibrium for uniform scatter with a potential"
            )
        gen = rng.gen if hasattr(rng, "gen") else rng
        x = sample_position_torus(self.potential, self.d, n, gen)
        if self.scatter == "maxwellian":
            v = gen.standard_normal((n, self.d))
        else:
            v = uniform_ball(self.d, self.v_ball, n, gen)
        return np.hstack([x, v])

    def to_config(self) -> dict:
        return {
            "model": "degenerate_boltzmann",
            "d": self.d,
            "sigma": self.sigma.to_config(),
            "scatter": self.scatter,
            "v_ball": self.v_ball,
            "potential": self.potential.to_config(),
        }
