"""Linear relaxation (BGK) model: free or confined transport with
unit-rate jumps of the velocity to a standard Maxwellian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError, NoEquilibriumError
from .base import PhaseState, Potential, wrap_torus

__all__ = ["LinearBGK"]


def verlet_flow(potential: Potential, x, v, dt: float, h: float = 1e-2):
    """Velocity-Verlet integration of the Hamiltonian flow over dt."""
    n_sub = max(1, int(math.ceil(dt / h)))
    hh = dt / n_sub
    g = potential.gradient(x)
    for _ in range(n_sub):
        v_half = v - 0.5 * hh * g
        x = x + hh * v_half
        g = potential.gradient(x)
        v = v_half - 0.5 * hh * g
    return x, v


@dataclass(frozen=True)
class LinearBGK:
    """Transport plus jumps v -> N(0, I) at unit rate.

    domain "torus" flows freely on [0,1)^d; "whole_space" flows in the
    Hamiltonian field of the confining potential.
    """

    d: int = 1
    domain: str = "torus"
    potential: Potential = field(default_factory=Potential)
    flow_substep: float = 1e-2

    def __post_init__(self):
        if self.d < 1:
            raise InvalidInputError("d must be >= 1")
        if self.domain not in ("torus", "whole_space"):
            raise InvalidInputError(f"unknown domain {self.domain!r}")
        if self.domain == "whole_space" and self.potential.is_zero:
            raise InvalidInputError("whole-space transport needs a confining potential")
        if self.domain == "torus" and not self.potential.is_zero:
            raise InvalidInputError("torus variant carries no potential")

    @property
    def kind(self) -> str:
        return "linear_bgk"

    @property
    def jump_rate(self) -> float:
        return 1.0

    def flow(self, x: np.ndarray, v: np.ndarray, dt: float):
        if self.domain == "torus":
            return wrap_torus(x + v * dt), v
        return verlet_flow(self.potential, x, v, dt, self.flow_substep)

    def step(self, state: PhaseState, dt: float, rng) -> PhaseState:
        """Advance by dt with exact exponential-clock jump times."""
        if dt < 0.0:
            raise InvalidInputError("dt must be nonnegative")
        gen = rng.gen if hasattr(rng, "gen") else rng
        out = state.copy()
        x, v = out.x, out.v
        remaining = float(dt)
        while remaining > 0.0:
            gap = gen.exponential()
            if gap >= remaining:
                x, v = self.flow(x, v, remaining)
                break
            x, v = self.flow(x, v, gap)
            v = gen.standard_normal(self.d)
            remaining -= gap
        out.x, out.v, out.t = x, v, out.t + dt
        return out

    def equilibrium_sampler(self, rng, n: int) -> np.ndarray:
        """n samples of the stationary law as an (n, 2d) array [x | v]."""
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
            "model": "linear_bgk",
            "d": self.d,
            "domain": self.domain,
            "potential": self.potential.to_config(),
        }
