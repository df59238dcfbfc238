"""Kinetic FitzHugh-Nagumo neuron dynamics.

Two scalar variables: the recovery variable x and the membrane voltage v,
driven by

    dX = (b V - a X) dt,
    dV = -(X + V (V - 1) (V - c)) dt + sqrt(2) dW,

with positive constants a, b, c. Noise enters the voltage only, so the
process is hypoelliptic; confinement comes from the cubic voltage drift
rather than an external potential. The stationary law has no closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError, NoEquilibriumError, StabilityLimitError
from .base import PhaseState

__all__ = ["FitzHughNagumo"]

DT_LIMIT = 1e-3


@dataclass(frozen=True)
class FitzHughNagumo:
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "c"):
            if not getattr(self, name) > 0.0:
                raise InvalidInputError(f"{name} must be positive")

    @property
    def kind(self) -> str:
        return "fitzhugh_nagumo"

    @property
    def d(self) -> int:
        return 1

    @property
    def dt_limit(self) -> float:
        return DT_LIMIT

    def drift(self, x: np.ndarray, v: np.ndarray):
        """Deterministic part of (dX, dV); vectorized over leading axes."""
        dx = self.b * v - self.a * x
        dv = -(x + v * (v - 1.0) * (v - self.c))
        return dx, dv

    def em_step_many(self, x: np.ndarray, v: np.ndarray, dt: float, gen):
        """One Euler-Maruyama step for an (n, 1) ensemble block."""
        dx, dv = self.drift(x, v)
        noise = gen.standard_normal(v.shape)
        return x + dt * dx, v + dt * dv + math.sqrt(2.0 * dt) * noise

    def step(self, state: PhaseState, dt: float, rng) -> PhaseState:
        if dt <= 0.0:
            raise InvalidInputError("dt must be positive")
        if dt > self.dt_limit:
            raise StabilityLimitError(dt, self.dt_limit)
        gen = rng.gen if hasattr(rng, "gen") else rng
        out = state.copy()
        x, v = self.em_step_many(out.x, out.v, dt, gen)
        out.x, out.v, out.t = x, v, out.t + dt
        return out

    def equilibrium_sampler(self, rng, n: int):
        raise NoEquilibriumError(
            "the FitzHugh-Nagumo stationary state has no closed form"
        )

    def to_config(self) -> dict:
        return {"model": "fitzhugh_nagumo", "a": self.a, "b": self.b, "c": self.c}
