"""Kinetic Fokker-Planck dynamics.

Underdamped Langevin motion

    dX = V dt,
    dV = (-grad Phi(X) - V <V>^(beta-2)) dt + sqrt(2) dW,

with the confining potential Phi(x) = <x>^gamma / gamma and the friction
exponent beta >= 2. For beta = 2 the friction is linear and the stationary
law is the Gibbs product e^(-Phi(x)) e^(-|v|^2/2) / Z; superquadratic
friction (beta > 2) has superlinearly growing drift, so the integrator
switches to a tamed Euler step to avoid numerical blow-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError, NoEquilibriumError, StabilityLimitError
from .base import PhaseState, Potential

__all__ = ["KineticFokkerPlanck"]

DT_LIMIT = 1e-3


@dataclass(frozen=True)
class KineticFokkerPlanck:
    gamma_exp: float = 2.0
    beta_friction: float = 2.0
    d: int = 1

    def __post_init__(self):
        if not self.gamma_exp > 0.0:
            raise InvalidInputError("gamma_exp must be positive")
        if not self.beta_friction >= 2.0:
            raise InvalidInputError("beta_friction must be >= 2")
        if self.d < 1:
            raise InvalidInputError("d must be >= 1")
        object.__setattr__(
            self, "potential", Potential(family="power", gamma_exp=self.gamma_exp)
        )

    potential: Potential = field(init=False, repr=False)

    @property
    def kind(self) -> str:
        return "kinetic_fokker_planck"

    @property
    def dt_limit(self) -> float:
        return DT_LIMIT

    @property
    def is_tamed(self) -> bool:
        return self.beta_friction > 2.0

    def friction(self, v: np.ndarray) -> np.ndarray:
        """grad Psi(v) for Psi(v) = <v>^beta / beta; equals v when beta = 2."""
        if self.beta_friction == 2.0:
            return v
        bracket2 = 1.0 + np.sum(v * v, axis=-1, keepdims=True)
        return v * bracket2 ** ((self.beta_friction - 2.0) / 2.0)

    def drift(self, x: np.ndarray, v: np.ndarray):
        """Deterministic part of (dX, dV); vectorized over leading axes."""
        return v, -self.potential.gradient(x) - self.friction(v)

    def em_step_many(self, x: np.ndarray, v: np.ndarray, dt: float, gen):
        """One (tamed) Euler-Maruyama step for an (n, d) ensemble block."""
        dx, dv = self.drift(x, v)
        if self.is_tamed:
            norm = np.sqrt(np.sum(dv * dv, axis=-1, keepdims=True))
            dv = dv / (1.0 + dt * norm)
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

    def equilibrium_sampler(self, rng, n: int) -> np.ndarray:
        from .equilibrium import sample_position_boltzmann

        if self.beta_friction != 2.0:
            raise NoEquilibriumError(
                "closed-form equilibrium requires linear friction (beta = 2)"
            )
        gen = rng.gen if hasattr(rng, "gen") else rng
        x = sample_position_boltzmann(self.potential, self.d, n, gen)
        v = gen.standard_normal((n, self.d))
        return np.hstack([x, v])

    def to_config(self) -> dict:
        return {
            "model": "kinetic_fokker_planck",
            "gamma_exp": self.gamma_exp,
            "beta_friction": self.beta_friction,
            "d": self.d,
        }
