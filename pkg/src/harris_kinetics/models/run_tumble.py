"""Velocity-jump chemotaxis model.

Runs are straight flights with velocity in the centered ball V = B(0, R0)
normalized by default to |V| = 1. Tumbles happen at the state-dependent
rate lambda(m) = 1 - chi * psi(m) with m = v . grad M(x), and redraw the
velocity uniformly on V. The shipped signal family is M(x) = c0 - alpha <x>
with <x> = sqrt(1 + |x|^2), which keeps |grad M| bounded by alpha and
bounded away from zero outside the unit ball.

Jump times are exact by thinning against the constant bound 1 + chi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln

from ..errors import InvalidInputError, NoEquilibriumError
from .base import PhaseState

__all__ = ["ChemoSignal", "RunTumble", "unit_mass_ball_radius", "psi_value"]


def unit_mass_ball_radius(d: int) -> float:
    """Radius R0 with |B(0, R0)| = 1 in dimension d."""
    return math.exp(gammaln(d / 2.0 + 1.0) / d) / math.sqrt(math.pi)


def psi_value(psi: str, m):
    """Tumbling modulation: odd, increasing, bounded by 1."""
    m = np.asarray(m, dtype=float)
    if psi == "sign":
        out = np.sign(m)
    elif psi == "tanh":
        out = np.tanh(m)
    else:
        raise InvalidInputError(f"unknown psi {psi!r}; expected 'sign' or 'tanh'")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ChemoSignal:
    """Log chemoattractant concentration M(x) = c0 - alpha * sqrt(1 + |x|^2)."""

    alpha: float = 1.0
    c0: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise InvalidInputError("alpha must be positive")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        bracket = np.sqrt(1.0 + np.sum(x * x, axis=-1))
        return self.c0 - self.alpha * bracket

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        bracket = np.sqrt(1.0 + np.sum(x * x, axis=-1, keepdims=True))
        return -self.alpha * x / bracket

    def hessian(self, x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        bracket = math.sqrt(1.0 + float(np.dot(x, x)))
        outer = np.outer(x, x)
        return -self.alpha * (np.eye(d) / bracket - outer / bracket**3)

    @property
    def grad_sup(self) -> float:
        # |grad M| = alpha |x| / <x> increases to alpha
        return self.alpha

    def grad_lower(self, r_big: float) -> float:
        """Lower bound on |grad M| outside the ball of radius r_big."""
        if not r_big > 0.0:
            raise InvalidInputError("r_big must be positive")
        return self.alpha * r_big / math.sqrt(1.0 + r_big**2)

    def to_config(self) -> dict:
        return {"family": "linear_decay", "alpha": self.alpha, "c0": self.c0}


def _ball_moment_abs(d: int, r0: float) -> float:
    # E |v . e| for v uniform on B(0, r0): E r * E |omega_1|
    mean_r = d * r0 / (d + 1.0)
    mean_abs_dir = math.exp(gammaln(d / 2.0) - gammaln((d + 1.0) / 2.0)) / math.sqrt(
        math.pi
    )
    return mean_r * mean_abs_dir


@dataclass(frozen=True)
class RunTumble:
    """Run-and-tumble process with uniform tumbling kernel on B(0, R0)."""

    chi: float = 0.5
    psi: str = "tanh"
    signal: ChemoSignal = field(default_factory=ChemoSignal)
    d: int = 1
    r0: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.chi < 1.0:
            raise InvalidInputError("chi must lie in (0, 1)")
        psi_value(self.psi, 0.0)
        if self.d < 1:
            raise InvalidInputError("d must be >= 1")
        if self.r0 is None:
            object.__setattr__(self, "r0", unit_mass_ball_radius(self.d))
        if not self.r0 > 0.0:
            raise InvalidInputError("r0 must be positive")

    @property
    def kind(self) -> str:
        return "run_tumble"

    @property
    def rate_sup(self) -> float:
        return 1.0 + self.chi

    def tumble_rate(self, x, v) -> float:
        m = float(np.dot(np.asarray(v, float), self.signal.gradient(x)))
        return 1.0 - self.chi * psi_value(self.psi, m)

    def draw_velocity(self, gen) -> np.ndarray:
        from .equilibrium import uniform_ball

        return uniform_ball(self.d, self.r0, 1, gen)[0]

    def step(self, state: PhaseState, dt: float, rng) -> PhaseState:
        if dt < 0.0:
            raise InvalidInputError("dt must be nonnegative")
        gen = rng.gen if hasattr(rng, "gen") else rng
        out = state.copy()
        x, v = out.x, out.v
        remaining = float(dt)
        bound = self.rate_sup
        while remaining > 0.0:
            gap = gen.exponential() / bound
            if gap >= remaining:
                x = x + v * remaining
                break
            x = x + v * gap
            remaining -= gap
            if gen.random() * bound < self.tumble_rate(x, v):
                v = self.draw_velocity(gen)
        out.x, out.v, out.t = x, v, out.t + dt
        return out

    def equilibrium_sampler(self, rng, n: int):
        raise NoEquilibriumError(
            "the stationary state of the run-and-tumble process has no closed form"
        )

    # -- constants entering the confinement analysis -----------------------

    def signal_moment_constants(self) -> dict:
        """Moments of the uniform tumbling law used in the drift constants.

        c2 = int_V (v.e)^2 dv / |V| and c1 = int_V |v.e| dv / |V| for a unit
        direction e.
        """
        return {
            "c2": self.r0**2 / (self.d + 2.0),
            "c1": _ball_moment_abs(self.d, self.r0),
        }

    def drift_constants(self, r_big: float = 1.0) -> dict:
        """Weight parameters (beta, gamma) plus the pieces they come from.

        beta = chi / (1 + chi). gamma is the minimum of a confinement-driven
        bound lam_tilde * chi * (1 - chi) * xi / (8 (1 + chi)) and a
        positivity-driven bound (1 + chi) / (2 (2 + chi) R0 ||grad M||_inf),
        where lam_tilde, k certify int_V psi(m') m' dv' >= lam_tilde
        |grad M|^k and xi patches the k != 2 cases using the far-field
        gradient floor c_tilde = |grad M| lower bound for |x| > r_big.
        """
        grad_sup = self.signal.grad_sup
        c_tilde = self.signal.grad_lower(r_big)
        moments = self.signal_moment_constants()
        if self.psi == "tanh":
            # tanh(s) s >= (tanh(m0)/m0) s^2 on |s| <= m0
            m0 = self.r0 * grad_sup
            k = 2
            lam_tilde = moments["c2"] * math.tanh(m0) / m0
        else:
            k = 1
            lam_tilde = moments["c1"]
        if k < 2:
            xi = c_tilde ** (k - 2)
        elif k == 2:
            xi = 1.0
        else:
            xi = grad_sup ** (k - 2)
        chi = self.chi
        gamma_confine = lam_tilde * chi * (1.0 - chi) * xi / (8.0 * (1.0 + chi))
        gamma_positive = (1.0 + chi) / (2.0 * (2.0 + chi) * self.r0 * grad_sup)
        return {
            "beta": chi / (1.0 + chi),
            "gamma": min(gamma_confine, gamma_positive),
            "gamma_confine": gamma_confine,
            "gamma_positive": gamma_positive,
            "lambda_tilde": lam_tilde,
            "k": k,
            "xi": xi,
            "c_tilde": c_tilde,
            "r_big": r_big,
            "grad_sup": grad_sup,
        }

    def to_config(self) -> dict:
        return {
            "model": "run_tumble",
            "chi": self.chi,
            "psi": self.psi,
            "signal": self.signal.to_config(),
            "d": self.d,
            "r0": self.r0,
        }
