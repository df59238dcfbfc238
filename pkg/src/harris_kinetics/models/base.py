"""Shared state types, potentials, and torus helpers for the kinetic models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import InvalidInputError

__all__ = ["PhaseState", "Potential", "wrap_torus", "torus_displacement"]


def wrap_torus(x: np.ndarray) -> np.ndarray:
    """Map positions onto the unit torus [0, 1)^d."""
    return np.mod(x, 1.0)


def torus_displacement(x: np.ndarray) -> np.ndarray:
    """Displacement from the torus cell center 1/2, valued in [-1/2, 1/2)."""
    return np.mod(np.asarray(x) + 0.5, 1.0) - 0.5


@dataclass
class PhaseState:
    """A single phase-space point (x, v) at time t.

    alive is False once a trajectory has been absorbed at a boundary; the
    coordinates then stop meaning anything and are kept only for bookkeeping.
    """

    x: np.ndarray
    v: np.ndarray
    t: float = 0.0
    alive: bool = True

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float)).copy()
        self.v = np.atleast_1d(np.asarray(self.v, dtype=float)).copy()
        if self.x.shape != self.v.shape or self.x.ndim != 1:
            raise InvalidInputError("x and v must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.v))):
            raise InvalidInputError("state coordinates must be finite")

    @property
    def d(self) -> int:
        return self.x.size

    def copy(self) -> "PhaseState":
        s = PhaseState(self.x.copy(), self.v.copy(), self.t)
        s.alive = self.alive
        return s


@dataclass(frozen=True)
class Potential:
    """Confining potential Phi on R^d.

    family "power" is Phi(x) = <x>^gamma_exp / gamma_exp with <x> = sqrt(1+|x|^2),
    "quadratic" is |x|^2 / 2, "none" is identically zero.
    """

    family: str = "none"
    gamma_exp: float = 2.0

    def __post_init__(self):
        if self.family not in ("power", "quadratic", "none"):
            raise InvalidInputError(f"unknown potential family {self.family!r}")
        if self.family == "power" and not self.gamma_exp > 0.0:
            raise InvalidInputError("gamma_exp must be positive")

    @property
    def is_zero(self) -> bool:
        return self.family == "none"

    @property
    def min_value(self) -> float:
        """Infimum of Phi, used for energy bounds."""
        if self.family == "power":
            return 1.0 / self.gamma_exp
        return 0.0

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        if self.family == "power":
            g = self.gamma_exp
            return (1.0 + r2) ** (g / 2.0) / g
        if self.family == "quadratic":
            return 0.5 * r2
        return np.zeros_like(r2)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.family == "power":
            r2 = np.sum(x * x, axis=-1, keepdims=True)
            return x * (1.0 + r2) ** (self.gamma_exp / 2.0 - 1.0)
        if self.family == "quadratic":
            return x.copy()
        return np.zeros_like(x)

    def value_torus(self, x: np.ndarray) -> np.ndarray:
        """Potential evaluated on the fundamental-domain displacement from 1/2."""
        return self.value(torus_displacement(x))

    def gradient_torus(self, x: np.ndarray) -> np.ndarray:
        return self.gradient(torus_displacement(x))

    def to_config(self) -> dict:
        cfg = {"family": self.family}
        if self.family == "power":
            cfg["gamma_exp"] = self.gamma_exp
        return cfg
