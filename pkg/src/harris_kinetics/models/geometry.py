"""Bounded flight domains and exact ray-boundary intersection times."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError

__all__ = ["Interval", "Disk", "Box", "first_collision_time"]

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    """The slab (0, 1) in one dimension."""

    kind: str = "interval"

    @property
    def d(self) -> int:
        return 1

    @property
    def diameter(self) -> float:
        return 1.0

    def contains(self, x: np.ndarray) -> bool:
        return bool(0.0 <= x[0] <= 1.0)

    def on_boundary(self, x: np.ndarray) -> bool:
        return abs(x[0]) <= _EDGE_TOL or abs(x[0] - 1.0) <= _EDGE_TOL

    def outward_normal(self, x: np.ndarray) -> np.ndarray:
        return np.array([1.0]) if x[0] >= 0.5 else np.array([-1.0])

    def exit_time(self, x: np.ndarray, v: np.ndarray) -> float:
        vx = v[0]
        if vx > 0.0:
            return (1.0 - x[0]) / vx
        if vx < 0.0:
            return x[0] / -vx
        return math.inf

    def to_config(self) -> dict:
        return {"kind": "interval"}


@dataclass(frozen=True)
class Disk:
    """Disk of given radius centered at the origin (d = 2)."""

    radius: float = 1.0
    kind: str = "disk"

    def __post_init__(self):
        if not self.radius > 0.0:
            raise InvalidInputError("disk radius must be positive")

    @property
    def d(self) -> int:
        return 2

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.dot(x, x) <= self.radius**2 * (1.0 + 1e-12))

    def on_boundary(self, x: np.ndarray) -> bool:
        return abs(math.sqrt(float(np.dot(x, x))) - self.radius) <= _EDGE_TOL * max(
            1.0, self.radius
        )

    def outward_normal(self, x: np.ndarray) -> np.ndarray:
        r = math.sqrt(float(np.dot(x, x)))
        return np.asarray(x) / r

    def exit_time(self, x: np.ndarray, v: np.ndarray) -> float:
        v2 = float(np.dot(v, v))
        if v2 == 0.0:
            return math.inf
        xv = float(np.dot(x, v))
        disc = xv * xv + v2 * (self.radius**2 - float(np.dot(x, x)))
        if disc <= 0.0:
            return 0.0
        t = (-xv + math.sqrt(disc)) / v2
        return max(t, 0.0)

    def to_config(self) -> dict:
        return {"kind": "disk", "radius": self.radius}


@dataclass(frozen=True)
class Box:
    """Unit box [0, 1]^d for d in {2, 3}."""

    d_spatial: int = 2
    kind: str = "box"

    def __post_init__(self):
        if self.d_spatial not in (2, 3):
            raise InvalidInputError("box supports d in {2, 3}")

    @property
    def d(self) -> int:
        return self.d_spatial

    @property
    def diameter(self) -> float:
        return math.sqrt(self.d_spatial)

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= 0.0) and np.all(x <= 1.0))

    def on_boundary(self, x: np.ndarray) -> bool:
        return bool(np.any(np.abs(x) <= _EDGE_TOL) or np.any(np.abs(x - 1.0) <= _EDGE_TOL))

    def outward_normal(self, x: np.ndarray) -> np.ndarray:
        n = np.zeros_like(x)
        # face with the smallest clearance wins
        lo = np.abs(x)
        hi = np.abs(x - 1.0)
        i_lo, i_hi = int(np.argmin(lo)), int(np.argmin(hi))
        if lo[i_lo] <= hi[i_hi]:
            n[i_lo] = -1.0
        else:
            n[i_hi] = 1.0
        return n

    def exit_time(self, x: np.ndarray, v: np.ndarray) -> float:
        t = math.inf
        for i in range(x.size):
            if v[i] > 0.0:
                t = min(t, (1.0 - x[i]) / v[i])
            elif v[i] < 0.0:
                t = min(t, x[i] / -v[i])
        return max(t, 0.0)

    def to_config(self) -> dict:
        return {"kind": "box", "d": self.d_spatial}


def first_collision_time(geometry, x: np.ndarray, v: np.ndarray) -> float:
    """Time for the free flight x + t v to reach the boundary of the domain.

    Returns 0.0 for a boundary state that is outgoing or grazing, and +inf for
    v = 0 in the interior (and for interior grazing rays that never land).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if x.size != geometry.d or v.size != geometry.d:
        raise InvalidInputError(f"state must have dimension {geometry.d}")
    if not geometry.contains(x):
        raise InvalidInputError("position lies outside the domain")
    if geometry.on_boundary(x):
        n = geometry.outward_normal(x)
        if float(np.dot(v, n)) >= 0.0:
            return 0.0
    if float(np.dot(v, v)) == 0.0:
        return math.inf
    return geometry.exit_time(x, v)
