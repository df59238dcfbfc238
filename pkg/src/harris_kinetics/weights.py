"""Foster-Lyapunov weight functions for the model catalog.

Each weight is an evaluator phi(x, v) >= 1 on the model's phase space,
packaged with whatever analytic derivatives the confinement analysis needs
(space gradient for transport terms, velocity gradient and Laplacian for
diffusive terms). Weights without analytic derivatives fall back to finite
differences inside the generator evaluation.

Catalog tags follow the confinement regime of each model family: "R1" for
the unconfined / torus setting, "R2" for the exponentially confining
setting, "R3" for weak confinement with subgeometric decay. The exact
functional forms mirror the convergence theorems the package certifies;
free parameters (chi, eps, xi, k, ...) are caller-tunable with validated
defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError, InvalidWeightError
from .models.base import Potential
from .models.geometry import first_collision_time
from .models.run_tumble import RunTumble, psi_value

__all__ = [
    "WeightFn",
    "weight_catalog",
    "catalog_tags",
    "bgk_r2_drift_targets",
    "bgk_r2_hypothesis_constants",
]

_MIN_TOL = 1e-9


@dataclass(frozen=True)
class WeightFn:
    """Weight function phi >= 1 with optional analytic derivatives."""

    name: str
    description: str
    params: dict
    _value: Callable = field(repr=False)
    _grad_x: Optional[Callable] = field(default=None, repr=False)
    _grad_v: Optional[Callable] = field(default=None, repr=False)
    _lap_v: Optional[Callable] = field(default=None, repr=False)
    _transport: Optional[Callable] = field(default=None, repr=False)

    def value(self, x, v):
        """phi at (x, v); broadcasts over leading axes of (..., d) inputs."""
        return self._value(np.asarray(x, float), np.asarray(v, float))

    @property
    def has_gradients(self) -> bool:
        return self._grad_x is not None and self._grad_v is not None

    @property
    def has_velocity_laplacian(self) -> bool:
        return self._lap_v is not None

    def grad_x(self, x, v):
        if self._grad_x is None:
            raise InvalidInputError(f"weight {self.name!r} has no analytic grad_x")
        return self._grad_x(np.asarray(x, float), np.asarray(v, float))

    def grad_v(self, x, v):
        if self._grad_v is None:
            raise InvalidInputError(f"weight {self.name!r} has no analytic grad_v")
        return self._grad_v(np.asarray(x, float), np.asarray(v, float))

    def laplacian_v(self, x, v):
        if self._lap_v is None:
            raise InvalidInputError(f"weight {self.name!r} has no analytic lap_v")
        return self._lap_v(np.asarray(x, float), np.asarray(v, float))

    def transport_term(self, x, v):
        """v . grad_x phi, analytic where available."""
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        if self._transport is not None:
            return self._transport(x, v)
        if self._grad_x is not None:
            return np.sum(v * self._grad_x(x, v), axis=-1)
        raise InvalidInputError(f"weight {self.name!r} has no analytic transport term")

    @property
    def has_transport(self) -> bool:
        return self._transport is not None or self._grad_x is not None

    def assert_admissible(self, x, v):
        """Raise unless phi >= 1 (within tolerance) at every given point."""
        vals = np.atleast_1d(self.value(x, v))
        if not np.all(np.isfinite(vals)):
            raise InvalidWeightError(f"weight {self.name!r} is non-finite at a sample")
        worst = float(np.min(vals))
        if worst < 1.0 - _MIN_TOL:
            raise InvalidWeightError(
                f"weight {self.name!r} dips to {worst:.6g} < 1 at a sampled point"
            )


# ---------------------------------------------------------------------------
# shared pieces
# ---------------------------------------------------------------------------


def _sq(u):
    return np.sum(u * u, axis=-1)


def _bracket(x):
    return np.sqrt(1.0 + _sq(x))


def _energy(potential: Potential, x, v):
    return potential.value(x) + 0.5 * _sq(v)


def _constant_weight(dim: int) -> WeightFn:
    def value(x, v):
        return np.ones(np.broadcast(x[..., 0], v[..., 0]).shape)

    zeros = lambda x, v: np.zeros(np.broadcast(x, v).shape)
    return WeightFn(
        name="flat",
        description="constant weight (plain total variation distance)",
        params={"degenerate": True},
        _value=value,
        _grad_x=zeros,
        _grad_v=zeros,
        _lap_v=lambda x, v: np.zeros(np.broadcast(x[..., 0], v[..., 0]).shape),
    )


# ---------------------------------------------------------------------------
# BGK family: energy plus twisting terms
# ---------------------------------------------------------------------------


def _bgk_core(potential: Potential):
    def core(x, v):
        return _energy(potential, x, v) + 0.25 * np.sum(x * v, axis=-1) + 0.125 * _sq(x)

    def core_gx(x, v):
        return potential.gradient(x) + 0.25 * v + 0.25 * x

    def core_gv(x, v):
        return v + 0.25 * x

    return core, core_gx, core_gv


def _bgk_r2_weight(potential: Potential, d: int) -> WeightFn:
    core, core_gx, core_gv = _bgk_core(potential)
    return WeightFn(
        name="bgk_energy_cross",
        description="1 + energy + x.v/4 + |x|^2/8 for confined relaxation",
        params={"d": d, "potential": potential.to_config()},
        _value=lambda x, v: 1.0 + core(x, v),
        _grad_x=core_gx,
        _grad_v=core_gv,
        _lap_v=lambda x, v: np.full(np.broadcast(x[..., 0], v[..., 0]).shape, float(d)),
    )


def _bgk_r3_weight(potential: Potential, d: int, xi: float) -> WeightFn:
    if not 0.0 < xi < 1.0:
        raise InvalidInputError("xi must lie in (0, 1)")
    core, core_gx, core_gv = _bgk_core(potential)

    def value(x, v):
        return (1.0 + core(x, v)) ** xi

    def grad_x(x, v):
        base = (1.0 + core(x, v)) ** (xi - 1.0)
        return xi * base[..., None] * core_gx(x, v)

    def grad_v(x, v):
        base = (1.0 + core(x, v)) ** (xi - 1.0)
        return xi * base[..., None] * core_gv(x, v)

    def lap_v(x, v):
        b = 1.0 + core(x, v)
        gv = core_gv(x, v)
        return xi * (xi - 1.0) * b ** (xi - 2.0) * _sq(gv) + xi * b ** (
            xi - 1.0
        ) * float(d)

    return WeightFn(
        name="bgk_energy_cross_power",
        description="(1 + energy + cross terms)^xi for weak confinement",
        params={
            "d": d,
            "xi": xi,
            "v_power": xi,
            "potential": potential.to_config(),
        },
        _value=value,
        _grad_x=grad_x,
        _grad_v=grad_v,
        _lap_v=lap_v,
    )


def bgk_r2_drift_targets(alpha_h: float, beta_h: float, eta_h: float, d: int):
    """(zeta, D) certified for the confined-relaxation weight.

    Requires the potential to satisfy x . grad Phi >= alpha_h |x|^2 +
    beta_h Phi - eta_h with positive constants.
    """
    for name, val in (("alpha_h", alpha_h), ("beta_h", beta_h), ("eta_h", eta_h)):
        if not val > 0.0:
            raise InvalidInputError(f"{name} must be positive")
    zeta = min(alpha_h, beta_h, 1.0) / 4.0
    big_d = d / 2.0 + eta_h / 4.0
    return zeta, big_d


def bgk_r2_hypothesis_constants(potential: Potential, d: int):
    """Constants (alpha_h, beta_h, eta_h) for the confinement inequality.

    Exact for the quadratic well and for the power family with exponent 2;
    for stronger power exponents eta_h is found by a radial line search.
    Weak exponents (< 2) do not satisfy the inequality and raise.
    """
    if potential.is_zero:
        raise InvalidInputError("the confinement inequality needs a potential")
    if potential.family == "quadratic":
        return 0.5, 1.0, 1.0
    if potential.family == "power":
        g = potential.gamma_exp
        if g == 2.0:
            return 0.5, 1.0, 1.0
        if g < 2.0:
            raise InvalidInputError(
                "power exponent < 2 gives only weak confinement; "
                "use the subgeometric regime"
            )
        # x.grad Phi = |x|^2 <x>^(g-2); find eta = max_r slack at (1/2, 1/2)
        alpha_h, beta_h = 0.5, 0.5
        r = np.linspace(0.0, 50.0, 200001)
        br = np.sqrt(1.0 + r * r)
        slack = alpha_h * r * r + beta_h * br**g / g - r * r * br ** (g - 2.0)
        return alpha_h, beta_h, float(np.max(slack)) + 1e-9
    raise InvalidInputError(f"unsupported potential family {potential.family!r}")


# ---------------------------------------------------------------------------
# linear Boltzmann family
# ---------------------------------------------------------------------------


def _boltzmann_r1_weight(potential: Potential, d: int) -> WeightFn:
    return WeightFn(
        name="boltzmann_energy",
        description="1 + energy, for torus scattering",
        params={"d": d, "potential": potential.to_config()},
        _value=lambda x, v: 1.0 + _energy(potential, x, v),
        _grad_x=lambda x, v: np.broadcast_arrays(potential.gradient(x), v)[0],
        _grad_v=lambda x, v: v,
        _lap_v=lambda x, v: np.full(np.broadcast(x[..., 0], v[..., 0]).shape, float(d)),
    )


def _boltzmann_r2_weight(potential: Potential, d: int) -> WeightFn:
    return WeightFn(
        name="boltzmann_energy_position",
        description="1 + energy + |x|^2 for strongly confined scattering",
        params={"d": d, "potential": potential.to_config()},
        _value=lambda x, v: 1.0 + _energy(potential, x, v) + _sq(x),
        _grad_x=lambda x, v: potential.gradient(x) + 2.0 * x,
        _grad_v=lambda x, v: v,
        _lap_v=lambda x, v: np.full(np.broadcast(x[..., 0], v[..., 0]).shape, float(d)),
    )


def _boltzmann_r3_weight(
    potential: Potential, d: int, alpha_w: float, beta_w: float, xi: float
) -> WeightFn:
    if not (alpha_w > 0.0 and beta_w > 0.0):
        raise InvalidInputError("alpha_w and beta_w must be positive")
    if not 4.0 * alpha_w**2 < beta_w:
        raise InvalidInputError("need 4 alpha_w^2 < beta_w")
    if not 0.0 < xi < 1.0:
        raise InvalidInputError("xi must lie in (0, 1)")

    def value(x, v):
        return (
            _energy(potential, x, v)
            + alpha_w * np.sum(x * v, axis=-1) / _bracket(x)
            + beta_w * _bracket(x)
        )

    def grad_x(x, v):
        br = _bracket(x)[..., None]
        xv = np.sum(x * v, axis=-1, keepdims=True)
        return (
            potential.gradient(x)
            + alpha_w * (v / br - x * xv / br**3)
            + beta_w * x / br
        )

    def grad_v(x, v):
        br = _bracket(x)[..., None]
        return v + alpha_w * x / br

    return WeightFn(
        name="boltzmann_tilted_bracket",
        description="energy + alpha x.v/<x> + beta <x> for weak confinement",
        params={
            "d": d,
            "alpha_w": alpha_w,
            "beta_w": beta_w,
            "xi": xi,
            "v_power": xi / (1.0 + xi),
            "potential": potential.to_config(),
        },
        _value=value,
        _grad_x=grad_x,
        _grad_v=grad_v,
        _lap_v=lambda x, v: np.full(np.broadcast(x[..., 0], v[..., 0]).shape, float(d)),
    )


# ---------------------------------------------------------------------------
# kinetic Fokker-Planck family
# ---------------------------------------------------------------------------


def _kfp_r2_weight(potential: Potential, d: int, chi: float, eps: float) -> WeightFn:
    if not chi > 0.0:
        raise InvalidInputError("chi must be positive")
    if not eps > 0.0:
        raise InvalidInputError("eps must be positive")
    if potential.min_value - eps**2 / 4.0 < 0.0:
        raise InvalidInputError(
            "eps too large: the exponent |v|^2 + Phi + eps x.v/<x> must stay >= 0"
        )

    def exponent(x, v):
        return _sq(v) + potential.value(x) + eps * np.sum(x * v, axis=-1) / _bracket(x)

    def value(x, v):
        return np.exp(chi * exponent(x, v))

    def exp_gx(x, v):
        br = _bracket(x)[..., None]
        xv = np.sum(x * v, axis=-1, keepdims=True)
        return potential.gradient(x) + eps * (v / br - x * xv / br**3)

    def exp_gv(x, v):
        return 2.0 * v + eps * x / _bracket(x)[..., None]

    def grad_x(x, v):
        return chi * value(x, v)[..., None] * exp_gx(x, v)

    def grad_v(x, v):
        return chi * value(x, v)[..., None] * exp_gv(x, v)

    def lap_v(x, v):
        w = value(x, v)
        gv = exp_gv(x, v)
        return w * (chi * 2.0 * d + chi**2 * _sq(gv))

    return WeightFn(
        name="kfp_twisted_exponential",
        description="exp(chi (|v|^2 + Phi + eps x.v/<x>)) for linear friction",
        params={"d": d, "chi": chi, "eps": eps, "potential": potential.to_config()},
        _value=value,
        _grad_x=grad_x,
        _grad_v=grad_v,
        _lap_v=lap_v,
    )


def _kfp_r3_weight(d: int, k: float, gamma_exp: float) -> WeightFn:
    if not k >= 1.0:
        raise InvalidInputError("k must be >= 1")
    if not 0.0 < gamma_exp < 1.0:
        raise InvalidInputError("the subgeometric regime needs gamma_exp in (0, 1)")

    def phi2(x, v):
        return _sq(x) + _sq(v)

    def value(x, v):
        return (1.0 + phi2(x, v)) ** k

    def grad_x(x, v):
        return 2.0 * k * (1.0 + phi2(x, v))[..., None] ** (k - 1.0) * x

    def grad_v(x, v):
        return 2.0 * k * (1.0 + phi2(x, v))[..., None] ** (k - 1.0) * v

    def lap_v(x, v):
        b = 1.0 + phi2(x, v)
        return 4.0 * k * (k - 1.0) * b ** (k - 2.0) * _sq(v) + 2.0 * k * d * b ** (
            k - 1.0
        )

    return WeightFn(
        name="kfp_polynomial",
        description="(1 + |x|^2 + |v|^2)^k for weak confinement",
        params={
            "d": d,
            "k": k,
            "gamma_exp": gamma_exp,
            "decay_exponent": k / (1.0 - gamma_exp / 2.0),
        },
        _value=value,
        _grad_x=grad_x,
        _grad_v=grad_v,
        _lap_v=lap_v,
    )


# ---------------------------------------------------------------------------
# Knudsen flight-time weights
# ---------------------------------------------------------------------------


def _flight_times(geometry, x, v):
    x = np.atleast_2d(np.asarray(x, float))
    v = np.atleast_2d(np.asarray(v, float))
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = first_collision_time(geometry, x[i], v[i])
    return out


def _knudsen_cl_weight(geometry, d: int, eps: float) -> WeightFn:
    if not 0.0 <= eps < 0.5:
        raise InvalidInputError("eps must lie in [0, 1/2)")

    def value(x, v):
        x2 = np.atleast_2d(np.asarray(x, float))
        v2 = np.atleast_2d(np.asarray(v, float))
        tau = _flight_times(geometry, x2, v2)
        speed = np.sqrt(np.sum(v2 * v2, axis=-1))
        out = (1.0 + tau + np.sqrt(speed)) ** (d - eps)
        return out.reshape(np.shape(np.asarray(x, float))[:-1])

    def transport(x, v):
        # v . grad_x tau = -1 along free flight
        x2 = np.atleast_2d(np.asarray(x, float))
        v2 = np.atleast_2d(np.asarray(v, float))
        tau = _flight_times(geometry, x2, v2)
        speed = np.sqrt(np.sum(v2 * v2, axis=-1))
        out = -(d - eps) * (1.0 + tau + np.sqrt(speed)) ** (d - eps - 1.0)
        return out.reshape(np.shape(np.asarray(x, float))[:-1])

    return WeightFn(
        name="knudsen_flight_power",
        description="(1 + time-to-wall + sqrt|v|)^(d-eps) for partially "
        "accommodating walls",
        params={"d": d, "eps": eps, "geometry": geometry.to_config()},
        _value=value,
        _transport=transport,
    )


def _knudsen_maxwell_weight(geometry, d: int, alpha1: float) -> WeightFn:
    if not 0.0 < alpha1 < 1.0:
        raise InvalidInputError("alpha1 must lie in (0, 1)")
    diam = geometry.diameter
    q = 1.6 * d / (d + 1.0)

    def base(x, v):
        x2 = np.atleast_2d(np.asarray(x, float))
        v2 = np.atleast_2d(np.asarray(v, float))
        tau_back = _flight_times(geometry, x2, -v2)
        speed = np.sqrt(np.sum(v2 * v2, axis=-1))
        with np.errstate(divide="ignore"):
            b = math.e**2 + diam / (alpha1 * speed) - tau_back
        return b.reshape(np.shape(np.asarray(x, float))[:-1])

    def value(x, v):
        b = base(x, v)
        return b**d * np.log(b) ** (-q)

    def transport(x, v):
        # time derivative of the base along free flight is -1
        b = base(x, v)
        return -(b ** (d - 1.0) * np.log(b) ** (-q) * (d - q / np.log(b)))

    return WeightFn(
        name="knudsen_flight_log",
        description="log-corrected backward-flight weight for Maxwell walls",
        params={
            "d": d,
            "alpha1": alpha1,
            "log_power": q,
            "geometry": geometry.to_config(),
        },
        _value=value,
        _transport=transport,
    )


# ---------------------------------------------------------------------------
# run-and-tumble weight
# ---------------------------------------------------------------------------


def _runtumble_weight(
    model: RunTumble, gamma: Optional[float], r_big: float
) -> WeightFn:
    consts = model.drift_constants(r_big=r_big)
    beta = consts["beta"]
    if gamma is None:
        gamma = consts["gamma"]
    if not 0.0 < gamma <= consts["gamma"] + 1e-12:
        raise InvalidInputError(
            f"gamma must lie in (0, {consts['gamma']:.6g}] for this model"
        )
    signal = model.signal
    psi = model.psi
    # worst case of the prefactor is 1/2; the exponential attains its
    # minimum at x = 0, so this scale pins min phi at exactly 1
    scale = 2.0 * math.exp(gamma * (signal.c0 - signal.alpha))

    def pieces(x, v):
        grad = signal.gradient(x)
        m = np.sum(v * grad, axis=-1)
        prefactor = 1.0 - gamma * m - beta * gamma * psi_value(psi, m) * m
        return m, prefactor

    def value(x, v):
        _, prefactor = pieces(x, v)
        return scale * prefactor * np.exp(-gamma * signal.value(x))

    def grad_x(x, v):
        x = np.asarray(x, float)
        v = np.asarray(v, float)
        grad = signal.gradient(x)
        m = np.sum(v * grad, axis=-1)
        # Hess(M) v for M = c0 - alpha <x>
        br = _bracket(x)[..., None]
        xv = np.sum(x * v, axis=-1, keepdims=True)
        hess_v = -signal.alpha * (v / br - x * xv / br**3)
        psi_m = psi_value(psi, m)
        if psi == "tanh":
            dpsim = (1.0 - psi_m**2) * m + psi_m  # d/dm [psi(m) m]
        else:
            dpsim = np.sign(m)
        gprime = -gamma - beta * gamma * dpsim
        prefactor = 1.0 - gamma * m - beta * gamma * psi_m * m
        expo = np.exp(-gamma * signal.value(x))
        out = scale * expo[..., None] * (
            gprime[..., None] * hess_v - gamma * prefactor[..., None] * grad
        )
        return out

    return WeightFn(
        name="runtumble_biased_exponential",
        description="(1 - gamma m - beta gamma psi(m) m) exp(-gamma M), "
        "rescaled to stay >= 1",
        params={
            "beta": beta,
            "gamma": gamma,
            "scale": scale,
            "psi": psi,
            "signal": signal.to_config(),
            **{k: consts[k] for k in ("lambda_tilde", "k", "xi", "c_tilde", "r_big")},
        },
        _value=value,
        _grad_x=grad_x,
    )


# ---------------------------------------------------------------------------
# FitzHugh-Nagumo weight
# ---------------------------------------------------------------------------


def _fhn_weight(chi: float, a: float, b: float, c: float) -> WeightFn:
    if not chi > 0.0:
        raise InvalidInputError("chi must be positive")
    gamma = 2.0 * chi

    def value(x, v):
        return np.exp(chi * (_sq(x) + _sq(v)))

    def grad_x(x, v):
        return 2.0 * chi * value(x, v)[..., None] * x

    def grad_v(x, v):
        return 2.0 * chi * value(x, v)[..., None] * v

    def lap_v(x, v):
        return value(x, v) * (2.0 * chi + 4.0 * chi**2 * _sq(v))

    return WeightFn(
        name="fhn_gaussian_growth",
        description="exp(chi (|x|^2 + |v|^2)) for the neuron dynamics",
        params={
            "chi": chi,
            "gamma": gamma,
            "confining": gamma**2 > b * c,
            "a": a,
            "b": b,
            "c": c,
        },
        _value=value,
        _grad_x=grad_x,
        _grad_v=grad_v,
        _lap_v=lap_v,
    )


# ---------------------------------------------------------------------------
# catalog front door
# ---------------------------------------------------------------------------

_TAGS = {
    "linear_bgk": ("R1", "R2", "R3"),
    "linear_boltzmann": ("R1", "R2", "R3"),
    "kinetic_fokker_planck": ("R2", "R3"),
    "knudsen": ("R1", "R2"),
    "degenerate_boltzmann": ("R1", "R2"),
    "run_tumble": ("R1",),
    "fitzhugh_nagumo": ("R1",),
}


def catalog_tags(model) -> tuple:
    kind = getattr(model, "kind", None)
    if kind not in _TAGS:
        raise InvalidInputError(f"no weights catalogued for model kind {kind!r}")
    return _TAGS[kind]


def weight_catalog(model, regime: str, **params) -> WeightFn:
    """Return the catalogued weight for (model, regime tag).

    Free parameters: xi (power regimes), chi/eps (exponential regimes),
    k (polynomial regime), alpha_w/beta_w (tilted-bracket weight),
    alpha1 (Maxwell-wall weight), gamma/r_big (run-and-tumble weight).
    """
    valid = catalog_tags(model)
    if regime not in valid:
        raise InvalidInputError(
            f"unknown regime {regime!r} for {model.kind}; valid tags: {valid}"
        )
    kind = model.kind
    if kind == "linear_bgk":
        if regime == "R1":
            return _constant_weight(model.d)
        if regime == "R2":
            return _bgk_r2_weight(model.potential, model.d)
        return _bgk_r3_weight(model.potential, model.d, params.get("xi", 0.5))
    if kind == "linear_boltzmann":
        if regime == "R1":
            return _boltzmann_r1_weight(model.potential, model.d)
        if regime == "R2":
            return _boltzmann_r2_weight(model.potential, model.d)
        return _boltzmann_r3_weight(
            model.potential,
            model.d,
            params.get("alpha_w", 0.5),
            params.get("beta_w", 1.5),
            params.get("xi", 0.5),
        )
    if kind == "kinetic_fokker_planck":
        if regime == "R2":
            return _kfp_r2_weight(
                model.potential, model.d, params.get("chi", 0.05), params.get("eps", 0.1)
            )
        return _kfp_r3_weight(model.d, params.get("k", 1.0), model.gamma_exp)
    if kind == "knudsen":
        if regime == "R1":
            return _knudsen_maxwell_weight(
                model.geometry, model.d, params.get("alpha1", 0.5)
            )
        return _knudsen_cl_weight(model.geometry, model.d, params.get("eps", 0.25))
    if kind == "degenerate_boltzmann":
        return _constant_weight(model.d)
    if kind == "run_tumble":
        return _runtumble_weight(
            model, params.get("gamma"), params.get("r_big", 1.0)
        )
    if kind == "fitzhugh_nagumo":
        return _fhn_weight(params.get("chi", 0.6), model.a, model.b, model.c)
    raise InvalidInputError(f"no weights catalogued for model kind {kind!r}")
