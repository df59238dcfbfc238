"""Pointwise generator evaluation against hand-derived closed forms.

Each model family is probed with a quadratic observable whose image under
the generator can be written down explicitly (jump averages of 1 + |v|^2
reduce to second moments of the post-jump law). The flat weight must be
annihilated by every family, and sampling the generator over a model's
equilibrium law must average to zero.
"""

import numpy as np
import pytest

from harris_kinetics.config import model_by_name
from harris_kinetics.errors import (
    InvalidInputError,
    InvalidWeightError,
    UnsupportedModelError,
)
from harris_kinetics.models.base import PhaseState
from harris_kinetics.models.equilibrium import equilibrium_sampler
from harris_kinetics.models.generator import generator_apply, generator_apply_many
from harris_kinetics.rng import RngStream
from harris_kinetics.weights import WeightFn, weight_catalog

CLOSED_FORM_TOL = 1e-8
QUAD_TOL = 5e-8

CATALOG = [
    "torus_bgk",
    "linear_bgk_r2",
    "linear_boltzmann_torus",
    "kfp_quadratic",
    "degenerate_strip",
    "runtumble_default",
    "fhn_111",
    "knudsen_disk_diffuse",
]


def _constant_weight():
    ones = lambda x, v: np.ones(np.broadcast(x[..., 0], v[..., 0]).shape)
    zeros_vec = lambda x, v: np.zeros(np.broadcast(x, v).shape)
    zeros = lambda x, v: np.zeros(np.broadcast(x[..., 0], v[..., 0]).shape)
    return WeightFn(
        name="const",
        description="constant test weight",
        params={},
        _value=ones,
        _grad_x=zeros_vec,
        _grad_v=zeros_vec,
        _lap_v=zeros,
    )


def _speed_square_weight():
    """phi(x, v) = 1 + |v|^2 with analytic derivatives."""
    return WeightFn(
        name="speed_sq",
        description="1 + |v|^2",
        params={},
        _value=lambda x, v: 1.0 + np.sum(v * v, axis=-1),
        _grad_x=lambda x, v: np.zeros(np.broadcast(x, v).shape),
        _grad_v=lambda x, v: 2.0 * (v + 0.0 * x),
        _lap_v=lambda x, v: np.full(
            np.broadcast(x[..., 0], v[..., 0]).shape, 2.0 * v.shape[-1]
        ),
    )


def _states(model, n=6, seed=3):
    gen = RngStream(seed, 0).gen
    d = model.d
    if model.kind == "knudsen":
        ang = 2.0 * np.pi * gen.random(n)
        r = 0.9 * np.sqrt(gen.random(n))
        x = r[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])
        return x, gen.standard_normal((n, d))
    if getattr(model, "domain", "whole_space") == "torus":
        x = gen.random((n, d))
    else:
        x = 0.8 * gen.standard_normal((n, d))
    v = 0.9 * gen.standard_normal((n, d))
    return x, v


# ---------------------------------------------------------------------------
# the flat weight is in every kernel
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", CATALOG)
def test_flat_weight_is_annihilated(name):
    model = model_by_name(name)
    x, v = _states(model, n=4)
    out = generator_apply_many(model, _constant_weight(), x, v)
    assert np.all(np.abs(out) < QUAD_TOL)


# ---------------------------------------------------------------------------
# quadratic observable, closed forms per family
# ---------------------------------------------------------------------------


def test_torus_bgk_quadratic_observable():
    # free transport contributes nothing to a position independent weight;
    # the Maxwellian refresh of 1 + v^2 relaxes the second moment to 1
    model = model_by_name("torus_bgk")
    x, v = _states(model)
    out = generator_apply_many(model, _speed_square_weight(), x, v)
    expected = model.jump_rate * (1.0 - v[:, 0] ** 2)
    np.testing.assert_allclose(out, expected, atol=CLOSED_FORM_TOL)


def test_confined_bgk_quadratic_observable():
    # quadratic well: grad Phi = x, so the streaming term is -2 x v
    model = model_by_name("linear_bgk_r2")
    x, v = _states(model)
    out = generator_apply_many(model, _speed_square_weight(), x, v)
    expected = (1.0 - v[:, 0] ** 2) - 2.0 * x[:, 0] * v[:, 0]
    np.testing.assert_allclose(out, expected, atol=CLOSED_FORM_TOL)


def test_kfp_quadratic_observable():
    # L(1 + v^2) = -2 v (x + v) + 2 for the quadratic well with linear friction
    model = model_by_name("kfp_quadratic")
    x, v = _states(model)
    out = generator_apply_many(model, _speed_square_weight(), x, v)
    expected = 2.0 - 2.0 * v[:, 0] * (x[:, 0] + v[:, 0])
    np.testing.assert_allclose(out, expected, atol=CLOSED_FORM_TOL)


def test_boltzmann_maxwell_kernel_halves_refresh():
    # gamma = 0 makes the collision rate exactly 1; each collision keeps one
    # of {v, w}, so the jump part of 1 + v^2 is (E_M[1 + w^2] - (1 + v^2))/2
    model = model_by_name("linear_boltzmann_torus")
    assert model.gamma_hard == 0.0
    x, v = _states(model, n=4)
    out = generator_apply_many(model, _speed_square_weight(), x, v)
    expected = 0.5 * (1.0 - v[:, 0] ** 2)
    np.testing.assert_allclose(out, expected, atol=QUAD_TOL)


def test_degenerate_scatter_plateau_and_dead_zone():
    # inside the plateau the scatter rate is exactly 1 and the uniform
    # post-jump law on [-1, 1] has second moment 1/3; outside the strip the
    # rate vanishes and a position independent weight is frozen
    model = model_by_name("degenerate_strip")
    v = np.array([[0.4], [-0.7], [0.05]])
    x_active = np.full((3, 1), 0.5)
    out = generator_apply_many(model, _speed_square_weight(), x_active, v)
    np.testing.assert_allclose(out, 1.0 / 3.0 - v[:, 0] ** 2, atol=CLOSED_FORM_TOL)

    x_dead = np.full((3, 1), 0.1)
    out = generator_apply_many(model, _speed_square_weight(), x_dead, v)
    np.testing.assert_allclose(out, 0.0, atol=CLOSED_FORM_TOL)


def test_runtumble_unbiased_rate_at_rest():
    # v = 0 kills both the transport term and the tumble bias, leaving the
    # uniform-ball refresh with second moment r0^2 / 3
    model = model_by_name("runtumble_default")
    x = np.array([[0.2], [-1.4]])
    v = np.zeros((2, 1))
    out = generator_apply_many(model, _speed_square_weight(), x, v)
    expected = model.r0**2 / 3.0
    np.testing.assert_allclose(out, expected, atol=CLOSED_FORM_TOL)


def test_fhn_drift_assembly():
    # hypoelliptic diffusion: L(1 + v^2) = 2 v b(x, v) + 2 with b the
    # velocity drift; checks the drift wiring and the unit Laplacian
    model = model_by_name("fhn_111")
    x, v = _states(model)
    dx, dv = model.drift(x, v)
    out = generator_apply_many(model, _speed_square_weight(), x, v)
    expected = 2.0 * v[:, 0] * dv[:, 0] + 2.0
    np.testing.assert_allclose(out, expected, rtol=1e-6, atol=1e-7)


def test_knudsen_free_flight_transport():
    # between wall hits the gas streams freely: L phi = v . grad_x phi
    model = model_by_name("knudsen_disk_diffuse")
    phi = WeightFn(
        name="pos_sq",
        description="1 + |x|^2",
        params={},
        _value=lambda x, v: 1.0 + np.sum(x * x, axis=-1),
        _grad_x=lambda x, v: 2.0 * (x + 0.0 * v),
        _grad_v=lambda x, v: np.zeros(np.broadcast(x, v).shape),
    )
    x, v = _states(model)
    out = generator_apply_many(model, phi, x, v)
    np.testing.assert_allclose(out, 2.0 * np.sum(x * v, axis=-1), atol=CLOSED_FORM_TOL)


def test_knudsen_finite_difference_fallback_matches_flow():
    # same evaluation through the no-derivative code path
    model = model_by_name("knudsen_disk_diffuse")
    plain = WeightFn(
        name="pos_sq_fd",
        description="1 + |x|^2 without derivatives",
        params={},
        _value=lambda x, v: 1.0 + np.sum(x * x, axis=-1),
    )
    x, v = _states(model)
    out = generator_apply_many(model, plain, x, v)
    np.testing.assert_allclose(out, 2.0 * np.sum(x * v, axis=-1), rtol=1e-6, atol=1e-6)


# ---------------------------------------------------------------------------
# invariance of the equilibrium law
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("name,tag", [("linear_bgk_r2", "R2"), ("kfp_quadratic", "R2")])
def test_equilibrium_mean_of_generator_vanishes(name, tag):
    model = model_by_name(name)
    phi = weight_catalog(model, tag)
    zs = equilibrium_sampler(model, RngStream(11, 0), 4000)
    x, v = zs[:, : model.d], zs[:, model.d :]
    vals = generator_apply_many(model, phi, x, v)
    se = float(np.std(vals, ddof=1) / np.sqrt(vals.size))
    assert abs(float(np.mean(vals))) < 4.0 * se + 1e-12


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def test_single_state_matches_batch_row():
    model = model_by_name("kfp_quadratic")
    phi = _speed_square_weight()
    x, v = _states(model)
    batch = generator_apply_many(model, phi, x, v)
    single = generator_apply(model, phi, PhaseState(x=x[2], v=v[2]))
    assert single == pytest.approx(batch[2], rel=1e-14)


def test_mismatched_batch_shapes_raise():
    model = model_by_name("kfp_quadratic")
    with pytest.raises(InvalidInputError, match="shape"):
        generator_apply_many(model, _speed_square_weight(), np.zeros((3, 1)), np.zeros((4, 1)))
    with pytest.raises(InvalidInputError, match="shape"):
        generator_apply_many(model, _speed_square_weight(), np.zeros((3, 2)), np.zeros((3, 2)))


def test_unknown_model_kind_is_rejected():
    class Weird:
        kind = "weird"
        d = 1

    with pytest.raises(UnsupportedModelError, match="weird"):
        generator_apply_many(Weird(), _speed_square_weight(), np.zeros((2, 1)), np.zeros((2, 1)))


def test_non_finite_weight_is_reported():
    model = model_by_name("kfp_quadratic")
    bad = WeightFn(
        name="bad",
        description="returns nan",
        params={},
        _value=lambda x, v: np.full(np.broadcast(x[..., 0], v[..., 0]).shape, np.nan),
    )
    with pytest.raises(InvalidWeightError, match="non-finite"):
        generator_apply_many(model, bad, np.zeros((2, 1)), np.ones((2, 1)))
