"""Drift certification, minorisation lower bounds, and control conditions.

Closed-form cases pin the reports exactly (constant scattering integrates
to amplitude times horizon; a flat weight short-circuits), Monte Carlo
cases are asserted through conservative orderings (Clopper-Pearson below
the empirical rate), and every validation path is exercised.
"""

import numpy as np
import pytest

from harris_kinetics.config import model_by_name
from harris_kinetics.errors import InvalidInputError
from harris_kinetics.models.base import PhaseState, Potential
from harris_kinetics.models.boltzmann import SigmaConstant, SigmaStrip
from harris_kinetics.rng import RngStream
from harris_kinetics.verification import (
    drift_verify,
    gcc_check,
    minorisation_estimate,
)
from harris_kinetics.weights import (
    bgk_r2_drift_targets,
    bgk_r2_hypothesis_constants,
    weight_catalog,
)

EXACT_TOL = 1e-10


# ---------------------------------------------------------------------------
# drift certification
# ---------------------------------------------------------------------------


def test_confined_bgk_meets_certified_targets():
    model = model_by_name("linear_bgk_r2")
    phi = weight_catalog(model, "R2")
    zeta, big_d = bgk_r2_drift_targets(
        *bgk_r2_hypothesis_constants(model.potential, model.d), model.d
    )
    assert (zeta, big_d) == (0.125, 0.75)
    report = drift_verify(model, phi, zeta_target=zeta, d_target=big_d)
    assert report.passed
    assert report.mode == "targets"
    assert report.tail_controlled
    assert report.margin > 0.05
    assert isinstance(report.worst_point, PhaseState)
    assert report.worst_point.x.shape == (model.d,)


def test_margin_is_linear_in_the_offset():
    # same deterministic sample set, so raising D by 1 raises the margin by 1
    model = model_by_name("linear_bgk_r2")
    phi = weight_catalog(model, "R2")
    r1 = drift_verify(model, phi, zeta_target=0.125, d_target=0.75)
    r2 = drift_verify(model, phi, zeta_target=0.125, d_target=1.75)
    assert r2.margin == pytest.approx(r1.margin + 1.0, abs=1e-12)


def test_overclaimed_rate_fails():
    model = model_by_name("linear_bgk_r2")
    phi = weight_catalog(model, "R2")
    report = drift_verify(model, phi, zeta_target=2.0, d_target=0.1)
    assert not report.passed
    assert report.margin < 0.0


def test_fit_d_mode_reports_binding_offset():
    model = model_by_name("linear_bgk_r2")
    phi = weight_catalog(model, "R2")
    report = drift_verify(model, phi, zeta_target=0.125)
    assert report.mode == "fit_d"
    assert report.passed
    # the fitted offset is the binding one: margin sits at zero and the
    # offset cannot beat the certified D = 0.75
    assert report.margin == pytest.approx(0.0, abs=1e-9)
    assert 0.0 < report.d_hat <= 0.75 + 1e-9


def test_fit_both_finds_positive_rate_for_hypoelliptic_models():
    fhn = model_by_name("fhn_111")
    report = drift_verify(fhn, weight_catalog(fhn, "R1"))
    assert report.mode == "fit_both"
    assert report.passed
    assert report.tail_controlled
    assert report.zeta_hat > 0.0

    rt = model_by_name("runtumble_default")
    report = drift_verify(rt, weight_catalog(rt, "R1"))
    assert report.passed
    assert report.zeta_hat > 0.01


def test_flat_weight_short_circuits():
    model = model_by_name("torus_bgk")
    report = drift_verify(model, weight_catalog(model, "R1"))
    assert report.mode == "degenerate"
    assert report.degenerate_weight
    assert report.passed
    assert report.zeta_hat == 1.0
    assert "PASS" in report.summary()


def test_drift_verify_validates_inputs():
    model = model_by_name("linear_bgk_r2")
    phi = weight_catalog(model, "R2")
    with pytest.raises(InvalidInputError, match="at least 16"):
        drift_verify(model, phi, n=8)
    with pytest.raises(InvalidInputError, match="sampler"):
        drift_verify(model, phi, sampler="sobol")


def test_random_sampler_also_passes_certified_targets():
    model = model_by_name("linear_bgk_r2")
    phi = weight_catalog(model, "R2")
    report = drift_verify(
        model, phi, zeta_target=0.125, d_target=0.75, sampler="random", n=512,
        rng=RngStream(3, 0),
    )
    assert report.passed
    assert report.sampling["sampler"] == "random"


# ---------------------------------------------------------------------------
# minorisation
# ---------------------------------------------------------------------------


def test_minorisation_bound_is_conservative():
    model = model_by_name("kfp_quadratic")
    report = minorisation_estimate(
        model,
        phi=None,
        r_level=0.0,
        tau=1.0,
        eta_box=[(-0.5, 0.5), (-1.2, 1.2)],
        bins=(3, 3),
        n_paths=3000,
        rng=RngStream(17, 0),
        initial_points=(np.array([[0.0]]), np.array([[0.0]])),
    )
    assert report.n_init == 1
    assert 0.0 < report.alpha_hat <= report.raw_alpha <= 1.0 + 1e-9
    assert report.empty_bins == ()
    assert "alpha_hat" in report.summary()


def test_unreachable_bins_zero_the_bound():
    model = model_by_name("torus_bgk")
    report = minorisation_estimate(
        model,
        phi=None,
        r_level=0.0,
        tau=0.25,
        eta_box=[(0.0, 1.0), (-8.0, 8.0)],
        bins=(1, 8),
        n_paths=1500,
        rng=RngStream(5, 0),
        initial_points=(np.array([[0.5]]), np.array([[0.0]])),
    )
    assert report.alpha_hat == 0.0
    assert report.raw_alpha == 0.0
    assert len(report.empty_bins) > 0


def test_spread_initial_points_from_weight():
    model = model_by_name("kfp_quadratic")
    phi = weight_catalog(model, "R2")
    report = minorisation_estimate(
        model,
        phi,
        r_level=3.0,
        tau=0.5,
        eta_box=[(-1.0, 1.0), (-1.5, 1.5)],
        bins=2,
        n_paths=1200,
        n_init=2,
        rng=RngStream(23, 0),
    )
    assert report.n_init == 2
    assert len(report.per_init_alpha) == 2
    assert report.alpha_hat == min(report.per_init_alpha)
    assert report.small_set["weight"] == phi.name


def test_minorisation_validates_inputs():
    model = model_by_name("kfp_quadratic")
    phi = weight_catalog(model, "R2")
    pts = (np.array([[0.0]]), np.array([[0.0]]))
    box = [(-1.0, 1.0), (-1.0, 1.0)]
    with pytest.raises(InvalidInputError, match="tau"):
        minorisation_estimate(model, phi, 3.0, 0.0, box, 2, initial_points=pts)
    with pytest.raises(InvalidInputError, match="axes"):
        minorisation_estimate(model, phi, 3.0, 1.0, [(-1.0, 1.0)], 2, initial_points=pts)
    with pytest.raises(InvalidInputError, match="increasing"):
        minorisation_estimate(
            model, phi, 3.0, 1.0, [(-1.0, 1.0), (1.0, -1.0)], 2, initial_points=pts
        )
    with pytest.raises(InvalidInputError, match="bins"):
        minorisation_estimate(model, phi, 3.0, 1.0, box, 0, initial_points=pts)
    with pytest.raises(InvalidInputError, match="weight or explicit"):
        minorisation_estimate(model, None, 3.0, 1.0, box, 2)
    with pytest.raises(InvalidInputError, match="captured no"):
        minorisation_estimate(model, phi, 0.5, 1.0, box, 2, n_paths=100)


# ---------------------------------------------------------------------------
# geometric control condition
# ---------------------------------------------------------------------------


def test_constant_scattering_integrates_exactly():
    report = gcc_check(
        SigmaConstant(0.7),
        t_horizon=1.5,
        x_grid=np.linspace(0.0, 1.0, 5)[:, None],
        v_grid=np.array([[-1.0], [0.5], [2.0]]),
    )
    assert report.kappa_hat == pytest.approx(1.05, abs=EXACT_TOL)
    assert not report.with_potential
    assert report.grid == {"n_x": 5, "n_v": 3, "d": 1, "n_sub": 1000}
    assert "straight" in report.summary()


def test_stationary_point_outside_support_gives_zero():
    strip = SigmaStrip(lo=0.3, hi=0.7, taper=0.05)
    report = gcc_check(strip, x_grid=[[0.1]], v_grid=[[0.0]])
    assert report.kappa_hat == 0.0


def test_unit_speed_sweep_integrates_the_profile():
    # one full lap at speed 1 accumulates the strip's total mass: a 0.3
    # plateau plus two raised-cosine ramps of area taper / 2 each
    strip = SigmaStrip(lo=0.3, hi=0.7, taper=0.05)
    report = gcc_check(strip, t_horizon=1.0, x_grid=[[0.0]], v_grid=[[1.0]])
    assert report.kappa_hat == pytest.approx(0.35, rel=1e-6)


def test_curved_paths_keep_constant_fields_exact():
    report = gcc_check(
        SigmaConstant(1.0),
        potential=Potential("quadratic"),
        t_horizon=2.0,
        x_grid=[[0.2], [0.8]],
        v_grid=[[0.3], [-1.1]],
        n_sub=500,
    )
    assert report.with_potential
    assert report.kappa_hat == pytest.approx(2.0, abs=1e-9)
    assert "curved" in report.summary()


def test_curved_integral_is_grid_converged():
    strip = SigmaStrip(lo=0.3, hi=0.7, taper=0.05)
    xg = [[0.05], [0.5], [0.9]]
    vg = [[0.6], [-0.9]]
    kw = dict(potential=Potential("quadratic"), t_horizon=1.5, x_grid=xg, v_grid=vg)
    # the taper is only C^1 at the ramp junctions, so Simpson converges at
    # reduced order there; refinement still agrees to three digits
    coarse = gcc_check(strip, n_sub=1000, **kw)
    fine = gcc_check(strip, n_sub=2000, **kw)
    assert coarse.kappa_hat == pytest.approx(fine.kappa_hat, abs=1e-4)


def test_gcc_validates_inputs():
    with pytest.raises(InvalidInputError, match="t_horizon"):
        gcc_check(SigmaConstant(), t_horizon=0.0, x_grid=[[0.0]], v_grid=[[1.0]])
    with pytest.raises(InvalidInputError, match="even"):
        gcc_check(SigmaConstant(), x_grid=[[0.0]], v_grid=[[1.0]], n_sub=7)
    with pytest.raises(InvalidInputError, match="dimensions"):
        gcc_check(SigmaConstant(), x_grid=[[0.0]], v_grid=[[1.0, 2.0]])
