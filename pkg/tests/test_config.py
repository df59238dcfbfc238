"""Configuration schema: round-trips, defaults, and error field paths.

Serialization must be a fixed point (to_config of a reconstructed model
reproduces the dict byte for byte) and schema violations must carry the
dotted path of the offending field so CLI users can locate mistakes in
nested configs.
"""

import copy

import pytest

from harris_kinetics.config import (
    MODEL_CATALOG,
    model_by_name,
    model_from_config,
    potential_from_config,
)
from harris_kinetics.errors import SchemaError

VARIANTS = [
    {
        "model": "knudsen",
        "geometry": {"kind": "box", "d": 3},
        "boundary": {"kind": "maxwell", "accommodation": 0.7},
        "wall_temp": 2.0,
    },
    {
        "model": "knudsen",
        "geometry": {"kind": "interval"},
        "boundary": {"kind": "cercignani_lampis", "r_perp": 0.5, "r_par": 0.8},
    },
    {
        "model": "linear_boltzmann",
        "d": 2,
        "gamma_hard": 1.0,
        "domain": "whole_space",
        "potential": {"family": "power", "gamma_exp": 3.0},
    },
    {
        "model": "degenerate_boltzmann",
        "scatter": "maxwellian",
        "sigma": {"kind": "constant", "amplitude": 0.5},
    },
    {
        "model": "run_tumble",
        "r0": 0.25,
        "chi": 0.2,
        "signal": {"alpha": 2.0, "c0": 1.0},
    },
    {"model": "kinetic_fokker_planck", "beta_friction": 3.0, "gamma_exp": 1.5, "d": 2},
]


@pytest.mark.parametrize("name", sorted(MODEL_CATALOG))
def test_catalog_round_trip_is_fixed_point(name):
    model = model_by_name(name)
    cfg = model.to_config()
    rebuilt = model_from_config(cfg)
    assert type(rebuilt) is type(model)
    assert rebuilt.to_config() == cfg


@pytest.mark.parametrize("cfg", VARIANTS)
def test_variant_round_trip_is_fixed_point(cfg):
    model = model_from_config(cfg)
    assert model_from_config(model.to_config()).to_config() == model.to_config()


def test_catalog_configs_are_copied():
    before = copy.deepcopy(MODEL_CATALOG["degenerate_strip"])
    model = model_by_name("degenerate_strip")
    cfg = model.to_config()
    cfg["sigma"]["lo"] = -5.0
    assert MODEL_CATALOG["degenerate_strip"] == before
    assert model_by_name("degenerate_strip").sigma.lo == 0.3


def test_minimal_configs_use_defaults():
    bgk = model_from_config({"model": "linear_bgk"})
    assert bgk.domain == "torus" and bgk.d == 1
    fhn = model_from_config({"model": "fitzhugh_nagumo"})
    assert (fhn.a, fhn.b, fhn.c) == (1.0, 1.0, 1.0)
    kfp = model_from_config({"model": "kinetic_fokker_planck"})
    assert kfp.beta_friction == 2.0 and not kfp.is_tamed


def test_unknown_catalog_name_lists_valid_names():
    with pytest.raises(SchemaError, match="valid names.*torus_bgk"):
        model_by_name("nope")


# ---------------------------------------------------------------------------
# schema violations carry dotted field paths
# ---------------------------------------------------------------------------


def _field_of(callable_, cfg):
    with pytest.raises(SchemaError) as err:
        callable_(cfg)
    return err.value.field


def test_non_object_config_is_rejected():
    assert _field_of(model_from_config, "linear_bgk") == "model"
    assert _field_of(model_from_config, ["linear_bgk"]) == "model"


def test_unknown_model_tag():
    assert _field_of(model_from_config, {"model": "heat_bath"}) == "model"


def test_missing_required_nested_objects():
    assert _field_of(model_from_config, {"model": "knudsen"}) == "knudsen.geometry"
    assert (
        _field_of(model_from_config, {"model": "knudsen", "geometry": {"kind": "disk"}})
        == "knudsen.boundary"
    )


def test_nested_kind_errors_point_into_the_object():
    cfg = {
        "model": "knudsen",
        "geometry": {"kind": "pentagon"},
        "boundary": {"kind": "diffuse"},
    }
    assert _field_of(model_from_config, cfg) == "knudsen.geometry.kind"
    cfg = {
        "model": "knudsen",
        "geometry": {"kind": "disk"},
        "boundary": {"kind": "sticky"},
    }
    assert _field_of(model_from_config, cfg) == "knudsen.boundary.kind"
    cfg = {
        "model": "knudsen",
        "geometry": {"kind": "disk"},
        "boundary": {"kind": "cercignani_lampis", "r_perp": 0.5},
    }
    assert _field_of(model_from_config, cfg) == "knudsen.boundary.r_par"


def test_type_errors_name_the_field():
    cfg = {"model": "kinetic_fokker_planck", "gamma_exp": "big"}
    assert _field_of(model_from_config, cfg) == "kinetic_fokker_planck.gamma_exp"
    cfg = {"model": "kinetic_fokker_planck", "d": 1.5}
    assert _field_of(model_from_config, cfg) == "kinetic_fokker_planck.d"
    # booleans are not accepted where numbers are expected
    cfg = {"model": "kinetic_fokker_planck", "gamma_exp": True}
    assert _field_of(model_from_config, cfg) == "kinetic_fokker_planck.gamma_exp"


def test_constructor_rejections_become_schema_errors():
    cfg = {"model": "kinetic_fokker_planck", "beta_friction": 1.0}
    with pytest.raises(SchemaError, match="beta_friction"):
        model_from_config(cfg)
    cfg = {"model": "linear_bgk", "domain": "whole_space"}  # needs a potential
    with pytest.raises(SchemaError):
        model_from_config(cfg)


def test_potential_schema():
    assert potential_from_config(None).is_zero
    pot = potential_from_config({"family": "power", "gamma_exp": 1.5})
    assert pot.gamma_exp == 1.5
    with pytest.raises(SchemaError) as err:
        potential_from_config({"family": "cubic"}, path="run.potential")
    assert err.value.field == "run.potential.family"
    with pytest.raises(SchemaError):
        potential_from_config({"family": "power"})  # gamma_exp required


def test_signal_and_sigma_schema_paths():
    cfg = {"model": "run_tumble", "signal": {"family": "step"}}
    assert _field_of(model_from_config, cfg) == "run_tumble.signal.family"
    cfg = {"model": "degenerate_boltzmann", "sigma": {"kind": "blob"}}
    assert _field_of(model_from_config, cfg) == "degenerate_boltzmann.sigma.kind"
    cfg = {"model": "degenerate_boltzmann", "sigma": "strip"}
    assert _field_of(model_from_config, cfg) == "degenerate_boltzmann.sigma"


def test_schema_error_string_shows_path_and_message():
    err = SchemaError("rates.tau", "missing required field")
    assert err.field == "rates.tau"
    assert str(err) == "rates.tau: missing required field"
