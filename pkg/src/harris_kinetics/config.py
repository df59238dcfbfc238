"""JSON configuration schema and the named model catalog.

Every model serializes to a flat JSON object tagged by its "model" field
and reconstructs through model_from_config; schema violations raise
SchemaError carrying the offending field's dotted path. The catalog maps
short names to ready-to-run configurations used by the CLI and tests.
"""

from __future__ import annotations

import copy

from .errors import SchemaError
from .models.base import Potential
from .models.bgk import LinearBGK
from .models.boltzmann import (
    DegenerateBoltzmann,
    LinearBoltzmann,
    SigmaConstant,
    SigmaStrip,
)
from .models.fitzhugh_nagumo import FitzHughNagumo
from .models.fokker_planck import KineticFokkerPlanck
from .models.geometry import Box, Disk, Interval
from .models.knudsen import BoundarySpec, KnudsenGas
from .models.run_tumble import ChemoSignal, RunTumble

__all__ = [
    "model_from_config",
    "model_by_name",
    "MODEL_CATALOG",
    "potential_from_config",
]


def _get(cfg: dict, key: str, path: str, required: bool = True, default=None):
    if key not in cfg:
        if required:
            raise SchemaError(f"{path}.{key}", "missing required field")
        return default
    return cfg[key]


def _number(cfg: dict, key: str, path: str, required: bool = True, default=None):
    val = _get(cfg, key, path, required, default)
    if val is default and not required:
        return default
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SchemaError(f"{path}.{key}", "expected a number")
    return float(val)


def _integer(cfg: dict, key: str, path: str, required: bool = True, default=None):
    val = _get(cfg, key, path, required, default)
    if val is default and not required:
        return default
    if isinstance(val, bool) or not isinstance(val, int):
        raise SchemaError(f"{path}.{key}", "expected an integer")
    return int(val)


def _string(cfg: dict, key: str, path: str, required: bool = True, default=None):
    val = _get(cfg, key, path, required, default)
    if val is default and not required:
        return default
    if not isinstance(val, str):
        raise SchemaError(f"{path}.{key}", "expected a string")
    return val


def potential_from_config(cfg, path: str = "potential") -> Potential:
    if cfg is None:
        return Potential()
    if not isinstance(cfg, dict):
        raise SchemaError(path, "expected an object")
    family = _string(cfg, "family", path)
    if family == "power":
        return Potential("power", _number(cfg, "gamma_exp", path))
    if family in ("quadratic", "none"):
        return Potential(family)
    raise SchemaError(f"{path}.family", f"unknown family {family!r}")


def _sigma_from_config(cfg, path: str = "sigma"):
    if cfg is None:
        return SigmaConstant()
    if not isinstance(cfg, dict):
        raise SchemaError(path, "expected an object")
    kind = _string(cfg, "kind", path)
    if kind == "constant":
        return SigmaConstant(_number(cfg, "amplitude", path, False, 1.0))
    if kind == "strip":
        return SigmaStrip(
            lo=_number(cfg, "lo", path, False, 0.4),
            hi=_number(cfg, "hi", path, False, 0.6),
            taper=_number(cfg, "taper", path, False, 0.05),
            amplitude=_number(cfg, "amplitude", path, False, 1.0),
            axis=_integer(cfg, "axis", path, False, 0),
        )
    raise SchemaError(f"{path}.kind", f"unknown sigma kind {kind!r}")


def _geometry_from_config(cfg, path: str = "geometry"):
    if not isinstance(cfg, dict):
        raise SchemaError(path, "expected an object")
    kind = _string(cfg, "kind", path)
    if kind == "interval":
        return Interval()
    if kind == "disk":
        return Disk(radius=_number(cfg, "radius", path, False, 1.0))
    if kind == "box":
        return Box(d_spatial=_integer(cfg, "d", path, False, 2))
    raise SchemaError(f"{path}.kind", f"unknown geometry kind {kind!r}")


def _boundary_from_config(cfg, path: str = "boundary"):
    if not isinstance(cfg, dict):
        raise SchemaError(path, "expected an object")
    kind = _string(cfg, "kind", path)
    if kind in ("diffuse", "absorbing"):
        return BoundarySpec(kind=kind)
    if kind == "maxwell":
        return BoundarySpec(
            kind="maxwell",
            accommodation=_number(cfg, "accommodation", path, False, 1.0),
        )
    if kind == "cercignani_lampis":
        return BoundarySpec(
            kind="cercignani_lampis",
            r_perp=_number(cfg, "r_perp", path),
            r_par=_number(cfg, "r_par", path),
        )
    raise SchemaError(f"{path}.kind", f"unknown boundary kind {kind!r}")


def _signal_from_config(cfg, path: str = "signal"):
    if cfg is None:
        return ChemoSignal()
    if not isinstance(cfg, dict):
        raise SchemaError(path, "expected an object")
    family = _string(cfg, "family", path, False, "linear_decay")
    if family != "linear_decay":
        raise SchemaError(f"{path}.family", f"unknown signal family {family!r}")
    return ChemoSignal(
        alpha=_number(cfg, "alpha", path, False, 1.0),
        c0=_number(cfg, "c0", path, False, 0.0),
    )


def model_from_config(cfg: dict):
    """Build a model from its JSON configuration object."""
    if not isinstance(cfg, dict):
        raise SchemaError("model", "configuration must be an object")
    tag = _string(cfg, "model", "")
    try:
        if tag == "linear_bgk":
            return LinearBGK(
                d=_integer(cfg, "d", tag, False, 1),
                domain=_string(cfg, "domain", tag, False, "torus"),
                potential=potential_from_config(
                    cfg.get("potential"), f"{tag}.potential"
                ),
            )
        if tag == "kinetic_fokker_planck":
            return KineticFokkerPlanck(
                gamma_exp=_number(cfg, "gamma_exp", tag, False, 2.0),
                beta_friction=_number(cfg, "beta_friction", tag, False, 2.0),
                d=_integer(cfg, "d", tag, False, 1),
            )
        if tag == "linear_boltzmann":
            return LinearBoltzmann(
                d=_integer(cfg, "d", tag, False, 1),
                gamma_hard=_number(cfg, "gamma_hard", tag, False, 1.0),
                b_const=_number(cfg, "b_const", tag, False, 1.0),
                domain=_string(cfg, "domain", tag, False, "torus"),
                potential=potential_from_config(
                    cfg.get("potential"), f"{tag}.potential"
                ),
            )
        if tag == "knudsen":
            return KnudsenGas(
                geometry=_geometry_from_config(
                    _get(cfg, "geometry", tag), f"{tag}.geometry"
                ),
                boundary=_boundary_from_config(
                    _get(cfg, "boundary", tag), f"{tag}.boundary"
                ),
                wall_temp=_number(cfg, "wall_temp", tag, False, 1.0),
            )
        if tag == "degenerate_boltzmann":
            return DegenerateBoltzmann(
                d=_integer(cfg, "d", tag, False, 1),
                sigma=_sigma_from_config(cfg.get("sigma"), f"{tag}.sigma"),
                scatter=_string(cfg, "scatter", tag, False, "uniform"),
                v_ball=_number(cfg, "v_ball", tag, False, 1.0),
                potential=potential_from_config(
                    cfg.get("potential"), f"{tag}.potential"
                ),
            )
        if tag == "run_tumble":
            r0 = _number(cfg, "r0", tag, False, None)
            return RunTumble(
                chi=_number(cfg, "chi", tag, False, 0.5),
                psi=_string(cfg, "psi", tag, False, "tanh"),
                signal=_signal_from_config(cfg.get("signal"), f"{tag}.signal"),
                d=_integer(cfg, "d", tag, False, 1),
                r0=r0,
            )
        if tag == "fitzhugh_nagumo":
            return FitzHughNagumo(
                a=_number(cfg, "a", tag, False, 1.0),
                b=_number(cfg, "b", tag, False, 1.0),
                c=_number(cfg, "c", tag, False, 1.0),
            )
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(tag, str(exc)) from exc
    raise SchemaError("model", f"unknown model tag {tag!r}")


MODEL_CATALOG = {
    "torus_bgk": {"model": "linear_bgk", "d": 1, "domain": "torus"},
    "linear_bgk_r2": {
        "model": "linear_bgk",
        "d": 1,
        "domain": "whole_space",
        "potential": {"family": "power", "gamma_exp": 2.0},
    },
    "kfp_quadratic": {
        "model": "kinetic_fokker_planck",
        "gamma_exp": 2.0,
        "beta_friction": 2.0,
        "d": 1,
    },
    "knudsen_disk_diffuse": {
        "model": "knudsen",
        "geometry": {"kind": "disk", "radius": 1.0},
        "boundary": {"kind": "diffuse"},
        "wall_temp": 1.0,
    },
    "runtumble_default": {
        "model": "run_tumble",
        "chi": 0.5,
        "psi": "tanh",
        "signal": {"family": "linear_decay", "alpha": 1.0, "c0": 0.0},
        "d": 1,
    },
    "fhn_111": {"model": "fitzhugh_nagumo", "a": 1.0, "b": 1.0, "c": 1.0},
    "degenerate_strip": {
        "model": "degenerate_boltzmann",
        "d": 1,
        "sigma": {"kind": "strip", "lo": 0.3, "hi": 0.7, "taper": 0.05},
        "scatter": "uniform",
        "v_ball": 1.0,
    },
    "linear_boltzmann_torus": {
        "model": "linear_boltzmann",
        "d": 1,
        "gamma_hard": 0.0,
        "b_const": 1.0,
        "domain": "torus",
    },
}


def model_by_name(name: str):
    """Model instance for a catalog name."""
    if name in MODEL_CATALOG:
        return model_from_config(copy.deepcopy(MODEL_CATALOG[name]))
    raise SchemaError("model", f"unknown catalog name {name!r}; "
                      f"valid names: {', '.join(sorted(MODEL_CATALOG))}")
