"""Kinetic model simulators, boundary kernels, and generator evaluation."""

from .base import PhaseState, Potential, torus_displacement, wrap_torus
from .bgk import LinearBGK
from .boltzmann import (
    DegenerateBoltzmann,
    LinearBoltzmann,
    SigmaConstant,
    SigmaStrip,
    collision_frequency,
    collision_rate_bound,
)
from .equilibrium import equilibrium_sampler, last_acceptance_rate, uniform_ball
from .fitzhugh_nagumo import FitzHughNagumo
from .fokker_planck import KineticFokkerPlanck
from .generator import generator_apply, generator_apply_many
from .geometry import Box, Disk, Interval, first_collision_time
from .knudsen import (
    BoundarySpec,
    KnudsenGas,
    cl_sampled_density,
    sample_cl_kernel,
    sample_maxwell_boundary,
    specular_reflect,
)
from .run_tumble import ChemoSignal, RunTumble, psi_value, unit_mass_ball_radius

__all__ = [
    "PhaseState",
    "Potential",
    "wrap_torus",
    "torus_displacement",
    "LinearBGK",
    "LinearBoltzmann",
    "DegenerateBoltzmann",
    "SigmaConstant",
    "SigmaStrip",
    "collision_frequency",
    "collision_rate_bound",
    "KineticFokkerPlanck",
    "FitzHughNagumo",
    "RunTumble",
    "ChemoSignal",
    "psi_value",
    "unit_mass_ball_radius",
    "KnudsenGas",
    "BoundarySpec",
    "sample_maxwell_boundary",
    "sample_cl_kernel",
    "cl_sampled_density",
    "specular_reflect",
    "Interval",
    "Disk",
    "Box",
    "first_collision_time",
    "generator_apply",
    "generator_apply_many",
    "equilibrium_sampler",
    "uniform_ball",
    "last_acceptance_rate",
    "step",
]


def step(model, state, dt, rng):
    """One increment of the model's dynamics (dispatch on the model object)."""
    return model.step(state, dt, rng)
