"""Simulator and verification toolkit for a relativistic gas in an
expanding flat spacetime, formulated in the rescaled momentum variable.

The heavy submodules (collision, solver, estimates) are imported lazily
through the usual attribute access so that `import rwboltz` stays cheap
and the JIT warm-up only happens when collisions are actually evaluated.
"""

__version__ = "0.1.0"

from .cosmology import (
    DeSitter,
    EinsteinDeSitter,
    PowerLaw,
    forcing,
    integrability,
)
from .distribution import (
    DistributionField,
    EquilibriumParams,
    VGrid,
    decay_certificate,
    entropy,
    equilibrium,
    gaussian_initial_data,
    interpolate,
    moments,
    weighted_norm,
)
from .kernels import KernelParams, cutoff_weight, sigma
from .kinematics import (
    OMEGA_R,
    OMEGA_RS,
    CollisionOutcome,
    CollisionScalars,
    collision_scalars,
    cutoff_quantity,
    energy_defect,
    post_collision_omega_R,
    post_collision_omega_RS,
)
from .reports import CheckReport

_LAZY = {
    "QuadratureSpec": "collision",
    "ReuseGrid": "collision",
    "SubsampledGrid": "collision",
    "q_field": "collision",
    "q_eval": "collision",
    "q_mc": "collision",
    "q_field_array": "collision",
    "weak_moment": "collision",
    "SimConfig": "solver",
    "RunResult": "solver",
    "BlowUpError": "solver",
    "run": "solver",
    "write_outputs": "solver",
    "run_suite": "estimates",
    "ConfigError": "config",
    "load_sim_config": "config",
    "build_sim_config": "config",
    "serialize_sim_config": "config",
}


def __getattr__(name):
    if name in _LAZY:
        import importlib

        module = importlib.import_module(f".{_LAZY[name]}", __name__)
        return getattr(module, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_LAZY))
