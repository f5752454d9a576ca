"""Quantized vortex dynamics of the NLS equation with wave operator on the unit torus.

Modules:
    green     Green's function of the Laplacian on the torus (Ewald split)
    core      radial vortex core and the core-energy constant gamma
    renorm    vortex configurations and the renormalized energy W(a; q)
    reduced   reduced dynamical law, RK4 integration and mu sweeps
    harmonic  canonical harmonic map on a grid and field diagnostics
    pde       pseudospectral NLSW / NLS solvers and vortex tracking
    serialize CSV / JSON / field snapshot writers
    plot      SVG trajectory figures
    cli       the ``torus-vortex`` command
"""

__version__ = "0.1.0"

from .core import CoreConstant, core_energy_gamma
from .errors import TorusVortexError
from .green import GreenEvaluator, green_eval, green_grad, green_reg
from .reduced import SimParams, Trajectory, integrate, mu_sweep
from .renorm import VortexConfig, min_separation, renorm_grad, renormalized_energy, w_eps

__all__ = [
    "CoreConstant", "GreenEvaluator", "SimParams", "TorusVortexError", "Trajectory",
    "VortexConfig", "core_energy_gamma", "green_eval", "green_grad", "green_reg",
    "integrate", "min_separation", "mu_sweep", "renorm_grad", "renormalized_energy", "w_eps",
]
