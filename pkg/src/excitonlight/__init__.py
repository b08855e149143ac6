"""Open-system exciton dynamics of molecular aggregates under phonon
baths and thermal (blackbody) light, via a non-secular relaxation tensor
solved in the damping basis of its superoperator."""

__version__ = "0.1.0"

from . import analytic, bath, cli, dynamics, model, redfield, scenarios, units

__all__ = ["analytic", "bath", "cli", "dynamics", "model", "redfield",
           "scenarios", "units", "__version__"]
