"""Counting and transfer-operator tools for thin semigroups of SL2 and SO(n,1).

Modules, bottom-up: arithmetic, groups, semigroup, dynamics, thermo,
congruence, counting, with the command-line front end in cli.
"""
from .errors import CongCountError, ConfigError, ConstructionError, DomainError, NumericError, ResourceError

__version__ = "0.1.0"

__all__ = ["CongCountError", "ConfigError", "ConstructionError", "DomainError", "NumericError",
           "ResourceError", "__version__"]
