"""Design and simulation of lumped-element impedance-matched SNAIL parametric amplifiers."""

from .chebyshev import PrototypeSpec, prototype_lookup
from .netlist import Netlist
from .snail import FluxBias, SnailParams, operating_point
from .synthesis import DesignSpec, synthesize

__version__ = "0.1.0"

__all__ = [
    "DesignSpec",
    "FluxBias",
    "Netlist",
    "PrototypeSpec",
    "SnailParams",
    "operating_point",
    "prototype_lookup",
    "synthesize",
]
