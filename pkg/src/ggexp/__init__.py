"""Error-exponent converse bounds and simulation tools for additive white
generalized Gaussian noise channels with generalized power constraints."""

from .ggd import ChannelSpec, ConstraintSpec, GGDist
from .bounds import BoundCurve, InputType, RatePoint, capacity_endpoint, curve

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec",
    "ConstraintSpec",
    "GGDist",
    "BoundCurve",
    "InputType",
    "RatePoint",
    "capacity_endpoint",
    "curve",
]
