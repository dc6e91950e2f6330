"""Capacities, Muckenhoupt checks and Poincare decisions for radial weights."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .capacity import annulus_capacity, capacity, capacity_condition_check, discrete_capacity_oracle, point_capacity
from .decider import decide_bowtie_pi
from .measure import decay_exponent, exponent_estimate, mu_ball
from .muckenhoupt import ap_ratio_interval, ap_scan
from .weights import RadialWeight, build_weight, load_weight

__all__ = [
    "RadialWeight",
    "annulus_capacity",
    "ap_ratio_interval",
    "ap_scan",
    "build_weight",
    "capacity",
    "capacity_condition_check",
    "decay_exponent",
    "decide_bowtie_pi",
    "discrete_capacity_oracle",
    "exponent_estimate",
    "load_weight",
    "mu_ball",
    "point_capacity",
]
