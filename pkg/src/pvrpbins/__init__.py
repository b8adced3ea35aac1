"""Periodic waste-collection routing with integrated bin sizing."""

from .decode import Chromosome, decode, repair, select_bins, split_routes
from .model import (BinCatalog, EvalReport, FleetParams, Horizon, Instance, Problem,
                    Schedule, accumulate_waste, default_catalog, derive_fleet, evaluate,
                    route_loads, route_time)

__version__ = "0.1.0"
