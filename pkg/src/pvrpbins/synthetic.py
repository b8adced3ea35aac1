"""Random Euclidean instances for tests, tuning and oracle comparisons."""

from __future__ import annotations

import math
import random

from .model import FleetParams, Horizon, Instance, Problem, default_catalog


def random_instance(n_points, seed=0, span=10.0, waste=(0.6, 1.6), name=None):
    """Points uniform in a ``span`` x ``span`` minute square, depot included.

    Travel times are Euclidean distances rounded to 0.01 min (so the
    triangle inequality holds up to rounding); daily waste is uniform in
    ``waste`` and rounded to 0.01 m3. Coordinates are reported as small
    lat/lon offsets so the instance can be plotted.
    """
    rng = random.Random(seed)
    xy = [(rng.uniform(0, span), rng.uniform(0, span)) for _ in range(n_points + 1)]
    travel = [[0.0 if i == j else round(math.dist(xy[i], xy[j]), 2) for j in range(n_points + 1)]
              for i in range(n_points + 1)]
    lo, hi = waste
    daily = [round(rng.uniform(lo, hi), 2) for _ in range(n_points)]
    to_geo = [(-38.7 + y / 1000.0, -62.27 + x / 1000.0) for x, y in xy]
    return Instance(name or f"syn.{n_points}.{seed}", travel, daily,
                    coords=to_geo[1:], depot_coord=to_geo[0])


def random_problem(n_points, seed=0, n_days=7, rest_days=(7,), n_vehicles=2,
                   shift_minutes=None, vehicle_capacity=12.0, **kw):
    """Problem around :func:`random_instance`. Without ``shift_minutes`` the
    shift is 8 hours, which never binds on small instances."""
    inst = random_instance(n_points, seed, **kw)
    horizon = Horizon(n_days, frozenset(rest_days))
    fleet = FleetParams(vehicle_capacity=vehicle_capacity, n_vehicles=n_vehicles,
                        shift_minutes=480.0 if shift_minutes is None else shift_minutes)
    return Problem(inst, horizon, default_catalog(), fleet)
