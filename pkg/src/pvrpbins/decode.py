"""Chromosome -> Schedule decoding: mask repair, bin sizing and greedy route splitting."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import (CapacityExceededError, PickupExceedsVehicleError,
                     PointUnservableError, ProblemError)
from .model import WASTE_TOL, Schedule, _point_accumulation, accumulate_waste

# Extra service minutes tolerated to get a smaller bin; see select_bins.
SERVICE_SLACK = 0.5


@dataclass(frozen=True)
class Chromosome:
    """Mixed encoding of a candidate solution.

    ``perms[t]`` is the visiting order of all points on day ``t + 1`` (a
    permutation of ``1..n``); ``mask[i][t]`` tells whether point ``i + 1`` is
    actually served that day. Both are tuples so chromosomes hash cheaply.
    """

    perms: tuple
    mask: tuple

    @classmethod
    def from_lists(cls, perms, mask):
        return cls(tuple(tuple(int(p) for p in row) for row in perms),
                   tuple(tuple(bool(m) for m in row) for row in mask))

    @classmethod
    def from_ranks(cls, ranks, mask):
        """Build from per-point visiting ranks (``ranks[i][t]`` = 0-based position
        of point ``i + 1`` on day ``t + 1``) instead of visiting orders."""
        n = len(ranks)
        n_days = len(ranks[0])
        perms = []
        for t in range(n_days):
            order = sorted(range(n), key=lambda i: ranks[i][t])
            perms.append([i + 1 for i in order])
        return cls.from_lists(perms, mask)

    @property
    def n_points(self):
        return len(self.mask)

    @property
    def n_days(self):
        return len(self.perms)

    def check(self, n_points, horizon):
        """Raise ProblemError unless the chromosome is structurally valid."""
        if len(self.perms) != horizon.n_days or len(self.mask) != n_points:
            raise ProblemError("chromosome shape does not match instance and horizon")
        expected = list(range(1, n_points + 1))
        for t, row in enumerate(self.perms):
            if sorted(row) != expected:
                raise ProblemError(f"day {t + 1} row is not a permutation of 1..{n_points}")
        working = horizon.working
        for i, row in enumerate(self.mask):
            if len(row) != horizon.n_days:
                raise ProblemError(f"mask row {i + 1} has wrong length")
            for t, m in enumerate(row):
                if m and not working[t]:
                    raise ProblemError(f"mask visits point {i + 1} on rest day {t + 1}")


def repair_limit(catalog, fleet=None):
    limit = catalog.max_capacity
    if fleet is not None:
        limit = min(limit, fleet.vehicle_capacity)
    return limit


def repair_row(row, waste, working, limit, point=0):
    """Add visits to one point's mask row until its peak accumulation fits ``limit``.

    Returns the same object when nothing needs to change.
    """
    row = tuple(row)
    fixed = _repair_row(row, float(waste), tuple(working), float(limit), point)
    return row if fixed == row else fixed


@lru_cache(maxsize=1 << 16)
def _repair_row(row, waste, working, limit, point):
    n = len(row)
    acc = _point_accumulation(row, waste)
    if acc is not None and max(acc) <= limit + WASTE_TOL:
        return row
    daily = _point_accumulation(working, waste)
    if max(daily) > limit + WASTE_TOL:
        raise PointUnservableError(point, max(daily), limit)
    new = list(row)
    if acc is None:
        last = max(t for t in range(n) if working[t])
        new[last] = True
        acc = _point_accumulation(tuple(new), waste)
    while True:
        over = next((t for t in range(n) if acc[t] > limit + WASTE_TOL), None)
        if over is None:
            return tuple(new)
        # a pickup on the overflowing day itself comes too late: w is measured
        # before collection, so the visit goes on the latest free working day before it
        u = over
        for _ in range(n):
            u = u - 1 if u > 0 else n - 1
            if working[u] and not new[u]:
                break
        new[u] = True
        acc = _point_accumulation(tuple(new), waste)


def repair(chromosome, instance, horizon, catalog, fleet=None):
    """Add visits so every point is served and never overflows the largest bin.

    With ``fleet`` given, the limit is also capped at the vehicle capacity so a
    single pickup always fits in a truck. Visits are only ever added.
    """
    working = horizon.working
    limit = repair_limit(catalog, fleet)
    rows = chromosome.mask
    out = None
    waste = instance.daily_waste
    for i, row in enumerate(rows):
        fixed = _repair_row(row, waste[i], working, limit, i + 1)
        if fixed != row:
            if out is None:
                out = list(rows)
            out[i] = fixed
    if out is None:
        return chromosome
    return Chromosome(chromosome.perms, tuple(out))


@lru_cache(maxsize=4096)
def _select_one(w, catalog, slack):
    fits = [b for b in range(len(catalog)) if catalog.capacity[b] >= w - WASTE_TOL]
    if not fits:
        raise CapacityExceededError(
            f"capacity exceeded: no bin combination holds {w:.4f} m3")
    cheapest = min(catalog.cost[b] for b in fits)
    cands = [b for b in fits if catalog.cost[b] <= cheapest + 1e-9]
    fastest = min(catalog.service[b] for b in cands)
    cands = [b for b in cands if catalog.service[b] <= fastest + slack + 1e-9]
    return min(cands, key=lambda b: (catalog.capacity[b], b))


def select_bins(w_max, catalog, service_slack=SERVICE_SLACK):
    """Choose a bin combination for every point from its peak accumulation.

    Rule: among combinations that hold ``w_max``, keep the cheapest; among
    those, drop any whose service time exceeds the fastest one by more than
    ``service_slack`` minutes; take the smallest remaining capacity.

    The slack captures the reference assignments: a much slower bin (e.g.
    3.3 m3 / 2.10 min versus 3.5 m3 / 1.36 min) is skipped, while a marginally
    slower one (4.3 m3 / 1.37 min versus 4.8 m3 / 1.32 min) is still preferred
    for being smaller. Any slack in [0.05, 0.70) gives the same choices on
    the default catalog.
    """
    return tuple(_select_one(float(w), catalog, float(service_slack)) for w in w_max)


def split_routes(order, mask_column, accumulation_column, fleet):
    """Greedily cut the day's visiting order into capacity-feasible routes.

    ``order`` lists points; ``mask_column[p - 1]`` and
    ``accumulation_column[p - 1]`` give the visit flag and pickup of point
    ``p``. A route closes as soon as the next pickup would not fit.
    """
    q = fleet.vehicle_capacity + WASTE_TOL
    routes = []
    current = []
    load = 0.0
    for p in order:
        if not mask_column[p - 1]:
            continue
        w = accumulation_column[p - 1]
        if w > q:
            raise PickupExceedsVehicleError(
                f"pickup exceeds vehicle capacity: point {p} holds {w:.4f} m3")
        if current and load + w > q:
            routes.append(tuple(current))
            current = []
            load = 0.0
        current.append(p)
        load += w
    if current:
        routes.append(tuple(current))
    return routes


def decode(chromosome, instance, horizon, catalog, fleet, service_slack=SERVICE_SLACK):
    """Turn a (repaired) chromosome into a Schedule.

    Accumulation follows from the mask, bins from the peak accumulation, and
    each working day's routes from :func:`split_routes` over that day's order.
    Route times are accumulated in the same order as
    :func:`pvrpbins.model.route_time`, so both give identical floats.
    """
    acc, w_max = accumulate_waste(chromosome.mask, instance, horizon)
    bins = select_bins(w_max, catalog, service_slack)
    working = horizon.working
    travel, service, unload = instance.travel, catalog.service, fleet.unload_minutes
    q = fleet.vehicle_capacity + WASTE_TOL
    mcols = list(zip(*chromosome.mask))
    acols = list(zip(*acc))
    routes, loads, times = [], [], []
    for t in range(horizon.n_days):
        day_routes, day_loads, day_times = [], [], []
        if working[t]:
            mcol, acol = mcols[t], acols[t]
            route = None
            for p in chromosome.perms[t]:
                if not mcol[p - 1]:
                    continue
                w = acol[p - 1]
                if w > q:
                    raise PickupExceedsVehicleError(
                        f"pickup exceeds vehicle capacity: point {p} holds {w:.4f} m3")
                if route is not None and load + w > q:
                    day_routes.append(tuple(route))
                    day_loads.append(tuple(seq))
                    day_times.append(minutes + travel[prev][0])
                    route = None
                if route is None:
                    route, seq, load, minutes, prev = [], [0.0], 0.0, unload, 0
                route.append(p)
                load += w
                seq.append(load)
                minutes += travel[prev][p] + service[bins[p - 1]]
                prev = p
            if route is not None:
                day_routes.append(tuple(route))
                day_loads.append(tuple(seq))
                day_times.append(minutes + travel[prev][0])
        routes.append(tuple(day_routes))
        loads.append(tuple(day_loads))
        times.append(tuple(day_times))
    return Schedule(bins, tuple(routes), acc, w_max, tuple(loads), tuple(times))


def encode(schedule, n_points, horizon):
    """Chromosome whose decoding reproduces ``schedule``'s visits and route order.

    Each day's order is the concatenation of its routes followed by the
    unvisited points; the greedy split yields the same routes whenever each
    route was closed because the next pickup did not fit.
    """
    perms = []
    for day in schedule.routes:
        seq = [p for r in day for p in r]
        rest = [p for p in range(1, n_points + 1) if p not in set(seq)]
        perms.append(seq + rest)
    mask = schedule.visit_mask(n_points)
    working = horizon.working
    for row in mask:
        for t in range(horizon.n_days):
            if not working[t]:
                row[t] = False
    return Chromosome.from_lists(perms, mask)
