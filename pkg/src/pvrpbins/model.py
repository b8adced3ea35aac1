"""Domain types and the exact evaluator for the periodic routing + bin sizing problem.

Conventions used throughout the package:

* collection points are numbered ``1..n_points``; ``0`` is the depot;
* days are numbered ``1..n_days`` (day 1 is Monday) in every public report,
  while per-day sequences (``routes``, columns of ``accumulation``) are plain
  0-based Python sequences, so day ``t`` lives at position ``t - 1``;
* waste is collected at the end of the day, so ``accumulation[i][t]`` is the
  amount sitting in the bins of point ``i`` just before a possible pickup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import ProblemError, ShiftFormulaUndefined, UnvisitedPointError

COST_TOL = 1e-6
WASTE_TOL = 1e-9
TIME_TOL = 1e-9

DAY_NAMES = ("MON", "TUE", "WED", "THU", "FRI", "SAT", "SUN")


def day_name(day):
    """Short label for a 1-based day number (falls back to ``D<n>``)."""
    if 1 <= day <= len(DAY_NAMES):
        return DAY_NAMES[day - 1]
    return f"D{day}"


@dataclass(frozen=True, eq=False)
class Instance:
    """Travel times, daily waste and coordinates of one problem instance.

    ``travel`` is a square ``(n_points + 1)`` matrix in minutes with the depot
    at row/column 0. ``daily_waste[k]`` belongs to point ``k + 1``.
    """

    name: str
    travel: tuple
    daily_waste: tuple
    coords: tuple | None = None
    depot_coord: tuple | None = None

    def __post_init__(self):
        travel = tuple(tuple(float(v) for v in row) for row in self.travel)
        waste = tuple(float(v) for v in self.daily_waste)
        object.__setattr__(self, "travel", travel)
        object.__setattr__(self, "daily_waste", waste)
        n = len(waste)
        if len(travel) != n + 1 or any(len(row) != n + 1 for row in travel):
            raise ProblemError(
                f"travel matrix must be {n + 1}x{n + 1} for {n} points")
        for i, row in enumerate(travel):
            if row[i] != 0.0:
                raise ProblemError(f"travel matrix diagonal is nonzero at {i}")
            if min(row) < 0.0 or not all(math.isfinite(v) for v in row):
                raise ProblemError(f"travel matrix row {i} has negative or non-finite entries")
        if any(not (w > 0.0 and math.isfinite(w)) for w in waste):
            raise ProblemError("daily waste must be positive for every point")
        if self.coords is not None:
            coords = tuple((float(a), float(b)) for a, b in self.coords)
            if len(coords) != n:
                raise ProblemError("coords must have one (lat, lon) pair per point")
            object.__setattr__(self, "coords", coords)

    @property
    def n_points(self):
        return len(self.daily_waste)

    @property
    def matrix(self):
        return np.array(self.travel)

    def waste(self, point):
        return self.daily_waste[point - 1]


@dataclass(frozen=True)
class Horizon:
    """Planning horizon of ``n_days`` days with a set of rest days (1-based)."""

    n_days: int = 7
    rest_days: frozenset = frozenset({7})

    def __post_init__(self):
        rest = frozenset(int(d) for d in self.rest_days)
        object.__setattr__(self, "rest_days", rest)
        if self.n_days < 1:
            raise ProblemError("horizon needs at least one day")
        if any(d < 1 or d > self.n_days for d in rest):
            raise ProblemError(f"rest days {sorted(rest)} outside 1..{self.n_days}")
        if len(rest) >= self.n_days:
            raise ProblemError("horizon needs at least one working day")

    @property
    def working(self):
        """Per-day flags (0-based positions): True on working days."""
        return tuple(d + 1 not in self.rest_days for d in range(self.n_days))

    @property
    def working_days(self):
        return tuple(d for d in range(1, self.n_days + 1) if d not in self.rest_days)

    @property
    def n_working(self):
        return self.n_days - len(self.rest_days)


@dataclass(frozen=True)
class BinCatalog:
    """Bin combinations: capacity (m3), service time (min) and horizon cost (US$)."""

    capacity: tuple
    service: tuple
    cost: tuple

    def __post_init__(self):
        for name in ("capacity", "service", "cost"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        n = len(self.capacity)
        if n == 0:
            raise ProblemError("catalog needs at least one bin combination")
        if len(self.service) != n or len(self.cost) != n:
            raise ProblemError("catalog columns differ in length")
        if min(self.capacity + self.service + self.cost) <= 0.0:
            raise ProblemError("catalog values must all be positive")

    def __len__(self):
        return len(self.capacity)

    @property
    def max_capacity(self):
        return max(self.capacity)


def default_catalog():
    """The default catalog of eight bin combinations (weekly costs)."""
    return BinCatalog(
        capacity=(1.1, 2.2, 2.4, 3.3, 3.5, 4.3, 4.8, 5.6),
        service=(0.70, 1.40, 0.66, 2.10, 1.36, 1.37, 1.32, 1.33),
        cost=(0.78, 1.56, 1.56, 1.56, 1.56, 1.56, 1.56, 1.56),
    )


@dataclass(frozen=True)
class FleetParams:
    vehicle_capacity: float
    n_vehicles: int
    shift_minutes: float
    unload_minutes: float = 8.0
    cost_per_minute: float = 0.5764

    def __post_init__(self):
        if min(self.vehicle_capacity, self.n_vehicles, self.shift_minutes,
               self.unload_minutes, self.cost_per_minute) <= 0:
            raise ProblemError("fleet parameters must all be positive")

    @classmethod
    def for_instance(cls, instance, horizon, vehicle_capacity=None, n_vehicles=None,
                     shift_minutes=None, **kw):
        """Fleet with the usual defaults: 12 m3 trucks up to 12 points, 21 m3 above,
        and fleet size / shift length from :func:`derive_fleet` unless given."""
        if vehicle_capacity is None:
            vehicle_capacity = 12.0 if instance.n_points <= 12 else 21.0
        if n_vehicles is None or shift_minutes is None:
            if n_vehicles is None:
                n_vehicles = math.ceil(instance.n_points / 10)
            if shift_minutes is None:
                shift_minutes = shift_length(instance, horizon, n_vehicles)
        return cls(vehicle_capacity=vehicle_capacity, n_vehicles=n_vehicles,
                   shift_minutes=shift_minutes, **kw)


def shift_length(instance, horizon, n_vehicles):
    if n_vehicles < 2:
        raise ShiftFormulaUndefined(
            f"shift formula undefined for {n_vehicles} vehicle(s); supply the shift length")
    total = sum(sum(row) for row in instance.travel)
    # ceil of a float ratio; guard against 78.00000000001-style noise
    ratio = total / (n_vehicles * (n_vehicles - 1) * horizon.n_working)
    return math.ceil(round(ratio, 9))


def derive_fleet(n_points, instance, horizon):
    """Fleet size ``ceil(n/10)`` and shift length from the mean arc time.

    Raises :class:`ShiftFormulaUndefined` when fewer than two vehicles result.
    """
    n_vehicles = math.ceil(n_points / 10)
    return n_vehicles, shift_length(instance, horizon, n_vehicles)


class Violation(NamedTuple):
    constraint: str
    day: int | None
    magnitude: float
    point: int | None = None
    route: int | None = None


@dataclass(frozen=True)
class Schedule:
    """A decoded solution.

    ``routes[t]`` lists the routes of day ``t + 1``; route ``r`` of a day is
    driven by vehicle ``r + 1``. ``loads[t][r]`` is the cumulative load on each
    arc of that route (starts at 0, ends with the amount unloaded at the depot).
    """

    bin_assignment: tuple
    routes: tuple
    accumulation: tuple
    w_max: tuple
    loads: tuple
    route_times: tuple

    @property
    def n_routes(self):
        return tuple(len(day) for day in self.routes)

    def visit_mask(self, n_points):
        mask = [[False] * len(self.routes) for _ in range(n_points)]
        for t, day in enumerate(self.routes):
            for route in day:
                for p in route:
                    if 1 <= p <= n_points:
                        mask[p - 1][t] = True
        return mask


@dataclass
class EvalReport:
    bin_cost: float
    routing_cost: float
    overall_cost: float
    violations: list = field(default_factory=list)
    excess_routes: tuple = ()
    time_overruns: tuple = ()

    @property
    def feasible(self):
        return not self.violations


def _check_route(route, n_points, bin_assignment):
    if not route:
        raise ProblemError("empty route")
    for p in route:
        if not 1 <= p <= n_points:
            raise ProblemError(f"unknown point index {p}")
        if p > len(bin_assignment) or bin_assignment[p - 1] is None:
            raise ProblemError(f"point {p} has no bin assignment")


def route_time(route, bin_assignment, instance, fleet, catalog=None):
    """Minutes for one depot-to-depot tour: travel + service + one unload."""
    catalog = catalog or default_catalog()
    _check_route(route, instance.n_points, bin_assignment)
    return _route_time(route, bin_assignment, instance.travel, catalog.service,
                       fleet.unload_minutes)


def _route_time(route, bin_assignment, travel, service, unload):
    total = unload
    prev = 0
    for p in route:
        total += travel[prev][p] + service[bin_assignment[p - 1]]
        prev = p
    return total + travel[prev][0]


def point_accumulation(visits, waste):
    """Cyclic steady-state accumulation of one point.

    ``visits`` is the point's per-day visit flags. Returns a tuple of per-day
    amounts, or ``None`` if the point is never visited.
    """
    return _point_accumulation(tuple(bool(v) for v in visits), float(waste))


@lru_cache(maxsize=1 << 16)
def _point_accumulation(visits, waste):
    n = len(visits)
    last = None
    for t in range(n - 1, -1, -1):
        if visits[t]:
            last = t
            break
    if last is None:
        return None
    acc = [0.0] * n
    days = 0
    t = last
    for _ in range(n):
        t += 1
        if t == n:
            t = 0
        days += 1
        acc[t] = waste * days
        if visits[t]:
            days = 0
    return tuple(acc)


def accumulate_waste(visit_mask, instance, horizon):
    """Steady-state accumulation ``w[i][t]`` and its per-point maximum.

    ``visit_mask`` is point-major (``n_points`` rows of ``n_days`` flags).
    Waste keeps accruing on rest days.
    """
    if len(visit_mask) != instance.n_points:
        raise ProblemError("visit mask must have one row per point")
    acc, w_max = [], []
    for i, row in enumerate(visit_mask):
        if len(row) != horizon.n_days:
            raise ProblemError("visit mask row length differs from horizon")
        a = _point_accumulation(tuple(row), instance.daily_waste[i])
        if a is None:
            raise UnvisitedPointError(i + 1)
        acc.append(a)
        w_max.append(max(a))
    return tuple(acc), tuple(w_max)


def route_loads(route, accumulation, day, fleet):
    """Cumulative load on each arc of ``route`` on 1-based ``day``.

    Returns ``(loads, overflow)`` where ``loads`` has ``len(route) + 1`` entries
    and ``overflow`` is True when the vehicle capacity is exceeded.
    """
    t = day - 1
    loads = [0.0]
    running = 0.0
    for p in route:
        running += accumulation[p - 1][t]
        loads.append(running)
    return loads, running > fleet.vehicle_capacity + WASTE_TOL


def build_schedule(bin_assignment, routes, instance, horizon, catalog, fleet):
    """Derive accumulation, loads and route times for given bins and routes."""
    routes = tuple(tuple(tuple(r) for r in day) for day in routes)
    if len(routes) != horizon.n_days:
        raise ProblemError("routes must list every day of the horizon")
    for day in routes:
        for r in day:
            _check_route(r, instance.n_points, bin_assignment)
    visits = [[False] * horizon.n_days for _ in range(instance.n_points)]
    for t, day in enumerate(routes):
        for r in day:
            for p in r:
                visits[p - 1][t] = True
    acc, w_max = accumulate_waste(visits, instance, horizon)
    loads = tuple(tuple(tuple(route_loads(r, acc, t + 1, fleet)[0]) for r in day)
                  for t, day in enumerate(routes))
    times = tuple(tuple(route_time(r, bin_assignment, instance, fleet, catalog) for r in day)
                  for day in routes)
    return Schedule(tuple(bin_assignment), routes, acc, w_max, loads, times)


def evaluate(schedule, instance, horizon, catalog, fleet):
    """Objective breakdown and constraint violations of a schedule.

    Route times and loads are recomputed from the instance; the schedule's
    stored accumulation is checked against the cyclic recurrence implied by
    its routes. Violation ids follow the model's constraint labels
    (``2a``..``2m``).
    """
    n = instance.n_points
    violations = []
    bins = schedule.bin_assignment

    if len(bins) != n:
        violations.append(Violation("2b", None, abs(len(bins) - n)))
    for i, b in enumerate(bins):
        if b is None or not 0 <= b < len(catalog):
            violations.append(Violation("2b", None, 1.0, point=i + 1))
    valid_bins = [b if b is not None and 0 <= b < len(catalog) else None for b in bins]
    bin_cost = sum(catalog.cost[b] for b in valid_bins if b is not None)

    working = horizon.working
    visits = [[False] * horizon.n_days for _ in range(n)]
    routing_minutes = 0.0
    excess = []
    overruns = []
    for t, day in enumerate(schedule.routes):
        d = t + 1
        if day and not working[t]:
            violations.append(Violation("2e", d, float(len(day))))
        extra = max(0, len(day) - fleet.n_vehicles)
        excess.append(extra)
        if extra:
            violations.append(Violation("2g", d, float(extra)))
        seen = set()
        day_over = []
        for r, route in enumerate(day):
            if any(p == 0 for p in route):
                violations.append(Violation("2a", d, 1.0, route=r + 1))
                route = tuple(p for p in route if p != 0)
            for p in route:
                if p in seen:
                    violations.append(Violation("2f", d, 1.0, point=p, route=r + 1))
                seen.add(p)
                if 1 <= p <= n:
                    visits[p - 1][t] = True
            tt = route_time(route, valid_bins, instance, fleet, catalog)
            routing_minutes += tt
            over = max(0.0, tt - fleet.shift_minutes)
            day_over.append(over)
            if over > TIME_TOL:
                violations.append(Violation("2h", d, over, route=r + 1))
        overruns.append(tuple(day_over))

    try:
        acc, w_max = accumulate_waste(visits, instance, horizon)
    except UnvisitedPointError as exc:
        violations.append(Violation("2l", None, math.inf, point=exc.point))
        acc = w_max = None

    if acc is not None:
        for i in range(n):
            b = valid_bins[i]
            if b is not None and catalog.capacity[b] < w_max[i] - WASTE_TOL:
                violations.append(
                    Violation("2c", None, w_max[i] - catalog.capacity[b], point=i + 1))
            stored = schedule.accumulation[i] if i < len(schedule.accumulation) else None
            for t in range(horizon.n_days):
                if stored is None or abs(stored[t] - acc[i][t]) > WASTE_TOL:
                    cid = "2l" if t == 0 else "2k"
                    got = stored[t] if stored is not None else math.nan
                    violations.append(Violation(cid, t + 1, abs(got - acc[i][t]), point=i + 1))
            stored_max = schedule.w_max[i] if i < len(schedule.w_max) else math.nan
            if not abs(stored_max - w_max[i]) <= WASTE_TOL:
                violations.append(Violation("2m", None, abs(stored_max - w_max[i]), point=i + 1))
        for t, day in enumerate(schedule.routes):
            for r, route in enumerate(day):
                loads, overflow = route_loads([p for p in route if 1 <= p <= n], acc, t + 1, fleet)
                if overflow:
                    violations.append(
                        Violation("2i", t + 1, loads[-1] - fleet.vehicle_capacity, route=r + 1))

    routing_cost = fleet.cost_per_minute * routing_minutes
    return EvalReport(
        bin_cost=bin_cost,
        routing_cost=routing_cost,
        overall_cost=bin_cost + routing_cost,
        violations=violations,
        excess_routes=tuple(excess),
        time_overruns=tuple(overruns),
    )


@dataclass(frozen=True)
class Problem:
    """Everything needed to decode and score a candidate."""

    instance: Instance
    horizon: Horizon
    catalog: BinCatalog
    fleet: FleetParams
