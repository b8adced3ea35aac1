"""Exhaustive optimum for tiny instances.

Visit patterns are enumerated per point (they interact only through the
daily routing), patterns whose cyclic peak does not fit the largest bin or a
single truck are pruned, and each day's routing is solved exactly: best
order per subset of visited points, then an optimal partition into at most
``n_vehicles`` routes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

from ..decode import SERVICE_SLACK, repair_limit, select_bins
from ..errors import PointUnservableError, ProblemError, SearchTooLargeError
from ..model import TIME_TOL, WASTE_TOL, _point_accumulation, _route_time, build_schedule

DEFAULT_MAX_STATES = 10 ** 8


@dataclass(frozen=True)
class OracleResult:
    schedule: object
    cost: float
    states: int


def visit_patterns(waste, horizon, limit):
    """All visit rows (over the horizon) whose cyclic peak stays within ``limit``."""
    working = horizon.working
    days = [t for t in range(horizon.n_days) if working[t]]
    out = []
    for k in range(1, 1 << len(days)):
        row = [False] * horizon.n_days
        for bit, t in enumerate(days):
            if k >> bit & 1:
                row[t] = True
        row = tuple(row)
        acc = _point_accumulation(row, waste)
        if max(acc) <= limit + WASTE_TOL:
            out.append((row, acc))
    return out


def search_size(problem):
    limit = repair_limit(problem.catalog, problem.fleet)
    return math.prod(len(visit_patterns(w, problem.horizon, limit))
                     for w in problem.instance.daily_waste)


def _day_solver(problem):
    travel = problem.instance.travel
    service = problem.catalog.service
    fleet = problem.fleet
    unload = fleet.unload_minutes
    q = fleet.vehicle_capacity + WASTE_TOL
    t_l = fleet.shift_minutes + TIME_TOL
    n_v = fleet.n_vehicles

    @lru_cache(maxsize=None)
    def best_route(stops, bins):
        # stops: sorted points of one route; returns (minutes, order) or None
        best = None
        for order in itertools.permutations(stops):
            tt = _route_time(order, bins, travel, service, unload)
            if tt <= t_l and (best is None or tt < best[0]):
                best = (tt, order)
        return best

    @lru_cache(maxsize=None)
    def solve(visits, bins):
        """visits: ((point, pickup), ...) sorted by point. -> (minutes, routes) or None."""
        k = len(visits)
        if k == 0:
            return 0.0, ()
        full = (1 << k) - 1
        route_of = {}
        for s in range(1, full + 1):
            members = [visits[b] for b in range(k) if s >> b & 1]
            if sum(w for _, w in members) > q:
                continue
            r = best_route(tuple(p for p, _ in members), bins)
            if r is not None:
                route_of[s] = r
        # f[r][s]: cheapest cover of subset s by exactly r routes
        inf = (math.inf, ())
        f = [dict() for _ in range(n_v + 1)]
        f[0][0] = (0.0, ())
        for r in range(1, n_v + 1):
            prev = f[r - 1]
            cur = f[r]
            for s_prev, (cost_prev, routes_prev) in sorted(prev.items()):
                rest = full & ~s_prev
                if not rest:
                    continue
                low = rest & -rest
                # the new route always takes the lowest uncovered point
                sub = rest
                while sub:
                    if sub & low and sub in route_of:
                        tt, order = route_of[sub]
                        s = s_prev | sub
                        cand = cost_prev + tt
                        if cand < cur.get(s, inf)[0]:
                            cur[s] = (cand, routes_prev + (order,))
                    sub = (sub - 1) & rest
        best = None
        for r in range(1, n_v + 1):
            hit = f[r].get(full)
            if hit is not None and (best is None or hit[0] < best[0]):
                best = hit
        return best

    return solve


def brute_force(problem, max_states=DEFAULT_MAX_STATES, service_slack=SERVICE_SLACK):
    """Global optimum over visit patterns, bins (via select_bins) and routes.

    Raises :class:`SearchTooLargeError` when the number of pattern
    combinations exceeds ``max_states`` and ProblemError when no combination
    admits a feasible routing.
    """
    inst, hor, cat, fleet = problem.instance, problem.horizon, problem.catalog, problem.fleet
    limit = repair_limit(cat, fleet)
    per_point = []
    for i, w in enumerate(inst.daily_waste):
        pats = visit_patterns(w, hor, limit)
        if not pats:
            daily = _point_accumulation(hor.working, w)
            raise PointUnservableError(i + 1, max(daily), limit)
        per_point.append([(row, acc, select_bins([max(acc)], cat, service_slack)[0])
                          for row, acc in pats])
    states = math.prod(len(p) for p in per_point)
    if states > max_states:
        raise SearchTooLargeError(
            f"search too large: {states} pattern combinations exceed the cap of {max_states}")

    solve = _day_solver(problem)
    working = hor.working
    c_cv = fleet.cost_per_minute
    best = None
    for combo in itertools.product(*per_point):
        bins = tuple(b for _, _, b in combo)
        bin_cost = sum(cat.cost[b] for b in bins)
        if best is not None and bin_cost >= best[0]:
            continue
        minutes = 0.0
        day_routes = []
        for t in range(hor.n_days):
            if not working[t]:
                day_routes.append(())
                continue
            visits = tuple((i + 1, combo[i][1][t]) for i in range(len(combo)) if combo[i][0][t])
            hit = solve(visits, bins)
            if hit is None:
                break
            minutes += hit[0]
            day_routes.append(hit[1])
            if best is not None and bin_cost + c_cv * minutes >= best[0] - 1e-12:
                break
        else:
            cost = bin_cost + c_cv * minutes
            if best is None or cost < best[0] - 1e-12:
                best = (cost, bins, tuple(day_routes))
    if best is None:
        raise ProblemError("no feasible schedule exists for this instance")
    cost, bins, routes = best
    schedule = build_schedule(bins, routes, inst, hor, cat, fleet)
    return OracleResult(schedule, cost, states)
