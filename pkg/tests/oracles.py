"""Independent test oracles. Nothing here imports the package's evaluation code."""

import itertools


def steady_state(visits, waste, sweeps=4):
    """Fixed-point iteration of w_t = W + w_{t-1} * (1 - visited_{t-1}), cyclic."""
    n = len(visits)
    w = [0.0] * n
    for _ in range(sweeps):
        for t in range(n):
            prev = (t - 1) % n
            w[t] = waste + (0.0 if visits[prev] else w[prev])
    return w


def residual(acc, visits, waste):
    n = len(visits)
    return max(abs(acc[t] - (waste + (0.0 if visits[(t - 1) % n] else acc[(t - 1) % n])))
               for t in range(n))


def check_literal(data, bins, routes, accumulation=None, w_max=None):
    """Literal translation of the model's constraint list.

    ``data`` is a plain dict: travel, waste, cap, service, cost, n_days, rest
    (1-based), Q, n_V, T_L, T_U, C_CV. Returns ``(violated ids, objective)``.
    """
    travel, waste = data["travel"], data["waste"]
    n = len(waste)
    n_days = data["n_days"]
    bad = set()
    # arcs x[(i, j, v, t)] = 1
    x = {}
    y = {}
    for t, day in enumerate(routes, 1):
        for v, route in enumerate(day, 1):
            nodes = [0] + list(route) + [0]
            for k in range(len(nodes) - 1):
                key = (nodes[k], nodes[k + 1], v, t)
                x[key] = x.get(key, 0) + 1
    # 2a / 2b: bins only for points, exactly one each
    if len(bins) != n or any(not 0 <= b < len(data["cap"]) for b in bins):
        bad.add("2b")
    for t, day in enumerate(routes, 1):
        for route in day:
            if 0 in route:
                bad.add("2a")
    # 2d
    if any(i == j for (i, j, _, _) in x):
        bad.add("2d")
    # 2e
    for (i, j, v, t) in x:
        if t in data["rest"]:
            bad.add("2e")
    # 2f flow balance per node, vehicle, day
    for t in range(1, n_days + 1):
        for v in range(1, max((len(d) for d in routes), default=0) + 1):
            for j in range(n + 1):
                inflow = sum(x.get((i, j, v, t), 0) for i in range(n + 1))
                outflow = sum(x.get((j, i, v, t), 0) for i in range(n + 1))
                if inflow != outflow:
                    bad.add("2f")
    # 2g: a vehicle beyond n_V does not exist; each leaves the depot once
    for t, day in enumerate(routes, 1):
        if len(day) > data["n_V"]:
            bad.add("2g")
    # visits per day: at most once
    visited = [[False] * n_days for _ in range(n)]
    for t, day in enumerate(routes):
        seen = [p for r in day for p in r]
        if len(seen) != len(set(seen)):
            bad.add("2f")
        for p in seen:
            if 1 <= p <= n:
                visited[p - 1][t] = True
    # 2k/2l: steady state
    acc = []
    for i in range(n):
        if not any(visited[i]):
            bad.add("2l")
            acc.append([float("inf")] * n_days)
            continue
        acc.append(steady_state(visited[i], waste[i]))
    if accumulation is not None:
        for i in range(n):
            for t in range(n_days):
                if abs(accumulation[i][t] - acc[i][t]) > 1e-9:
                    bad.add("2k")
                if accumulation[i][t] < waste[i] - 1e-9:
                    bad.add("2k")
    peak = [max(a) for a in acc]
    if w_max is not None and any(abs(a - b) > 1e-9 for a, b in zip(w_max, peak)):
        bad.add("2m")
    # 2c
    for i in range(n):
        if 0 <= bins[i] < len(data["cap"]) and data["cap"][bins[i]] < peak[i] - 1e-9:
            bad.add("2c")
    # 2i/2j loads along arcs
    for t, day in enumerate(routes):
        for route in day:
            load = 0.0
            for p in route:
                load += acc[p - 1][t]
                if load > data["Q"] + 1e-9:
                    bad.add("2i")
    # 2h and objective
    minutes = 0.0
    for (i, j, v, t), cnt in x.items():
        minutes += cnt * travel[i][j]
        if j == 0:
            minutes += cnt * data["T_U"]
        if i != 0:
            minutes += cnt * data["service"][bins[i - 1]]
    for t, day in enumerate(routes, 1):
        for v, route in enumerate(day, 1):
            tt = sum(c * travel[i][j] for (i, j, vv, tt_), c in x.items() if vv == v and tt_ == t)
            tt += data["T_U"] + sum(data["service"][bins[p - 1]] for p in route)
            if tt > data["T_L"] + 1e-9:
                bad.add("2h")
    objective = sum(data["cost"][b] for b in bins) + data["C_CV"] * minutes
    return bad, objective


def problem_data(problem):
    """Flatten a package Problem into the plain dict used by check_literal."""
    inst, hor, cat, fl = problem.instance, problem.horizon, problem.catalog, problem.fleet
    return {
        "travel": [list(r) for r in inst.travel], "waste": list(inst.daily_waste),
        "cap": list(cat.capacity), "service": list(cat.service), "cost": list(cat.cost),
        "n_days": hor.n_days, "rest": set(hor.rest_days), "Q": fl.vehicle_capacity,
        "n_V": fl.n_vehicles, "T_L": fl.shift_minutes, "T_U": fl.unload_minutes,
        "C_CV": fl.cost_per_minute,
    }


def kw_by_hand(groups):
    """H without tie correction, straight from the textbook formula."""
    values = sorted(v for g in groups for v in g)
    n = len(values)
    rank = {}
    for v, grp in itertools.groupby(values):
        k = len(list(grp))
        first = values.index(v) + 1
        rank[v] = first + (k - 1) / 2
    s = sum(len(g) * (sum(rank[v] for v in g) / len(g)) ** 2 for g in groups)
    return 12.0 / (n * (n + 1)) * s - 3 * (n + 1)
