"""Linearised MILP model: construction, LP-format text I/O and solution substitution.

Variable names (all indices 1-based except the depot ``0`` and catalog
indices, which keep the catalog's own numbering)::

    x_i_j_v_t      binary, vehicle v drives i -> j on day t
    y_i_j_v_t      continuous, load carried on that arc
    w_i_t          continuous, waste at point i at end of day t
    wmax_i         continuous, peak waste at point i
    n_b_i          binary, combination b installed at point i (i = 0 is the depot)
    z_i_b_j_v_t    continuous, product n_b_j * x_i_j_v_t for points i, j
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field

from ..errors import ProblemError

FEAS_TOL = 1e-6


@dataclass
class Constraint:
    name: str
    terms: list  # [(variable, coefficient)]
    sense: str  # "<=", ">=", "="
    rhs: float

    @property
    def family(self):
        return self.name.split("_", 1)[0]


@dataclass
class LpModel:
    name: str = "model"
    variables: dict = field(default_factory=dict)  # name -> "B" | "C"
    constraints: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    big_m: float = 0.0

    def add_var(self, name, kind="C"):
        self.variables[name] = kind

    def add(self, name, terms, sense, rhs):
        merged = {}
        for var, coef in terms:
            merged[var] = merged.get(var, 0.0) + coef
        self.constraints.append(
            Constraint(name, [(v, c) for v, c in merged.items() if c != 0.0], sense, float(rhs)))

    def family_counts(self):
        return Counter(c.family for c in self.constraints)

    def kind_counts(self):
        return Counter(v.split("_", 1)[0] for v in self.variables)


def _x(i, j, v, t):
    return f"x_{i}_{j}_{v}_{t}"


def _y(i, j, v, t):
    return f"y_{i}_{j}_{v}_{t}"


def _z(i, b, j, v, t):
    return f"z_{i}_{b}_{j}_{v}_{t}"


def _n(b, i):
    return f"n_{b}_{i}"


def _w(i, t):
    return f"w_{i}_{t}"


def route_time_terms(problem, v, t):
    """Linear route time of vehicle ``v`` on day ``t`` as (variable, coefficient) terms."""
    inst, cat, fleet = problem.instance, problem.catalog, problem.fleet
    n = inst.n_points
    terms = [(_x(i, 0, v, t), fleet.unload_minutes) for i in range(1, n + 1)]
    for i in range(n + 1):
        for j in range(n + 1):
            c = inst.travel[i][j]
            if c:
                terms.append((_x(i, j, v, t), c))
    for i in range(1, n + 1):
        for b in range(len(cat)):
            s = cat.service[b]
            for j in range(1, n + 1):
                terms.append((_z(i, b, j, v, t), s))
    return terms


def build_milp(problem):
    """Assemble the linearised model (accumulation via big-M, route time via
    product variables) for ``problem``."""
    inst, hor, cat, fleet = problem.instance, problem.horizon, problem.catalog, problem.fleet
    n, n_b, n_v, n_t = inst.n_points, len(cat), fleet.n_vehicles, hor.n_days
    nodes = range(n + 1)
    points = range(1, n + 1)
    vehicles = range(1, n_v + 1)
    days = range(1, n_t + 1)
    working = hor.working
    q = fleet.vehicle_capacity
    big_m = cat.max_capacity
    m = LpModel(name=inst.name, big_m=big_m)

    for t in days:
        for v in vehicles:
            for i in nodes:
                for j in nodes:
                    m.add_var(_x(i, j, v, t), "B")
    for t in days:
        for v in vehicles:
            for i in nodes:
                for j in nodes:
                    m.add_var(_y(i, j, v, t))
    for i in points:
        for t in days:
            m.add_var(_w(i, t))
    for i in points:
        m.add_var(f"wmax_{i}")
    for i in nodes:
        for b in range(n_b):
            m.add_var(_n(b, i), "B")
    for t in days:
        for v in vehicles:
            for i in points:
                for b in range(n_b):
                    for j in points:
                        m.add_var(_z(i, b, j, v, t))

    obj = {}
    for i in points:
        for b in range(n_b):
            obj[_n(b, i)] = cat.cost[b]
    for t in days:
        for v in vehicles:
            for var, coef in route_time_terms(problem, v, t):
                obj[var] = obj.get(var, 0.0) + fleet.cost_per_minute * coef
    m.objective = [(k, c) for k, c in obj.items() if c != 0.0]

    for b in range(n_b):
        m.add(f"c2a_{b}", [(_n(b, 0), 1.0)], "=", 0.0)
    for i in points:
        m.add(f"c2b_{i}", [(_n(b, i), 1.0) for b in range(n_b)], "=", 1.0)
    for i in points:
        m.add(f"c2c_{i}", [(_n(b, i), cat.capacity[b]) for b in range(n_b)]
              + [(f"wmax_{i}", -1.0)], ">=", 0.0)
    for t in days:
        for v in vehicles:
            for i in nodes:
                m.add(f"c2d_{i}_{v}_{t}", [(_x(i, i, v, t), 1.0)], "=", 0.0)
    for t in days:
        if working[t - 1]:
            continue
        for v in vehicles:
            for i in nodes:
                for j in nodes:
                    m.add(f"c2e_{i}_{j}_{v}_{t}", [(_x(i, j, v, t), 1.0)], "=", 0.0)
    for t in days:
        for v in vehicles:
            for j in nodes:
                terms = [(_x(i, j, v, t), 1.0) for i in nodes]
                terms += [(_x(j, i, v, t), -1.0) for i in nodes]
                m.add(f"c2f_{j}_{v}_{t}", terms, "=", 0.0)
    for t in days:
        if not working[t - 1]:
            continue
        for v in vehicles:
            m.add(f"c2g_{v}_{t}", [(_x(0, i, v, t), 1.0) for i in points], "<=", 1.0)
    for t in days:
        if not working[t - 1]:
            continue
        for v in vehicles:
            m.add(f"c2h_{v}_{t}", route_time_terms(problem, v, t), "<=", fleet.shift_minutes)
    for t in days:
        for v in vehicles:
            for i in nodes:
                for j in nodes:
                    m.add(f"c2i_{i}_{j}_{v}_{t}", [(_y(i, j, v, t), 1.0), (_x(i, j, v, t), -q)],
                          "<=", 0.0)
    for t in days:
        for v in vehicles:
            for j in points:
                terms = [(_y(i, j, v, t), 1.0) for i in nodes]
                terms.append((_w(j, t), 1.0))
                terms += [(_y(j, i, v, t), -1.0) for i in nodes]
                terms += [(_x(i, j, v, t), q) for i in nodes]
                m.add(f"c2j_{j}_{v}_{t}", terms, "<=", q)
    for i in points:
        waste = inst.daily_waste[i - 1]
        for t in days:
            if t == 1:
                continue
            terms = [(_w(i, t), 1.0), (_w(i, t - 1), -1.0)]
            terms += [(_x(i, j, v, t - 1), big_m) for j in nodes for v in vehicles]
            m.add(f"l1_{i}_{t}", terms, ">=", waste)
        terms = [(_w(i, 1), 1.0), (_w(i, n_t), -1.0)]
        terms += [(_x(i, j, v, n_t), big_m) for j in nodes for v in vehicles]
        m.add(f"l2_{i}", terms, ">=", waste)
        for t in days:
            m.add(f"l3_{i}_{t}", [(_w(i, t), 1.0)], ">=", waste)
    for i in points:
        for t in days:
            m.add(f"c2m_{i}_{t}", [(_w(i, t), 1.0), (f"wmax_{i}", -1.0)], "<=", 0.0)
    for prefix, build in (
        ("lin1", lambda i, b, j, v, t: ([(_z(i, b, j, v, t), 1.0), (_n(b, j), -1.0)], "<=", 0.0)),
        ("lin2", lambda i, b, j, v, t: ([(_z(i, b, j, v, t), 1.0), (_x(i, j, v, t), -1.0)], "<=", 0.0)),
        ("lin3", lambda i, b, j, v, t: ([(_z(i, b, j, v, t), 1.0), (_n(b, j), -1.0),
                                         (_x(i, j, v, t), -1.0)], ">=", -1.0)),
    ):
        for t in days:
            for v in vehicles:
                for i in points:
                    for b in range(n_b):
                        for j in points:
                            terms, sense, rhs = build(i, b, j, v, t)
                            m.add(f"{prefix}_{i}_{b}_{j}_{v}_{t}", terms, sense, rhs)
    return m


def expected_variable_counts(n_points, n_bins, n_vehicles, n_days):
    nodes = n_points + 1
    return {
        "x": nodes ** 2 * n_vehicles * n_days,
        "y": nodes ** 2 * n_vehicles * n_days,
        "w": n_points * n_days,
        "wmax": n_points,
        "n": n_bins * nodes,
        "z": n_points ** 2 * n_bins * n_vehicles * n_days,
    }


def expected_constraint_counts(n_points, n_bins, n_vehicles, n_days, n_rest):
    nodes = n_points + 1
    n_work = n_days - n_rest
    prod = n_points ** 2 * n_bins * n_vehicles * n_days
    return {
        "c2a": n_bins,
        "c2b": n_points,
        "c2c": n_points,
        "c2d": nodes * n_vehicles * n_days,
        "c2e": nodes ** 2 * n_vehicles * n_rest,
        "c2f": nodes * n_vehicles * n_days,
        "c2g": n_vehicles * n_work,
        "c2h": n_vehicles * n_work,
        "c2i": nodes ** 2 * n_vehicles * n_days,
        "c2j": n_points * n_vehicles * n_days,
        "l1": n_points * (n_days - 1),
        "l2": n_points,
        "l3": n_points * n_days,
        "c2m": n_points * n_days,
        "lin1": prod,
        "lin2": prod,
        "lin3": prod,
    }


# ---------------------------------------------------------------- LP text format

_LINE = 200


def _num(c):
    # shortest text that reads back to the same float
    text = repr(float(c))
    return text[:-2] if text.endswith(".0") else text


def _expr(terms):
    parts = []
    for var, coef in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        parts.append(f"{sign} {var}" if mag == 1.0 else f"{sign} {_num(mag)} {var}")
    return parts


def _wrap(head, parts, tail=""):
    lines = []
    line = head
    for p in parts:
        if len(line) + len(p) + 1 > _LINE:
            lines.append(line)
            line = "  "
        line += " " + p
    if tail:
        if len(line) + len(tail) + 1 > _LINE:
            lines.append(line)
            line = "  "
        line += " " + tail
    lines.append(line)
    return lines


def write_lp(model):
    """Render ``model`` in CPLEX LP text format (deterministic byte output)."""
    out = [f"\\ {model.name}: linearised periodic routing + bin sizing model",
           f"\\ big-M = {_num(model.big_m)}", "Minimize"]
    out += _wrap(" obj:", _expr(model.objective) or ["0 " + next(iter(model.variables))])
    out.append("Subject To")
    for c in model.constraints:
        out += _wrap(f" {c.name}:", _expr(c.terms), f"{c.sense} {_num(c.rhs)}")
    binaries = [v for v, k in model.variables.items() if k == "B"]
    if binaries:
        out.append("Binaries")
        for k in range(0, len(binaries), 8):
            out.append(" " + " ".join(binaries[k:k + 8]))
    out.append("End")
    return "\n".join(out) + "\n"


def emit_milp(problem):
    return write_lp(build_milp(problem))


_SECTION = re.compile(
    r"^(minimize|minimum|min|maximize|maximum|max|subject to|such that|st|s\.t\.|bounds?|"
    r"binary|binaries|bin|generals?|general|integers?|end)$", re.IGNORECASE)
_TOKEN = re.compile(r"\s*(<=|>=|=<|=>|[<>=]|[+-]|[0-9.]+(?:[eE][+-]?[0-9]+)?|[A-Za-z_][\w.\[\]]*:?)")


def _tokens(text, lineno):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ProblemError(f"LP line {lineno}: cannot parse near {text[pos:pos + 20]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _parse_linear(tokens, lineno):
    terms = []
    sign, coef = 1.0, None
    for tok in tokens:
        if tok in "+-":
            sign = -1.0 if tok == "-" else 1.0
            continue
        if re.fullmatch(r"[0-9.]+(?:[eE][+-]?[0-9]+)?", tok):
            coef = float(tok)
            continue
        terms.append((tok, sign * (1.0 if coef is None else coef)))
        sign, coef = 1.0, None
    if coef is not None:
        raise ProblemError(f"LP line {lineno}: dangling constant")
    return terms


def parse_lp(text):
    """Parse LP text as written by :func:`write_lp` back into an :class:`LpModel`.

    Handles the subset used here: one objective, named constraints possibly
    spanning several lines, and a Binaries section. Undeclared variables are
    continuous.
    """
    model = LpModel()
    section = None
    pending = []
    names_seen = []

    def flush():
        if not pending:
            return
        tokens = [t for _, line in pending for t in line]
        lineno = pending[0][0]
        pending.clear()
        if section == "obj":
            if tokens and tokens[0].endswith(":"):
                tokens = tokens[1:]
            model.objective = _parse_linear(tokens, lineno)
            for var, _ in model.objective:
                names_seen.append(var)
            return
        name = f"r{len(model.constraints)}"
        if tokens[0].endswith(":"):
            name = tokens[0][:-1]
            tokens = tokens[1:]
        sense_at = next((k for k, t in enumerate(tokens) if t in ("<=", ">=", "=", "<", ">", "=<", "=>")),
                        None)
        if sense_at is None or sense_at + 1 >= len(tokens):
            raise ProblemError(f"LP line {lineno}: constraint without sense or rhs")
        sense = {"<": "<=", "=<": "<=", ">": ">=", "=>": ">="}.get(tokens[sense_at], tokens[sense_at])
        rhs_tokens = tokens[sense_at + 1:]
        rhs = float("".join(rhs_tokens))
        terms = _parse_linear(tokens[:sense_at], lineno)
        for var, _ in terms:
            names_seen.append(var)
        model.constraints.append(Constraint(name, terms, sense, rhs))

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if _SECTION.match(key):
            flush()
            if key.startswith("min") or key.startswith("max"):
                section = "obj"
            elif key in ("subject to", "such that", "st", "s.t."):
                section = "st"
            elif key.startswith("bin"):
                section = "bin"
            elif key == "end":
                section = "end"
            else:
                section = "other"
            continue
        if section == "obj":
            pending.append((lineno, _tokens(line, lineno)))
        elif section == "st":
            toks = _tokens(line, lineno)
            starts_new = toks and toks[0].endswith(":")
            if starts_new:
                flush()
            pending.append((lineno, toks))
        elif section == "bin":
            for var in line.split():
                model.variables[var] = "B"
        elif section == "end":
            raise ProblemError(f"LP line {lineno}: content after End")
        elif section is None:
            raise ProblemError(f"LP line {lineno}: content before objective section")
    flush()
    if section != "end":
        raise ProblemError("LP text does not finish with End")
    for var in names_seen:
        model.variables.setdefault(var, "C")
    return model


# ---------------------------------------------------------------- substitution

def substitute_solution(model, assignment, tol=FEAS_TOL):
    """Evaluate every constraint (and variable domain) at ``assignment``.

    Returns ``[(name, lhs, sense, rhs, slack)]`` for the violated rows; slack
    is negative by the violated amount. Raises ProblemError when a model
    variable is missing from the assignment.
    """
    missing = [v for v in model.variables if v not in assignment]
    if missing:
        raise ProblemError(f"assignment misses {len(missing)} variable(s), e.g. {missing[0]}")
    out = []
    for var, kind in model.variables.items():
        val = assignment[var]
        if val < -tol:
            out.append((f"bound:{var}", val, ">=", 0.0, val))
        if kind == "B" and min(abs(val), abs(val - 1.0)) > tol:
            out.append((f"binary:{var}", val, "in", 0.0, -min(abs(val), abs(val - 1.0))))
    for c in model.constraints:
        lhs = sum(coef * assignment[var] for var, coef in c.terms)
        if c.sense == "<=":
            slack = c.rhs - lhs
        elif c.sense == ">=":
            slack = lhs - c.rhs
        else:
            slack = -abs(lhs - c.rhs)
        if slack < -tol:
            out.append((c.name, lhs, c.sense, c.rhs, slack))
    return out


def objective_value(model, assignment):
    return sum(coef * assignment[var] for var, coef in model.objective)


def schedule_to_assignment(schedule, problem):
    """Map a schedule onto every model variable.

    Route ``r`` of a day is driven by vehicle ``r + 1``; ``y`` carries the
    cumulative pickup along the route's arcs.
    """
    inst, hor, cat, fleet = problem.instance, problem.horizon, problem.catalog, problem.fleet
    n, n_v = inst.n_points, fleet.n_vehicles
    model_vars = build_variable_names(problem)
    a = dict.fromkeys(model_vars, 0.0)
    for t, day in enumerate(schedule.routes, 1):
        if len(day) > n_v:
            raise ProblemError(f"day {t} has {len(day)} routes but only {n_v} vehicles")
        for v, route in enumerate(day, 1):
            stops = [0, *route, 0]
            loads = schedule.loads[t - 1][v - 1]
            for k in range(len(stops) - 1):
                i, j = stops[k], stops[k + 1]
                a[_x(i, j, v, t)] = 1.0
                a[_y(i, j, v, t)] = loads[k]
                if i and j:
                    a[_z(i, schedule.bin_assignment[j - 1], j, v, t)] = 1.0
    for i in range(1, n + 1):
        for t in range(1, hor.n_days + 1):
            a[_w(i, t)] = schedule.accumulation[i - 1][t - 1]
        a[f"wmax_{i}"] = schedule.w_max[i - 1]
        a[_n(schedule.bin_assignment[i - 1], i)] = 1.0
    return a


def build_variable_names(problem):
    inst, hor, cat, fleet = problem.instance, problem.horizon, problem.catalog, problem.fleet
    n, n_b = inst.n_points, len(cat)
    names = []
    for t in range(1, hor.n_days + 1):
        for v in range(1, fleet.n_vehicles + 1):
            names += [_x(i, j, v, t) for i in range(n + 1) for j in range(n + 1)]
            names += [_y(i, j, v, t) for i in range(n + 1) for j in range(n + 1)]
            names += [_z(i, b, j, v, t) for i in range(1, n + 1) for b in range(n_b)
                      for j in range(1, n + 1)]
    names += [_w(i, t) for i in range(1, n + 1) for t in range(1, hor.n_days + 1)]
    names += [f"wmax_{i}" for i in range(1, n + 1)]
    names += [_n(b, i) for i in range(n + 1) for b in range(n_b)]
    return names


def write_assignment(assignment, path):
    with open(path, "w") as fh:
        json.dump(assignment, fh, indent=0, sort_keys=True)


def read_assignment(path):
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ProblemError("assignment file must be a JSON object")
    return {str(k): float(v) for k, v in data.items()}
