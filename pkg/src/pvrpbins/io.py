"""Instance files (time.txt / waste.txt) and solution JSON.

time.txt holds the ``(n + 1) x (n + 1)`` travel-time matrix in minutes,
depot first, separated by whitespace (commas and semicolons are tolerated).
An optional first line with a single integer gives the matrix order.

waste.txt holds one record per collection point: ``lat lon waste`` (m3 per
day). Also accepted:

* ``id lat lon waste`` records (four columns); id ``0`` marks the depot;
* a first record starting with ``depot`` (``depot lat lon``) for the depot;
* a ``# columns: lon lat waste`` style directive fixing the column order.

Without a directive the order is checked with range tests (latitude within
[-90, 90], longitude within [-180, 180], waste > 0). If the default order
fails them, the first other order that passes is used and a warning logged.

Solution files are JSON::

    {"format": "pvrpbins-solution", "version": 1,
     "instance": "i.12.1",
     "chromosome": {"perms": [[...], ...], "mask": [[0, 1, ...], ...]} | null,
     "summary": {"bin_assignment": [...], "routes": [[[...], ...], ...],
                 "route_times": [[...], ...], "bin_cost": ..., "routing_cost": ...,
                 "overall_cost": ..., "feasible": true},
     "config": {...} | null, "seed": 0 | null}

Bins in ``bin_assignment`` are catalog indices. A null chromosome stores an
externally built schedule; reading it then re-evaluates the routes instead
of re-decoding.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .decode import Chromosome, decode
from .errors import InstanceFormatError, SolutionFormatError, StaleSolutionError
from .model import COST_TOL, TIME_TOL, Instance, build_schedule, evaluate

log = logging.getLogger(__name__)

FORMAT = "pvrpbins-solution"
VERSION = 1
_SEP = re.compile(r"[\s,;]+")
_COLUMNS = ("lat", "lon", "waste")


def _numbers(line, lineno, path):
    out = []
    for tok in _SEP.split(line.strip()):
        if not tok:
            continue
        try:
            v = float(tok)
        except ValueError:
            raise InstanceFormatError(f"{path}:{lineno}: non-numeric token {tok!r}") from None
        if not math.isfinite(v):
            raise InstanceFormatError(f"{path}:{lineno}: non-finite value {tok!r}")
        out.append(v)
    return out


def read_time_matrix(path):
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0]
        if not line.strip():
            continue
        rows.append((lineno, _numbers(line, lineno, path)))
    if not rows:
        raise InstanceFormatError(f"{path}: empty travel-time file")
    declared = None
    if len(rows[0][1]) == 1 and len(rows) > 1:
        declared = rows[0][1][0]
        rows = rows[1:]
    values = [v for _, r in rows for v in r]
    size = math.isqrt(len(values))
    if size * size != len(values) or size < 2:
        raise InstanceFormatError(
            f"{path}: {len(values)} values do not form a square matrix with a depot row")
    if declared is not None and declared != size:
        raise InstanceFormatError(f"{path}: header says {declared:g} but matrix order is {size}")
    if min(values) < 0:
        raise InstanceFormatError(f"{path}: negative travel time")
    return [values[k * size:(k + 1) * size] for k in range(size)]


def _layout_ok(records, order):
    for rec in records:
        vals = dict(zip(order, rec))
        if not (-90 <= vals["lat"] <= 90 and -180 <= vals["lon"] <= 180 and vals["waste"] > 0):
            return False
    return True


def read_waste_file(path):
    """Return ``(coords, waste, depot_coord)`` from a waste.txt file."""
    directive = None
    records = []
    depot = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = raw.strip()
        m = re.match(r"#\s*columns?\s*[:=]\s*(.+)$", stripped, re.IGNORECASE)
        if m:
            cols = tuple(c.lower() for c in _SEP.split(m.group(1).strip()) if c)
            if sorted(c for c in cols if c != "id") != sorted(_COLUMNS):
                raise InstanceFormatError(f"{path}:{lineno}: bad columns directive {m.group(1)!r}")
            directive = cols
            continue
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = _SEP.split(line)[0]
        if head.lower() == "depot":
            if records or depot is not None:
                raise InstanceFormatError(f"{path}:{lineno}: depot record must come first")
            nums = _numbers(line[len(head):], lineno, path)
            if len(nums) < 2:
                raise InstanceFormatError(f"{path}:{lineno}: depot record needs lat and lon")
            depot = (lineno, nums)
            continue
        records.append((lineno, _numbers(line, lineno, path)))
    if not records:
        raise InstanceFormatError(f"{path}: no collection-point records")
    widths = {len(r) for _, r in records}
    if len(widths) != 1:
        raise InstanceFormatError(f"{path}: records have differing column counts {sorted(widths)}")
    width = widths.pop()
    if directive is not None and len(directive) != width:
        raise InstanceFormatError(f"{path}: directive names {len(directive)} columns, records have {width}")
    if directive is None:
        if width == 3:
            directive = _COLUMNS
        elif width == 4:
            directive = ("id",) + _COLUMNS
        else:
            raise InstanceFormatError(f"{path}: expected 3 or 4 columns per record, found {width}")
        guess = True
    else:
        guess = False

    id_at = directive.index("id") if "id" in directive else None
    if id_at is not None:
        kept = []
        for lineno, r in records:
            if r[id_at] == 0:
                if depot is not None or kept:
                    raise InstanceFormatError(f"{path}:{lineno}: depot record (id 0) must come first")
                depot = (lineno, [v for k, v in enumerate(r) if k != id_at])
                continue
            kept.append((lineno, r))
        ids = [int(r[id_at]) for _, r in kept]
        if ids != list(range(1, len(kept) + 1)):
            raise InstanceFormatError(f"{path}: point ids must run 1..n in order")
        records = kept
        order = tuple(c for c in directive if c != "id")
        rows = [[v for k, v in enumerate(r) if k != id_at] for _, r in records]
    else:
        order = directive
        rows = [r for _, r in records]

    if not _layout_ok(rows, order):
        if not guess:
            raise InstanceFormatError(f"{path}: values fail range checks for columns {order}")
        alt = next((o for o in itertools.permutations(_COLUMNS) if _layout_ok(rows, o)), None)
        if alt is None:
            raise InstanceFormatError(
                f"{path}: no column order passes the lat/lon/waste range checks")
        log.warning("%s: default column order fails range checks, using %s", path, alt)
        order = alt
    coords, waste = [], []
    for r in rows:
        vals = dict(zip(order, r))
        coords.append((vals["lat"], vals["lon"]))
        waste.append(vals["waste"])
    depot_coord = None
    if depot is not None:
        nums = depot[1]
        if len(nums) == 3 and id_at is not None:
            vals = dict(zip(order, nums))
            depot_coord = (vals["lat"], vals["lon"])
        else:
            depot_coord = (nums[0], nums[1])
    return coords, waste, depot_coord


def parse_instance(time_path, waste_path, name=None):
    """Load an instance from its travel-time and waste files."""
    travel = read_time_matrix(time_path)
    coords, waste, depot = read_waste_file(waste_path)
    if len(travel) != len(waste) + 1:
        raise InstanceFormatError(
            f"dimension mismatch: {time_path} is {len(travel)}x{len(travel)} "
            f"but {waste_path} has {len(waste)} points (expected {len(travel) - 1})")
    if name is None:
        name = Path(time_path).resolve().parent.name
    try:
        return Instance(name, travel, waste, coords=coords, depot_coord=depot)
    except InstanceFormatError:
        raise
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from exc


def load_instance_dir(path):
    """Instance from a directory holding ``time.txt`` and ``waste.txt``."""
    path = Path(path)
    return parse_instance(path / "time.txt", path / "waste.txt", name=path.name)


def write_instance(instance, directory):
    """Write ``time.txt`` and ``waste.txt`` for ``instance`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "time.txt").write_text(
        "".join(" ".join(repr(v) for v in row) + "\n" for row in instance.travel))
    coords = instance.coords or [(0.0, 0.0)] * instance.n_points
    lines = []
    if instance.depot_coord is not None:
        lines.append(f"depot {instance.depot_coord[0]!r} {instance.depot_coord[1]!r}\n")
    for (lat, lon), w in zip(coords, instance.daily_waste):
        lines.append(f"{lat!r} {lon!r} {w!r}\n")
    (directory / "waste.txt").write_text("".join(lines))
    return directory


def depot_position(instance):
    """Depot coordinate for plotting: the given one, else the points' centroid."""
    if instance.depot_coord is not None:
        return tuple(instance.depot_coord)
    lats = [c[0] for c in instance.coords]
    lons = [c[1] for c in instance.coords]
    return (sum(lats) / len(lats), sum(lons) / len(lons))


# ---------------------------------------------------------------- solutions

@dataclass
class SolutionFile:
    instance: str
    chromosome: Chromosome | None
    schedule: object
    summary: dict
    config: dict | None = None
    seed: int | None = None


def summarize(schedule, problem):
    rep = evaluate(schedule, problem.instance, problem.horizon, problem.catalog, problem.fleet)
    return {
        "bin_assignment": list(schedule.bin_assignment),
        "routes": [[list(r) for r in day] for day in schedule.routes],
        "route_times": [list(day) for day in schedule.route_times],
        "bin_cost": rep.bin_cost,
        "routing_cost": rep.routing_cost,
        "overall_cost": rep.overall_cost,
        "feasible": rep.feasible,
    }


def make_solution(problem, schedule, chromosome=None, config=None, seed=None):
    return SolutionFile(problem.instance.name, chromosome, schedule,
                        summarize(schedule, problem), config, seed)


def solution_to_json(sol):
    chrom = None
    if sol.chromosome is not None:
        chrom = {"perms": [list(r) for r in sol.chromosome.perms],
                 "mask": [[int(b) for b in r] for r in sol.chromosome.mask]}
    data = {"format": FORMAT, "version": VERSION, "instance": sol.instance,
            "chromosome": chrom, "summary": sol.summary, "config": sol.config, "seed": sol.seed}
    return json.dumps(data, indent=1, sort_keys=False) + "\n"


def write_solution(sol, path):
    Path(path).write_text(solution_to_json(sol))


def _require(cond, msg):
    if not cond:
        raise SolutionFormatError(f"solution schema: {msg}")


def solution_from_json(text, problem):
    """Parse and verify a solution against ``problem``.

    Raises SolutionFormatError on schema problems and StaleSolutionError when
    the stored summary disagrees with re-decoding (or re-evaluating) it.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SolutionFormatError(f"solution is not valid JSON: {exc}") from exc
    _require(isinstance(data, dict), "top level must be an object")
    _require(data.get("format") == FORMAT, f"format must be {FORMAT!r}")
    _require(data.get("version") == VERSION, f"unsupported version {data.get('version')!r}")
    summary = data.get("summary")
    _require(isinstance(summary, dict), "missing summary")
    for key in ("bin_assignment", "routes", "route_times", "bin_cost", "routing_cost",
                "overall_cost", "feasible"):
        _require(key in summary, f"summary lacks {key!r}")
    _require(data.get("instance") == problem.instance.name,
             f"solution is for {data.get('instance')!r}, not {problem.instance.name!r}")
    raw = data.get("chromosome")
    chrom = None
    n = problem.instance.n_points
    hor = problem.horizon
    try:
        if raw is not None:
            _require(isinstance(raw, dict) and "perms" in raw and "mask" in raw,
                     "chromosome needs perms and mask")
            chrom = Chromosome.from_lists(raw["perms"], raw["mask"])
            chrom.check(n, hor)
            schedule = decode(chrom, problem.instance, hor, problem.catalog, problem.fleet)
        else:
            bins = [int(b) for b in summary["bin_assignment"]]
            _require(len(bins) == n and all(0 <= b < len(problem.catalog) for b in bins),
                     "bin_assignment must hold one catalog index per point")
            schedule = build_schedule(bins, summary["routes"], problem.instance, hor,
                                      problem.catalog, problem.fleet)
    except (TypeError, KeyError) as exc:
        raise SolutionFormatError(f"solution schema: {exc}") from exc
    fresh = summarize(schedule, problem)
    _check_same(summary, fresh)
    return SolutionFile(data["instance"], chrom, schedule, fresh, data.get("config"),
                        data.get("seed"))


def _check_same(stored, fresh):
    try:
        what = _first_difference(stored, fresh)
    except (TypeError, ValueError) as exc:
        raise SolutionFormatError(f"solution schema: {exc}") from exc
    if what:
        raise StaleSolutionError(f"stale solution: stored {what} disagrees with re-decoding")


def _first_difference(stored, fresh):
    if list(stored["bin_assignment"]) != fresh["bin_assignment"]:
        return "bin assignment"
    if [[list(r) for r in day] for day in stored["routes"]] != fresh["routes"]:
        return "routes"
    times = stored["route_times"]
    if [len(d) for d in times] != [len(d) for d in fresh["route_times"]]:
        return "route times"
    for a, b in zip(itertools.chain.from_iterable(times),
                    itertools.chain.from_iterable(fresh["route_times"])):
        if abs(float(a) - b) > TIME_TOL * 1e3:
            return "route times"
    for key in ("bin_cost", "routing_cost", "overall_cost"):
        if abs(float(stored[key]) - fresh[key]) > COST_TOL:
            return key.replace("_", " ")
    if bool(stored["feasible"]) != fresh["feasible"]:
        return "feasibility flag"
    return None


def read_solution(path, problem):
    return solution_from_json(Path(path).read_text(), problem)
