import json
import random

import pytest

from pvrpbins.decode import Chromosome, decode, repair
from pvrpbins.errors import InstanceFormatError, SolutionFormatError, StaleSolutionError
from pvrpbins.ga.algorithm import random_chromosome
from pvrpbins.io import (depot_position, load_instance_dir, make_solution, parse_instance,
                         read_solution, solution_to_json, write_instance, write_solution)
from pvrpbins.model import FleetParams, Horizon, Instance, Problem, default_catalog
from pvrpbins.synthetic import random_instance, random_problem

from conftest import require_instance
from reference import BINS, DAILY_WASTE, MASK, RANKS, ROUTES

PUBLISHED = ("i.12.1", "i.12.2", "i.12.3", "i.12.4", "i.12.5",
             "i.40.1", "i.80.1", "i.120.1", "i.163.1")


def write(tmp_path, time_text, waste_text):
    (tmp_path / "time.txt").write_text(time_text)
    (tmp_path / "waste.txt").write_text(waste_text)
    return tmp_path / "time.txt", tmp_path / "waste.txt"


def matrix_text(n, v=2.5):
    return "\n".join(" ".join("0" if i == j else str(v) for j in range(n + 1))
                     for i in range(n + 1)) + "\n"


def test_parse_basic(tmp_path):
    t, w = write(tmp_path, matrix_text(2), "-38.71 -62.27 1.2\n-38.72  -62.26\t0.9\n")
    inst = parse_instance(t, w)
    assert inst.n_points == 2
    assert inst.daily_waste == (1.2, 0.9)
    assert inst.coords == ((-38.71, -62.27), (-38.72, -62.26))
    assert inst.travel[0][1] == 2.5
    assert depot_position(inst) == pytest.approx((-38.715, -62.265))


def test_parse_variants(tmp_path):
    t, w = write(tmp_path, "3\n0, 1, 2\n1, 0, 3\n2, 3, 0\n",
                 "# columns: id lon lat waste\n0 -62.3 -38.7 0\n1 -62.27 -38.71 1.2\n"
                 "2 -62.26 -38.72 0.9\n")
    inst = parse_instance(t, w, name="v")
    assert inst.depot_coord == (-38.7, -62.3)
    assert inst.coords[0] == (-38.71, -62.27)
    t, w = write(tmp_path, matrix_text(1), "depot -38.7 -62.3\n-38.71 -62.27 1.2\n")
    assert parse_instance(t, w).depot_coord == (-38.7, -62.3)


def test_parse_guesses_column_order(tmp_path, caplog):
    t, w = write(tmp_path, matrix_text(2), "1.2 -38.71 -62.27\n0.9 -38.72 -62.26\n")
    inst = parse_instance(t, w)
    assert inst.daily_waste == (1.2, 0.9)
    assert "range checks" in caplog.text


def test_parse_errors(tmp_path):
    t, w = write(tmp_path, matrix_text(12), "".join("-38.7 -62.2 1.0\n" for _ in range(11)))
    with pytest.raises(InstanceFormatError, match="dimension mismatch"):
        parse_instance(t, w)
    t, w = write(tmp_path, "0 1\n1 x\n", "-38.7 -62.2 1.0\n")
    with pytest.raises(InstanceFormatError, match="non-numeric"):
        parse_instance(t, w)
    t, w = write(tmp_path, "0 -1\n1 0\n", "-38.7 -62.2 1.0\n")
    with pytest.raises(InstanceFormatError, match="negative"):
        parse_instance(t, w)
    t, w = write(tmp_path, "0 1 2\n1 0\n", "-38.7 -62.2 1.0\n")
    with pytest.raises(InstanceFormatError, match="square"):
        parse_instance(t, w)
    t, w = write(tmp_path, matrix_text(1), "-38.7 -62.2 -1.0\n")
    with pytest.raises(InstanceFormatError):
        parse_instance(t, w)
    t, w = write(tmp_path, matrix_text(1), "# columns: lat lon waste\n-38.7 -62.2 -1.0\n")
    with pytest.raises(InstanceFormatError, match="range checks"):
        parse_instance(t, w)
    t, w = write(tmp_path, matrix_text(2), "-38.7 -62.2 1.0\n-38.7 1.0\n")
    with pytest.raises(InstanceFormatError, match="column counts"):
        parse_instance(t, w)


def test_write_then_load(tmp_path):
    inst = random_instance(5, 3, name="syn5")
    write_instance(inst, tmp_path / "syn5")
    back = load_instance_dir(tmp_path / "syn5")
    assert back.name == "syn5"
    assert back.travel == inst.travel and back.daily_waste == inst.daily_waste
    assert back.coords == inst.coords and back.depot_coord == inst.depot_coord


@pytest.mark.data
def test_published_instances_parse():
    for name in PUBLISHED:
        inst = load_instance_dir(require_instance(name))
        assert inst.n_points == int(name.split(".")[1])
        assert inst.coords is not None


def _solved(tmp_path, seed=0):
    p = random_problem(4, seed)
    c = repair(random_chromosome(p, random.Random(seed)), p.instance, p.horizon,
               p.catalog, p.fleet)
    s = decode(c, p.instance, p.horizon, p.catalog, p.fleet)
    sol = make_solution(p, s, c, {"generations": 0}, seed)
    path = tmp_path / "sol.json"
    write_solution(sol, path)
    return p, sol, path


def test_solution_round_trip(tmp_path):
    p, sol, path = _solved(tmp_path)
    back = read_solution(path, p)
    assert back.chromosome == sol.chromosome
    assert back.schedule == sol.schedule
    assert back.summary == sol.summary
    assert solution_to_json(back) == path.read_text()


def test_stale_solution(tmp_path):
    p, sol, path = _solved(tmp_path)
    data = json.loads(path.read_text())
    data["summary"]["routing_cost"] += 0.5
    path.write_text(json.dumps(data))
    with pytest.raises(StaleSolutionError):
        read_solution(path, p)
    data = json.loads(solution_to_json(sol))
    data["summary"]["bin_assignment"][0] = (data["summary"]["bin_assignment"][0] + 1) % 8
    path.write_text(json.dumps(data))
    with pytest.raises(StaleSolutionError):
        read_solution(path, p)
    data = json.loads(solution_to_json(sol))
    data["summary"]["routes"][0] = data["summary"]["routes"][0][::-1] + [[1]]
    path.write_text(json.dumps(data))
    with pytest.raises(StaleSolutionError):
        read_solution(path, p)


def test_schema_errors(tmp_path):
    p, sol, path = _solved(tmp_path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(SolutionFormatError):
        read_solution(path, p)
    data = json.loads(text)
    del data["summary"]["routes"]
    path.write_text(json.dumps(data))
    with pytest.raises(SolutionFormatError):
        read_solution(path, p)
    data = json.loads(text)
    data["format"] = "other"
    path.write_text(json.dumps(data))
    with pytest.raises(SolutionFormatError):
        read_solution(path, p)


def test_external_schedule_without_chromosome(tmp_path):
    p = random_problem(2, 0)
    from pvrpbins.model import build_schedule
    s = build_schedule([7, 7], [((1, 2),), (), ((2, 1),), (), (), (), ((1,),)],
                       p.instance, p.horizon, p.catalog, p.fleet)
    sol = make_solution(p, s)
    assert not sol.summary["feasible"]
    write_solution(sol, tmp_path / "ext.json")
    back = read_solution(tmp_path / "ext.json", p)
    assert back.chromosome is None and back.schedule == s


def test_worked_chromosome_summary(tmp_path):
    t = [[0.0 if i == j else 1.0 for j in range(13)] for i in range(13)]
    inst = Instance("i.12.1", t, DAILY_WASTE)
    p = Problem(inst, Horizon(), default_catalog(), FleetParams(12.0, 2, 78.0))
    c = Chromosome.from_ranks(RANKS, MASK)
    s = decode(c, inst, p.horizon, p.catalog, p.fleet)
    write_solution(make_solution(p, s, c), tmp_path / "a.json")
    data = json.loads((tmp_path / "a.json").read_text())
    assert data["summary"]["bin_assignment"] == list(BINS)
    for day, routes, _, _ in ROUTES:
        assert data["summary"]["routes"][day - 1] == [list(r) for r in routes]
    assert read_solution(tmp_path / "a.json", p).chromosome == c
