import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
DATA_ENV = "PVRPBINS_DATA"


def data_root():
    """Directory holding the published instances (one sub-directory each)."""
    env = os.environ.get(DATA_ENV)
    if env:
        return Path(env)
    return ROOT / "data" / "instances"


def instance_path(name):
    path = data_root() / name
    if (path / "time.txt").is_file() and (path / "waste.txt").is_file():
        return path
    return None


def require_instance(name):
    """Path of a published instance; fails (not skips) when it is missing."""
    path = instance_path(name)
    if path is None:
        pytest.fail(f"published instance {name} not found under {data_root()} "
                    f"(set {DATA_ENV} to the directory holding {name}/time.txt and waste.txt)")
    return path


# one PASS/FAIL line per acceptance criterion at the end of the run
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or not rep.passed:
        _CRITERIA.setdefault(tuple(mark.args), []).append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (label, title), results in sorted(_CRITERIA.items()):
        failed = [name for name, ok in results if not ok]
        line = f"criterion {label} ({title}): {'FAIL' if failed else 'PASS'}"
        if failed:
            line += "  [" + ", ".join(failed) + "]"
        terminalreporter.write_line(line)
