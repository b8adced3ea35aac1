"""Run statistics: percentage differences, bench aggregates, Kruskal-Wallis."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal

from scipy.stats import chi2, rankdata

from .errors import ProblemError


def pct_diff(value, reference):
    """``(value - reference) / reference * 100``."""
    if reference == 0:
        raise ProblemError("percentage difference undefined for a zero reference")
    return (value - reference) / reference * 100.0


def round2(x):
    """Round to two decimals, half to even on the decimal representation."""
    return float(Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


def fmt2(x):
    v = round2(x)
    return f"{v + 0.0:.2f}"


@dataclass
class RunRecord:
    seed: int
    cost: float
    runtime: float
    feasible: bool


@dataclass
class BenchReport:
    runs: list = field(default_factory=list)

    @property
    def costs(self):
        return [r.cost for r in self.runs]

    @property
    def min(self):
        return min(self.costs)

    @property
    def median(self):
        return statistics.median(self.costs)

    @property
    def mean(self):
        return statistics.fmean(self.costs)

    @property
    def std(self):
        # sample standard deviation; 0 for a single run
        c = self.costs
        return statistics.stdev(c) if len(c) > 1 else 0.0

    @property
    def feasible_count(self):
        return sum(1 for r in self.runs if r.feasible)

    @property
    def mean_runtime(self):
        return statistics.fmean(r.runtime for r in self.runs)

    def aggregates(self):
        if not self.runs:
            raise ProblemError("bench report has no runs")
        return {"runs": len(self.runs), "min": self.min, "median": self.median,
                "mean": self.mean, "std": self.std, "feasible": self.feasible_count,
                "mean_runtime": self.mean_runtime}


def kruskal_wallis(groups):
    """Tie-corrected Kruskal-Wallis H and its chi-square p-value.

    ``groups`` is a sequence of samples. Returns ``(H, p)``; when every value
    is identical there is no rank variance and ``(0.0, 1.0)`` is returned.
    """
    groups = [list(g) for g in groups]
    if len(groups) < 2:
        raise ProblemError("Kruskal-Wallis needs at least two groups")
    if any(not g for g in groups):
        raise ProblemError("Kruskal-Wallis groups must be non-empty")
    values = [v for g in groups for v in g]
    n = len(values)
    ranks = rankdata(values)
    h = 0.0
    start = 0
    for g in groups:
        r = ranks[start:start + len(g)]
        start += len(g)
        h += float(r.sum()) ** 2 / len(g)
    h = 12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)
    ties = {}
    for v in values:
        ties[v] = ties.get(v, 0) + 1
    correction = 1.0 - sum(t ** 3 - t for t in ties.values()) / (n ** 3 - n)
    if correction <= 0:
        return 0.0, 1.0
    h /= correction
    h = max(h, 0.0)
    df = len(groups) - 1
    return h, float(chi2.sf(h, df))


def factor_effects(records, factors):
    """Group run costs by each factor's level.

    ``records`` are dicts with factor keys plus ``cost``. Returns
    ``{factor: {level: [costs...]}}`` with levels in first-seen order.
    """
    out = {}
    for f in factors:
        groups = {}
        for rec in records:
            groups.setdefault(rec[f], []).append(rec["cost"])
        out[f] = groups
    return out
