"""Static figures: route maps per day, GA convergence, bench and tuning plots.

All functions use the Agg backend and return or write files; nothing is
shown interactively. SVG output carries no timestamp and a fixed id salt so
repeated renders are byte-identical.
"""

from __future__ import annotations

import io
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import depot_position  # noqa: E402
from .model import day_name  # noqa: E402

_RC = {"svg.hashsalt": "pvrpbins", "svg.fonttype": "none", "font.size": 9}
_COLORS = plt.get_cmap("tab10").colors


def _project(coords, lat0):
    # equirectangular: x scaled by cos(reference latitude)
    k = math.cos(math.radians(lat0))
    return [(lon * k, lat) for lat, lon in coords]


def _save(fig, fmt="svg"):
    buf = io.StringIO() if fmt == "svg" else io.BytesIO()
    fig.savefig(buf, format=fmt, metadata={"Date": None} if fmt == "svg" else None)
    plt.close(fig)
    return buf.getvalue()


def _extent(points, pad=0.08):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    w = max(max(xs) - min(xs), 1e-9)
    h = max(max(ys) - min(ys), 1e-9)
    return (min(xs) - pad * w, max(xs) + pad * w, min(ys) - pad * h, max(ys) + pad * h)


def render_day(schedule, instance, day):
    """SVG text of one day's routes (``day`` is 1-based)."""
    if instance.coords is None:
        raise ValueError("instance has no coordinates to plot")
    depot = depot_position(instance)
    lat0 = sum(c[0] for c in instance.coords) / len(instance.coords)
    xy = _project([depot, *instance.coords], lat0)
    x0, x1, y0, y1 = _extent(xy)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 6))
        routes = schedule.routes[day - 1]
        times = schedule.route_times[day - 1]
        for r, route in enumerate(routes):
            path = [xy[0]] + [xy[p] for p in route] + [xy[0]]
            ax.plot([p[0] for p in path], [p[1] for p in path], "-", lw=1.6,
                    color=_COLORS[r % len(_COLORS)], gid=f"route{r + 1}",
                    label=f"R{r + 1}: {times[r]:.2f} min")
        ax.scatter([p[0] for p in xy[1:]], [p[1] for p in xy[1:]], s=28, color="0.25",
                   zorder=3, gid="points")
        ax.scatter([xy[0][0]], [xy[0][1]], s=90, marker="s", color="black", zorder=4,
                   gid="depot")
        for p in range(1, len(xy)):
            ax.annotate(str(p), xy[p], xytext=(3, 3), textcoords="offset points", fontsize=7)
        ax.set_xlim(x0, x1)
        ax.set_ylim(y0, y1)
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_title(f"{instance.name}: {day_name(day)}")
        if routes:
            ax.legend(loc="upper right", fontsize=7)
        return _save(fig)


def render_routes(schedule, instance, horizon):
    """``{day: svg_text}`` for every working day."""
    return {d: render_day(schedule, instance, d) for d in horizon.working_days}


def write_route_maps(schedule, instance, horizon, out_dir, stem=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or instance.name
    paths = []
    for d, svg in render_routes(schedule, instance, horizon).items():
        path = out_dir / f"{stem}_day{d}_{day_name(d).lower()}.svg"
        path.write_text(svg)
        paths.append(path)
    return paths


def plot_history(history, path, title=None):
    """Best and mean fitness per generation."""
    gens = [h[0] for h in history]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(gens, [h[1] for h in history], label="best")
        ax.plot(gens, [h[2] for h in history], label="mean", alpha=0.7)
        ax.set_yscale("log")
        ax.set_xlabel("generation")
        ax.set_ylabel("fitness")
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        _write(fig, path)


def plot_bench(costs, path, title=None):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4, 4))
        ax.boxplot([list(costs)])
        ax.plot([1] * len(costs), costs, ".", color="0.3")
        ax.set_xticks([1], ["runs"])
        ax.set_ylabel("overall cost")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _write(fig, path)


def plot_main_effects(effects, path):
    """``effects``: ``{factor: [(level, mean cost), ...]}``, one panel per factor."""
    names = list(effects)
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, len(names), figsize=(2.6 * len(names), 3), sharey=True,
                                 squeeze=False)
        for ax, name in zip(axes[0], names):
            levels = [str(lv) for lv, _ in effects[name]]
            ax.plot(levels, [m for _, m in effects[name]], "o-")
            ax.set_title(name)
        axes[0][0].set_ylabel("mean overall cost")
        fig.tight_layout()
        _write(fig, path)


def _write(fig, path):
    path = Path(path)
    fmt = path.suffix.lstrip(".") or "svg"
    data = _save(fig, fmt)
    if isinstance(data, str):
        path.write_text(data)
    else:
        path.write_bytes(data)
