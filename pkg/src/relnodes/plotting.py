"""Figures for relevance reports and undirected graphs.

Nodes sit on a circle in domain order and are coloured by role.  The
output is byte-stable for a given matplotlib version (no timestamps, fixed
SVG hash salt).
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Mapping

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.backends.backend_agg import FigureCanvasAgg  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

ROLE_COLORS = {
    "target": "#d62728",
    "context": "#7f7f7f",
    "relevant": "#1f77b4",
    "irrelevant": "#e8e8e8",
    "node": "#bcd4e6",
}

_STABLE = {"svg.hashsalt": "relnodes", "path.simplify": False}


def _layout(names):
    n = len(names)
    return {
        name: (math.cos(math.pi / 2 - 2 * math.pi * i / n), math.sin(math.pi / 2 - 2 * math.pi * i / n))
        for i, name in enumerate(names)
    }


def draw_graph(names, edges: Iterable[tuple[str, str]], roles: Mapping[str, str] | None = None,
               title: str = "", directed: bool = False) -> Figure:
    roles = roles or {}
    pos = _layout(list(names))
    fig = Figure(figsize=(5, 5))
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    for a, b in edges:
        (x0, y0), (x1, y1) = pos[a], pos[b]
        if directed:
            ax.annotate("", xy=(x1, y1), xytext=(x0, y0),
                        arrowprops=dict(arrowstyle="-|>", color="0.3", shrinkA=14, shrinkB=14))
        else:
            ax.plot([x0, x1], [y0, y1], color="0.3", lw=1.2, zorder=1)
    for name, (x, y) in pos.items():
        role = roles.get(name, "node")
        ax.scatter([x], [y], s=900, color=ROLE_COLORS[role], edgecolors="black", zorder=2)
        ax.text(x, y, name, ha="center", va="center", fontsize=9, zorder=3)
    used = sorted({roles.get(n, "node") for n in names} - {"node"})
    for role in used:
        ax.scatter([], [], s=80, color=ROLE_COLORS[role], edgecolors="black", label=role)
    if used:
        ax.legend(loc="lower center", bbox_to_anchor=(0.5, -0.08), ncol=len(used), frameon=False, fontsize=8)
    ax.set_xlim(-1.3, 1.3)
    ax.set_ylim(-1.3, 1.3)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=10)
    return fig


def save_figure(fig: Figure, path) -> None:
    path = Path(path)
    fmt = path.suffix.lstrip(".").lower() or "png"
    metadata = {"png": {"Software": None}, "svg": {"Date": None}, "pdf": {"CreationDate": None}}.get(fmt)
    with rc_context(_STABLE):
        fig.savefig(path, format=fmt, metadata=metadata, dpi=100)


def plot_relevance(result: Mapping, path, all_names: Iterable[str]) -> None:
    """Draw the dependence tree behind a relevance result.

    ``result`` uses the report layout (``targets``, ``context``,
    ``relevant``, ``irrelevant``, ``witnesses``); each relevant node gets an
    arrow to the next node of its witness chain.
    """
    roles = {}
    for role, key in (("target", "targets"), ("context", "context"),
                      ("relevant", "relevant"), ("irrelevant", "irrelevant")):
        roles.update({n: role for n in result.get(key, [])})
    edges = [(chain[0], chain[1]) for chain in result.get("witnesses", {}).values() if len(chain) > 1]
    targets = ",".join(result.get("targets", []))
    fig = draw_graph(list(all_names), edges, roles, title=f"relevant nodes for {targets}", directed=True)
    save_figure(fig, path)


def plot_ug(names, edges, path, relevant=(), targets=()) -> None:
    roles = {n: "node" for n in names}
    roles.update({n: "relevant" for n in relevant})
    roles.update({n: "target" for n in targets})
    save_figure(draw_graph(list(names), edges, roles, title="minimal undirected independence map"), path)
