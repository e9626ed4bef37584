"""Figure rendering for object/arrow diagrams.

The CLI report path writes these next to its delimited outputs so a
decomposition can be eyeballed without a graphviz installation.  Layout is
fixed (objects on a circle, parallel arrows fanned by rank) to keep renders
reproducible.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import FancyArrowPatch

from .core import Semigroupoid
from .transformation import TransformationSemigroupoid


def _positions(n: int) -> list[tuple[float, float]]:
    if n == 1:
        return [(0.0, 0.0)]
    return [
        (math.cos(2 * math.pi * i / n + math.pi / 2),
         math.sin(2 * math.pi * i / n + math.pi / 2))
        for i in range(n)
    ]


def render_semigroupoid(
    value: Union[Semigroupoid, TransformationSemigroupoid],
    path: Union[str, Path],
    title: str = "",
) -> Path:
    """Draw the diagram of objects and labelled arrows into an image file."""
    s = value.abstract if isinstance(value, TransformationSemigroupoid) else value
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title)
    pos = _positions(max(len(s.objects), 1))

    loop_rank: dict[int, int] = {}
    edge_rank: dict[tuple[int, int], int] = {}
    for a in s.arrows:
        if a.dom == a.cod:
            rank = loop_rank.get(a.dom, 0)
            loop_rank[a.dom] = rank + 1
            x, y = pos[a.dom]
            radius = 0.18 + 0.12 * rank
            circ = plt.Circle(
                (x, y + 0.12 + radius), radius, fill=False, color="tab:gray", lw=1.0
            )
            ax.add_patch(circ)
            ax.annotate(
                a.label,
                (x, y + 0.12 + 2 * radius + 0.05),
                ha="center",
                fontsize=8,
            )
        else:
            key = (a.dom, a.cod)
            rank = edge_rank.get(key, 0)
            edge_rank[key] = rank + 1
            bend = 0.15 * (rank + 1) * (1 if a.dom < a.cod else -1)
            p = FancyArrowPatch(
                pos[a.dom],
                pos[a.cod],
                connectionstyle=f"arc3,rad={bend}",
                arrowstyle="-|>",
                mutation_scale=12,
                color="tab:blue",
                lw=1.0,
                shrinkA=14,
                shrinkB=14,
            )
            ax.add_patch(p)
            mx = (pos[a.dom][0] + pos[a.cod][0]) / 2
            my = (pos[a.dom][1] + pos[a.cod][1]) / 2
            nx = -(pos[a.cod][1] - pos[a.dom][1])
            ny = pos[a.cod][0] - pos[a.dom][0]
            norm = math.hypot(nx, ny) or 1.0
            ax.annotate(
                a.label,
                (mx + bend * 0.8 * nx / norm, my + bend * 0.8 * ny / norm),
                ha="center",
                fontsize=8,
            )
    for o in s.objects:
        x, y = pos[o.id]
        ax.plot([x], [y], "o", color="black", markersize=10)
        ax.annotate(
            o.label, (x, y - 0.16), ha="center", fontsize=9, fontweight="bold"
        )
    ax.relim()
    ax.autoscale_view()
    ax.margins(0.25)
    out = Path(path)
    fig.savefig(out, dpi=120, bbox_inches="tight", metadata={"Software": "sgpoid"})
    plt.close(fig)
    return out
