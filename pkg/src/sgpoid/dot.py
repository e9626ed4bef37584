"""Deterministic DOT emission: objects as nodes, arrows as labelled edges."""

from __future__ import annotations

from typing import Union

from .core import Semigroupoid
from .transformation import TransformationSemigroupoid


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _body(s: Semigroupoid, indent: str, prefix: str) -> list[str]:
    lines = []
    for o in s.objects:
        lines.append(f"{indent}{_quote(prefix + o.label)} [shape=circle];")
    for a in s.arrows:
        lines.append(
            f"{indent}{_quote(prefix + s.objects[a.dom].label)} -> "
            f"{_quote(prefix + s.objects[a.cod].label)} "
            f"[label={_quote(a.label)}];"
        )
    return lines


def semigroupoid_dot(
    value: Union[Semigroupoid, TransformationSemigroupoid], name: str = "semigroupoid"
) -> str:
    s = value.abstract if isinstance(value, TransformationSemigroupoid) else value
    lines = [f"digraph {_quote(name)} {{"]
    lines.extend(_body(s, "  ", ""))
    lines.append("}")
    return "\n".join(lines) + "\n"


def decomposition_dot(
    top: Semigroupoid,
    bottom: Union[Semigroupoid, TransformationSemigroupoid],
    name: str = "decomposition",
) -> str:
    """Two-level decomposition rendered as clustered subgraphs."""
    b = bottom.abstract if isinstance(bottom, TransformationSemigroupoid) else bottom
    lines = [f"digraph {_quote(name)} {{"]
    lines.append("  subgraph cluster_top {")
    lines.append("    label=\"top\";")
    lines.extend(_body(top, "    ", "top:"))
    lines.append("  }")
    lines.append("  subgraph cluster_bottom {")
    lines.append("    label=\"bottom\";")
    lines.extend(_body(b, "    ", "bottom:"))
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
