"""Line-oriented text formats for semigroupoids and functors, plus JSON mirrors.

The ``.sgd`` grammar (one declaration per line, ``#`` starts a comment):

    object <label> [<state-label> ...]
    arrow <label> : <dom> -> <cod> [= <image-state> ...]
    compose <f> <g> = <h>

A file is a transformation file when every arrow carries a mapping (one
image per domain state, positionally).  Without explicit ``compose`` lines
the table of a transformation file is derived from the mappings.

The ``.fun`` grammar:

    source <relative-path>
    target <relative-path>
    map <src-arrow> -> <tgt-arrow>[, <tgt-arrow> ...]
    staterel <src-state> -> <tgt-state>[, <tgt-state> ...]

``staterel`` lines turn the file into a transformation-level relational
morphism; without them it describes an abstract relational functor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .core import Arrow, ObjectRef, Semigroupoid, SgpoidError, StructuralError
from .relational import RelationalFunctor
from .transformation import (
    RelationalMorphismTS,
    StateSet,
    Transformation,
    TransformationSemigroupoid,
    compose_transformations,
)


class ParseError(SgpoidError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ResolutionError(ParseError):
    """Well-formed lines whose references do not resolve (dangling labels,
    arity mismatches).  The CLI reports these as validation failures."""


@dataclass
class ParsedSgd:
    """A parsed .sgd file; ``ts`` is set when every arrow has a mapping."""

    sgpoid: Semigroupoid
    ts: Optional[TransformationSemigroupoid]
    had_compose_lines: bool

    @property
    def is_transformation(self) -> bool:
        return self.ts is not None


def _tokenize(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        yield lineno, line.split()


def parse_sgd(text: str) -> ParsedSgd:
    objects: list[ObjectRef] = []
    states: list[Optional[tuple[str, ...]]] = []
    obj_by_label: dict[str, int] = {}
    arrow_decl: list[tuple[int, str, str, str, Optional[tuple[str, ...]]]] = []
    compose_decl: list[tuple[int, str, str, str]] = []

    for lineno, tokens in _tokenize(text):
        kind = tokens[0]
        if kind == "object":
            if len(tokens) < 2:
                raise ParseError("object needs a label", lineno)
            label = tokens[1]
            if label in obj_by_label:
                raise ParseError(f"duplicate object label {label!r}", lineno)
            obj_by_label[label] = len(objects)
            objects.append(ObjectRef(len(objects), label))
            states.append(tuple(tokens[2:]) if len(tokens) > 2 else None)
            if states[-1] is not None and len(set(states[-1])) != len(states[-1]):
                raise ParseError(f"duplicate state labels on object {label!r}", lineno)
        elif kind == "arrow":
            # arrow <label> : <dom> -> <cod> [= imgs...]
            if len(tokens) < 6 or tokens[2] != ":" or tokens[4] != "->":
                raise ParseError(
                    "expected: arrow <label> : <dom> -> <cod> [= <images>]", lineno
                )
            label, dom, cod = tokens[1], tokens[3], tokens[5]
            mapping: Optional[tuple[str, ...]] = None
            if len(tokens) > 6:
                if tokens[6] != "=":
                    raise ParseError("expected '=' before the image list", lineno)
                mapping = tuple(tokens[7:])
            arrow_decl.append((lineno, label, dom, cod, mapping))
        elif kind == "compose":
            if len(tokens) != 5 or tokens[3] != "=":
                raise ParseError("expected: compose <f> <g> = <h>", lineno)
            compose_decl.append((lineno, tokens[1], tokens[2], tokens[4]))
        else:
            raise ParseError(f"unknown declaration {kind!r}", lineno)

    arrows: list[Arrow] = []
    arrow_by_label: dict[str, int] = {}
    mappings: list[Optional[tuple[str, ...]]] = []
    for lineno, label, dom, cod, mapping in arrow_decl:
        if label in arrow_by_label:
            raise ParseError(f"duplicate arrow label {label!r}", lineno)
        if dom not in obj_by_label:
            raise ResolutionError(f"arrow {label!r} has unknown domain {dom!r}", lineno)
        if cod not in obj_by_label:
            raise ResolutionError(f"arrow {label!r} has unknown codomain {cod!r}", lineno)
        arrow_by_label[label] = len(arrows)
        arrows.append(Arrow(len(arrows), obj_by_label[dom], obj_by_label[cod], label))
        mappings.append(mapping)

    with_mapping = sum(1 for m in mappings if m is not None)
    if with_mapping not in (0, len(arrows)):
        missing = next(
            (lineno, label)
            for (lineno, label, _, _, m) in arrow_decl
            if m is None
        )
        raise ParseError(
            f"arrow {missing[1]!r} has no mapping while other arrows do", missing[0]
        )
    is_ts = bool(arrows) and with_mapping == len(arrows)

    transformations: list[Transformation] = []
    if is_ts:
        for (lineno, label, dom, cod, mapping), arrow in zip(arrow_decl, arrows):
            dom_states = states[arrow.dom]
            cod_states = states[arrow.cod]
            if dom_states is None or cod_states is None:
                raise ParseError(
                    f"arrow {label!r} has a mapping but its objects declare no states",
                    lineno,
                )
            if len(mapping) != len(dom_states):
                raise ResolutionError(
                    f"arrow {label!r} lists {len(mapping)} images for "
                    f"{len(dom_states)} states",
                    lineno,
                )
            try:
                images = tuple(cod_states.index(s) for s in mapping)
            except ValueError:
                bad = next(s for s in mapping if s not in cod_states)
                raise ResolutionError(
                    f"arrow {label!r} maps to unknown state {bad!r}", lineno
                ) from None
            transformations.append(Transformation(arrow.dom, arrow.cod, images))

    table: dict[tuple[int, int], int] = {}
    if compose_decl:
        for lineno, f, g, h in compose_decl:
            for x in (f, g, h):
                if x not in arrow_by_label:
                    raise ResolutionError(
                        f"compose line names unknown arrow {x!r}", lineno
                    )
            key = (arrow_by_label[f], arrow_by_label[g])
            if key in table:
                raise ParseError(f"duplicate compose entry for ({f}, {g})", lineno)
            table[key] = arrow_by_label[h]
    elif is_ts:
        key_to_id = {t.key(): i for i, t in enumerate(transformations)}
        for f, tf in enumerate(transformations):
            for g, tg in enumerate(transformations):
                if tf.cod != tg.dom:
                    continue
                h = key_to_id.get(compose_transformations(tf, tg).key())
                if h is not None:
                    table[(f, g)] = h

    sgpoid = Semigroupoid(objects, arrows, table)
    ts = None
    if is_ts:
        state_sets = tuple(
            StateSet(i, states[i])
            for i in range(len(objects))
        )
        ts = TransformationSemigroupoid(state_sets, tuple(transformations), sgpoid)
    return ParsedSgd(sgpoid, ts, bool(compose_decl))


def emit_sgd(
    value: Union[Semigroupoid, TransformationSemigroupoid],
    include_table: Optional[bool] = None,
) -> str:
    """Deterministic text form; parse(emit(x)) reproduces x."""
    if isinstance(value, TransformationSemigroupoid):
        ts, s = value, value.abstract
    else:
        ts, s = None, value
    lines = []
    for o in s.objects:
        if ts is not None:
            lines.append(f"object {o.label} " + " ".join(ts.state_sets[o.id].states))
        else:
            lines.append(f"object {o.label}")
    for a in s.arrows:
        head = f"arrow {a.label} : {s.objects[a.dom].label} -> {s.objects[a.cod].label}"
        if ts is not None:
            t = ts.transformations[a.id]
            imgs = " ".join(ts.state_sets[a.cod].states[i] for i in t.mapping)
            head += f" = {imgs}"
        lines.append(head)
    if include_table is None:
        include_table = ts is None
    if include_table:
        for (f, g), h in sorted(s.table.items()):
            lines.append(
                f"compose {s.arrows[f].label} {s.arrows[g].label} = {s.arrows[h].label}"
            )
    return "\n".join(lines) + "\n"


def sgd_json(value: Union[Semigroupoid, TransformationSemigroupoid]) -> str:
    if isinstance(value, TransformationSemigroupoid):
        ts, s = value, value.abstract
    else:
        ts, s = None, value
    doc = {
        "objects": [
            {
                "id": o.id,
                "label": o.label,
                **(
                    {"states": list(ts.state_sets[o.id].states)}
                    if ts is not None
                    else {}
                ),
            }
            for o in s.objects
        ],
        "arrows": [
            {
                "id": a.id,
                "label": a.label,
                "dom": a.dom,
                "cod": a.cod,
                **(
                    {"mapping": list(ts.transformations[a.id].mapping)}
                    if ts is not None
                    else {}
                ),
            }
            for a in s.arrows
        ],
        "table": [[f, g, h] for (f, g), h in sorted(s.table.items())],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@dataclass
class ParsedFun:
    """A parsed .fun file: either an abstract functor or a ts-level morphism."""

    source: ParsedSgd
    target: ParsedSgd
    functor: RelationalFunctor
    morphism: Optional[RelationalMorphismTS]


def parse_fun(text: str, base_dir: Path) -> ParsedFun:
    source_path: Optional[Path] = None
    target_path: Optional[Path] = None
    map_decl: list[tuple[int, str, list[str]]] = []
    staterel_decl: list[tuple[int, str, list[str]]] = []
    for lineno, tokens in _tokenize(text):
        kind = tokens[0]
        if kind in ("source", "target"):
            if len(tokens) != 2:
                raise ParseError(f"{kind} needs exactly one path", lineno)
            if kind == "source":
                source_path = base_dir / tokens[1]
            else:
                target_path = base_dir / tokens[1]
        elif kind in ("map", "staterel"):
            rest = " ".join(tokens[1:])
            if "->" not in rest:
                raise ParseError(f"{kind} needs '<src> -> <targets>'", lineno)
            left, right = rest.split("->", 1)
            left = left.strip()
            targets = [t.strip() for t in right.split(",")]
            if not left or any(not t for t in targets):
                raise ParseError(f"malformed {kind} line", lineno)
            if kind == "map":
                map_decl.append((lineno, left, targets))
            else:
                staterel_decl.append((lineno, left, targets))
        else:
            raise ParseError(f"unknown declaration {kind!r}", lineno)
    if source_path is None or target_path is None:
        raise ParseError("functor file needs both source and target paths")
    source = load_sgd(source_path)
    target = load_sgd(target_path)

    arrow_map: dict[int, set[int]] = {}
    for lineno, left, targets in map_decl:
        try:
            f = source.sgpoid.arrow_by_label(left).id
            ts = [target.sgpoid.arrow_by_label(t).id for t in targets]
        except StructuralError as exc:
            raise ResolutionError(str(exc), lineno) from None
        arrow_map.setdefault(f, set()).update(ts)
    unmapped = [
        a.label for a in source.sgpoid.arrows if a.id not in arrow_map
    ]
    if unmapped:
        raise ResolutionError(
            "source arrows without a map line: " + ", ".join(unmapped)
        )
    functor = RelationalFunctor(
        source.sgpoid,
        target.sgpoid,
        {f: frozenset(v) for f, v in arrow_map.items()},
    )

    morphism = None
    if staterel_decl:
        if source.ts is None or target.ts is None:
            raise ParseError(
                "staterel lines need transformation files on both sides",
                staterel_decl[0][0],
            )
        if not source.ts.is_one_object() or not target.ts.is_one_object():
            raise ParseError(
                "staterel morphisms are between one-object systems",
                staterel_decl[0][0],
            )
        src_states = source.ts.state_sets[0]
        tgt_states = target.ts.state_sets[0]
        state_rel: dict[int, set[int]] = {}
        for lineno, left, targets in staterel_decl:
            try:
                x = src_states.index(left)
                ys = [tgt_states.index(t) for t in targets]
            except StructuralError as exc:
                raise ResolutionError(str(exc), lineno) from None
            state_rel.setdefault(x, set()).update(ys)
        missing = [
            src_states.states[x]
            for x in range(len(src_states.states))
            if x not in state_rel
        ]
        if missing:
            raise ResolutionError(
                "source states without a staterel line: " + ", ".join(missing)
            )
        morphism = RelationalMorphismTS(
            source.ts,
            target.ts,
            {x: frozenset(v) for x, v in state_rel.items()},
            {f: frozenset(v) for f, v in arrow_map.items()},
        )
    return ParsedFun(source, target, functor, morphism)


def load_sgd(path: Union[str, Path]) -> ParsedSgd:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_sgd(text)


def load_fun(path: Union[str, Path]) -> ParsedFun:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_fun(text, path.parent)


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture file (e.g. 'flipflop.sgd')."""
    return Path(__file__).parent / "fixtures" / name
