"""Abstract finite semigroupoids.

A semigroupoid is a set of objects, a set of typed arrows between them, and
an associative partial composition recorded in an explicit table.  Arrows and
objects are identified by dense integer ids; labels are metadata only, so
equality and table lookup stay O(1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping


class SgpoidError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(SgpoidError):
    """A value references ids that do not resolve, or a table is malformed."""


class NotComposableError(SgpoidError):
    """Composition was requested for arrows whose types do not match."""


class UnsupportedError(SgpoidError):
    """The operation is only defined for a restricted class of inputs."""


class ScopeError(SgpoidError):
    """A codec was applied to an arrow outside its scope."""


@dataclass(frozen=True)
class ObjectRef:
    id: int
    label: str


@dataclass(frozen=True)
class Arrow:
    id: int
    dom: int
    cod: int
    label: str


@dataclass(frozen=True)
class Violation:
    """One violated invariant, with the witnessing ids."""

    kind: str
    message: str
    witness: tuple = ()

    def __str__(self) -> str:
        return f"[{self.kind}] {self.message}"


class Semigroupoid:
    """Objects, arrows and a sparse composition table.

    The constructor is deliberately permissive: invalid candidates can be
    built so that validators have something to reject.  Use
    :func:`validate_semigroupoid` to obtain a complete violation report.
    Values are treated as immutable after construction.
    """

    def __init__(
        self,
        objects: Iterable[ObjectRef],
        arrows: Iterable[Arrow],
        table: Mapping[tuple[int, int], int],
    ):
        self.objects = tuple(objects)
        self.arrows = tuple(arrows)
        self.table = dict(table)
        self._hom: dict[tuple[int, int], frozenset[int]] = {}

    def object_count(self) -> int:
        return len(self.objects)

    def arrow_count(self) -> int:
        return len(self.arrows)

    def is_one_object(self) -> bool:
        return len(self.objects) == 1

    def arrow(self, arrow_id: int) -> Arrow:
        if not 0 <= arrow_id < len(self.arrows):
            raise StructuralError(f"dangling arrow id {arrow_id}")
        return self.arrows[arrow_id]

    def object_ref(self, object_id: int) -> ObjectRef:
        if not 0 <= object_id < len(self.objects):
            raise StructuralError(f"dangling object id {object_id}")
        return self.objects[object_id]

    def arrow_by_label(self, label: str) -> Arrow:
        for a in self.arrows:
            if a.label == label:
                return a
        raise StructuralError(f"no arrow labelled {label!r}")

    def object_by_label(self, label: str) -> ObjectRef:
        for o in self.objects:
            if o.label == label:
                return o
        raise StructuralError(f"no object labelled {label!r}")

    def composable(self, f: int, g: int) -> bool:
        return self.arrow(f).cod == self.arrow(g).dom

    def compose(self, f: int, g: int) -> int:
        """Return the id of fg (apply f first, then g)."""
        af, ag = self.arrow(f), self.arrow(g)
        if af.cod != ag.dom:
            raise NotComposableError(
                f"{af.label}: {af.dom}->{af.cod} then {ag.label}: {ag.dom}->{ag.cod}"
            )
        try:
            return self.table[(f, g)]
        except KeyError:
            raise StructuralError(
                f"composable pair ({af.label}, {ag.label}) has no table entry"
            ) from None

    def compose_sets(self, p: Iterable[int], q: Iterable[int]) -> frozenset[int]:
        """Set-wise composition: compose the composable pairs, ignore the rest."""
        out = set()
        qs = tuple(q)
        for f in p:
            for g in qs:
                if self.composable(f, g):
                    out.add(self.compose(f, g))
        return frozenset(out)

    def hom_set(self, x: int, y: int) -> frozenset[int]:
        """All arrow ids with domain x and codomain y (may be empty)."""
        key = (x, y)
        if key not in self._hom:
            self.object_ref(x)
            self.object_ref(y)
            self._hom[key] = frozenset(
                a.id for a in self.arrows if a.dom == x and a.cod == y
            )
        return self._hom[key]

    def composable_pairs(self) -> Iterator[tuple[int, int]]:
        by_dom: dict[int, list[int]] = {}
        for a in self.arrows:
            by_dom.setdefault(a.dom, []).append(a.id)
        for f in self.arrows:
            for g in by_dom.get(f.cod, ()):
                yield f.id, g

    def __repr__(self) -> str:
        return (
            f"Semigroupoid({len(self.objects)} objects, "
            f"{len(self.arrows)} arrows, {len(self.table)} composites)"
        )


def validate_semigroupoid(s: Semigroupoid) -> list[Violation]:
    """Check every semigroupoid invariant; empty report means valid.

    Dangling object/arrow references are raised as :class:`StructuralError`
    (further validation is meaningless on unresolvable data); all other
    defects are collected into the returned list so a hand-written file can
    be reported in full.
    """
    dangling = []
    for i, o in enumerate(s.objects):
        if o.id != i:
            dangling.append(f"object id {o.id} at position {i} (ids must be 0..n-1)")
    for i, a in enumerate(s.arrows):
        if a.id != i:
            dangling.append(f"arrow id {a.id} at position {i} (ids must be 0..n-1)")
        if not 0 <= a.dom < len(s.objects):
            dangling.append(f"arrow {a.label} has dangling dom {a.dom}")
        if not 0 <= a.cod < len(s.objects):
            dangling.append(f"arrow {a.label} has dangling cod {a.cod}")
    for (f, g), h in s.table.items():
        for x in (f, g, h):
            if not 0 <= x < len(s.arrows):
                dangling.append(f"table entry ({f},{g})->{h} references arrow {x}")
    if dangling:
        raise StructuralError("; ".join(dangling))

    report: list[Violation] = []
    arrows = s.arrows
    for f, g in s.composable_pairs():
        if (f, g) not in s.table:
            report.append(
                Violation(
                    "missing-composite",
                    f"composable pair ({arrows[f].label}, {arrows[g].label}) "
                    "has no composite",
                    (f, g),
                )
            )
    for (f, g), h in s.table.items():
        af, ag, ah = arrows[f], arrows[g], arrows[h]
        if af.cod != ag.dom:
            report.append(
                Violation(
                    "spurious-entry",
                    f"table entry for non-composable pair ({af.label}, {ag.label})",
                    (f, g),
                )
            )
            continue
        if ah.dom != af.dom or ah.cod != ag.cod:
            report.append(
                Violation(
                    "ill-typed-composite",
                    f"({af.label}, {ag.label}) -> {ah.label} has type "
                    f"{ah.dom}->{ah.cod}, expected {af.dom}->{ag.cod}",
                    (f, g, h),
                )
            )
    # Associativity over every composable triple; skip pairs already reported.
    table = s.table
    for f, g in s.composable_pairs():
        fg = table.get((f, g))
        if fg is None:
            continue
        for h in (a.id for a in arrows if a.dom == arrows[g].cod):
            gh = table.get((g, h))
            fg_h = table.get((fg, h))
            if gh is None or fg_h is None:
                continue
            f_gh = table.get((f, gh))
            if f_gh is None:
                continue
            if fg_h != f_gh:
                report.append(
                    Violation(
                        "associativity",
                        f"({arrows[f].label}{arrows[g].label}){arrows[h].label} = "
                        f"{arrows[fg_h].label} but {arrows[f].label}"
                        f"({arrows[g].label}{arrows[h].label}) = {arrows[f_gh].label}",
                        (f, g, h),
                    )
                )
    return report
