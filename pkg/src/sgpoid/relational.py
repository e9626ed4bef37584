"""Relational functors between semigroupoids.

A relational functor sends every source arrow to a non-empty set of target
arrows such that on composable pairs the set-wise composite is non-empty and
contained in the image of the composite.  Candidates are stored as plain
data so invalid ones can be constructed and rejected by the validator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

from .core import Semigroupoid, SgpoidError, StructuralError, Violation

if TYPE_CHECKING:  # pragma: no cover
    from .transformation import RelationalMorphismTS


class NotSurjectiveError(SgpoidError):
    """Preimages were requested of a functor that does not cover its target."""

    def __init__(self, uncovered: frozenset[int]):
        self.uncovered = uncovered
        super().__init__(
            f"target arrows without preimage: {sorted(uncovered)}"
        )


@dataclass
class RelationalFunctor:
    source: Semigroupoid
    target: Semigroupoid
    arrow_map: dict[int, frozenset[int]]

    def image(self, f: int) -> frozenset[int]:
        try:
            return self.arrow_map[f]
        except KeyError:
            raise StructuralError(f"no image recorded for source arrow {f}") from None


@dataclass(frozen=True)
class ObjectRelation:
    pairs: frozenset[tuple[int, int]]


class Classification(NamedTuple):
    surjective: bool
    injective: bool


def validate_relational_functor(phi: RelationalFunctor) -> list[Violation]:
    """Full definedness plus the compatibility conditions on composable pairs."""
    report: list[Violation] = []
    src, tgt = phi.source, phi.target
    for a in src.arrows:
        img = phi.arrow_map.get(a.id)
        if img is None or not img:
            report.append(
                Violation("empty-image", f"source arrow {a.label} has no image", (a.id,))
            )
            continue
        for t in img:
            if not 0 <= t < len(tgt.arrows):
                raise StructuralError(f"image of {a.label} references arrow {t}")
    for f in phi.arrow_map:
        if not 0 <= f < len(src.arrows):
            raise StructuralError(f"arrow map references source arrow {f}")
    if any(v.kind == "empty-image" for v in report):
        return report
    for f, g in src.composable_pairs():
        composite = tgt.compose_sets(phi.arrow_map[f], phi.arrow_map[g])
        fg = src.compose(f, g)
        if not composite:
            report.append(
                Violation(
                    "no-composite",
                    f"images of ({src.arrows[f].label}, {src.arrows[g].label}) "
                    "have no composable pair",
                    (f, g),
                )
            )
        elif not composite <= phi.arrow_map[fg]:
            stray = sorted(composite - phi.arrow_map[fg])
            report.append(
                Violation(
                    "compatibility",
                    f"phi({src.arrows[f].label})phi({src.arrows[g].label}) reaches "
                    f"{[tgt.arrows[t].label for t in stray]} outside "
                    f"phi({src.arrows[fg].label})",
                    (f, g, fg),
                )
            )
    return report


def induced_object_relation(phi: RelationalFunctor) -> ObjectRelation:
    """Smallest object relation containing all dom/cod pairs of related arrows."""
    pairs = set()
    for f, img in phi.arrow_map.items():
        af = phi.source.arrow(f)
        for t in img:
            at = phi.target.arrow(t)
            pairs.add((af.dom, at.dom))
            pairs.add((af.cod, at.cod))
    return ObjectRelation(frozenset(pairs))


def compose_functors(
    phi: RelationalFunctor, tau: RelationalFunctor
) -> RelationalFunctor:
    """Relational functors compose by unioning images along the chain."""
    if phi.target is not tau.source and phi.target.arrows != tau.source.arrows:
        raise StructuralError("functor chain mismatch: target of phi != source of tau")
    arrow_map = {}
    for f, img in phi.arrow_map.items():
        out: set[int] = set()
        for t in img:
            out |= tau.arrow_map[t]
        arrow_map[f] = frozenset(out)
    return RelationalFunctor(phi.source, tau.target, arrow_map)


def identity_functor(s: Semigroupoid) -> RelationalFunctor:
    return RelationalFunctor(s, s, {a.id: frozenset({a.id}) for a in s.arrows})


def classify(phi: RelationalFunctor) -> Classification:
    """Surjective: images cover the target.  Injective: images are disjoint."""
    covered: set[int] = set()
    injective = True
    seen: dict[int, int] = {}
    for f in sorted(phi.arrow_map):
        for t in phi.arrow_map[f]:
            if t in seen and seen[t] != f:
                injective = False
            seen[t] = f
            covered.add(t)
    surjective = covered == {a.id for a in phi.target.arrows}
    return Classification(surjective, injective)


def preimages(phi: RelationalFunctor) -> dict[int, frozenset[int]]:
    """phi^{-1} per target arrow; raises when some target arrow is uncovered."""
    pre: dict[int, set[int]] = {a.id: set() for a in phi.target.arrows}
    for f, img in phi.arrow_map.items():
        for t in img:
            pre[t].add(f)
    uncovered = frozenset(t for t, members in pre.items() if not members)
    if uncovered:
        raise NotSurjectiveError(uncovered)
    return {t: frozenset(members) for t, members in pre.items()}


def validate_relational_morphism_ts(m: "RelationalMorphismTS") -> list[Violation]:
    """Full definedness and compatible actions for a ts-level morphism."""
    from .transformation import apply

    report: list[Violation] = []
    src, tgt = m.source, m.target
    if not src.is_one_object() or not tgt.is_one_object():
        raise StructuralError("relational morphisms are between one-object systems")
    n_src = len(src.state_sets[0].states)
    n_tgt = len(tgt.state_sets[0].states)
    for x in range(n_src):
        img = m.state_rel.get(x)
        if not img:
            report.append(
                Violation(
                    "state-undefined",
                    f"state {src.state_sets[0].states[x]} has empty image",
                    (x,),
                )
            )
        elif any(not 0 <= y < n_tgt for y in img):
            raise StructuralError(f"state relation of {x} references missing states")
    for a in src.abstract.arrows:
        img = m.arrow_rel.get(a.id)
        if not img:
            report.append(
                Violation(
                    "arrow-undefined", f"arrow {a.label} has empty image", (a.id,)
                )
            )
        elif any(not 0 <= t < len(tgt.abstract.arrows) for t in img):
            raise StructuralError(f"arrow relation of {a.label} references missing arrows")
    if report:
        return report
    for x in range(n_src):
        for a in src.abstract.arrows:
            xs = apply(src.transformations[a.id], x)
            allowed = m.state_rel[xs]
            for y in m.state_rel[x]:
                for t in m.arrow_rel[a.id]:
                    yt = apply(tgt.transformations[t], y)
                    if yt not in allowed:
                        report.append(
                            Violation(
                                "incompatible-action",
                                f"state {src.state_sets[0].states[x]} under "
                                f"{a.label}: target state "
                                f"{tgt.state_sets[0].states[yt]} escapes the image "
                                f"of {src.state_sets[0].states[xs]}",
                                (x, a.id, y, t),
                            )
                        )
    return report
