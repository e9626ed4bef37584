"""End-to-end decomposition of a relational morphism into a certified cascade.

Strategies ``none`` and ``sets`` work on the induced arrow-level functor and
reuse the generic kernel machinery.  Strategy ``objects`` follows the
transformation-level narrative: project the morphism through its pinholes,
identify interchangeable pinhole objects through one fixed family of mutually
inverse connecting arrows, and store bottom coordinates as transformations of
the representative states.  The emulation certificate of the result relates
the original system to the cascade.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import (
    Semigroupoid,
    StructuralError,
    UnsupportedError,
    Violation,
    validate_semigroupoid,
)
from .decomposition import (
    Cascade,
    EmulationCertificate,
    Kernel,
    RuleTable,
    TracingProduct,
    _roundtrip_fixes,
    build_kernel,
    pinhole_cascade,
    rule_table,
    tracing_product,
    verify_emulation,
)
from .relational import (
    RelationalFunctor,
    classify,
    validate_relational_functor,
    validate_relational_morphism_ts,
)
from .transformation import (
    PinholeTyping,
    RelationalMorphismTS,
    StateSet,
    Transformation,
    TransformationSemigroupoid,
    apply,
    generate_closure,
    pinhole_typed_semigroupoid,
)


@dataclass
class DecompositionResult:
    strategy: str
    morphism: Optional[RelationalMorphismTS]
    functor: RelationalFunctor
    top: Semigroupoid
    tracing: TracingProduct
    tracing_certificate: EmulationCertificate
    cascade: Cascade
    certificate: EmulationCertificate
    rules: RuleTable
    kernel: Optional[Kernel] = None
    bottom_component: Optional[TransformationSemigroupoid] = None
    pinhole: Optional[PinholeTyping] = None
    notes: list[str] = field(default_factory=list)


def abstract_functor(m: RelationalMorphismTS) -> RelationalFunctor:
    """The arrow-level functor induced by a ts-level relational morphism."""
    return RelationalFunctor(
        m.source.abstract, m.target.abstract, dict(m.arrow_rel)
    )


def _structure_report(cascade: Cascade) -> list[Violation]:
    try:
        return validate_semigroupoid(cascade.as_semigroupoid())
    except StructuralError as exc:
        return [Violation("structural", str(exc))]


def _tracing_comparison_note(cascade: Cascade, tracing: TracingProduct) -> list[str]:
    if set(cascade.arrows) == set(tracing.arrows) and cascade.table == tracing.table:
        return ["cascade equals the tracing product (no compression applied)"]
    return []


def decompose_functor(
    phi: RelationalFunctor, strategy: str, morphism: Optional[RelationalMorphismTS] = None
) -> DecompositionResult:
    """Generic decomposition of a surjective relational functor."""
    report = validate_relational_functor(phi)
    if report:
        raise StructuralError(
            "invalid functor: " + "; ".join(str(v) for v in report)
        )
    if not classify(phi).surjective:
        raise StructuralError("the functor is not surjective onto the target")
    tracing, tracing_cert = tracing_product(phi)
    kernel = build_kernel(phi, strategy)
    cascade, certificate = pinhole_cascade(phi, kernel)
    certificate.violations.extend(_structure_report(cascade))
    dec = DecompositionResult(
        strategy=strategy,
        morphism=morphism,
        functor=phi,
        top=phi.target,
        tracing=tracing,
        tracing_certificate=tracing_cert,
        cascade=cascade,
        certificate=certificate,
        rules=rule_table(cascade),
        kernel=kernel,
    )
    dec.notes.extend(_tracing_comparison_note(cascade, tracing))
    return dec


def _merge_pinhole_objects(
    p: Semigroupoid,
) -> tuple[dict[int, int], dict[int, tuple[int, int]]]:
    """Greedy identification of pinhole objects through fixed inverse pairs.

    Returns (representative object per object, families keyed by the merged
    object: forward rep->obj and backward obj->rep arrows whose roundtrips
    act as identities on every arrow of the projection they meet).
    """
    all_arrows = [a.id for a in p.arrows]
    rep_of: dict[int, int] = {}
    fams: dict[int, tuple[int, int]] = {}
    for b in range(len(p.objects)):
        rep_of[b] = b
        for a in range(b):
            if rep_of[a] != a:
                continue
            found = None
            for fwd in sorted(p.hom_set(a, b)):
                for bwd in sorted(p.hom_set(b, a)):
                    if _roundtrip_fixes(
                        p, p.compose(fwd, bwd), a, all_arrows
                    ) and _roundtrip_fixes(p, p.compose(bwd, fwd), b, all_arrows):
                        found = (fwd, bwd)
                        break
                if found:
                    break
            if found:
                rep_of[b] = a
                fams[b] = found
                break
    return rep_of, fams


def decompose_morphism(
    m: RelationalMorphismTS, strategy: str
) -> DecompositionResult:
    """Collapse along the morphism, copy the preimages, compress per strategy."""
    report = validate_relational_morphism_ts(m)
    if report:
        raise StructuralError(
            "invalid relational morphism: " + "; ".join(str(v) for v in report)
        )
    phi = abstract_functor(m)
    functor_report = validate_relational_functor(phi)
    if functor_report:
        raise StructuralError(
            "morphism does not induce a relational functor: "
            + "; ".join(str(v) for v in functor_report)
        )
    if not classify(phi).surjective:
        raise StructuralError("the induced functor is not surjective onto the target")

    if strategy in ("none", "sets"):
        return decompose_functor(phi, strategy, morphism=m)
    if strategy != "objects":
        raise UnsupportedError(f"unknown strategy {strategy!r}")

    tracing, tracing_cert = tracing_product(phi)
    pt = pinhole_typed_semigroupoid(m)
    p = pt.projected.abstract
    rep_of, fams = _merge_pinhole_objects(p)

    rep_objects = sorted(o for o in range(len(p.objects)) if rep_of[o] == o)
    pinhole_of_object = {obj: y for y, obj in pt.pinhole_object.items()}

    # Bottom states: disjoint union of the representative pinhole preimages.
    offsets: dict[int, int] = {}
    labels: list[str] = []
    raw = [
        s
        for o in rep_objects
        for s in pt.projected.state_sets[o].states
    ]
    qualify = len(set(raw)) != len(raw)
    for o in rep_objects:
        offsets[o] = len(labels)
        for s in pt.projected.state_sets[o].states:
            labels.append(f"{s}@{p.objects[o].label}" if qualify else s)

    def coordinate(s_id: int, f_id: int) -> tuple[int, ...]:
        """Action of source arrow s, collapsed onto representative states,
        in the top context f."""
        mapping = list(range(len(labels)))
        for o in rep_objects:
            y = pinhole_of_object[o]
            y_cod = apply(m.target.transformations[f_id], y)
            r = pt.restriction_arrow[(s_id, y, y_cod)]
            t = pt.projected.transformations[r]
            cod_obj = t.cod
            if rep_of[cod_obj] != cod_obj:
                fwd, bwd = fams[cod_obj]
                r = p.compose(r, bwd)
                t = pt.projected.transformations[r]
                cod_obj = t.cod
            for x, yv in enumerate(t.mapping):
                mapping[offsets[o] + x] = offsets[cod_obj] + yv
        return tuple(mapping)

    src = m.source.abstract
    coords: dict[tuple[int, ...], int] = {}
    coord_list: list[tuple[int, ...]] = []
    coord_label: list[str] = []
    pair_prov: dict[tuple[int, int], set[int]] = {}
    arrow_pairs: list[tuple[int, int]] = []
    for a in src.arrows:
        for f in sorted(m.arrow_rel[a.id]):
            c = coordinate(a.id, f)
            if c not in coords:
                coords[c] = len(coord_list)
                coord_list.append(c)
                coord_label.append(f"{a.label}@{m.target.abstract.arrows[f].label}")
            pair = (f, coords[c])
            if pair not in pair_prov:
                pair_prov[pair] = set()
                arrow_pairs.append(pair)
            pair_prov[pair].add(a.id)
    arrow_pairs.sort()

    bottom_gens = [
        (coord_label[i], Transformation(0, 0, c)) for i, c in enumerate(coord_list)
    ]
    bottom = generate_closure((StateSet(0, tuple(labels)),), bottom_gens)
    coord_arrow = {
        c: bottom.arrow_by_mapping(Transformation(0, 0, c)) for c in coord_list
    }

    top = m.target.abstract
    pairs = sorted((f, coord_arrow[coord_list[ci]]) for f, ci in arrow_pairs)
    pair_ids = set(pairs)
    prov = {
        (f, coord_arrow[coord_list[ci]]): sorted(pair_prov[(f, ci)])
        for f, ci in arrow_pairs
    }
    violations: list[Violation] = []
    table = {}
    for f, x in pairs:
        for g, y in pairs:
            if not top.composable(f, g):
                continue
            fg = top.compose(f, g)
            results = set()
            for a in prov[(f, x)]:
                for b in prov[(g, y)]:
                    ab = src.compose(a, b)
                    c = coordinate(ab, fg)
                    results.add((fg, coord_arrow[c]))
            if not results:
                continue
            if len(results) > 1:
                violations.append(
                    Violation(
                        "ambiguous-composition",
                        f"cascade pair (({f},{x}),({g},{y})) has "
                        f"{len(results)} distinct composites",
                        ((f, x), (g, y)),
                    )
                )
                continue
            out = results.pop()
            if out not in pair_ids:
                violations.append(
                    Violation(
                        "escaped-composition",
                        f"cascade composite {out} is not a cascade arrow",
                        ((f, x), (g, y)),
                    )
                )
                continue
            table[((f, x), (g, y))] = out
    cascade = Cascade(top, bottom.abstract, None, tuple(pairs), table)
    sgp = cascade.as_semigroupoid()
    index = cascade.arrow_index()
    candidate = RelationalFunctor(
        src,
        sgp,
        {
            a.id: frozenset(
                index[
                    (
                        f,
                        coord_arrow[coordinate(a.id, f)],
                    )
                ]
                for f in m.arrow_rel[a.id]
            )
            for a in src.arrows
        },
    )
    certificate = verify_emulation(candidate)
    certificate.violations.extend(violations)
    certificate.violations.extend(_structure_report(cascade))
    dec = DecompositionResult(
        strategy=strategy,
        morphism=m,
        functor=phi,
        top=top,
        tracing=tracing,
        tracing_certificate=tracing_cert,
        cascade=cascade,
        certificate=certificate,
        rules=rule_table(cascade),
        bottom_component=bottom,
        pinhole=pt,
    )
    merged = {b: r for b, r in rep_of.items() if b != r}
    if merged:
        dec.notes.append(
            "pinhole objects merged: "
            + ", ".join(
                f"{p.objects[b].label} -> {p.objects[r].label}"
                for b, r in sorted(merged.items())
            )
        )
    else:
        dec.notes.append("no pinhole objects merged")
    dec.notes.extend(_tracing_comparison_note(cascade, tracing))
    return dec
