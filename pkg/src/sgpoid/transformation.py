"""Concrete transformation representations of semigroupoids.

Objects are realised as finite state sets and arrows as total functions
between them.  States are indexed internally; the external labels are kept
for reporting only, so transformations compare canonically as index tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .core import (
    Arrow,
    NotComposableError,
    ObjectRef,
    Semigroupoid,
    StructuralError,
    UnsupportedError,
    Violation,
    validate_semigroupoid,
)
from .relational import RelationalFunctor


@dataclass(frozen=True)
class StateSet:
    object: int
    states: tuple[str, ...]

    def __post_init__(self):
        if not self.states:
            raise StructuralError(f"state set of object {self.object} is empty")
        if len(set(self.states)) != len(self.states):
            raise StructuralError(f"duplicate state labels in object {self.object}")

    def index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise StructuralError(
                f"no state labelled {label!r} in object {self.object}"
            ) from None


@dataclass(frozen=True)
class Transformation:
    dom: int
    cod: int
    mapping: tuple[int, ...]

    def key(self) -> tuple[int, int, tuple[int, ...]]:
        return (self.dom, self.cod, self.mapping)


def apply(t: Transformation, x: int) -> int:
    """Apply the transformation to a single domain state index."""
    if not 0 <= x < len(t.mapping):
        raise StructuralError(f"state index {x} out of range for {t}")
    return t.mapping[x]


def apply_word(t_seq: Sequence[Transformation], x: int) -> list[int]:
    """States visited by x under the word; includes the starting state."""
    visited = [x]
    for t in t_seq:
        x = apply(t, x)
        visited.append(x)
    return visited


def compose_transformations(t1: Transformation, t2: Transformation) -> Transformation:
    """Left-to-right composition: the result maps x to t2(t1(x))."""
    if t1.cod != t2.dom:
        raise NotComposableError(
            f"transformation {t1.dom}->{t1.cod} then {t2.dom}->{t2.cod}"
        )
    return Transformation(t1.dom, t2.cod, tuple(t2.mapping[i] for i in t1.mapping))


def is_permutation(t: Transformation) -> bool:
    return t.dom == t.cod and sorted(t.mapping) == list(range(len(t.mapping)))


class TransformationSemigroupoid:
    """A semigroupoid together with a faithful action on finite state sets.

    ``transformations[i]`` realises ``abstract.arrows[i]``.  Arrows are
    extensionally distinct: no two share (dom, cod, mapping).
    """

    def __init__(
        self,
        state_sets: Iterable[StateSet],
        transformations: Iterable[Transformation],
        abstract: Semigroupoid,
    ):
        self.state_sets = tuple(state_sets)
        self.transformations = tuple(transformations)
        self.abstract = abstract

    @property
    def arrows(self) -> tuple[Arrow, ...]:
        return self.abstract.arrows

    def states(self, object_id: int) -> tuple[str, ...]:
        return self.state_sets[object_id].states

    def is_one_object(self) -> bool:
        return self.abstract.is_one_object()

    def transformation(self, arrow_id: int) -> Transformation:
        return self.transformations[arrow_id]

    def arrow_by_mapping(self, t: Transformation) -> Optional[int]:
        for i, u in enumerate(self.transformations):
            if u.key() == t.key():
                return i
        return None

    def __repr__(self) -> str:
        sizes = ",".join(str(len(ss.states)) for ss in self.state_sets)
        return (
            f"TransformationSemigroupoid(states=[{sizes}], "
            f"{len(self.transformations)} arrows)"
        )


def _require_one_object(ts: TransformationSemigroupoid) -> StateSet:
    if not ts.is_one_object():
        raise UnsupportedError("operation requires a one-object semigroupoid")
    return ts.state_sets[0]


def generate_closure(
    state_sets: Sequence[StateSet],
    generators: Sequence[tuple[str, Transformation]],
) -> TransformationSemigroupoid:
    """Close the generators under composition.

    Breadth-first over (existing arrow, generator) with ties broken by
    (left id, right id), so arrow ids are reproducible across runs.  Arrows
    are deduplicated extensionally; composite labels are parenthesised words
    over the generator labels.
    """
    for label, t in generators:
        if not 0 <= t.dom < len(state_sets) or not 0 <= t.cod < len(state_sets):
            raise StructuralError(f"generator {label!r} references a missing object")
        n_dom = len(state_sets[t.dom].states)
        n_cod = len(state_sets[t.cod].states)
        if len(t.mapping) != n_dom or any(not 0 <= i < n_cod for i in t.mapping):
            raise StructuralError(f"generator {label!r} is not a total function")

    labels: list[str] = []
    elems: list[Transformation] = []
    seen: dict[tuple, int] = {}
    gen_ids: list[int] = []
    for label, t in generators:
        if t.key() not in seen:
            seen[t.key()] = len(elems)
            elems.append(t)
            labels.append(label)
        gen_ids.append(seen[t.key()])
    gen_ids = sorted(set(gen_ids))

    i = 0
    while i < len(elems):
        left = elems[i]
        for g in gen_ids:
            right = elems[g]
            if left.cod != right.dom:
                continue
            prod = compose_transformations(left, right)
            if prod.key() not in seen:
                seen[prod.key()] = len(elems)
                elems.append(prod)
                labels.append(f"({labels[i]}.{labels[g]})")
        i += 1

    objects = tuple(
        ObjectRef(i, f"X{i}" if len(state_sets) > 1 else "X")
        for i in range(len(state_sets))
    )
    arrows = tuple(
        Arrow(i, t.dom, t.cod, labels[i]) for i, t in enumerate(elems)
    )
    table: dict[tuple[int, int], int] = {}
    for f, tf in enumerate(elems):
        for g, tg in enumerate(elems):
            if tf.cod != tg.dom:
                continue
            prod = compose_transformations(tf, tg)
            table[(f, g)] = seen[prod.key()]
    abstract = Semigroupoid(objects, arrows, table)
    return TransformationSemigroupoid(state_sets, elems, abstract)


def relabel_objects(
    ts: TransformationSemigroupoid, labels: Sequence[str]
) -> TransformationSemigroupoid:
    objects = tuple(
        ObjectRef(o.id, labels[o.id]) for o in ts.abstract.objects
    )
    abstract = Semigroupoid(objects, ts.abstract.arrows, ts.abstract.table)
    return TransformationSemigroupoid(ts.state_sets, ts.transformations, abstract)


def validate_transformation_semigroupoid(
    ts: TransformationSemigroupoid,
) -> list[Violation]:
    """Faithfulness report: abstract table must agree with the action."""
    report = validate_semigroupoid(ts.abstract)
    if len(ts.transformations) != len(ts.abstract.arrows):
        raise StructuralError("arrow/transformation count mismatch")
    for a in ts.abstract.arrows:
        t = ts.transformations[a.id]
        if (t.dom, t.cod) != (a.dom, a.cod):
            report.append(
                Violation(
                    "type-mismatch",
                    f"arrow {a.label} typed {a.dom}->{a.cod} but its "
                    f"transformation is {t.dom}->{t.cod}",
                    (a.id,),
                )
            )
            continue
        n_cod = len(ts.state_sets[t.cod].states)
        if len(t.mapping) != len(ts.state_sets[t.dom].states) or any(
            not 0 <= i < n_cod for i in t.mapping
        ):
            raise StructuralError(f"arrow {a.label} is not a total function")
    seen: dict[tuple, int] = {}
    for i, t in enumerate(ts.transformations):
        if t.key() in seen:
            report.append(
                Violation(
                    "duplicate-arrow",
                    f"arrows {seen[t.key()]} and {i} are the same function",
                    (seen[t.key()], i),
                )
            )
        else:
            seen[t.key()] = i
    for f, g in ts.abstract.composable_pairs():
        prod = compose_transformations(ts.transformations[f], ts.transformations[g])
        h = seen.get(prod.key())
        if h is None:
            report.append(
                Violation(
                    "not-closed",
                    f"composite of arrows {f} and {g} is not among the arrows",
                    (f, g),
                )
            )
        elif ts.abstract.table.get((f, g)) not in (None, h):
            report.append(
                Violation(
                    "table-disagrees",
                    f"table says {f}.{g} = {ts.abstract.table[(f, g)]} but the "
                    f"functions compose to {h}",
                    (f, g),
                )
            )
    return report


def image_sets(ts: TransformationSemigroupoid) -> set[frozenset[int]]:
    """All images X.s of the single state set under the arrows."""
    _require_one_object(ts)
    return {frozenset(t.mapping) for t in ts.transformations}


@dataclass
class ImageTyping:
    """Image-set typing of a one-object transformation semigroupoid."""

    typed: TransformationSemigroupoid
    functor: "RelationalFunctor"
    object_of_subset: dict[frozenset[int], int]


def image_typed_semigroupoid(ts: TransformationSemigroupoid) -> ImageTyping:
    """Split the single state set into one type per image set.

    Every arrow restricts to one arrow per image-set object; the relation
    sending an arrow to the set of its restrictions is a relational functor.
    The full state set is always kept as an object so the source object has
    a home even when no arrow has full image.
    """
    base = _require_one_object(ts)
    n = len(base.states)
    full = frozenset(range(n))
    subsets = sorted(
        image_sets(ts) | {full}, key=lambda s: (-len(s), tuple(sorted(s)))
    )
    obj_of: dict[frozenset[int], int] = {s: i for i, s in enumerate(subsets)}
    members = [tuple(sorted(s)) for s in subsets]

    state_sets = tuple(
        StateSet(i, tuple(base.states[x] for x in members[i]))
        for i in range(len(subsets))
    )
    objects = tuple(
        ObjectRef(i, "{%s}" % ",".join(base.states[x] for x in members[i]))
        for i in range(len(subsets))
    )

    arrows: list[Arrow] = []
    elems: list[Transformation] = []
    seen: dict[tuple, int] = {}
    arrow_map: dict[int, set[int]] = {a.id: set() for a in ts.abstract.arrows}
    for obj_id, dom_states in enumerate(members):
        for a in ts.abstract.arrows:
            t = ts.transformations[a.id]
            image = frozenset(t.mapping[x] for x in dom_states)
            cod_id = obj_of[image]
            cod_states = members[cod_id]
            mapping = tuple(cod_states.index(t.mapping[x]) for x in dom_states)
            restriction = Transformation(obj_id, cod_id, mapping)
            idx = seen.get(restriction.key())
            if idx is None:
                idx = len(elems)
                seen[restriction.key()] = idx
                elems.append(restriction)
                arrows.append(
                    Arrow(idx, obj_id, cod_id, f"{a.label}|{objects[obj_id].label}")
                )
            arrow_map[a.id].add(idx)

    table: dict[tuple[int, int], int] = {}
    for f, tf in enumerate(elems):
        for g, tg in enumerate(elems):
            if tf.cod != tg.dom:
                continue
            prod = compose_transformations(tf, tg)
            h = seen.get(prod.key())
            if h is None:
                raise StructuralError("image typing produced an unclosed composite")
            table[(f, g)] = h
    typed_abstract = Semigroupoid(objects, tuple(arrows), table)
    typed = TransformationSemigroupoid(state_sets, tuple(elems), typed_abstract)
    functor = RelationalFunctor(
        ts.abstract,
        typed_abstract,
        {a: frozenset(v) for a, v in arrow_map.items()},
    )
    return ImageTyping(typed, functor, obj_of)


@dataclass
class RelationalMorphismTS:
    """Relational morphism between one-object transformation semigroupoids.

    ``state_rel`` and ``arrow_rel`` map indices of the source to non-empty
    sets of indices in the target; validity (full definedness and compatible
    actions) is checked by ``validate_relational_morphism_ts``.
    """

    source: TransformationSemigroupoid
    target: TransformationSemigroupoid
    state_rel: dict[int, frozenset[int]]
    arrow_rel: dict[int, frozenset[int]]


@dataclass
class PinholeTyping:
    """Pinhole projections of a relational morphism, typed per target state."""

    projected: TransformationSemigroupoid
    psi: RelationalFunctor
    restrictions: RelationalFunctor
    pinhole_object: dict[int, int]
    restriction_arrow: dict[tuple[int, int, int], int]


def pinhole_typed_semigroupoid(m: RelationalMorphismTS) -> PinholeTyping:
    """Copy the preimages: one object per target state, arrows by restriction.

    For a source arrow s, target state y and related target arrow t, the
    restriction maps pre(y) into pre(y.t); compatibility of the morphism
    makes this well defined.  ``psi`` relates each restriction to the target
    arrows it tracks; ``restrictions`` relates each source arrow to all of
    its restrictions.
    """
    from .relational import validate_relational_morphism_ts

    report = validate_relational_morphism_ts(m)
    if report:
        raise StructuralError(
            "invalid relational morphism: " + "; ".join(str(v) for v in report)
        )
    src = m.source
    tgt = m.target
    src_states = src.state_sets[0].states
    n_tgt = len(tgt.state_sets[0].states)
    tgt_labels = tgt.state_sets[0].states

    preimage: dict[int, tuple[int, ...]] = {}
    for y in range(n_tgt):
        pre = tuple(
            x for x in range(len(src_states)) if y in m.state_rel[x]
        )
        if pre:
            preimage[y] = pre
    pinholes = sorted(preimage)
    pinhole_object = {y: i for i, y in enumerate(pinholes)}

    state_sets = tuple(
        StateSet(i, tuple(src_states[x] for x in preimage[y]))
        for i, y in enumerate(pinholes)
    )
    objects = tuple(
        ObjectRef(
            i,
            "{%s}" % ",".join(src_states[x] for x in preimage[y]),
        )
        for i, y in enumerate(pinholes)
    )

    elems: list[Transformation] = []
    arrows: list[Arrow] = []
    seen: dict[tuple, int] = {}
    psi_map: dict[int, set[int]] = {}
    rho_map: dict[int, set[int]] = {a.id: set() for a in src.abstract.arrows}
    restriction_arrow: dict[tuple[int, int, int], int] = {}
    for a in src.abstract.arrows:
        s = src.transformations[a.id]
        for y in pinholes:
            for t_id in sorted(m.arrow_rel[a.id]):
                y_cod = apply(tgt.transformations[t_id], y)
                if y_cod not in pinhole_object:
                    raise StructuralError(
                        f"target state {tgt_labels[y_cod]} has an empty preimage"
                    )
                dom_obj = pinhole_object[y]
                cod_obj = pinhole_object[y_cod]
                cod_pre = preimage[y_cod]
                mapping = []
                for x in preimage[y]:
                    xs = apply(s, x)
                    if xs not in cod_pre:
                        raise StructuralError(
                            "compatibility breach while projecting pinholes"
                        )
                    mapping.append(cod_pre.index(xs))
                restriction = Transformation(dom_obj, cod_obj, tuple(mapping))
                idx = seen.get(restriction.key())
                if idx is None:
                    idx = len(elems)
                    seen[restriction.key()] = idx
                    elems.append(restriction)
                    arrows.append(
                        Arrow(
                            idx,
                            dom_obj,
                            cod_obj,
                            f"{a.label}|{objects[dom_obj].label}",
                        )
                    )
                    psi_map[idx] = set()
                psi_map[idx].update(
                    t2
                    for t2 in m.arrow_rel[a.id]
                    if apply(tgt.transformations[t2], y) == y_cod
                )
                rho_map[a.id].add(idx)
                restriction_arrow[(a.id, y, y_cod)] = idx

    table: dict[tuple[int, int], int] = {}
    for f, tf in enumerate(elems):
        for g, tg in enumerate(elems):
            if tf.cod != tg.dom:
                continue
            prod = compose_transformations(tf, tg)
            h = seen.get(prod.key())
            if h is None:
                raise StructuralError("pinhole typing produced an unclosed composite")
            table[(f, g)] = h
    abstract = Semigroupoid(objects, tuple(arrows), table)
    projected = TransformationSemigroupoid(state_sets, tuple(elems), abstract)
    psi = RelationalFunctor(
        abstract, tgt.abstract, {a: frozenset(v) for a, v in psi_map.items()}
    )
    rho = RelationalFunctor(
        src.abstract, abstract, {a: frozenset(v) for a, v in rho_map.items()}
    )
    return PinholeTyping(projected, psi, rho, pinhole_object, restriction_arrow)


def holonomy_seed_morphism(ts: TransformationSemigroupoid) -> RelationalMorphismTS:
    """The seed morphism of the holonomy construction.

    States go to the complements of their singletons; permutations go to
    themselves and every other arrow to the constant maps onto the states
    missing from its image.  The target is the closure of the related maps.
    """
    base = _require_one_object(ts)
    n = len(base.states)
    if n < 2:
        raise UnsupportedError(
            "seed morphism is degenerate on a single state (empty complement)"
        )

    gen_list: list[tuple[str, Transformation]] = []
    image_keys: dict[int, list[tuple]] = {}
    for a in ts.abstract.arrows:
        t = ts.transformations[a.id]
        keys = []
        if is_permutation(t):
            keys.append(t.key())
            gen_list.append((a.label, t))
        else:
            img = set(t.mapping)
            for z in range(n):
                if z in img:
                    continue
                const = Transformation(0, 0, (z,) * n)
                keys.append(const.key())
                gen_list.append((f"c{base.states[z]}", const))
        image_keys[a.id] = keys

    target = generate_closure((StateSet(0, base.states),), gen_list)
    key_to_target = {
        t.key(): i for i, t in enumerate(target.transformations)
    }
    arrow_rel = {
        a: frozenset(key_to_target[k] for k in keys)
        for a, keys in image_keys.items()
    }
    state_rel = {
        x: frozenset(set(range(n)) - {x}) for x in range(n)
    }
    return RelationalMorphismTS(ts, target, state_rel, arrow_rel)


@dataclass
class OrbitWitness:
    label: str
    generator: Transformation
    orbit: tuple[Transformation, ...]


@dataclass
class DiagnosticReport:
    """What an untyped completion adds on top of the original arrows."""

    original_arrow_count: int
    completed_arrow_count: int
    new_elements: list[Transformation]
    orbit_witness: Optional[OrbitWitness] = None
    absorbed_composites: Optional[int] = None


def _union_state_labels(ts: TransformationSemigroupoid, extra: str | None = None):
    labels: list[str] = []
    offsets: list[int] = []
    raw = [s for ss in ts.state_sets for s in ss.states]
    qualify = len(set(raw)) != len(raw)
    for ss in ts.state_sets:
        offsets.append(len(labels))
        obj_label = ts.abstract.objects[ss.object].label
        for s in ss.states:
            labels.append(f"{s}@{obj_label}" if qualify else s)
    if extra is not None:
        while extra in labels:
            extra = "_" + extra
        labels.append(extra)
    return labels, offsets


def _closure_of(
    labels: Sequence[str],
    padded: Sequence[tuple[str, Transformation]],
) -> TransformationSemigroupoid:
    return generate_closure((StateSet(0, tuple(labels)),), list(padded))


def _power_orbit(start: Transformation) -> tuple[Transformation, ...]:
    orbit = [start]
    seen = {start.key()}
    cur = start
    while True:
        cur = compose_transformations(cur, start)
        if cur.key() in seen:
            return tuple(orbit)
        seen.add(cur.key())
        orbit.append(cur)


def pad_with_identities(
    tsg: TransformationSemigroupoid,
) -> tuple[TransformationSemigroupoid, DiagnosticReport]:
    """Make every arrow total on the disjoint union, identity off its domain.

    The closure of the padded arrows can contain elements that do not come
    from any original typed arrow; the report lists them, together with the
    power orbit of the first such composite.
    """
    labels, offsets = _union_state_labels(tsg)
    total = len(labels)
    padded: list[tuple[str, Transformation]] = []
    padded_keys: set[tuple] = set()
    for a in tsg.abstract.arrows:
        t = tsg.transformations[a.id]
        mapping = list(range(total))
        for x, y in enumerate(t.mapping):
            mapping[offsets[t.dom] + x] = offsets[t.cod] + y
        pt = Transformation(0, 0, tuple(mapping))
        padded.append((a.label, pt))
        padded_keys.add(pt.key())
    closure = _closure_of(labels, padded)
    new_elements = [
        t for t in closure.transformations if t.key() not in padded_keys
    ]
    witness = None
    for i, t in enumerate(closure.transformations):
        if t.key() not in padded_keys:
            witness = OrbitWitness(
                closure.abstract.arrows[i].label, t, _power_orbit(t)
            )
            break
    report = DiagnosticReport(
        original_arrow_count=len(tsg.transformations),
        completed_arrow_count=len(closure.transformations),
        new_elements=new_elements,
        orbit_witness=witness,
    )
    return closure, report


def sink_completion(
    tsg: TransformationSemigroupoid,
) -> tuple[TransformationSemigroupoid, DiagnosticReport]:
    """Make arrows total by sending everything off-domain to a fresh sink.

    Ill-typed composites collapse to the fully undefined map (constant to
    the sink); the report counts how many ordered pairs of original arrows
    get absorbed that way.
    """
    labels, offsets = _union_state_labels(tsg, extra="_")
    total = len(labels)
    sink = total - 1
    completed: list[tuple[str, Transformation]] = []
    completed_keys: set[tuple] = set()
    for a in tsg.abstract.arrows:
        t = tsg.transformations[a.id]
        mapping = [sink] * total
        for x, y in enumerate(t.mapping):
            mapping[offsets[t.dom] + x] = offsets[t.cod] + y
        ct = Transformation(0, 0, tuple(mapping))
        completed.append((a.label, ct))
        completed_keys.add(ct.key())
    closure = _closure_of(labels, completed)
    new_elements = [
        t for t in closure.transformations if t.key() not in completed_keys
    ]
    absorbed = 0
    for f in tsg.abstract.arrows:
        for g in tsg.abstract.arrows:
            if f.cod != g.dom:
                absorbed += 1
    report = DiagnosticReport(
        original_arrow_count=len(tsg.transformations),
        completed_arrow_count=len(closure.transformations),
        new_elements=new_elements,
        absorbed_composites=absorbed,
    )
    return closure, report


def full_transformation_semigroupoid(n: int) -> TransformationSemigroupoid:
    """The full transformation semigroup T_n on n states, as one object."""
    if n < 1:
        raise UnsupportedError("need at least one state")
    states = tuple(str(i) for i in range(n))
    mappings = [()]
    for _ in range(n):
        mappings = [m + (v,) for m in mappings for v in range(n)]
    index = {m: i for i, m in enumerate(mappings)}
    elems = tuple(Transformation(0, 0, m) for m in mappings)
    arrows = tuple(
        Arrow(i, 0, 0, "t" + "".join(str(v) for v in m))
        for i, m in enumerate(mappings)
    )
    table = {}
    for f, tf in enumerate(elems):
        for g, tg in enumerate(elems):
            table[(f, g)] = index[
                tuple(tg.mapping[i] for i in tf.mapping)
            ]
    abstract = Semigroupoid((ObjectRef(0, "X"),), arrows, table)
    return TransformationSemigroupoid((StateSet(0, states),), elems, abstract)
