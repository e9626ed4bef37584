from __future__ import annotations

import pytest

from sgpoid.core import NotComposableError, StructuralError, UnsupportedError
from sgpoid.relational import classify, validate_relational_functor, validate_relational_morphism_ts
from sgpoid.transformation import (
    RelationalMorphismTS,
    StateSet,
    Transformation,
    apply,
    apply_word,
    compose_transformations,
    full_transformation_semigroupoid,
    generate_closure,
    holonomy_seed_morphism,
    image_sets,
    image_typed_semigroupoid,
    pad_with_identities,
    pinhole_typed_semigroupoid,
    sink_completion,
    validate_transformation_semigroupoid,
)

from conftest import closure_of, fixture_ts, labels


# --- oracles kept independent of the implementation under test -------------


def naive_closure(state_sets, generators):
    """Fixpoint closure over raw mapping tuples."""
    elems = set()
    frontier = {(t.dom, t.cod, t.mapping) for t in generators}
    while frontier:
        elems |= frontier
        new = set()
        for d1, c1, m1 in elems:
            for d2, c2, m2 in elems:
                if c1 != d2:
                    continue
                prod = (d1, c2, tuple(m2[i] for i in m1))
                if prod not in elems:
                    new.add(prod)
        frontier = new
    return elems


def naive_images(ts):
    return {frozenset(t.mapping) for t in ts.transformations}


# --- apply / compose --------------------------------------------------------


def test_flipflop_word(flipflop):
    lab = labels(flipflop.abstract)
    t = flipflop.transformations
    word = [t[lab[w]] for w in ("w1", "r", "r", "w0", "r", "w1", "r")]
    assert apply_word(word, 0) == [0, 1, 1, 1, 0, 0, 1, 1]


def test_apply_identity_and_range(z4):
    ident = z4.transformations[labels(z4.abstract)["+0"]]
    for x in range(4):
        assert apply(ident, x) == x
    plus2 = z4.transformations[labels(z4.abstract)["+2"]]
    assert apply(plus2, 1) == 3
    with pytest.raises(StructuralError):
        apply(ident, 7)


def test_vessels_transfers(vessels):
    lab = labels(vessels.abstract)
    t = vessels.transformations
    gcf = compose_transformations(
        compose_transformations(t[lab["g21"]], t[lab["c"]]), t[lab["f12"]]
    )
    assert (gcf.dom, gcf.cod, gcf.mapping) == (1, 1, (1, 0))
    frg = compose_transformations(
        compose_transformations(t[lab["f12"]], t[lab["r"]]), t[lab["g21"]]
    )
    assert (frg.dom, frg.cod, frg.mapping) == (0, 0, (1, 1))


def test_compose_type_mismatch(vessels):
    lab = labels(vessels.abstract)
    t = vessels.transformations
    with pytest.raises(NotComposableError):
        compose_transformations(t[lab["c"]], t[lab["r"]])


def test_identity_is_right_neutral(flipflop):
    lab = labels(flipflop.abstract)
    r = flipflop.transformations[lab["r"]]
    for t in flipflop.transformations:
        assert compose_transformations(t, r) == t


# --- closure generation ------------------------------------------------------


def test_dualmode_closure_matches_oracle():
    ts = fixture_ts("dualmode.sgd")
    closure = closure_of("dualmode.sgd")
    oracle = naive_closure(ts.state_sets, ts.transformations)
    produced = {t.key() for t in closure.transformations}
    assert produced == oracle
    # A naive per-type count gives 7 elements for this machine, but the
    # closure also contains the constant composites through the switches
    # (e.g. f12.+1_2), giving 15 extensionally distinct transformations.
    assert len(closure.transformations) == 15


def test_z4_generated_from_increment():
    closure = closure_of("z4gen.sgd")
    assert len(closure.transformations) == 4
    assert validate_transformation_semigroupoid(closure) == []


def test_single_identity_generator():
    ss = (StateSet(0, ("0", "1")),)
    closure = generate_closure(ss, [("e", Transformation(0, 0, (0, 1)))])
    assert len(closure.transformations) == 1


def test_closure_is_idempotent(dualmode_closure):
    again = generate_closure(
        dualmode_closure.state_sets,
        [
            (a.label, dualmode_closure.transformations[a.id])
            for a in dualmode_closure.abstract.arrows
        ],
    )
    assert {t.key() for t in again.transformations} == {
        t.key() for t in dualmode_closure.transformations
    }


def test_closure_ids_are_deterministic():
    one = closure_of("dualmode.sgd")
    two = closure_of("dualmode.sgd")
    assert [t.key() for t in one.transformations] == [
        t.key() for t in two.transformations
    ]
    assert [a.label for a in one.abstract.arrows] == [
        a.label for a in two.abstract.arrows
    ]


def test_ill_typed_generator_rejected():
    ss = (StateSet(0, ("0", "1")),)
    with pytest.raises(StructuralError):
        generate_closure(ss, [("bad", Transformation(0, 0, (0, 5)))])


def test_extensional_faithfulness(dualmode_closure, flipflop, z4):
    for ts in (dualmode_closure, flipflop, z4):
        assert validate_transformation_semigroupoid(ts) == []
        for f, g in ts.abstract.composable_pairs():
            h = ts.abstract.compose(f, g)
            assert compose_transformations(
                ts.transformations[f], ts.transformations[g]
            ) == ts.transformations[h]


# --- image sets and image typing ---------------------------------------------


def test_image_sets_flipflop(flipflop):
    assert image_sets(flipflop) == naive_images(flipflop)
    assert image_sets(flipflop) == {
        frozenset({0, 1}),
        frozenset({0}),
        frozenset({1}),
    }


def test_image_sets_z4(z4):
    assert image_sets(z4) == {frozenset({0, 1, 2, 3})}


def test_image_sets_tn():
    for n in (2, 3):
        tn = full_transformation_semigroupoid(n)
        imgs = image_sets(tn)
        assert imgs == naive_images(tn)
        assert len(imgs) == 2**n - 1


def test_image_sets_needs_one_object(vessels):
    with pytest.raises(UnsupportedError):
        image_sets(vessels)


def test_image_typed_t2():
    t2 = full_transformation_semigroupoid(2)
    it = image_typed_semigroupoid(t2)
    assert len(t2.transformations) == 4
    assert len(it.typed.abstract.objects) == 3
    assert all(len(v) == 3 for v in it.functor.arrow_map.values())
    assert validate_relational_functor(it.functor) == []


def test_image_typed_t3_set_equality():
    t3 = full_transformation_semigroupoid(3)
    it = image_typed_semigroupoid(t3)
    assert len(it.typed.abstract.objects) == 7
    assert all(len(v) == 7 for v in it.functor.arrow_map.values())
    I = it.typed.abstract
    phi = it.functor.arrow_map
    table = t3.abstract.table
    for f in range(27):
        for g in range(27):
            assert I.compose_sets(phi[f], phi[g]) == phi[table[(f, g)]]


def test_image_typed_single_identity():
    ss = (StateSet(0, ("x",)),)
    one = generate_closure(ss, [("e", Transformation(0, 0, (0,)))])
    it = image_typed_semigroupoid(one)
    assert len(it.typed.abstract.objects) == 1
    assert len(it.typed.abstract.arrows) == 1


def test_image_typed_keeps_full_set_object(flipflop):
    # drop the read arrow so no transformation has full image
    lab = labels(flipflop.abstract)
    ts = generate_closure(
        flipflop.state_sets,
        [
            ("w0", flipflop.transformations[lab["w0"]]),
            ("w1", flipflop.transformations[lab["w1"]]),
        ],
    )
    it = image_typed_semigroupoid(ts)
    assert frozenset({0, 1}) in it.object_of_subset
    assert len(it.typed.abstract.objects) == 3


def test_image_typed_is_valid_ts():
    for n in (2, 3):
        it = image_typed_semigroupoid(full_transformation_semigroupoid(n))
        assert validate_transformation_semigroupoid(it.typed) == []


# --- pinhole typing ----------------------------------------------------------


def test_pinhole_z4(z4_morphism):
    pt = pinhole_typed_semigroupoid(z4_morphism)
    p = pt.projected
    state_sets = [ss.states for ss in p.state_sets]
    assert state_sets == [("0", "2"), ("1", "3")]
    mappings = {
        (a.label, p.transformations[a.id].dom, p.transformations[a.id].cod):
        p.transformations[a.id].mapping
        for a in p.abstract.arrows
    }
    # the two +2 restrictions are the transpositions of their halves
    assert mappings[("+2|{0,2}", 0, 0)] == (1, 0)
    assert mappings[("+2|{1,3}", 1, 1)] == (1, 0)
    assert len(p.abstract.arrows) == 8
    assert validate_transformation_semigroupoid(p) == []
    assert validate_relational_functor(pt.psi) == []
    assert classify(pt.psi).surjective


def test_pinhole_preimage_objects_by_oracle(z4_morphism):
    m = z4_morphism
    # oracle: enumerate restrictions of every arrow at every pinhole
    n_src = len(m.source.state_sets[0].states)
    pre = {
        y: [x for x in range(n_src) if y in m.state_rel[x]]
        for y in range(len(m.target.state_sets[0].states))
    }
    expected = set()
    for a in m.source.abstract.arrows:
        s = m.source.transformations[a.id]
        for y, dom in pre.items():
            for t in m.arrow_rel[a.id]:
                y2 = m.target.transformations[t].mapping[y]
                mapping = tuple(pre[y2].index(s.mapping[x]) for x in dom)
                expected.add((y, y2, mapping))
    pt = pinhole_typed_semigroupoid(m)
    produced = {
        (t.dom, t.cod, t.mapping) for t in pt.projected.transformations
    }
    # objects are indexed by pinhole order, which here equals target state order
    assert produced == {(d, c, m_) for d, c, m_ in expected}


def test_pinhole_restriction_functor_tracks_sources(z4_morphism):
    pt = pinhole_typed_semigroupoid(z4_morphism)
    assert validate_relational_functor(pt.restrictions) == []
    # each Z4 arrow restricts to one arrow per pinhole
    assert all(len(v) == 2 for v in pt.restrictions.arrow_map.values())


def test_pinhole_identity_morphism_one_state():
    ss = (StateSet(0, ("x",)),)
    one = generate_closure(ss, [("e", Transformation(0, 0, (0,)))])
    m = RelationalMorphismTS(one, one, {0: frozenset({0})}, {0: frozenset({0})})
    pt = pinhole_typed_semigroupoid(m)
    assert len(pt.projected.abstract.arrows) == 1
    assert classify(pt.psi) == (True, True)


def test_pinhole_identity_morphism_z4_expands(z4):
    # With singleton state images every pinhole is a singleton, so the
    # projection splits each arrow into one restriction per state: 16 arrows,
    # and psi overlaps on arrows sharing a displacement (not injective).
    m = RelationalMorphismTS(
        z4,
        z4,
        {x: frozenset({x}) for x in range(4)},
        {a.id: frozenset({a.id}) for a in z4.abstract.arrows},
    )
    pt = pinhole_typed_semigroupoid(m)
    assert len(pt.projected.abstract.objects) == 4
    assert len(pt.projected.abstract.arrows) == 16
    assert classify(pt.psi).surjective
    assert not classify(pt.psi).injective


def test_pinhole_rejects_invalid_morphism(z4, z2):
    bad = RelationalMorphismTS(
        z4,
        z2,
        {0: frozenset({0}), 1: frozenset({1}), 2: frozenset({0}), 3: frozenset()},
        {a.id: frozenset({a.id % 2}) for a in z4.abstract.arrows},
    )
    with pytest.raises(StructuralError):
        pinhole_typed_semigroupoid(bad)


# --- holonomy seed morphism --------------------------------------------------


def test_seed_morphism_z4(z4):
    m = holonomy_seed_morphism(z4)
    assert validate_relational_morphism_ts(m) == []
    lab = labels(z4.abstract)
    for name in ("+0", "+1", "+2", "+3"):
        img = m.arrow_rel[lab[name]]
        assert len(img) == 1
        t = m.target.transformations[next(iter(img))]
        assert t.mapping == z4.transformations[lab[name]].mapping
    for x in range(4):
        assert m.state_rel[x] == frozenset(set(range(4)) - {x})


def test_seed_morphism_flipflop(flipflop):
    m = holonomy_seed_morphism(flipflop)
    assert validate_relational_morphism_ts(m) == []
    lab = labels(flipflop.abstract)
    tgt = {a.label: m.target.transformations[a.id].mapping for a in m.target.abstract.arrows}
    img_w0 = {m.target.abstract.arrows[t].label for t in m.arrow_rel[lab["w0"]]}
    img_w1 = {m.target.abstract.arrows[t].label for t in m.arrow_rel[lab["w1"]]}
    assert img_w0 == {"c1"} and tgt["c1"] == (1, 1)
    assert img_w1 == {"c0"} and tgt["c0"] == (0, 0)


def test_seed_morphism_t2():
    t2 = full_transformation_semigroupoid(2)
    m = holonomy_seed_morphism(t2)
    assert validate_relational_morphism_ts(m) == []
    by_mapping = {t2.transformations[a.id].mapping: a.id for a in t2.abstract.arrows}
    swap = by_mapping[(1, 0)]
    img = {m.target.transformations[t].mapping for t in m.arrow_rel[swap]}
    assert img == {(1, 0)}
    const0 = by_mapping[(0, 0)]
    img0 = {m.target.transformations[t].mapping for t in m.arrow_rel[const0]}
    assert img0 == {(1, 1)}


def test_seed_morphism_degenerate():
    ss = (StateSet(0, ("x",)),)
    one = generate_closure(ss, [("e", Transformation(0, 0, (0,)))])
    with pytest.raises(UnsupportedError):
        holonomy_seed_morphism(one)


# --- pad / sink diagnostics --------------------------------------------------


def test_pad_dualmode(dualmode_closure):
    completed, report = pad_with_identities(dualmode_closure)
    assert report.original_arrow_count == 15
    assert report.orbit_witness is not None
    assert len(report.orbit_witness.orbit) == 6
    # the orbit generator is the padded +1_1 followed by padded +1_2
    gen = report.orbit_witness.generator
    assert gen.mapping == (1, 0, 3, 4, 2)
    assert len(completed.state_sets[0].states) == 5
    assert report.completed_arrow_count == len(completed.transformations)
    assert validate_transformation_semigroupoid(completed) == []


def test_pad_preserves_own_domain_action(dualmode_closure):
    ts = dualmode_closure
    completed, _ = pad_with_identities(ts)
    offsets = {}
    acc = 0
    for ss in ts.state_sets:
        offsets[ss.object] = acc
        acc += len(ss.states)
    padded_keys = {t.key(): t for t in completed.transformations}
    for a in ts.abstract.arrows:
        t = ts.transformations[a.id]
        mapping = list(range(acc))
        for x, y in enumerate(t.mapping):
            mapping[offsets[t.dom] + x] = offsets[t.cod] + y
        assert (0, 0, tuple(mapping)) in padded_keys


def test_pad_z4_pinhole(z4_morphism, z4):
    pt = pinhole_typed_semigroupoid(z4_morphism)
    completed, report = pad_with_identities(pt.projected)
    states = completed.state_sets[0].states

    def as_label_fn(t, labels_):
        return {labels_[i]: labels_[t.mapping[i]] for i in range(len(labels_))}

    padded_fns = [as_label_fn(t, states) for t in completed.transformations]
    z4_fns = [as_label_fn(t, z4.state_sets[0].states) for t in z4.transformations]
    # padded +2|{0,2} swaps 0,2 but fixes 1,3, so on its own it is not a Z4
    # translation; composing it with the padded +2|{1,3} recovers +2.
    half = {"0": "2", "2": "0", "1": "1", "3": "3"}
    other = {"0": "0", "2": "2", "1": "3", "3": "1"}
    plus2 = {"0": "2", "1": "3", "2": "0", "3": "1"}
    assert half in padded_fns and other in padded_fns
    assert half not in z4_fns
    composed = {x: other[half[x]] for x in half}
    assert composed == plus2 and composed in padded_fns


def test_pad_is_identity_on_one_object(flipflop):
    completed, report = pad_with_identities(flipflop)
    assert report.new_elements == []
    assert report.completed_arrow_count == report.original_arrow_count == 3


def test_sink_dualmode(dualmode_closure):
    completed, report = sink_completion(dualmode_closure)
    assert len(completed.state_sets[0].states) == 6
    assert report.original_arrow_count == 15
    assert report.completed_arrow_count == 16
    assert len(report.new_elements) == 1
    sink = len(completed.state_sets[0].states) - 1
    assert report.new_elements[0].mapping == (sink,) * 6
    # absorbed pairs = ill-typed ordered pairs of original arrows
    expected = sum(
        1
        for f in dualmode_closure.abstract.arrows
        for g in dualmode_closure.abstract.arrows
        if f.cod != g.dom
    )
    assert report.absorbed_composites == expected == 111


def test_sink_no_mismatch_on_one_object(flipflop):
    completed, report = sink_completion(flipflop)
    assert report.absorbed_composites == 0
    assert len(report.new_elements) == 0
    assert report.completed_arrow_count == 3


def test_full_transformation_semigroupoid_sizes():
    for n in (2, 3):
        tn = full_transformation_semigroupoid(n)
        assert len(tn.transformations) == n**n
        assert validate_transformation_semigroupoid(tn) == []
