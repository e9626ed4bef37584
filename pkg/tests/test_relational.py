from __future__ import annotations

import random

import pytest

from sgpoid.core import StructuralError
from sgpoid.harness import random_composable_functor_pair, surjective_functor_stream
from sgpoid.relational import (
    NotSurjectiveError,
    RelationalFunctor,
    classify,
    compose_functors,
    identity_functor,
    induced_object_relation,
    preimages,
    validate_relational_functor,
    validate_relational_morphism_ts,
)
from sgpoid.transformation import (
    RelationalMorphismTS,
    full_transformation_semigroupoid,
    image_typed_semigroupoid,
    pinhole_typed_semigroupoid,
)

from conftest import labels


def z4_to_z2_functor(z4, z2):
    lab4, lab2 = labels(z4.abstract), labels(z2.abstract)
    return RelationalFunctor(
        z4.abstract,
        z2.abstract,
        {
            lab4["+0"]: frozenset({lab2["+0'"]}),
            lab4["+1"]: frozenset({lab2["+1'"]}),
            lab4["+2"]: frozenset({lab2["+0'"]}),
            lab4["+3"]: frozenset({lab2["+1'"]}),
        },
    )


def test_tn_functor_valid():
    it = image_typed_semigroupoid(full_transformation_semigroupoid(2))
    assert validate_relational_functor(it.functor) == []


def test_nocompress_functor_valid(nocompress_functor):
    assert validate_relational_functor(nocompress_functor) == []


def test_edited_z4_map_is_rejected(z4, z2):
    # brute-force oracle over all pairs under the edited map
    phi = z4_to_z2_functor(z4, z2)
    lab4, lab2 = labels(z4.abstract), labels(z2.abstract)
    edited = dict(phi.arrow_map)
    edited[lab4["+1"]] = frozenset({lab2["+0'"]})
    candidate = RelationalFunctor(z4.abstract, z2.abstract, edited)
    expected_bad = set()
    for f, g in z4.abstract.composable_pairs():
        fg = z4.abstract.compose(f, g)
        composite = z2.abstract.compose_sets(edited[f], edited[g])
        if not composite or not composite <= edited[fg]:
            expected_bad.add((f, g))
    assert expected_bad
    report = validate_relational_functor(candidate)
    assert report
    assert {v.witness[:2] for v in report} == expected_bad


def test_empty_image_is_rejected(z4, z2):
    phi = z4_to_z2_functor(z4, z2)
    edited = dict(phi.arrow_map)
    edited[0] = frozenset()
    report = validate_relational_functor(
        RelationalFunctor(z4.abstract, z2.abstract, edited)
    )
    assert any(v.kind == "empty-image" for v in report)


def test_induced_object_relation_tn():
    it = image_typed_semigroupoid(full_transformation_semigroupoid(2))
    rel = induced_object_relation(it.functor)
    n_targets = len(it.typed.abstract.objects)
    assert rel.pairs == frozenset({(0, j) for j in range(n_targets)})


def test_induced_object_relation_identity(fig2):
    rel = induced_object_relation(identity_functor(fig2))
    assert rel.pairs == frozenset({(0, 0), (1, 1)})


def test_induced_object_relation_nocompress(nocompress_functor):
    rel = induced_object_relation(nocompress_functor)
    assert rel.pairs == frozenset({(0, 0), (1, 1)})


def test_compose_with_identity(z4, z2):
    phi = z4_to_z2_functor(z4, z2)
    composed = compose_functors(phi, identity_functor(z2.abstract))
    assert composed.arrow_map == phi.arrow_map


def test_compose_to_trivial(z4, z2):
    from sgpoid.core import Arrow, ObjectRef, Semigroupoid

    trivial = Semigroupoid(
        (ObjectRef(0, "*"),), (Arrow(0, 0, 0, "e"),), {(0, 0): 0}
    )
    phi = z4_to_z2_functor(z4, z2)
    tau = RelationalFunctor(
        z2.abstract, trivial, {a.id: frozenset({0}) for a in z2.abstract.arrows}
    )
    composed = compose_functors(phi, tau)
    assert all(v == frozenset({0}) for v in composed.arrow_map.values())
    assert validate_relational_functor(composed) == []


def test_compose_chain_mismatch(z4, z2):
    phi = z4_to_z2_functor(z4, z2)
    with pytest.raises(StructuralError):
        compose_functors(phi, phi)


def test_randomized_composites_validate():
    rng = random.Random(13)
    done = 0
    while done < 100:
        pair = random_composable_functor_pair(rng)
        if pair is None:
            continue
        phi, tau = pair
        assert validate_relational_functor(compose_functors(phi, tau)) == []
        done += 1


def test_functor_composition_associative():
    from sgpoid.harness import _enlarge

    rng = random.Random(99)
    done = 0
    while done < 30:
        pair = random_composable_functor_pair(rng)
        if pair is None:
            continue
        phi, tau = pair
        ups = _enlarge(rng, identity_functor(tau.target))
        if validate_relational_functor(ups):
            continue
        left = compose_functors(compose_functors(phi, tau), ups)
        right = compose_functors(phi, compose_functors(tau, ups))
        assert left.arrow_map == right.arrow_map
        done += 1


def test_classify_z4_collapse(z4, z2):
    assert classify(z4_to_z2_functor(z4, z2)) == (True, False)


def test_classify_identity(fig2, z4):
    for s in (fig2, z4.abstract):
        assert classify(identity_functor(s)) == (True, True)


def test_classify_tn_functor():
    # Distinct arrows restrict identically on small image sets (the identity
    # on a singleton comes from both the identity and a constant), so the
    # image-typing functor is surjective but not injective.
    for n in (2, 3):
        it = image_typed_semigroupoid(full_transformation_semigroupoid(n))
        got = classify(it.functor)
        assert got.surjective
        assert not got.injective


def test_preimages_z4(z4, z2):
    lab4, lab2 = labels(z4.abstract), labels(z2.abstract)
    pre = preimages(z4_to_z2_functor(z4, z2))
    assert pre[lab2["+0'"]] == frozenset({lab4["+0"], lab4["+2"]})
    assert pre[lab2["+1'"]] == frozenset({lab4["+1"], lab4["+3"]})


def test_preimages_identity(fig2):
    pre = preimages(identity_functor(fig2))
    assert all(pre[a.id] == frozenset({a.id}) for a in fig2.arrows)


def test_preimages_pinhole_psi(z4_morphism):
    pt = pinhole_typed_semigroupoid(z4_morphism)
    lab2 = labels(pt.psi.target)
    pre = preimages(pt.psi)
    endo_ids = {
        a.id
        for a in pt.projected.abstract.arrows
        if a.dom == a.cod
    }
    assert pre[lab2["+0'"]] == frozenset(endo_ids)
    assert len(pre[lab2["+1'"]]) == 4


def test_preimages_cover_source():
    for phi in surjective_functor_stream(25, seed=4):
        pre = preimages(phi)
        covered = set()
        for members in pre.values():
            covered |= members
        assert covered == {a.id for a in phi.source.arrows}


def test_preimages_non_surjective(z4, z2):
    lab4, lab2 = labels(z4.abstract), labels(z2.abstract)
    phi = RelationalFunctor(
        z4.abstract,
        z2.abstract,
        {a.id: frozenset({lab2["+0'"]}) for a in z4.abstract.arrows},
    )
    with pytest.raises(NotSurjectiveError) as exc:
        preimages(phi)
    assert exc.value.uncovered == frozenset({lab2["+1'"]})


def test_nonempty_composites_via_validator():
    for phi in surjective_functor_stream(25, seed=5):
        src = phi.source
        for f, g in src.composable_pairs():
            assert phi.target.compose_sets(phi.arrow_map[f], phi.arrow_map[g])


# --- ts-level morphism validation -------------------------------------------


def test_z4_morphism_valid(z4_morphism):
    assert validate_relational_morphism_ts(z4_morphism) == []


def test_seed_morphism_validates(z4):
    from sgpoid.transformation import holonomy_seed_morphism

    m = holonomy_seed_morphism(z4)
    assert validate_relational_morphism_ts(m) == []


def test_morphism_with_empty_state_image(z4_morphism):
    m = z4_morphism
    bad = RelationalMorphismTS(
        m.source,
        m.target,
        {**m.state_rel, 3: frozenset()},
        m.arrow_rel,
    )
    report = validate_relational_morphism_ts(bad)
    assert any(v.kind == "state-undefined" for v in report)


def test_morphism_incompatible_action(z4_morphism):
    m = z4_morphism
    lab2 = labels(m.target.abstract)
    bad_arrows = dict(m.arrow_rel)
    lab4 = labels(m.source.abstract)
    bad_arrows[lab4["+1"]] = frozenset({lab2["+0'"]})
    bad = RelationalMorphismTS(m.source, m.target, m.state_rel, bad_arrows)
    report = validate_relational_morphism_ts(bad)
    assert any(v.kind == "incompatible-action" for v in report)
