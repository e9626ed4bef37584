"""Seeded random generation of small systems for the verification harness.

The randomized suites draw surjective relational functors from three
constructions that are valid by design (state-merge quotients, product
projections, image enlargements) and re-validate every draw anyway.  The
seed comes from the SGPOID_SEED environment variable when set.
"""

from __future__ import annotations

import os
import random
from typing import Iterator, Optional

from .core import Arrow, ObjectRef, Semigroupoid
from .relational import RelationalFunctor, classify, validate_relational_functor
from .transformation import (
    StateSet,
    Transformation,
    TransformationSemigroupoid,
    compose_transformations,
    generate_closure,
)

DEFAULT_SEED = 271828


def harness_seed() -> int:
    return int(os.environ.get("SGPOID_SEED", DEFAULT_SEED))


def random_transformation_semigroupoid(
    rng: random.Random,
    max_objects: int = 3,
    max_arrows: int = 8,
    attempts: int = 200,
) -> TransformationSemigroupoid:
    """A random generated system within the given size bounds."""
    for _ in range(attempts):
        n_obj = rng.randint(1, max_objects)
        sizes = [rng.randint(1, 2) for _ in range(n_obj)]
        state_sets = tuple(
            StateSet(i, tuple(f"{i}s{j}" for j in range(sizes[i])))
            for i in range(n_obj)
        )
        n_gen = rng.randint(1, 3)
        gens = []
        for k in range(n_gen):
            dom = rng.randrange(n_obj)
            cod = rng.randrange(n_obj)
            mapping = tuple(rng.randrange(sizes[cod]) for _ in range(sizes[dom]))
            gens.append((f"g{k}", Transformation(dom, cod, mapping)))
        ts = generate_closure(state_sets, gens)
        if len(ts.transformations) <= max_arrows:
            return ts
    raise RuntimeError("could not draw a small enough random system")


def _quotient_functor(
    rng: random.Random, ts: TransformationSemigroupoid
) -> Optional[RelationalFunctor]:
    """Collapse states by a random congruence; arrows map functionally."""
    merges = []
    for ss in ts.state_sets:
        n = len(ss.states)
        blocks = list(range(n))
        if n > 1 and rng.random() < 0.7:
            a, b = rng.sample(range(n), 2)
            blocks[max(a, b)] = min(a, b)
        canon = sorted(set(blocks))
        merges.append([canon.index(blocks[i]) for i in range(n)])
    for t in ts.transformations:
        mu_d, mu_c = merges[t.dom], merges[t.cod]
        image: dict[int, int] = {}
        for x, y in enumerate(t.mapping):
            block = mu_d[x]
            if block in image and image[block] != mu_c[y]:
                return None
            image[block] = mu_c[y]
    induced: list[Transformation] = []
    seen: dict[tuple, int] = {}
    arrow_map: dict[int, frozenset[int]] = {}
    labels: list[str] = []
    for a in ts.abstract.arrows:
        t = ts.transformations[a.id]
        mu_d, mu_c = merges[t.dom], merges[t.cod]
        mapping = [0] * (max(mu_d) + 1)
        for x, y in enumerate(t.mapping):
            mapping[mu_d[x]] = mu_c[y]
        q = Transformation(t.dom, t.cod, tuple(mapping))
        idx = seen.get(q.key())
        if idx is None:
            idx = len(induced)
            seen[q.key()] = idx
            induced.append(q)
            labels.append(f"q{idx}")
        arrow_map[a.id] = frozenset({idx})
    objects = tuple(
        ObjectRef(i, f"Q{i}") for i in range(len(ts.state_sets))
    )
    arrows = tuple(
        Arrow(i, t.dom, t.cod, labels[i]) for i, t in enumerate(induced)
    )
    table = {}
    for f, tf in enumerate(induced):
        for g, tg in enumerate(induced):
            if tf.cod != tg.dom:
                continue
            h = seen.get(compose_transformations(tf, tg).key())
            if h is None:
                return None
            table[(f, g)] = h
    target = Semigroupoid(objects, arrows, table)
    return RelationalFunctor(ts.abstract, target, arrow_map)


def _projection_functor(
    rng: random.Random, max_arrows: int = 8
) -> Optional[RelationalFunctor]:
    """Product with a small side component, projected onto the first factor."""
    top = random_transformation_semigroupoid(rng, max_objects=2, max_arrows=4)
    side = random_transformation_semigroupoid(rng, max_objects=1, max_arrows=2)
    t_s, r_s = top.abstract, side.abstract
    if len(t_s.arrows) * len(r_s.arrows) > max_arrows:
        return None
    pairs = sorted(
        (t.id, r.id) for t in t_s.arrows for r in r_s.arrows
    )
    index = {p: i for i, p in enumerate(pairs)}
    objs = sorted(
        {(t_s.arrow(f).dom, r_s.arrow(a).dom) for f, a in pairs}
        | {(t_s.arrow(f).cod, r_s.arrow(a).cod) for f, a in pairs}
    )
    obj_id = {o: i for i, o in enumerate(objs)}
    if len(objs) > 3:
        return None
    objects = tuple(ObjectRef(i, f"P{i}") for i in range(len(objs)))
    arrows = tuple(
        Arrow(
            i,
            obj_id[(t_s.arrow(f).dom, r_s.arrow(a).dom)],
            obj_id[(t_s.arrow(f).cod, r_s.arrow(a).cod)],
            f"({t_s.arrow(f).label},{r_s.arrow(a).label})",
        )
        for i, (f, a) in enumerate(pairs)
    )
    table = {}
    for f, a in pairs:
        for g, b in pairs:
            if not t_s.composable(f, g) or not r_s.composable(a, b):
                continue
            out = (t_s.compose(f, g), r_s.compose(a, b))
            table[(index[(f, a)], index[(g, b)])] = index[out]
    source = Semigroupoid(objects, arrows, table)
    arrow_map = {
        index[(f, a)]: frozenset({f}) for f, a in pairs
    }
    return RelationalFunctor(source, t_s, arrow_map)


def _enlarge(rng: random.Random, phi: RelationalFunctor) -> RelationalFunctor:
    """Try a few random image enlargements, keeping only valid ones."""
    current = {f: set(v) for f, v in phi.arrow_map.items()}
    n_src = len(phi.source.arrows)
    n_tgt = len(phi.target.arrows)
    for _ in range(rng.randint(0, 3)):
        f = rng.randrange(n_src)
        t = rng.randrange(n_tgt)
        if t in current[f]:
            continue
        current[f].add(t)
        candidate = RelationalFunctor(
            phi.source,
            phi.target,
            {k: frozenset(v) for k, v in current.items()},
        )
        if validate_relational_functor(candidate):
            current[f].discard(t)
    return RelationalFunctor(
        phi.source, phi.target, {k: frozenset(v) for k, v in current.items()}
    )


def random_surjective_functor(
    rng: random.Random, max_arrows: int = 8
) -> RelationalFunctor:
    """A random valid surjective relational functor within the size bounds."""
    while True:
        if rng.random() < 0.6:
            ts = random_transformation_semigroupoid(rng, max_arrows=max_arrows)
            phi = _quotient_functor(rng, ts)
        else:
            phi = _projection_functor(rng, max_arrows=max_arrows)
        if phi is None:
            continue
        phi = _enlarge(rng, phi)
        if validate_relational_functor(phi):
            continue
        if not classify(phi).surjective:
            continue
        return phi


def random_composable_functor_pair(
    rng: random.Random,
) -> Optional[tuple[RelationalFunctor, RelationalFunctor]]:
    """Two successive quotient functors S -> T -> U, when the draw allows."""
    ts = random_transformation_semigroupoid(rng)
    phi = _quotient_functor(rng, ts)
    if phi is None:
        return None
    mid_arrows = phi.target.arrows
    # Rebuild the middle layer as a transformation system to quotient again:
    # the quotient construction only needs mappings, which we do not keep for
    # the abstract target, so draw tau as a random enlargement of identity.
    tau = RelationalFunctor(
        phi.target,
        phi.target,
        {a.id: frozenset({a.id}) for a in mid_arrows},
    )
    tau = _enlarge(rng, tau)
    if validate_relational_functor(tau):
        return None
    return phi, tau


def surjective_functor_stream(
    count: int, seed: Optional[int] = None, max_arrows: int = 8
) -> Iterator[RelationalFunctor]:
    rng = random.Random(harness_seed() if seed is None else seed)
    for _ in range(count):
        yield random_surjective_functor(rng, max_arrows=max_arrows)
