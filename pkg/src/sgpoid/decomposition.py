"""Collapse, copy, compress: certified cascade decompositions.

The tracing product copies every preimage of a surjective relational functor
next to its image arrow.  The kernel identifies equivalent preimages through
explicitly searched witnesses, and the pinhole cascade recombines top and
kernel with a composition rule that lets the top choose how bottom
coordinates are decoded.  Every construction here is gated by an emulation
certificate; a failed certificate is a reported outcome, not a crash.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .core import (
    Arrow,
    ObjectRef,
    ScopeError,
    Semigroupoid,
    StructuralError,
    UnsupportedError,
    Violation,
)
from .relational import (
    RelationalFunctor,
    preimages,
    validate_relational_functor,
)

STRATEGIES = ("none", "sets", "objects")


# ---------------------------------------------------------------------------
# Interchangeability of arrows and equivalence of arrow sets


@dataclass(frozen=True)
class InterchangeWitness:
    """Connecting arrows for f: X->Y and g: Z->U.

    ``dom_fwd``: X->Z, ``dom_back``: Z->X, ``cod_fwd``: Y->U,
    ``cod_back``: U->Y.  The squares f = dom_fwd.g.cod_back and
    g = dom_back.f.cod_fwd commute and each roundtrip acts as an identity on
    f and g where composable.
    """

    dom_fwd: int
    dom_back: int
    cod_fwd: int
    cod_back: int

    def swapped(self) -> "InterchangeWitness":
        return InterchangeWitness(
            self.dom_back, self.dom_fwd, self.cod_back, self.cod_fwd
        )


def check_interchange_witness(
    s: Semigroupoid, f: int, g: int, w: InterchangeWitness
) -> bool:
    t = s.table
    af, ag = s.arrow(f), s.arrow(g)
    a1, a2 = s.arrow(w.dom_fwd), s.arrow(w.dom_back)
    a3, a4 = s.arrow(w.cod_fwd), s.arrow(w.cod_back)
    if (a1.dom, a1.cod) != (af.dom, ag.dom):
        return False
    if (a2.dom, a2.cod) != (ag.dom, af.dom):
        return False
    if (a3.dom, a3.cod) != (af.cod, ag.cod):
        return False
    if (a4.dom, a4.cod) != (ag.cod, af.cod):
        return False
    if t[(t[(w.dom_fwd, g)], w.cod_back)] != f:
        return False
    if t[(t[(w.dom_back, f)], w.cod_fwd)] != g:
        return False
    if t[(t[(w.dom_fwd, w.dom_back)], f)] != f:
        return False
    if t[(f, t[(w.cod_fwd, w.cod_back)])] != f:
        return False
    if t[(t[(w.dom_back, w.dom_fwd)], g)] != g:
        return False
    if t[(g, t[(w.cod_back, w.cod_fwd)])] != g:
        return False
    return True


def interchangeable(
    s: Semigroupoid, f: int, g: int
) -> Optional[InterchangeWitness]:
    """Brute-force search for an interchange witness, first in id order."""
    af, ag = s.arrow(f), s.arrow(g)
    t = s.table
    h_dom_fwd = sorted(s.hom_set(af.dom, ag.dom))
    h_dom_back = sorted(s.hom_set(ag.dom, af.dom))
    h_cod_fwd = sorted(s.hom_set(af.cod, ag.cod))
    h_cod_back = sorted(s.hom_set(ag.cod, af.cod))
    square_fg = [
        (x1, y4)
        for x1 in h_dom_fwd
        for y4 in h_cod_back
        if t[(t[(x1, g)], y4)] == f
    ]
    if not square_fg:
        return None
    square_gf = [
        (x2, y3)
        for x2 in h_dom_back
        for y3 in h_cod_fwd
        if t[(t[(x2, f)], y3)] == g
    ]
    for x1, y4 in square_fg:
        for x2, y3 in square_gf:
            w = InterchangeWitness(x1, x2, y3, y4)
            if check_interchange_witness(s, f, g, w):
                return w
    return None


def d_relation(s: Semigroupoid, f: int, g: int) -> bool:
    """Mutual two-sided divisibility in the monoid completion (one object)."""
    if not s.is_one_object():
        raise UnsupportedError("the D-relation cross-check needs a single object")

    def divisors_closure(a: int) -> set[int]:
        t = s.table
        ids = range(len(s.arrows))
        out = {a}
        out.update(t[(x, a)] for x in ids)
        out.update(t[(a, y)] for y in ids)
        out.update(t[(t[(x, a)], y)] for x in ids for y in ids)
        return out

    return f in divisors_closure(g) and g in divisors_closure(f)


@dataclass(frozen=True)
class SetEquivalenceWitness:
    """Object bijection and per-object connecting families between arrow sets.

    ``forward[A]`` is an arrow A -> sigma(A), ``backward[A]`` the arrow back;
    objects absent from the families are conjugated by nothing (the trivial
    case of equal sets).  ``arrow_bijection`` stores the induced map.
    """

    sigma: tuple[tuple[int, int], ...]
    forward: tuple[tuple[int, int], ...]
    backward: tuple[tuple[int, int], ...]
    arrow_bijection: tuple[tuple[int, int], ...]

    def sigma_map(self) -> dict[int, int]:
        return dict(self.sigma)

    def forward_map(self) -> dict[int, int]:
        return dict(self.forward)

    def backward_map(self) -> dict[int, int]:
        return dict(self.backward)

    def bijection_map(self) -> dict[int, int]:
        return dict(self.arrow_bijection)


def _supporting_objects(s: Semigroupoid, arrows: Iterable[int]) -> list[int]:
    out = set()
    for a in arrows:
        out.add(s.arrow(a).dom)
        out.add(s.arrow(a).cod)
    return sorted(out)


def _roundtrip_fixes(s: Semigroupoid, rt: int, obj: int, relative: Iterable[int]) -> bool:
    """rt: obj->obj must act as a two-sided identity on the given arrows."""
    t = s.table
    for a in relative:
        aa = s.arrow(a)
        if aa.dom == obj and t[(rt, a)] != a:
            return False
        if aa.cod == obj and t[(a, rt)] != a:
            return False
    return True


def _conjugate(
    s: Semigroupoid,
    a: int,
    sigma: dict[int, int],
    forward: dict[int, int],
    backward: dict[int, int],
) -> int:
    """backward[dom].a.forward[cod], treating missing entries as identities."""
    arrow = s.arrow(a)
    out = a
    if arrow.dom in backward:
        out = s.compose(backward[arrow.dom], out)
    if arrow.cod in forward:
        out = s.compose(out, forward[arrow.cod])
    return out


def check_set_equivalence_witness(
    s: Semigroupoid,
    p: Iterable[int],
    q: Iterable[int],
    w: SetEquivalenceWitness,
) -> bool:
    pset, qset = set(p), set(q)
    sigma = w.sigma_map()
    forward = w.forward_map()
    backward = w.backward_map()
    if pset == qset and not forward and not backward:
        return True
    if len(pset) != len(qset):
        return False
    relative = sorted(pset | qset)
    for obj_a, obj_b in sigma.items():
        fwd = forward.get(obj_a)
        bwd = backward.get(obj_a)
        if fwd is None and bwd is None and obj_a == obj_b:
            continue
        if fwd is None or bwd is None:
            return False
        af, ab = s.arrow(fwd), s.arrow(bwd)
        if (af.dom, af.cod) != (obj_a, obj_b) or (ab.dom, ab.cod) != (obj_b, obj_a):
            return False
        if not _roundtrip_fixes(s, s.compose(fwd, bwd), obj_a, relative):
            return False
        if not _roundtrip_fixes(s, s.compose(bwd, fwd), obj_b, relative):
            return False
    image = set()
    for a in pset:
        b = _conjugate(s, a, sigma, forward, backward)
        if b not in qset:
            return False
        image.add(b)
    if image != qset:
        return False
    back_image = set()
    for b in qset:
        a = _conjugate(
            s,
            b,
            {v: k for k, v in sigma.items()},
            {sigma[k]: v for k, v in backward.items()},
            {sigma[k]: v for k, v in forward.items()},
        )
        if a not in pset:
            return False
        back_image.add(a)
    return back_image == pset


def preimage_sets_equivalent(
    s: Semigroupoid, p: Iterable[int], q: Iterable[int]
) -> Optional[SetEquivalenceWitness]:
    """Search for a set-equivalence witness between two arrow sets.

    Deterministic: object bijections in lexicographic order, then candidate
    family arrows in id order.  Equal sets are trivially equivalent with
    empty families.
    """
    pset, qset = frozenset(p), frozenset(q)
    if not pset or not qset:
        return None
    if pset == qset:
        objs = _supporting_objects(s, pset)
        w = SetEquivalenceWitness(
            tuple((o, o) for o in objs),
            (),
            (),
            tuple((a, a) for a in sorted(pset)),
        )
        return w
    if len(pset) != len(qset):
        return None
    obj_p = _supporting_objects(s, pset)
    obj_q = _supporting_objects(s, qset)
    if len(obj_p) != len(obj_q):
        return None
    relative = sorted(pset | qset)
    for perm in itertools.permutations(obj_q):
        sigma = dict(zip(obj_p, perm))
        per_object: list[list[tuple[int, int]]] = []
        feasible = True
        for a_obj in obj_p:
            b_obj = sigma[a_obj]
            candidates = []
            for fwd in sorted(s.hom_set(a_obj, b_obj)):
                for bwd in sorted(s.hom_set(b_obj, a_obj)):
                    if not _roundtrip_fixes(
                        s, s.compose(fwd, bwd), a_obj, relative
                    ):
                        continue
                    if not _roundtrip_fixes(
                        s, s.compose(bwd, fwd), b_obj, relative
                    ):
                        continue
                    candidates.append((fwd, bwd))
            if not candidates:
                feasible = False
                break
            per_object.append(candidates)
        if not feasible:
            continue
        for choice in itertools.product(*per_object):
            forward = {o: c[0] for o, c in zip(obj_p, choice)}
            backward = {o: c[1] for o, c in zip(obj_p, choice)}
            image = {}
            ok = True
            for a in sorted(pset):
                b = _conjugate(s, a, sigma, forward, backward)
                if b not in qset or b in image.values():
                    ok = False
                    break
                image[a] = b
            if not ok or len(image) != len(qset):
                continue
            w = SetEquivalenceWitness(
                tuple(sorted(sigma.items())),
                tuple(sorted(forward.items())),
                tuple(sorted(backward.items())),
                tuple(sorted(image.items())),
            )
            if check_set_equivalence_witness(s, pset, qset, w):
                return w
    return None


def invert_witness(w: SetEquivalenceWitness) -> SetEquivalenceWitness:
    sigma = w.sigma_map()
    inv_sigma = {b: a for a, b in sigma.items()}
    forward = w.forward_map()
    backward = w.backward_map()
    return SetEquivalenceWitness(
        tuple(sorted(inv_sigma.items())),
        tuple(sorted((sigma[a], bwd) for a, bwd in backward.items())),
        tuple(sorted((sigma[a], fwd) for a, fwd in forward.items())),
        tuple(sorted((b, a) for a, b in w.arrow_bijection)),
    )


def compose_witnesses(
    s: Semigroupoid, w1: SetEquivalenceWitness, w2: SetEquivalenceWitness
) -> SetEquivalenceWitness:
    """Chain two witnesses; the result still has to be verified explicitly."""
    s1, s2 = w1.sigma_map(), w2.sigma_map()
    f1, f2 = w1.forward_map(), w2.forward_map()
    b1, b2 = w1.backward_map(), w2.backward_map()
    sigma = {a: s2[s1[a]] for a in s1}
    forward = {}
    backward = {}
    for a in s1:
        mid = s1[a]
        fs = [f for f in (f1.get(a), f2.get(mid)) if f is not None]
        bs = [b for b in (b2.get(mid), b1.get(a)) if b is not None]
        if fs:
            fwd = fs[0]
            for extra in fs[1:]:
                fwd = s.compose(fwd, extra)
            forward[a] = fwd
        if bs:
            bwd = bs[0]
            for extra in bs[1:]:
                bwd = s.compose(bwd, extra)
            backward[a] = bwd
    bij1 = w1.bijection_map()
    bij2 = w2.bijection_map()
    bijection = {a: bij2[b] for a, b in bij1.items()}
    return SetEquivalenceWitness(
        tuple(sorted(sigma.items())),
        tuple(sorted(forward.items())),
        tuple(sorted(backward.items())),
        tuple(sorted(bijection.items())),
    )


# ---------------------------------------------------------------------------
# Emulation certificates


@dataclass
class EmulationCertificate:
    """A candidate emulation plus the validator's findings."""

    candidate: RelationalFunctor
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_emulation(candidate: RelationalFunctor) -> EmulationCertificate:
    """Compatibility, non-empty composites and pairwise-disjoint images."""
    violations = validate_relational_functor(candidate)
    owner: dict[int, int] = {}
    for f in sorted(candidate.arrow_map):
        for t in candidate.arrow_map[f]:
            if t in owner and owner[t] != f:
                violations.append(
                    Violation(
                        "not-injective",
                        f"source arrows {owner[t]} and {f} share image arrow {t}",
                        (owner[t], f, t),
                    )
                )
            else:
                owner[t] = f
    return EmulationCertificate(candidate, violations)


# ---------------------------------------------------------------------------
# Tracing product


@dataclass
class TracingProduct:
    top: Semigroupoid
    bottom: Semigroupoid
    arrows: tuple[tuple[int, int], ...]
    table: dict[tuple[tuple[int, int], tuple[int, int]], tuple[int, int]]

    def arrow_index(self) -> dict[tuple[int, int], int]:
        return {pair: i for i, pair in enumerate(self.arrows)}

    def as_semigroupoid(self) -> Semigroupoid:
        return _pairs_semigroupoid(self.top, self.bottom, self.arrows, self.table)


def _pairs_semigroupoid(
    top: Semigroupoid,
    bottom: Semigroupoid,
    pairs: Sequence[tuple[int, int]],
    table: dict,
) -> Semigroupoid:
    objs: list[tuple[int, int]] = []
    for f, a in pairs:
        tf, ba = top.arrow(f), bottom.arrow(a)
        for o in ((tf.dom, ba.dom), (tf.cod, ba.cod)):
            if o not in objs:
                objs.append(o)
    objs.sort()
    obj_id = {o: i for i, o in enumerate(objs)}
    objects = tuple(
        ObjectRef(
            i,
            f"({top.object_ref(o[0]).label},{bottom.object_ref(o[1]).label})",
        )
        for i, o in enumerate(objs)
    )
    index = {pair: i for i, pair in enumerate(pairs)}
    arrows = tuple(
        Arrow(
            i,
            obj_id[(top.arrow(f).dom, bottom.arrow(a).dom)],
            obj_id[(top.arrow(f).cod, bottom.arrow(a).cod)],
            f"({top.arrow(f).label},{bottom.arrow(a).label})",
        )
        for i, (f, a) in enumerate(pairs)
    )
    flat = {
        (index[l], index[r]): index[out]
        for (l, r), out in table.items()
    }
    return Semigroupoid(objects, arrows, flat)


def tracing_product(
    phi: RelationalFunctor,
) -> tuple[TracingProduct, EmulationCertificate]:
    """Annotate every source arrow with each of its images; compose pointwise."""
    report = validate_relational_functor(phi)
    if report:
        raise StructuralError(
            "invalid functor: " + "; ".join(str(v) for v in report)
        )
    pre = preimages(phi)
    pairs = sorted(
        (f, a) for f, members in pre.items() for a in members
    )
    pair_set = set(pairs)
    table = {}
    top, bottom = phi.target, phi.source
    for f, a in pairs:
        for g, b in pairs:
            if not top.composable(f, g) or not bottom.composable(a, b):
                continue
            out = (top.compose(f, g), bottom.compose(a, b))
            if out not in pair_set:
                raise StructuralError(
                    f"tracing product not closed at (({f},{a}),({g},{b}))"
                )
            table[((f, a), (g, b))] = out
    product = TracingProduct(top, bottom, tuple(pairs), table)
    sgp = product.as_semigroupoid()
    index = product.arrow_index()
    candidate = RelationalFunctor(
        bottom,
        sgp,
        {
            a.id: frozenset(
                index[(f, a.id)] for f in phi.arrow_map[a.id]
            )
            for a in bottom.arrows
        },
    )
    return product, verify_emulation(candidate)


# ---------------------------------------------------------------------------
# Kernel


@dataclass
class PreimageClass:
    tops: tuple[int, ...]
    representative_top: int
    witnesses: dict[int, Optional[SetEquivalenceWitness]]


@dataclass
class Codec:
    """Per-top-arrow rewriting between preimage arrows and representatives."""

    enc_map: dict[int, dict[int, int]]
    dec_map: dict[int, dict[int, int]]

    def encode(self, f: int, a: int) -> int:
        if f not in self.enc_map:
            raise ScopeError(f"no codec for top arrow {f}")
        if a not in self.enc_map[f]:
            raise ScopeError(f"arrow {a} is not in the preimage of top arrow {f}")
        return self.enc_map[f][a]

    def decode(self, f: int, a: int) -> int:
        if f not in self.dec_map:
            raise ScopeError(f"no codec for top arrow {f}")
        if a not in self.dec_map[f]:
            raise ScopeError(f"arrow {a} is not a stored coordinate of top {f}")
        return self.dec_map[f][a]

    def decode_candidates(self, f: int, a: int) -> list[int]:
        return sorted(x for x, y in self.enc_map[f].items() if y == a)


@dataclass
class Kernel:
    strategy: str
    classes: tuple[PreimageClass, ...]
    codec: Codec
    arrows: frozenset[int]
    preimage: dict[int, frozenset[int]]
    object_families: Optional[dict[tuple[int, int], tuple[int, int, int]]] = None


def _default_rep_choice(
    pre: dict[int, frozenset[int]], tops: Sequence[int]
) -> int:
    """The member whose preimage holds the smallest arrow id; ties by top id."""
    return min(tops, key=lambda t: (min(pre[t]), t))


def build_kernel(
    phi: RelationalFunctor,
    strategy: str = "sets",
    rep_choice: Optional[Callable[[dict[int, frozenset[int]], Sequence[int]], int]] = None,
) -> Kernel:
    """Group equivalent preimages and build the codec onto representatives.

    ``none`` keeps every preimage; ``sets`` identifies whole preimage sets
    through verified set-equivalence witnesses; ``objects`` additionally
    conjugates interchangeable objects inside each representative preimage
    onto representative objects (which can make the encoding lossy; the
    cascade certificate is the gate for that).
    """
    if strategy not in STRATEGIES:
        raise UnsupportedError(f"unknown strategy {strategy!r}")
    if rep_choice is None:
        rep_choice = _default_rep_choice
    pre = preimages(phi)
    src = phi.source
    tops = sorted(pre)

    classes: list[PreimageClass] = []
    if strategy == "none":
        classes = [PreimageClass((t,), t, {t: None}) for t in tops]
    else:
        grouped: list[dict] = []
        for t in tops:
            placed = False
            for cls in grouped:
                for member in cls["tops"]:
                    w = preimage_sets_equivalent(src, pre[t], pre[member])
                    if w is None:
                        continue
                    if member == cls["tops"][0]:
                        to_first = w
                    else:
                        to_first = compose_witnesses(
                            src, w, cls["witnesses"][member]
                        )
                        if not check_set_equivalence_witness(
                            src, pre[t], pre[cls["tops"][0]], to_first
                        ):
                            continue
                    cls["tops"].append(t)
                    cls["witnesses"][t] = to_first
                    placed = True
                    break
                if placed:
                    break
            if not placed:
                grouped.append({"tops": [t], "witnesses": {t: None}})
        for cls in grouped:
            first = cls["tops"][0]
            rep = rep_choice(pre, cls["tops"])
            witnesses: dict[int, Optional[SetEquivalenceWitness]] = {}
            ok = True
            if rep != first:
                first_to_rep = invert_witness(cls["witnesses"][rep])
                for t in cls["tops"]:
                    if t == rep:
                        witnesses[t] = None
                        continue
                    w = (
                        first_to_rep
                        if t == first
                        else compose_witnesses(src, cls["witnesses"][t], first_to_rep)
                    )
                    if not check_set_equivalence_witness(src, pre[t], pre[rep], w):
                        ok = False
                        break
                    witnesses[t] = w
            if rep == first or not ok:
                rep = first
                witnesses = {
                    t: (None if t == first else cls["witnesses"][t])
                    for t in cls["tops"]
                }
            classes.append(PreimageClass(tuple(cls["tops"]), rep, witnesses))

    enc_map: dict[int, dict[int, int]] = {}
    object_families: Optional[dict[int, tuple[int, int, int]]] = None
    for cls in classes:
        for t in cls.tops:
            w = cls.witnesses[t]
            if w is None or not w.forward:
                mapping = {a: a for a in sorted(pre[t])}
            else:
                sigma = w.sigma_map()
                forward = w.forward_map()
                backward = w.backward_map()
                mapping = {
                    a: _conjugate(src, a, sigma, forward, backward)
                    for a in sorted(pre[t])
                }
            enc_map[t] = mapping

    if strategy == "objects":
        object_families = {}
        for ci, cls in enumerate(classes):
            rep_arrows = sorted(set(enc_map[cls.representative_top].values()))
            objs = _supporting_objects(src, rep_arrows)
            rep_of: dict[int, int] = {}
            fams: dict[int, tuple[int, int]] = {}
            for b in objs:
                rep_of[b] = b
                for a in objs:
                    if a >= b or rep_of[a] != a:
                        continue
                    found = None
                    for fwd in sorted(src.hom_set(a, b)):
                        for bwd in sorted(src.hom_set(b, a)):
                            if _roundtrip_fixes(
                                src, src.compose(fwd, bwd), a, rep_arrows
                            ) and _roundtrip_fixes(
                                src, src.compose(bwd, fwd), b, rep_arrows
                            ):
                                found = (fwd, bwd)
                                break
                        if found:
                            break
                    if found:
                        rep_of[b] = a
                        fams[b] = found
                        break
            for b, (fwd, bwd) in fams.items():
                object_families[(ci, b)] = (fwd, bwd, rep_of[b])
            if fams:
                for t in cls.tops:
                    new_map = {}
                    for a, x in enc_map[t].items():
                        ax = src.arrow(x)
                        out = x
                        # fwd runs representative -> member, so it conjugates
                        # a member-object domain back onto the representative.
                        if ax.dom in fams:
                            out = src.compose(fams[ax.dom][0], out)
                        if ax.cod in fams:
                            out = src.compose(out, fams[ax.cod][1])
                        new_map[a] = out
                    enc_map[t] = new_map

    dec_map = {
        t: {
            x: min(a for a in mapping if mapping[a] == x)
            for x in set(mapping.values())
        }
        for t, mapping in enc_map.items()
    }
    arrows = frozenset(
        x for cls in classes for x in enc_map[cls.representative_top].values()
    )
    codec = Codec(enc_map, dec_map)
    return Kernel(strategy, tuple(classes), codec, arrows, pre, object_families)


def encode(codec: Codec, f: int, a: int) -> int:
    return codec.encode(f, a)


def decode(codec: Codec, f: int, a: int) -> int:
    return codec.decode(f, a)


# ---------------------------------------------------------------------------
# Pinhole cascade product


@dataclass
class Cascade:
    top: Semigroupoid
    bottom: Semigroupoid
    kernel: Optional[Kernel]
    arrows: tuple[tuple[int, int], ...]
    table: dict[tuple[tuple[int, int], tuple[int, int]], tuple[int, int]]

    def arrow_index(self) -> dict[tuple[int, int], int]:
        return {pair: i for i, pair in enumerate(self.arrows)}

    def as_semigroupoid(self) -> Semigroupoid:
        return _pairs_semigroupoid(self.top, self.bottom, self.arrows, self.table)


def pinhole_cascade(
    phi: RelationalFunctor, kernel: Kernel
) -> tuple[Cascade, EmulationCertificate]:
    """Pairs (top arrow, encoded preimage arrow) with dependent composition.

    The bottom coordinate of a composite is computed by decoding both
    coordinates in the context of their top arrows, composing in the source,
    and re-encoding under the composite top.  The certificate validates the
    canonical candidate a |-> {(f, enc_f(a)) : f in phi(a)} for compatibility
    and injectivity; failure is reported, never silently accepted.
    """
    src, top = phi.source, phi.target
    codec = kernel.codec
    pairs = sorted(
        {
            (f, codec.encode(f, a))
            for f, members in kernel.preimage.items()
            for a in members
        }
    )
    pair_set = set(pairs)
    violations: list[Violation] = []
    table = {}
    for f, x in pairs:
        for g, y in pairs:
            if not top.composable(f, g):
                continue
            fg = top.compose(f, g)
            results = set()
            for a in codec.decode_candidates(f, x):
                for b in codec.decode_candidates(g, y):
                    if not src.composable(a, b):
                        continue
                    results.add(codec.encode(fg, src.compose(a, b)))
            if not results:
                continue
            if len(results) > 1:
                violations.append(
                    Violation(
                        "ambiguous-composition",
                        f"cascade pair (({f},{x}),({g},{y})) decodes to "
                        f"{len(results)} distinct composites",
                        ((f, x), (g, y)),
                    )
                )
                continue
            out = (fg, results.pop())
            if out not in pair_set:
                violations.append(
                    Violation(
                        "escaped-composition",
                        f"cascade composite {out} is not a cascade arrow",
                        ((f, x), (g, y)),
                    )
                )
                continue
            table[((f, x), (g, y))] = out
    cascade = Cascade(top, src, kernel, tuple(pairs), table)
    sgp = cascade.as_semigroupoid()
    index = cascade.arrow_index()
    candidate = RelationalFunctor(
        src,
        sgp,
        {
            a.id: frozenset(
                index[(f, codec.encode(f, a.id))] for f in phi.arrow_map[a.id]
            )
            for a in src.arrows
        },
    )
    certificate = verify_emulation(candidate)
    certificate.violations.extend(violations)
    return cascade, certificate


# ---------------------------------------------------------------------------
# Rule tables


@dataclass
class RuleTable:
    """Per top-composition cell, the induced bottom composition rule."""

    cells: dict[tuple[int, int], dict[tuple[int, int], int]]
    factors: dict[tuple[int, int], Optional[int]]


def rule_table(cascade: Cascade) -> RuleTable:
    """Extract what the bottom does in each composable top cell.

    When every entry of a cell can be written as (plain bottom composite)
    followed by one fixed correction arrow, that arrow is reported as the
    cell's factor; the odometer carry table is exactly this shape.
    """
    cells: dict[tuple[int, int], dict[tuple[int, int], int]] = {}
    for ((f, x), (g, y)), (fg, z) in sorted(cascade.table.items()):
        cells.setdefault((f, g), {})[(x, y)] = z
    bottoms = sorted({x for _, x in cascade.arrows})
    bt = cascade.bottom
    factors: dict[tuple[int, int], Optional[int]] = {}
    for cell, entries in cells.items():
        factor = None
        for c in bottoms:
            good = True
            for (x, y), z in entries.items():
                if not bt.composable(x, y):
                    good = False
                    break
                xy = bt.compose(x, y)
                if not bt.composable(xy, c) or bt.compose(xy, c) != z:
                    good = False
                    break
            if good:
                factor = c
                break
        factors[cell] = factor
    return RuleTable(cells, factors)
