"""Crossed groupoids, an axiom verifier, finite fixtures and the Deligne construction.

Composition is written ``compose1(g, f) = g o f`` (``f`` first).  Every
crossed groupoid exposes finite lists of arrows and 2-morphisms; for the
Deligne groupoid these are samples, so a passing verdict means "no
counterexample among the sampled instances".
"""

from __future__ import annotations

import itertools
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Sequence

from .errors import ContextMismatchError, DegreeError
from .mc import (MCElement, QuantumDGLA, bch, exp_ad, gauge_apply, twisted_bracket,
                 twisted_d)
from .report import Report, timed_check
from .series import Series


@dataclass(frozen=True)
class Arrow:
    source: Any
    target: Any
    data: Any


class CrossedGroupoid(ABC):
    """The data ``(G1, G2, Ad, D)`` with finite (possibly sampled) hom sets."""

    @abstractmethod
    def objects(self) -> list: ...

    @abstractmethod
    def arrows(self, x, y) -> list[Arrow]: ...

    @abstractmethod
    def two_cells(self, x) -> list: ...

    @abstractmethod
    def compose1(self, g: Arrow, f: Arrow) -> Arrow: ...

    @abstractmethod
    def inverse1(self, f: Arrow) -> Arrow: ...

    @abstractmethod
    def identity1(self, x) -> Arrow: ...

    @abstractmethod
    def eq1(self, f: Arrow, g: Arrow) -> bool: ...

    @abstractmethod
    def mul2(self, x, a, b): ...

    @abstractmethod
    def inv2(self, x, a): ...

    @abstractmethod
    def id2(self, x): ...

    @abstractmethod
    def eq2(self, x, a, b) -> bool: ...

    @abstractmethod
    def twist(self, g: Arrow, a): ...

    @abstractmethod
    def feedback(self, x, a) -> Arrow: ...

    def same_object(self, x, y) -> bool:
        return x == y

    def label(self, x) -> str:
        return str(x)

    def show1(self, f: Arrow) -> str:
        return str(f.data)

    def show2(self, a) -> str:
        return str(a)

    def object_index(self, x) -> int:
        for i, y in enumerate(self.objects()):
            if self.same_object(x, y):
                return i
        raise KeyError("object not in the groupoid")


def _sample(items: list, k: int | None, rng: random.Random) -> list:
    if k is None or len(items) <= k:
        return items
    return rng.sample(items, k)


def _product(pools: Sequence[list], k: int | None, rng: random.Random):
    total = 1
    for p in pools:
        total *= len(p)
    if k is None or total <= k:
        return list(itertools.product(*pools))
    return [tuple(rng.choice(p) for p in pools) for _ in range(k)]


def verify_crossed_axioms(G: CrossedGroupoid, budget: int | None = None,
                          seed: int = 0) -> Report:
    """Check groupoid and group laws, the twisting action, the feedback functor,
    axioms (i) and (ii), and the IG/ig data on every instance (or ``budget``
    sampled instances per check)."""
    rng = random.Random(seed)
    rep = Report("crossed-axioms")
    objs = G.objects()
    arrows = {(i, j): G.arrows(x, y) for i, x in enumerate(objs) for j, y in enumerate(objs)}
    out_of = {i: [(j, f) for j in range(len(objs)) for f in arrows[(i, j)]]
              for i in range(len(objs))}
    cells = {i: G.two_cells(x) for i, x in enumerate(objs)}
    L, S1, S2 = G.label, G.show1, G.show2
    w = dict

    with timed_check(rep, "groupoid_laws") as t:
        for i, x in enumerate(objs):
            e = G.identity1(x)
            for j, f in out_of[i]:
                ok = (G.eq1(G.compose1(f, G.identity1(x)), f)
                      and G.eq1(G.compose1(G.identity1(objs[j]), f), f)
                      and G.eq1(G.compose1(G.inverse1(f), f), e))
                t.record(ok, lambda: w(object=L(x), f=S1(f)), "identity or inverse law fails")
        triples = []
        for i in range(len(objs)):
            for j, f in out_of[i]:
                for k, g in out_of[j]:
                    for _, h in out_of[k]:
                        triples.append((f, g, h))
        for f, g, h in _sample(triples, budget, rng):
            ok = G.eq1(G.compose1(h, G.compose1(g, f)), G.compose1(G.compose1(h, g), f))
            t.record(ok, lambda: w(f=S1(f), g=S1(g), h=S1(h)), "composition is not associative")

    with timed_check(rep, "group_laws") as t:
        for i, x in enumerate(objs):
            one = G.id2(x)
            for a in cells[i]:
                ok = (G.eq2(x, G.mul2(x, a, one), a) and G.eq2(x, G.mul2(x, one, a), a)
                      and G.eq2(x, G.mul2(x, a, G.inv2(x, a)), one))
                t.record(ok, lambda: w(object=L(x), a=S2(a)), "identity or inverse law fails")
            for a, b, c in _product([cells[i]] * 3, budget, rng):
                ok = G.eq2(x, G.mul2(x, G.mul2(x, a, b), c), G.mul2(x, a, G.mul2(x, b, c)))
                t.record(ok, lambda: w(object=L(x), a=S2(a), b=S2(b), c=S2(c)),
                         "multiplication is not associative")

    with timed_check(rep, "twist_action") as t:
        for i, x in enumerate(objs):
            for a in cells[i]:
                t.record(G.eq2(x, G.twist(G.identity1(x), a), a),
                         lambda: w(object=L(x), a=S2(a)), "the identity does not act trivially")
            for j, g in out_of[i]:
                y = objs[j]
                for a, b in _product([cells[i]] * 2, budget, rng):
                    ok = G.eq2(y, G.twist(g, G.mul2(x, a, b)),
                               G.mul2(y, G.twist(g, a), G.twist(g, b)))
                    t.record(ok, lambda: w(g=S1(g), a=S2(a), b=S2(b)),
                             "twisting is not a group homomorphism")
        pairs = [(f, g) for i in range(len(objs)) for j, f in out_of[i] for _, g in out_of[j]]
        for f, g in _sample(pairs, budget, rng):
            i = G.object_index(f.source)
            for a in _sample(cells[i], 3 if budget else None, rng):
                ok = G.eq2(g.target, G.twist(G.compose1(g, f), a), G.twist(g, G.twist(f, a)))
                t.record(ok, lambda: w(f=S1(f), g=S1(g), a=S2(a)),
                         "twisting is not functorial")

    with timed_check(rep, "feedback_functor") as t:
        for i, x in enumerate(objs):
            t.record(G.eq1(G.feedback(x, G.id2(x)), G.identity1(x)),
                     lambda: w(object=L(x)), "feedback of the identity is not the identity")
            for a in cells[i]:
                Da = G.feedback(x, a)
                ok = G.same_object(Da.source, x) and G.same_object(Da.target, x)
                t.record(ok, lambda: w(object=L(x), a=S2(a)),
                         "feedback does not land in the automorphism group")
            for a, b in _product([cells[i]] * 2, budget, rng):
                ok = G.eq1(G.feedback(x, G.mul2(x, a, b)),
                           G.compose1(G.feedback(x, a), G.feedback(x, b)))
                t.record(ok, lambda: w(object=L(x), a=S2(a), b=S2(b)),
                         "feedback is not multiplicative")

    with timed_check(rep, "axiom_i") as t:
        for i, x in enumerate(objs):
            for j, g in out_of[i]:
                y = objs[j]
                for a in _sample(cells[i], budget, rng):
                    lhs = G.feedback(y, G.twist(g, a))
                    rhs = G.compose1(g, G.compose1(G.feedback(x, a), G.inverse1(g)))
                    t.record(G.eq1(lhs, rhs), lambda: w(object=L(x), g=S1(g), a=S2(a)),
                             "D(Ad(g)(a)) differs from g D(a) g^-1")

    with timed_check(rep, "axiom_ii") as t:
        for i, x in enumerate(objs):
            for a, b in _product([cells[i]] * 2, budget, rng):
                lhs = G.twist(G.feedback(x, a), b)
                rhs = G.mul2(x, a, G.mul2(x, b, G.inv2(x, a)))
                t.record(G.eq2(x, lhs, rhs), lambda: w(object=L(x), a=S2(a), b=S2(b)),
                         "Ad(D(a)) differs from conjugation by a")

    with timed_check(rep, "ig_natural") as t:
        # ig(IG(g)(a)) = Aut(g)(ig(a)) in G1(y), and ig_x is a homomorphism into G1(x)
        for i, x in enumerate(objs):
            for j, g in out_of[i]:
                for a in _sample(cells[i], budget, rng):
                    lhs = G.feedback(objs[j], G.twist(g, a))
                    rhs = G.compose1(G.compose1(g, G.feedback(x, a)), G.inverse1(g))
                    t.record(G.eq1(lhs, rhs), lambda: w(g=S1(g), a=S2(a)),
                             "ig is not natural")
    return rep


# finite fixtures

Perm = tuple[int, ...]


def perm_mul(a: Perm, b: Perm) -> Perm:
    """``a o b`` (apply ``b`` first)."""
    return tuple(a[i] for i in b)


def perm_inv(a: Perm) -> Perm:
    out = [0] * len(a)
    for i, j in enumerate(a):
        out[j] = i
    return tuple(out)


def symmetric_group(n: int) -> list[Perm]:
    return list(itertools.permutations(range(n)))


def alternating_group(n: int) -> list[Perm]:
    def even(p):
        sign = 0
        for i in range(n):
            for j in range(i + 1, n):
                sign ^= p[i] > p[j]
        return not sign
    return [p for p in symmetric_group(n) if even(p)]


class FiniteCrossedGroupoid(CrossedGroupoid):
    """The pair groupoid on ``objects`` times a finite group ``G``, with a normal
    subgroup ``N`` as 2-morphisms, conjugation twisting and inclusion feedback.

    ``feedback_map`` replaces the inclusion (used for broken fixtures).
    """

    def __init__(self, objects: Sequence[Hashable], group: Sequence[Perm],
                 normal: Sequence[Perm], feedback_map: Callable[[Perm], Perm] | None = None):
        self._objects = list(objects)
        self.group = list(group)
        self.normal = list(normal)
        self.e = tuple(range(len(self.group[0])))
        self.feedback_map = feedback_map or (lambda a: a)

    def objects(self):
        return self._objects

    def arrows(self, x, y):
        return [Arrow(x, y, g) for g in self.group]

    def two_cells(self, x):
        return list(self.normal)

    def compose1(self, g, f):
        if f.target != g.source:
            raise ContextMismatchError("arrows are not composable")
        return Arrow(f.source, g.target, perm_mul(g.data, f.data))

    def inverse1(self, f):
        return Arrow(f.target, f.source, perm_inv(f.data))

    def identity1(self, x):
        return Arrow(x, x, self.e)

    def eq1(self, f, g):
        return f == g

    def mul2(self, x, a, b):
        return perm_mul(a, b)

    def inv2(self, x, a):
        return perm_inv(a)

    def id2(self, x):
        return self.e

    def eq2(self, x, a, b):
        return a == b

    def twist(self, g, a):
        return perm_mul(perm_mul(g.data, a), perm_inv(g.data))

    def feedback(self, x, a):
        return Arrow(x, x, self.feedback_map(a))

    def show1(self, f):
        return f"{f.source}->{f.target}:{f.data}"


def normal_subgroup_fixture(objects=("p",), n: int = 3) -> FiniteCrossedGroupoid:
    """``S_n`` acting on ``A_n`` by conjugation, inclusion as feedback."""
    return FiniteCrossedGroupoid(objects, symmetric_group(n), alternating_group(n))


def broken_fixture(objects=("p",), n: int = 3) -> FiniteCrossedGroupoid:
    """Same data but with a constant (non-central) feedback."""
    c = tuple(list(range(1, n)) + [0])
    return FiniteCrossedGroupoid(objects, symmetric_group(n), alternating_group(n),
                                 feedback_map=lambda a: c)


# morphisms and equivalences

@dataclass
class CrossedMorphism:
    """``Phi = (Phi_1, Phi_2)`` between crossed groupoids, equal on objects via ``on_objects``."""

    source: CrossedGroupoid
    target: CrossedGroupoid
    on_objects: Callable[[Any], Any]
    on_arrows: Callable[[Arrow], Arrow]
    on_cells: Callable[[Any, Any], Any]


def check_morphism(phi: CrossedMorphism, budget: int | None = None, seed: int = 0) -> Report:
    """Functoriality of ``Phi_1``, ``Phi_2`` and compatibility with twisting and feedback."""
    rng = random.Random(seed)
    G, H = phi.source, phi.target
    rep = Report("crossed-morphism")
    objs = G.objects()
    with timed_check(rep, "phi1_functor") as t:
        for x in objs:
            t.record(H.eq1(phi.on_arrows(G.identity1(x)), H.identity1(phi.on_objects(x))),
                     {"object": G.label(x)}, "identity not preserved")
        pairs = [(f, g) for x in objs for y in objs for z in objs
                 for f in G.arrows(x, y) for g in G.arrows(y, z)]
        for f, g in _sample(pairs, budget, rng):
            ok = H.eq1(phi.on_arrows(G.compose1(g, f)),
                       H.compose1(phi.on_arrows(g), phi.on_arrows(f)))
            t.record(ok, lambda: {"f": G.show1(f), "g": G.show1(g)}, "composition not preserved")
    with timed_check(rep, "phi2_homomorphism") as t:
        for x in objs:
            px = phi.on_objects(x)
            for a, b in _product([G.two_cells(x)] * 2, budget, rng):
                ok = H.eq2(px, phi.on_cells(x, G.mul2(x, a, b)),
                           H.mul2(px, phi.on_cells(x, a), phi.on_cells(x, b)))
                t.record(ok, lambda: {"a": G.show2(a), "b": G.show2(b)}, "product not preserved")
    with timed_check(rep, "respects_twist") as t:
        for x in objs:
            for y in objs:
                for g in _sample(G.arrows(x, y), budget, rng):
                    for a in _sample(G.two_cells(x), budget, rng):
                        ok = H.eq2(phi.on_objects(y), phi.on_cells(y, G.twist(g, a)),
                                   H.twist(phi.on_arrows(g), phi.on_cells(x, a)))
                        t.record(ok, lambda: {"g": G.show1(g), "a": G.show2(a)},
                                 "twisting not preserved")
    with timed_check(rep, "respects_feedback") as t:
        for x in objs:
            for a in _sample(G.two_cells(x), budget, rng):
                ok = H.eq1(phi.on_arrows(G.feedback(x, a)),
                           H.feedback(phi.on_objects(x), phi.on_cells(x, a)))
                t.record(ok, lambda: {"a": G.show2(a)}, "feedback not preserved")
    return rep


def _bijective(images: list, target: list, eq) -> bool:
    if len(images) != len(target):
        return False
    for y in target:
        if sum(1 for z in images if eq(z, y)) != 1:
            return False
    return True


def check_equivalence(phi: CrossedMorphism) -> Report:
    """The equivalence conditions, decided by enumeration on finite groupoids."""
    G, H = phi.source, phi.target
    rep = check_morphism(phi)
    rep.command = "crossed-equivalence"
    images = [phi.on_objects(x) for x in G.objects()]
    with timed_check(rep, "essentially_surjective") as t:
        for y in H.objects():
            hit = any(H.arrows(z, y) for z in images)
            t.record(hit, {"object": H.label(y)}, "object not isomorphic to an image")
    with timed_check(rep, "phi1_bijective_on_automorphisms") as t:
        for x in G.objects():
            px = phi.on_objects(x)
            imgs = [phi.on_arrows(f) for f in G.arrows(x, x)]
            t.record(_bijective(imgs, H.arrows(px, px), H.eq1), {"object": G.label(x)},
                     "G1(x) -> H1(Phi(x)) is not bijective")
    with timed_check(rep, "phi2_bijective") as t:
        for x in G.objects():
            px = phi.on_objects(x)
            imgs = [phi.on_cells(x, a) for a in G.two_cells(x)]
            t.record(_bijective(imgs, H.two_cells(px), lambda a, b: H.eq2(px, a, b)),
                     {"object": G.label(x)}, "G2(x) -> H2(Phi(x)) is not bijective")
    return rep


# the Deligne crossed groupoid

class DeligneInstance(CrossedGroupoid):
    """Objects are MC elements, 1-morphisms gauge elements ``gamma`` with
    ``gauge_apply(gamma, source) = target``, 2-morphisms at ``omega`` are
    ``alpha`` in ``m (x) g^-1`` with the BCH product over ``[-,-]_omega``."""

    def __init__(self, host: QuantumDGLA, objects: list[MCElement],
                 gauges: dict[tuple[int, int], list[Series]], cells: dict[int, list[Series]]):
        self.host = host
        self._objects = objects
        self._gauges = gauges
        self._cells = cells

    @property
    def order(self) -> int:
        return self._objects[0].order if self._objects else 0

    def objects(self):
        return self._objects

    def arrows(self, x, y):
        i, j = self.object_index(x), self.object_index(y)
        out = [Arrow(x, y, g) for g in self._gauges.get((i, j), [])]
        if i == j:
            out.insert(0, self.identity1(x))
            for a in self._cells.get(i, []):
                out.append(self.feedback(x, a))
        return out

    def two_cells(self, x):
        return [self.id2(x)] + list(self._cells.get(self.object_index(x), []))

    def same_object(self, x, y):
        return x.omega == y.omega

    def compose1(self, g, f):
        if not self.same_object(f.target, g.source):
            raise ContextMismatchError("gauge transformations are not composable")
        return Arrow(f.source, g.target, bch(g.data, f.data, self.host.sbracket))

    def inverse1(self, f):
        return Arrow(f.target, f.source, -f.data)

    def identity1(self, x):
        return Arrow(x, x, self.host.szero(0, x.order))

    def eq1(self, f, g):
        return (self.same_object(f.source, g.source) and self.same_object(f.target, g.target)
                and f.data == g.data)

    def _br(self, x):
        return lambda a, b: twisted_bracket(self.host, x.omega, a, b)

    def mul2(self, x, a, b):
        return bch(a, b, self._br(x))

    def inv2(self, x, a):
        return -a

    def id2(self, x):
        return self.host.szero(-1, x.order)

    def eq2(self, x, a, b):
        return a == b

    def twist(self, g, a):
        return exp_ad(self.host, g.data, a)

    def feedback(self, x, a):
        return Arrow(x, x, twisted_d(self.host, x.omega, a))

    def label(self, x):
        from .grammar import format_value
        return format_value(x.omega)

    def show1(self, f):
        from .grammar import format_value
        return format_value(f.data)

    def show2(self, a):
        from .grammar import format_value
        return format_value(a)

    def arrow_is_valid(self, f: Arrow) -> bool:
        return gauge_apply(self.host, f.data, f.source.omega) == f.target.omega


def deligne_build(host: QuantumDGLA, sample: Sequence[MCElement],
                  gauges: Sequence[tuple[int, Series]] = (),
                  cells: Sequence[tuple[int, Series]] = ()) -> DeligneInstance:
    """Assemble a Deligne instance from MC elements, gauge elements ``(i, gamma)``
    acting on ``sample[i]`` and 2-morphisms ``(i, alpha)`` at ``sample[i]``.

    Targets of the gauge elements are added as objects when new; each gauge
    arrow is stored with its inverse.
    """
    objects = list(sample)
    for x in objects:
        if x.host != host:
            raise ContextMismatchError("all samples must live in the same DG Lie algebra")
    garrows: dict[tuple[int, int], list[Series]] = {}
    for i, gamma in list(gauges):
        if host.degree(gamma[0]) != 0:
            raise DegreeError("gauge elements live in degree 0")
        target = MCElement(host, gauge_apply(host, gamma, objects[i].omega))
        for j, y in enumerate(objects):
            if y.omega == target.omega:
                break
        else:
            objects.append(target)
            j = len(objects) - 1
        garrows.setdefault((i, j), []).append(gamma)
        garrows.setdefault((j, i), []).append(-gamma)
    cell_map: dict[int, list[Series]] = {}
    for i, alpha in cells:
        if host.degree(alpha[0]) != -1:
            raise DegreeError("2-morphisms live in degree -1")
        cell_map.setdefault(i, []).append(alpha)
    # transport every cell along the gauge arrows so each object has samples
    for (i, j), gs in list(garrows.items()):
        if i != j:
            for alpha in list(cell_map.get(i, [])):
                moved = exp_ad(host, gs[0], alpha)
                if all(moved != b for b in cell_map.get(j, [])):
                    cell_map.setdefault(j, []).append(moved)
    return DeligneInstance(host, objects, garrows, cell_map)


def feedback(host: QuantumDGLA, omega: MCElement, alpha: Series) -> Series:
    """``D_omega(exp(alpha)) = exp(d_omega(alpha))`` in log coordinates."""
    return twisted_d(host, omega.omega, alpha)


def twist2(host: QuantumDGLA, gamma: Series, source: MCElement, target: MCElement,
           alpha: Series) -> Series:
    """``Ad(exp(gamma)) : N_source -> N_target``, ``alpha -> e^{ad gamma}(alpha)``."""
    if gauge_apply(host, gamma, source.omega) != target.omega:
        raise ContextMismatchError("the gauge element does not map source to target")
    return exp_ad(host, gamma, alpha)


def compose(kind: int, host: QuantumDGLA, f: Series, g: Series,
            base: MCElement | None = None) -> Series:
    """Composite in log coordinates: ``kind=1`` gauge elements (``f o g``),
    ``kind=2`` 2-morphisms at ``base`` (product ``f g``)."""
    if kind == 1:
        return bch(f, g, host.sbracket)
    if kind == 2:
        if base is None:
            raise ContextMismatchError("2-morphisms compose at a base object")
        return bch(f, g, lambda a, b: twisted_bracket(host, base.omega, a, b))
    raise ValueError("kind must be 1 or 2")
