"""Words over vertex-group letters, the graph-product presentation, the
projection onto the direct product, commutator-expansion identity checks, and
the iterated-commutator basis of the free kernel.

A Letter is a formal symbol (vertex, element, sign); its formal inverse is a
distinct symbol that the Cayley relators identify with the inverse element in
the group, but words never substitute one for the other on their own.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product as iproduct
from typing import Iterable, NamedTuple, Sequence

from .finitegroup import FiniteGroup
from .simplicial import SimplicialComplex, is_chordal, is_flag, rank_rho


class Letter(NamedTuple):
    vertex: int
    element: int
    sign: int

    def inverse(self) -> "Letter":
        return Letter(self.vertex, self.element, -self.sign)


Word = tuple[Letter, ...]

EMPTY_WORD: Word = ()


def free_reduce(w: Iterable[Letter]) -> Word:
    """Cancel adjacent formal inverse pairs until none remain."""
    out: list[Letter] = []
    for letter in w:
        if out and out[-1].vertex == letter.vertex and out[-1].element == letter.element and out[-1].sign == -letter.sign:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def word_inverse(w: Word) -> Word:
    return tuple(x.inverse() for x in reversed(w))


def word_mul(*words: Iterable[Letter]) -> Word:
    merged: list[Letter] = []
    for w in words:
        merged.extend(w)
    return free_reduce(merged)


def commutator_front(u: Word, v: Word) -> Word:
    """[u,v] = u v u^-1 v^-1."""
    return word_mul(u, v, word_inverse(u), word_inverse(v))


def commutator_back(u: Word, v: Word) -> Word:
    """[u,v] = u^-1 v^-1 u v."""
    return word_mul(word_inverse(u), word_inverse(v), u, v)


def generator_name(vertex: int, element: int, n_vertices: int) -> str:
    """Display name of the positive letter (vertex, element).

    Vertices get base letters a, b, c, ...; elements beyond the first carry
    their element index: vertex 3 of order 3 yields "c" and "c2".
    """
    if n_vertices <= 26:
        base = chr(ord("a") + vertex - 1)
    else:
        base = f"v{vertex}e"
    return base if element == 1 else f"{base}{element}"


def letter_str(letter: Letter, n_vertices: int) -> str:
    name = generator_name(letter.vertex, letter.element, n_vertices)
    return name if letter.sign > 0 else f"{name}^-1"


def word_str(w: Word, n_vertices: int) -> str:
    if not w:
        return "1"
    return " ".join(letter_str(x, n_vertices) for x in w)


ProductElement = tuple[int, ...]


@dataclass(frozen=True)
class GraphProductPresentation:
    """Presentation of the graph product of the vertex groups over the edge
    set: generators are all nontrivial vertex-group elements; relators are
    the vertex Cayley relations plus one commutator per edge and element
    pair."""

    groups: tuple[FiniteGroup, ...]
    edges: frozenset[frozenset[int]]
    generators: tuple[Letter, ...]
    relators: tuple[Word, ...]

    @property
    def n(self) -> int:
        return len(self.groups)

    def generator_names(self) -> list[str]:
        return [generator_name(g.vertex, g.element, self.n) for g in self.generators]

    def product_order(self) -> int:
        total = 1
        for g in self.groups:
            total *= g.order
        return total

    def letter_of_name(self) -> dict[str, Letter]:
        return {
            generator_name(g.vertex, g.element, self.n): g for g in self.generators
        }


def build_graph_product(
    groups: Sequence[FiniteGroup], edges: Iterable[Iterable[int]]
) -> GraphProductPresentation:
    """Graph product presentation with deterministic generator and relator
    order (vertex ascending, then element index ascending)."""
    groups = tuple(groups)
    n = len(groups)
    edge_set: set[frozenset[int]] = set()
    for e in edges:
        fs = frozenset(int(v) for v in e)
        if len(fs) != 2 or not all(1 <= v <= n for v in fs):
            raise ValueError(f"bad edge {sorted(fs)}")
        edge_set.add(fs)
    generators = tuple(
        Letter(v, e, 1)
        for v in range(1, n + 1)
        for e in range(1, groups[v - 1].order)
    )
    relators: list[Word] = []
    for v in range(1, n + 1):
        G = groups[v - 1]
        for g in range(1, G.order):
            for h in range(1, G.order):
                gh = G.mul(g, h)
                word = [Letter(v, g, 1), Letter(v, h, 1)]
                if gh != 0:
                    word.append(Letter(v, gh, -1))
                relators.append(tuple(word))
    for e in sorted(edge_set, key=sorted):
        i, j = sorted(e)
        for g in range(1, groups[i - 1].order):
            for h in range(1, groups[j - 1].order):
                relators.append(
                    commutator_front((Letter(i, g, 1),), (Letter(j, h, 1),))
                )
    return GraphProductPresentation(groups, frozenset(edge_set), generators, tuple(relators))


def project(w: Iterable[Letter], pres: GraphProductPresentation) -> ProductElement:
    """Image in the direct product: componentwise product of letter images."""
    components = [0] * pres.n
    for letter in w:
        G = pres.groups[letter.vertex - 1]
        e = letter.element if letter.sign > 0 else G.inv(letter.element)
        components[letter.vertex - 1] = G.mul(components[letter.vertex - 1], e)
    return tuple(components)


def is_in_kernel(w: Iterable[Letter], pres: GraphProductPresentation) -> bool:
    return all(x == 0 for x in project(w, pres))


def product_elements(pres: GraphProductPresentation) -> list[ProductElement]:
    """All elements of the direct product, identity first, lexicographic."""
    return list(iproduct(*(range(g.order) for g in pres.groups)))


def product_mul(
    pres: GraphProductPresentation, a: ProductElement, b: ProductElement
) -> ProductElement:
    return tuple(G.mul(x, y) for G, x, y in zip(pres.groups, a, b))


# --- commutator expansion identities ---

STATED_CONVENTION = "g h g^-1 h^-1"
OPPOSITE_CONVENTION = "g^-1 h^-1 g h"


@dataclass(frozen=True)
class HallIdentityReport:
    name: str
    holds_under_stated: bool
    holding_conventions: tuple[str, ...]


def verify_hall_identities() -> tuple[HallIdentityReport, ...]:
    """Free-reduction check of the three commutator expansion identities
    under both commutator conventions.

    Letters a, b, c are free; the identity for a nested commutator is checked
    with the innermost slot a free letter, which is stronger than
    substituting an actual commutator.
    """
    a: Word = (Letter(1, 1, 1),)
    b: Word = (Letter(2, 1, 1),)
    c: Word = (Letter(3, 1, 1),)
    reports = []
    for name, lhs_rhs in _HALL_IDENTITIES.items():
        holding = []
        stated = False
        for conv_name, comm in (
            (STATED_CONVENTION, commutator_front),
            (OPPOSITE_CONVENTION, commutator_back),
        ):
            lhs, rhs = lhs_rhs(comm, a, b, c)
            if word_mul(lhs, word_inverse(rhs)) == EMPTY_WORD:
                holding.append(conv_name)
                if conv_name == STATED_CONVENTION:
                    stated = True
        reports.append(HallIdentityReport(name, stated, tuple(holding)))
    return tuple(reports)


def _expand_second_slot(comm, a, b, c):
    # [a, bc] = [a,c] [a,b] [[a,b],c]
    lhs = comm(a, word_mul(b, c))
    rhs = word_mul(comm(a, c), comm(a, b), comm(comm(a, b), c))
    return lhs, rhs


def _expand_first_slot(comm, a, b, c):
    # [ab, c] = [a,c] [[a,c],b] [b,c]
    lhs = comm(word_mul(a, b), c)
    rhs = word_mul(comm(a, c), comm(comm(a, c), b), comm(b, c))
    return lhs, rhs


def _nested_shuffle(comm, a, b, c):
    # [a,[b,c]] = [a,c][c,[b,a]][a,b][c,b][b,[a,c]][c,a][b,a][b,c]
    lhs = comm(a, comm(b, c))
    rhs = word_mul(
        comm(a, c),
        comm(c, comm(b, a)),
        comm(a, b),
        comm(c, b),
        comm(b, comm(a, c)),
        comm(c, a),
        comm(b, a),
        comm(b, c),
    )
    return lhs, rhs


_HALL_IDENTITIES = {
    "product_in_second_slot": _expand_second_slot,
    "product_in_first_slot": _expand_first_slot,
    "nested_shuffle": _nested_shuffle,
}


# --- iterated commutator basis ---

BASIS_RULES = ("literal", "example-matching")


def commutator_basis(
    K: SimplicialComplex,
    groups: Sequence[FiniteGroup],
    basis_rule: str = "example-matching",
) -> list[Word]:
    """Iterated-commutator basis of the free kernel.

    Words are [g_{k1},[...,[g_{kl},[g_j,g_i]]...]] with k1<...<kl<j, j>i and
    i not among the k's, elements nontrivial, expanded under the g h g^-1
    h^-1 convention.  The slot vertices form a set S with j = max(S); i must
    lie in a different component of the 1-skeleton restricted to S than j,
    and within its component i is the smallest vertex under the "literal"
    rule or the largest under "example-matching".  Enumeration order: by
    word weight, then lexicographic slot tuple (k1,...,kl,j,i), then element
    indices ascending.

    The list length is checked against the independently computed rank; a
    mismatch raises RuntimeError since it signals an internal bug.
    """
    if basis_rule not in BASIS_RULES:
        raise ValueError(f"unknown basis rule {basis_rule!r}")
    if len(groups) != K.n:
        raise ValueError("one group per vertex required")
    if not is_flag(K):
        raise ValueError("commutator basis requires a flag complex")
    ok, cert = is_chordal(K)
    if not ok:
        raise ValueError(f"kernel not free: chordless cycle {tuple(cert[1])}")
    adj = K.adjacency()
    slot_tuples: list[tuple[int, ...]] = []
    for size in range(2, K.n + 1):
        sized: list[tuple[int, ...]] = []
        for S in combinations(range(1, K.n + 1), size):
            j = max(S)
            components = _components(adj, S)
            comp_of_j = next(c for c in components if j in c)
            for comp in components:
                if comp is comp_of_j:
                    continue
                i = min(comp) if basis_rule == "literal" else max(comp)
                ks = tuple(sorted(set(S) - {i, j}))
                sized.append(ks + (j, i))
        sized.sort()
        slot_tuples.extend(sized)
    words: list[Word] = []
    for slots in slot_tuples:
        *ks, j, i = slots
        element_ranges = [range(1, groups[v - 1].order) for v in slots]
        for elements in iproduct(*element_ranges):
            inner = commutator_front(
                (Letter(j, elements[-2], 1),), (Letter(i, elements[-1], 1),)
            )
            for pos in range(len(ks) - 1, -1, -1):
                inner = commutator_front((Letter(ks[pos], elements[pos], 1),), inner)
            words.append(inner)
    orders = [g.order for g in groups]
    expected = rank_rho(K, orders, "euler")
    if len(words) != expected:
        raise RuntimeError(
            f"basis enumeration produced {len(words)} words, rank is {expected}"
        )
    return words


def _components(adj, S: Sequence[int]) -> list[frozenset[int]]:
    inside = set(S)
    seen: set[int] = set()
    out: list[frozenset[int]] = []
    for v in sorted(inside):
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in inside and y not in comp:
                    comp.add(y)
                    stack.append(y)
        seen |= comp
        out.append(frozenset(comp))
    return out


def commutator_shape(w: Word, n_vertices: int) -> str:
    """Bracketed display of an iterated commutator built by commutator_basis,
    reconstructed from the slot structure of the reduced word."""
    # The reduced word of an iterated commutator starts with its slot letters
    # in nesting order: k1, k2, ..., kl, j, i appear first at positions where
    # each new vertex shows up.  Reconstruct by first occurrence order.
    order: list[Letter] = []
    seen = set()
    for letter in w:
        key = (letter.vertex, letter.element)
        if key not in seen:
            seen.add(key)
            order.append(Letter(letter.vertex, letter.element, 1))
    names = [generator_name(x.vertex, x.element, n_vertices) for x in order]
    if len(names) < 2:
        return word_str(w, n_vertices)
    expr = f"[{names[-2]}, {names[-1]}]"
    for name in reversed(names[:-2]):
        expr = f"[{name}, {expr}]"
    return expr
