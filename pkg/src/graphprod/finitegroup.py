"""Finite groups as validated Cayley tables, with 0-based element indices and
index 0 the identity.

Constructors cover cyclic, dihedral, symmetric, general abelian, explicit
table, and permutation-generated groups.  Invariant computations: center,
derived subgroup, abelianization with its quotient map, primary decomposition
of abelian groups, and solvability via the derived series.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product as iproduct
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .zlinalg import BudgetExceeded, IntMatrix, smith_normal_form_extended

FULL_ASSOCIATIVITY_BOUND = 200
SAMPLED_TRIPLES = 10**4
SYMMETRIC_DEGREE_BOUND = 6
PERMUTATION_CLOSURE_BOUND = 10**4


class FiniteGroup:
    """Finite group given by its Cayley table: table[a][b] = index of a*b."""

    __slots__ = ("order", "labels", "table", "_inverse")

    def __init__(self, labels: Sequence[str], table: Sequence[Sequence[int]]):
        m = len(labels)
        tbl = tuple(tuple(int(x) for x in row) for row in table)
        if len(tbl) != m or any(len(row) != m for row in tbl):
            raise ValueError("table must be m x m for m labels")
        if len(set(labels)) != m:
            raise ValueError("element labels must be distinct")
        full = list(range(m))
        for a in range(m):
            if tbl[0][a] != a or tbl[a][0] != a:
                raise ValueError("index 0 must be a two-sided identity")
            if sorted(tbl[a]) != full or sorted(row[a] for row in tbl) != full:
                raise ValueError("table is not a Latin square")
        _check_associativity(tbl)
        inverse = [0] * m
        for a in range(m):
            inverse[a] = tbl[a].index(0)
        object.__setattr__(self, "order", m)
        object.__setattr__(self, "labels", tuple(str(s) for s in labels))
        object.__setattr__(self, "table", tbl)
        object.__setattr__(self, "_inverse", tuple(inverse))

    def __setattr__(self, name, value):
        raise AttributeError("FiniteGroup is immutable")

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self._inverse[a]

    def power(self, a: int, k: int) -> int:
        if k < 0:
            return self.power(self.inv(a), -k)
        result = 0
        base = a
        while k:
            if k & 1:
                result = self.table[result][base]
            base = self.table[base][base]
            k >>= 1
        return result

    def element_order(self, a: int) -> int:
        k = 1
        cur = a
        while cur != 0:
            cur = self.table[cur][a]
            k += 1
        return k

    def conjugate(self, g: int, h: int) -> int:
        """g h g^-1."""
        return self.table[self.table[g][h]][self.inv(g)]

    def commutator(self, g: int, h: int) -> int:
        """g h g^-1 h^-1."""
        return self.table[self.conjugate(g, h)][self.inv(h)]

    def exponent(self) -> int:
        e = 1
        for a in range(self.order):
            o = self.element_order(a)
            e = e * o // _gcd(e, o)
        return e

    def is_abelian(self) -> bool:
        t = self.table
        return all(
            t[a][b] == t[b][a] for a in range(self.order) for b in range(a + 1, self.order)
        )

    def __repr__(self) -> str:
        return f"FiniteGroup(order={self.order}, labels={self.labels!r})"


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _check_associativity(tbl: tuple[tuple[int, ...], ...]) -> None:
    m = len(tbl)
    if m == 0:
        raise ValueError("empty table")
    if m <= FULL_ASSOCIATIVITY_BOUND:
        t = np.array(tbl, dtype=np.int64)
        # (a*b)*c for all triples, against a*(b*c)
        left = t[t, :]
        right = t[np.arange(m)[:, None, None], t[None, :, :]]
        if not np.array_equal(left, right):
            raise ValueError("table is not associative")
    else:
        rng = random.Random(0xA55)
        for _ in range(SAMPLED_TRIPLES):
            a = rng.randrange(m)
            b = rng.randrange(m)
            c = rng.randrange(m)
            if tbl[tbl[a][b]][c] != tbl[a][tbl[b][c]]:
                raise ValueError("table is not associative")


@dataclass(frozen=True)
class Subgroup:
    parent: FiniteGroup
    members: frozenset[int]

    def __post_init__(self):
        g = self.parent
        if 0 not in self.members:
            raise ValueError("subgroup must contain the identity")
        for a in self.members:
            if g.inv(a) not in self.members:
                raise ValueError("subgroup not closed under inverse")
            for b in self.members:
                if g.mul(a, b) not in self.members:
                    raise ValueError("subgroup not closed under product")

    @property
    def order(self) -> int:
        return len(self.members)

    def index(self) -> int:
        return self.parent.order // self.order


def subgroup_closure(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    members = {0}
    queue = sorted(set(gens) | {0})
    head = 0
    members.update(queue)
    alphabet = sorted(set(gens))
    while head < len(queue):
        a = queue[head]
        head += 1
        for b in alphabet:
            c = G.mul(a, b)
            if c not in members:
                members.add(c)
                queue.append(c)
    # closure under product of generators implies closure under inverse in a
    # finite group; Subgroup validation re-checks
    return Subgroup(G, frozenset(members))


def center(G: FiniteGroup) -> Subgroup:
    t = G.table
    members = frozenset(
        a
        for a in range(G.order)
        if all(t[a][b] == t[b][a] for b in range(G.order))
    )
    return Subgroup(G, members)


def centralizer(G: FiniteGroup, a: int) -> Subgroup:
    t = G.table
    return Subgroup(
        G, frozenset(b for b in range(G.order) if t[a][b] == t[b][a])
    )


def derived_subgroup(G: FiniteGroup) -> Subgroup:
    commutators = {
        G.commutator(a, b) for a in range(G.order) for b in range(G.order)
    }
    return subgroup_closure(G, commutators)


def _derived_of(G: FiniteGroup, members: frozenset[int]) -> frozenset[int]:
    commutators = {G.commutator(a, b) for a in members for b in members}
    sub = {0}
    queue = sorted(commutators | {0})
    sub.update(queue)
    head = 0
    alphabet = sorted(commutators)
    while head < len(queue):
        a = queue[head]
        head += 1
        for b in alphabet:
            c = G.mul(a, b)
            if c not in sub:
                sub.add(c)
                queue.append(c)
    return frozenset(sub)


def is_solvable(G: FiniteGroup) -> bool:
    current = frozenset(range(G.order))
    while True:
        nxt = _derived_of(G, current)
        if nxt == current:
            return len(current) == 1
        current = nxt


def is_perfect(G: FiniteGroup) -> bool:
    return derived_subgroup(G).order == G.order


def quotient_group(G: FiniteGroup, N: Subgroup) -> tuple[FiniteGroup, list[int]]:
    """Quotient by a normal subgroup: (Q, projection index map).

    Cosets are labeled by their smallest member's label with a bar prefix.
    Raises if N is not normal.
    """
    for g in range(G.order):
        for n in N.members:
            if G.conjugate(g, n) not in N.members:
                raise ValueError("subgroup is not normal")
    coset_of = [-1] * G.order
    reps: list[int] = []
    for a in range(G.order):
        if coset_of[a] != -1:
            continue
        members = sorted(G.mul(a, n) for n in N.members)
        rep_index = len(reps)
        reps.append(members[0])
        for x in members:
            coset_of[x] = rep_index
    # identity's coset must be index 0; reps[0] == 0 since coset of 0 found first
    table = [
        [coset_of[G.mul(reps[i], reps[j])] for j in range(len(reps))]
        for i in range(len(reps))
    ]
    labels = [f"[{G.labels[r]}]" for r in reps]
    return FiniteGroup(labels, table), coset_of


def _greedy_generators(G: FiniteGroup) -> list[int]:
    gens: list[int] = []
    covered = {0}
    while len(covered) < G.order:
        best = None
        for a in range(1, G.order):
            if a not in covered:
                best = a
                break
        gens.append(best)
        covered = set(subgroup_closure(G, gens).members)
    return gens


def abelianization(G: FiniteGroup) -> tuple[tuple[int, ...], list[tuple[int, ...]]]:
    """Invariant factors of G/[G,G] plus the quotient map.

    Returns (factors, coords) where factors is the ascending divisibility
    chain (trivial factors dropped) and coords[g] are the coordinates of
    element g in the direct sum of Z/factors[i].
    """
    Q, project = quotient_group(G, derived_subgroup(G))
    gens = _greedy_generators(Q) if Q.order > 1 else []
    k = len(gens)
    if k == 0:
        return (), [() for _ in range(G.order)]
    orders = [Q.element_order(g) for g in gens]
    if prod(orders) > 10**6:
        raise BudgetExceeded("abelianization relation search too large")
    # exponent vector of every element of Q over the generators, by BFS
    vector_of: dict[int, tuple[int, ...]] = {0: (0,) * k}
    queue = [0]
    head = 0
    while head < len(queue):
        q = queue[head]
        head += 1
        vq = vector_of[q]
        for i, g in enumerate(gens):
            nxt = Q.mul(q, g)
            if nxt not in vector_of:
                vector_of[nxt] = tuple(
                    v + (1 if j == i else 0) for j, v in enumerate(vq)
                )
                queue.append(nxt)
    # relation lattice: diagonal element orders plus every zero combination
    columns: list[tuple[int, ...]] = []
    for i, o in enumerate(orders):
        columns.append(tuple(o if j == i else 0 for j in range(k)))
    for combo in iproduct(*(range(o) for o in orders)):
        elt = 0
        for g, e in zip(gens, combo):
            elt = Q.mul(elt, Q.power(g, e))
        if elt == 0 and any(combo):
            columns.append(combo)
    relmat = IntMatrix(tuple(zip(*columns)), cols=len(columns))
    res = smith_normal_form_extended(relmat)
    d = list(res.diagonal)
    assert len(d) == k and all(x > 0 for x in d), "quotient must be finite"
    keep = [i for i in range(k) if d[i] > 1]
    factors = tuple(d[i] for i in keep)
    left = res.left.entries
    coords: list[tuple[int, ...]] = []
    for g in range(G.order):
        x = vector_of[project[g]]
        y = tuple(
            sum(left[i][j] * x[j] for j in range(k)) % d[i] for i in keep
        )
        coords.append(y)
    return factors, coords


def primary_decomposition(G: FiniteGroup) -> tuple[int, ...]:
    """Prime-power cyclic factor orders of an abelian group, ascending."""
    if not G.is_abelian():
        raise ValueError("primary decomposition requires an abelian group")
    factors, _ = abelianization(G)
    out: list[int] = []
    for d in factors:
        rest = d
        p = 2
        while rest > 1:
            if rest % p == 0:
                q = 1
                while rest % p == 0:
                    q *= p
                    rest //= p
                out.append(q)
            p += 1 if p == 2 else 2
    return tuple(sorted(out))


# --- constructors ---


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic group order must be >= 1")
    labels = ["1"] + [f"g{k}" if k > 1 else "g" for k in range(1, n)]
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    return FiniteGroup(labels, table)


def dihedral(order: int) -> FiniteGroup:
    """Dihedral group of the given order 2n (symmetries of an n-gon)."""
    if order < 2 or order % 2:
        raise ValueError("dihedral order must be even and >= 2")
    n = order // 2
    elements = [(i, 0) for i in range(n)] + [(i, 1) for i in range(n)]
    index = {e: k for k, e in enumerate(elements)}

    def mul(x, y):
        i, e = x
        j, f = y
        # reflections conjugate rotations to their inverses
        return ((i + j) % n, f) if e == 0 else ((i - j) % n, 1 - f)

    def label(x):
        i, e = x
        r = "" if i == 0 else ("r" if i == 1 else f"r{i}")
        s = "s" if e else ""
        return (r + s) or "1"

    table = [[index[mul(x, y)] for y in elements] for x in elements]
    return FiniteGroup([label(x) for x in elements], table)


def _perm_label(images: tuple[int, ...]) -> str:
    if images == tuple(range(1, len(images) + 1)):
        return "1"
    return "p" + "".join(str(i) for i in images)


def _perm_group_from(perms: list[tuple[int, ...]]) -> FiniteGroup:
    degree = len(perms[0])
    identity = tuple(range(1, degree + 1))
    ordered = [identity] + sorted(p for p in set(perms) if p != identity)
    index = {p: k for k, p in enumerate(ordered)}
    table = [
        [index[tuple(p[q[i] - 1] for i in range(degree))] for q in ordered]
        for p in ordered
    ]
    return FiniteGroup([_perm_label(p) for p in ordered], table)


def symmetric(n: int) -> FiniteGroup:
    if not 1 <= n <= SYMMETRIC_DEGREE_BOUND:
        raise ValueError(f"symmetric group degree must be 1..{SYMMETRIC_DEGREE_BOUND}")
    from itertools import permutations as iperm

    return _perm_group_from([tuple(p) for p in iperm(range(1, n + 1))])


def permutation_group(degree: int, generators: Sequence[Sequence[int]]) -> FiniteGroup:
    """Group generated by permutations given as 1-based image lists."""
    if degree < 1:
        raise ValueError("degree must be >= 1")
    gens: list[tuple[int, ...]] = []
    for g in generators:
        images = tuple(int(x) for x in g)
        if sorted(images) != list(range(1, degree + 1)):
            raise ValueError(f"not a permutation of 1..{degree}: {images}")
        gens.append(images)
    identity = tuple(range(1, degree + 1))
    seen = {identity}
    queue = [identity]
    head = 0
    while head < len(queue):
        p = queue[head]
        head += 1
        for g in gens:
            q = tuple(p[g[i] - 1] for i in range(degree))
            if q not in seen:
                seen.add(q)
                if len(seen) > PERMUTATION_CLOSURE_BOUND:
                    raise BudgetExceeded(
                        f"permutation closure exceeded {PERMUTATION_CLOSURE_BOUND}"
                    )
                queue.append(q)
    return _perm_group_from(queue)


def abelian(invariant_factors: Sequence[int]) -> FiniteGroup:
    factors = [int(f) for f in invariant_factors]
    if not factors or any(f < 1 for f in factors):
        raise ValueError("factors must be positive")
    elements = list(iproduct(*(range(f) for f in factors)))
    index = {e: k for k, e in enumerate(elements)}

    def label(e):
        if not any(e):
            return "1"
        return "g" + "_".join(str(x) for x in e)

    table = [
        [
            index[tuple((a + b) % f for a, b, f in zip(x, y, factors))]
            for y in elements
        ]
        for x in elements
    ]
    return FiniteGroup([label(e) for e in elements], table)


def from_table(labels: Sequence[str], table: Sequence[Sequence[int]]) -> FiniteGroup:
    return FiniteGroup(labels, table)
