"""Finite simplicial complexes on vertices 1..n: flag and chordality tests
with self-verifying certificates, vertex-set automorphisms, the vertex
expansion that replaces each vertex by a simplex, and the rank of the free
kernel computed three independent ways.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import prod
from typing import Iterable, Literal, Mapping, Sequence

AUT_GROUP_DEFAULT_BOUND = 10


@dataclass(frozen=True)
class VertexPermutation:
    """Permutation of the vertices 1..n, images[i-1] = image of vertex i."""

    images: tuple[int, ...]

    def __post_init__(self):
        n = len(self.images)
        if sorted(self.images) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {self.images}")

    def __call__(self, vertex: int) -> int:
        return self.images[vertex - 1]

    def inverse(self) -> "VertexPermutation":
        inv = [0] * len(self.images)
        for i, img in enumerate(self.images, start=1):
            inv[img - 1] = i
        return VertexPermutation(tuple(inv))

    @staticmethod
    def identity(n: int) -> "VertexPermutation":
        return VertexPermutation(tuple(range(1, n + 1)))


class SimplicialComplex:
    """Abstract simplicial complex with vertex set {1..n}.

    Faces are stored as a frozenset of frozensets that always contains the
    empty face and every singleton; downward closure is validated at
    construction.
    """

    __slots__ = ("n", "faces")

    def __init__(self, n: int, faces: Iterable[frozenset[int]]):
        face_set = {frozenset(f) for f in faces}
        face_set.add(frozenset())
        for v in range(1, n + 1):
            face_set.add(frozenset((v,)))
        for f in face_set:
            for v in f:
                if not 1 <= v <= n:
                    raise ValueError(f"vertex {v} out of range 1..{n}")
            if len(f) >= 2:
                for sub in combinations(f, len(f) - 1):
                    if frozenset(sub) not in face_set:
                        raise ValueError(f"not downward closed at {sorted(f)}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "faces", frozenset(face_set))

    def __setattr__(self, name, value):
        raise AttributeError("SimplicialComplex is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SimplicialComplex)
            and self.n == other.n
            and self.faces == other.faces
        )

    def __hash__(self) -> int:
        return hash((self.n, self.faces))

    def __repr__(self) -> str:
        return f"SimplicialComplex(n={self.n}, facets={[sorted(f) for f in self.facets()]})"

    def edges(self) -> set[frozenset[int]]:
        return {f for f in self.faces if len(f) == 2}

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in range(1, self.n + 1)}
        for e in self.edges():
            a, b = sorted(e)
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def facets(self) -> list[frozenset[int]]:
        """Maximal faces, sorted for determinism."""
        maximal = [
            f
            for f in self.faces
            if f and not any(f < g for g in self.faces)
        ]
        return sorted(maximal, key=lambda f: (len(f), sorted(f)))

    def has_edge(self, a: int, b: int) -> bool:
        return frozenset((a, b)) in self.faces

    def is_zero_dimensional(self) -> bool:
        return all(len(f) <= 1 for f in self.faces)

    def apply(self, sigma: VertexPermutation) -> "SimplicialComplex":
        if len(sigma.images) != self.n:
            raise ValueError("permutation size does not match vertex count")
        return SimplicialComplex(
            self.n, (frozenset(sigma(v) for v in f) for f in self.faces)
        )


def from_facets(n: int, facets: Sequence[Iterable[int]]) -> SimplicialComplex:
    """Downward closure of the given facets plus all singletons and the
    empty face."""
    faces: set[frozenset[int]] = set()
    for facet in facets:
        fs = frozenset(facet)
        for v in fs:
            if not 1 <= v <= n:
                raise ValueError(f"vertex {v} out of range 1..{n}")
        for k in range(len(fs) + 1):
            for sub in combinations(sorted(fs), k):
                faces.add(frozenset(sub))
    return SimplicialComplex(n, faces)


def clique_complex(K: SimplicialComplex) -> SimplicialComplex:
    """Complex whose faces are exactly the complete subgraphs of the
    1-skeleton of K."""
    adj = K.adjacency()
    cliques: set[frozenset[int]] = {frozenset()}
    # grow cliques one vertex at a time; n is small throughout
    frontier = [frozenset((v,)) for v in range(1, K.n + 1)]
    while frontier:
        cliques.update(frontier)
        nxt = []
        for c in frontier:
            top = max(c)
            for v in range(top + 1, K.n + 1):
                if all(v in adj[u] for u in c):
                    nxt.append(c | {v})
        frontier = nxt
    return SimplicialComplex(K.n, cliques)


def is_flag(K: SimplicialComplex) -> bool:
    return K == clique_complex(K)


ChordalCertificate = tuple[Literal["elimination_order", "chordless_cycle"], tuple[int, ...]]


def is_chordal(K: SimplicialComplex) -> tuple[bool, ChordalCertificate]:
    """Chordality of the 1-skeleton.

    Returns (True, ("elimination_order", order)) where order is a perfect
    elimination ordering, or (False, ("chordless_cycle", cycle)) with a
    chordless cycle of length >= 4.  Both certificates replay: see
    verify_elimination_order and verify_chordless_cycle.
    """
    adj = K.adjacency()
    order = _maximum_cardinality_search(adj)
    if _is_perfect_elimination_order(adj, order):
        return True, ("elimination_order", order)
    cycle = _find_chordless_cycle(adj)
    if cycle is None:
        raise AssertionError("elimination order rejected but no chordless cycle found")
    return False, ("chordless_cycle", cycle)


def _maximum_cardinality_search(adj: Mapping[int, set[int]]) -> tuple[int, ...]:
    """Candidate perfect elimination ordering via maximum cardinality search.

    Vertices are picked by descending count of already-picked neighbors
    (smallest vertex id on ties); the pick order reversed is returned, so the
    result eliminates low-degree fringe first.
    """
    vertices = sorted(adj)
    weight = {v: 0 for v in vertices}
    picked: list[int] = []
    remaining = set(vertices)
    while remaining:
        best = None
        for u in sorted(remaining):
            if best is None or weight[u] > weight[best]:
                best = u
        v = best
        picked.append(v)
        remaining.discard(v)
        for u in adj[v]:
            if u in remaining:
                weight[u] += 1
    return tuple(reversed(picked))


def _is_perfect_elimination_order(
    adj: Mapping[int, set[int]], order: Sequence[int]
) -> bool:
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [u for u in adj[v] if pos[u] > pos[v]]
        if not later:
            continue
        u = min(later, key=pos.__getitem__)
        for w in later:
            if w != u and w not in adj[u]:
                return False
    return True


def _find_chordless_cycle(adj: Mapping[int, set[int]]) -> tuple[int, ...] | None:
    """Some chordless cycle of length >= 4, or None if the graph is chordal.

    For every vertex v and non-adjacent pair u, w of its neighbors, a
    shortest u-w path avoiding the rest of the closed neighborhood of v
    closes to a chordless cycle through v.  Any chordless cycle arises this
    way, so the scan is complete.
    """
    for v in sorted(adj):
        nbrs = sorted(adj[v])
        for u, w in combinations(nbrs, 2):
            if w in adj[u]:
                continue
            forbidden = (adj[v] | {v}) - {u, w}
            path = _shortest_path_avoiding(adj, u, w, forbidden)
            if path is not None:
                return (v, *path)
    return None


def _shortest_path_avoiding(
    adj: Mapping[int, set[int]],
    source: int,
    target: int,
    forbidden: set[int],
) -> tuple[int, ...] | None:
    parent: dict[int, int | None] = {source: None}
    queue = [source]
    head = 0
    while head < len(queue):
        x = queue[head]
        head += 1
        if x == target:
            path = []
            cur: int | None = x
            while cur is not None:
                path.append(cur)
                cur = parent[cur]
            return tuple(reversed(path))
        for y in sorted(adj[x]):
            if y not in parent and y not in forbidden:
                parent[y] = x
                queue.append(y)
    return None


def verify_elimination_order(K: SimplicialComplex, order: Sequence[int]) -> bool:
    """Replay an elimination ordering: each vertex's later neighbors must
    form a clique."""
    adj = K.adjacency()
    if sorted(order) != list(range(1, K.n + 1)):
        return False
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [u for u in adj[v] if pos[u] > pos[v]]
        for x, y in combinations(later, 2):
            if y not in adj[x]:
                return False
    return True


def verify_chordless_cycle(K: SimplicialComplex, cycle: Sequence[int]) -> bool:
    """Replay a cycle certificate: length >= 4, consecutive vertices
    adjacent, no other pair adjacent."""
    if len(cycle) < 4 or len(set(cycle)) != len(cycle):
        return False
    adj = K.adjacency()
    k = len(cycle)
    for i in range(k):
        for j in range(i + 1, k):
            adjacent = cycle[j] in adj[cycle[i]]
            consecutive = j - i == 1 or (i == 0 and j == k - 1)
            if adjacent != consecutive:
                return False
    return True


def aut_group(
    K: SimplicialComplex, bound: int = AUT_GROUP_DEFAULT_BOUND
) -> list[VertexPermutation]:
    """All vertex permutations mapping the face set onto itself.

    Backtracking on the 1-skeleton with degree pruning, then a full face-set
    check (needed when K is not flag).  Sorted by image tuple.
    """
    if K.n > bound:
        raise ValueError(f"vertex count {K.n} exceeds aut_group bound {bound}")
    adj = K.adjacency()
    degree = {v: len(adj[v]) for v in adj}
    vertices = list(range(1, K.n + 1))
    found: list[VertexPermutation] = []

    def extend(partial: dict[int, int], used: set[int]):
        if len(partial) == K.n:
            sigma = VertexPermutation(tuple(partial[v] for v in vertices))
            if K.apply(sigma).faces == K.faces:
                found.append(sigma)
            return
        v = vertices[len(partial)]
        for img in vertices:
            if img in used or degree[img] != degree[v]:
                continue
            ok = True
            for w, wimg in partial.items():
                if (w in adj[v]) != (wimg in adj[img]):
                    ok = False
                    break
            if ok:
                partial[v] = img
                used.add(img)
                extend(partial, used)
                del partial[v]
                used.discard(img)

    extend({}, set())
    return sorted(found, key=lambda s: s.images)


def expand_KG(
    K: SimplicialComplex, primary_factor_counts: Sequence[int]
) -> tuple[SimplicialComplex, dict[int, int]]:
    """Replace vertex i by a full simplex on primary_factor_counts[i-1] new
    vertices, joining blocks completely over each edge of K, and take the
    clique complex of the resulting 1-skeleton.

    Returns the expanded complex and the map from new vertex to originating
    vertex.  Requires K flag with chordal 1-skeleton and all counts >= 1.
    """
    if len(primary_factor_counts) != K.n:
        raise ValueError("one factor count per vertex required")
    if any(c < 1 for c in primary_factor_counts):
        raise ValueError("factor counts must be >= 1")
    if not is_flag(K):
        raise ValueError("expansion requires a flag complex")
    ok, cert = is_chordal(K)
    if not ok:
        raise ValueError(f"expansion requires a chordal 1-skeleton; found {cert[0]} {cert[1]}")
    origin: dict[int, int] = {}
    block: dict[int, list[int]] = {}
    nxt = 1
    for v in range(1, K.n + 1):
        block[v] = list(range(nxt, nxt + primary_factor_counts[v - 1]))
        for w in block[v]:
            origin[w] = v
        nxt += primary_factor_counts[v - 1]
    total = nxt - 1
    edges: set[frozenset[int]] = set()
    for v in range(1, K.n + 1):
        for a, b in combinations(block[v], 2):
            edges.add(frozenset((a, b)))
    for e in K.edges():
        v, w = sorted(e)
        for a in block[v]:
            for b in block[w]:
                edges.add(frozenset((a, b)))
    skeleton = SimplicialComplex(total, edges)
    return clique_complex(skeleton), origin


def euler_characteristic_fiber(
    K: SimplicialComplex, orders: Sequence[int]
) -> int:
    """Euler characteristic of the fiber model: chi = sum over faces sigma of
    prod_{i in sigma}(1 - m_i) * prod_{i not in sigma} m_i."""
    if len(orders) != K.n:
        raise ValueError("one group order per vertex required")
    if any(m < 1 for m in orders):
        raise ValueError("orders must be >= 1")
    total = 0
    for face in K.faces:
        term = 1
        for i in range(1, K.n + 1):
            m = orders[i - 1]
            term *= (1 - m) if i in face else m
        total += term
    return total


RankMethod = Literal["euler", "closed_form", "recursion"]


def rank_rho(
    K: SimplicialComplex, orders: Sequence[int], method: RankMethod = "euler"
) -> int:
    """Rank of the free kernel over K for vertex group orders m_i.

    method "euler": 1 - chi of the fiber model; requires K flag with chordal
    1-skeleton.  Methods "closed_form" and "recursion" apply only when K has
    no edges.
    """
    if len(orders) != K.n:
        raise ValueError("one group order per vertex required")
    ms = [int(m) for m in orders]
    if method == "euler":
        if not is_flag(K):
            raise ValueError("rank via Euler characteristic requires a flag complex")
        ok, cert = is_chordal(K)
        if not ok:
            raise ValueError(
                f"kernel not free: chordless cycle {tuple(cert[1])}"
            )
        return 1 - euler_characteristic_fiber(K, ms)
    if not K.is_zero_dimensional():
        raise ValueError(f"method {method!r} applies only to edgeless complexes")
    if method == "closed_form":
        n = K.n
        total = prod(ms)
        return (n - 1) * total - sum(total // m for m in ms) + 1
    if method == "recursion":
        rho = 0
        running = 1
        for m in ms:
            rho = m * rho + (m - 1) * (running - 1)
            running *= m
        return rho
    raise ValueError(f"unknown method {method!r}")
