"""Free-kernel realization for graph products over chordal flag complexes.

The kernel of the projection onto the direct product is realized in three
steps: a coset table for the regular action of the direct product, a
Schreier generating set from a breadth-first spanning tree, and Tietze
elimination of the rewritten relators down to a free basis.  A tag-tracked
Stallings folding validates candidate bases and produces change-of-basis
certificates in the same pass.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .simplicial import SimplicialComplex, is_chordal, is_flag, rank_rho
from .zlinalg import BudgetExceeded
from .presentation import (
    EMPTY_WORD,
    GraphProductPresentation,
    Letter,
    ProductElement,
    Word,
    build_graph_product,
    free_reduce,
    product_elements,
    project,
    word_mul,
    word_inverse,
)

DEFAULT_COSET_BOUND = 20000
DEFAULT_TIETZE_BUDGET = 10**6

# Words over an abstract 1-based alphabet: ((symbol, sign), ...).  Used for
# Schreier generators, free-basis words, and candidate-basis expressions.
Expr = tuple[tuple[int, int], ...]

EMPTY_EXPR: Expr = ()


def expr_reduce(pairs: Iterable[tuple[int, int]]) -> Expr:
    out: list[tuple[int, int]] = []
    for sym, sign in pairs:
        if out and out[-1][0] == sym and out[-1][1] == -sign:
            out.pop()
        else:
            out.append((sym, sign))
    return tuple(out)


def expr_inv(e: Expr) -> Expr:
    return tuple((sym, -sign) for sym, sign in reversed(e))


def expr_mul(*exprs: Iterable[tuple[int, int]]) -> Expr:
    out: list[tuple[int, int]] = []
    for e in exprs:
        for sym, sign in e:
            if out and out[-1][0] == sym and out[-1][1] == -sign:
                out.pop()
            else:
                out.append((sym, sign))
    return tuple(out)


def expr_substitute(e: Expr, images: dict[int, Expr]) -> Expr:
    """Replace each symbol by its image (symbols absent from the map stay)."""
    out: list[tuple[int, int]] = []
    for sym, sign in e:
        repl = images.get(sym)
        chunk = ((sym, sign),) if repl is None else (repl if sign > 0 else expr_inv(repl))
        for pair in chunk:
            if out and out[-1][0] == pair[0] and out[-1][1] == -pair[1]:
                out.pop()
            else:
                out.append(pair)
    return tuple(out)


# --- coset table ---


@dataclass(frozen=True)
class CosetTable:
    """Regular action of the direct product on itself, one coset per
    element, identity coset first.  forward[c][k] is the coset reached from
    coset c by the k-th presentation generator."""

    pres: GraphProductPresentation
    elements: tuple[ProductElement, ...]
    forward: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.elements)

    def act(self, coset: int, letter: Letter) -> int:
        k = self.pres.generators.index(Letter(letter.vertex, letter.element, 1))
        if letter.sign > 0:
            return self.forward[coset][k]
        return self._backward()[coset][k]

    def _backward(self) -> tuple[tuple[int, ...], ...]:
        back = getattr(self, "_backward_cache", None)
        if back is None:
            back = [[0] * len(self.pres.generators) for _ in self.elements]
            for c, row in enumerate(self.forward):
                for k, d in enumerate(row):
                    back[d][k] = c
            back = tuple(tuple(r) for r in back)
            object.__setattr__(self, "_backward_cache", back)
        return back


def build_coset_table(
    pres: GraphProductPresentation, bound: int = DEFAULT_COSET_BOUND
) -> CosetTable:
    order = pres.product_order()
    if order > bound:
        raise BudgetExceeded(
            f"coset table needs {order} cosets, bound is {bound}"
        )
    elements = tuple(product_elements(pres))
    index = {p: i for i, p in enumerate(elements)}
    forward = []
    for p in elements:
        row = []
        for g in pres.generators:
            q = list(p)
            G = pres.groups[g.vertex - 1]
            q[g.vertex - 1] = G.mul(q[g.vertex - 1], g.element)
            row.append(index[tuple(q)])
        forward.append(tuple(row))
    return CosetTable(pres, elements, tuple(forward))


# --- Schreier generators ---


@dataclass(frozen=True)
class SchreierGenerator:
    index: int
    coset: int
    gen_index: int
    word: Word


@dataclass(frozen=True)
class SchreierData:
    table: CosetTable
    tree_parent: tuple[tuple[int, int] | None, ...]
    transversal: tuple[Word, ...]
    gens: tuple[SchreierGenerator, ...]
    edge_to_gen: dict[tuple[int, int], int | None]

    @property
    def pres(self) -> GraphProductPresentation:
        return self.table.pres


def schreier(table: CosetTable) -> SchreierData:
    """Breadth-first spanning tree in generator order from the identity
    coset; one Schreier generator per non-tree edge."""
    pres = table.pres
    n_gens = len(pres.generators)
    parent: list[tuple[int, int] | None] = [None] * table.size
    seen = [False] * table.size
    seen[0] = True
    order = [0]
    queue = deque([0])
    tree_edges: set[tuple[int, int]] = set()
    while queue:
        c = queue.popleft()
        for k in range(n_gens):
            d = table.forward[c][k]
            if not seen[d]:
                seen[d] = True
                parent[d] = (c, k)
                tree_edges.add((c, k))
                order.append(d)
                queue.append(d)
    transversal: list[Word] = [EMPTY_WORD] * table.size
    for c in order[1:]:
        p, k = parent[c]
        transversal[c] = transversal[p] + (pres.generators[k],)
    gens: list[SchreierGenerator] = []
    edge_to_gen: dict[tuple[int, int], int | None] = {}
    for c in order:
        for k in range(n_gens):
            if (c, k) in tree_edges:
                edge_to_gen[(c, k)] = None
                continue
            d = table.forward[c][k]
            w = free_reduce(
                transversal[c] + (pres.generators[k],) + word_inverse(transversal[d])
            )
            gens.append(SchreierGenerator(len(gens) + 1, c, k, w))
            edge_to_gen[(c, k)] = gens[-1].index
    return SchreierData(table, tuple(parent), tuple(transversal), tuple(gens), edge_to_gen)


def _walk(data: SchreierData, start: int, w: Word) -> tuple[int, Expr]:
    """Trace w through the coset graph from start, emitting one Schreier
    symbol per non-tree edge crossed."""
    table = data.table
    pres = table.pres
    gen_index = {g: k for k, g in enumerate(pres.generators)}
    c = start
    out: list[tuple[int, int]] = []
    for letter in w:
        k = gen_index[Letter(letter.vertex, letter.element, 1)]
        if letter.sign > 0:
            s = data.edge_to_gen[(c, k)]
            if s is not None:
                out.append((s, 1))
            c = table.forward[c][k]
        else:
            d = table._backward()[c][k]
            s = data.edge_to_gen[(d, k)]
            if s is not None:
                out.append((s, -1))
            c = d
    return c, expr_reduce(out)


def rs_rewrite(w: Word, data: SchreierData) -> Expr:
    """Rewrite a kernel element as a word in the Schreier generators.

    Output length never exceeds len(w); raises ValueError off the kernel.
    """
    if any(x != 0 for x in project(w, data.pres)):
        raise ValueError("word is not in the kernel")
    end, out = _walk(data, 0, w)
    if end != 0:
        raise RuntimeError("kernel walk did not close")
    return out


def rewritten_relators(data: SchreierData) -> list[Expr]:
    """Relators of the kernel: every presentation relator traced from every
    coset, deduplicated, trivial ones dropped."""
    seen: set[Expr] = set()
    out: list[Expr] = []
    for c in range(data.table.size):
        for r in data.pres.relators:
            end, e = _walk(data, c, r)
            if end != c:
                raise RuntimeError("relator walk did not close")
            if e and e not in seen:
                seen.add(e)
                out.append(e)
    return out


# --- Tietze simplification ---


@dataclass(frozen=True)
class FreePresentation:
    """Free presentation of the kernel: rank, defining words of the basis
    (as graph-product words), and the append-only substitution log from the
    eliminated Schreier generators."""

    rank: int
    basis_words: tuple[Word, ...]
    substitution_log: tuple[tuple[int, Expr], ...]
    data: SchreierData
    basis_of_schreier: dict[int, int]
    _resolved: dict[int, Expr] = field(default_factory=dict, compare=False)

    def express_schreier(self, sym: int) -> Expr:
        """Schreier generator as a word over the free basis, replaying the
        substitution log in reverse elimination order."""
        if sym in self.basis_of_schreier:
            return ((self.basis_of_schreier[sym], 1),)
        if not self._resolved:
            images: dict[int, Expr] = {
                s: ((b, 1),) for s, b in self.basis_of_schreier.items()
            }
            for gen, e in reversed(self.substitution_log):
                images[gen] = expr_substitute(e, images)
            self._resolved.update(images)
        return self._resolved[sym]

    def rewrite(self, w: Word) -> Expr:
        """Kernel element as a reduced word over the free basis."""
        raw = rs_rewrite(w, self.data)
        out: Expr = EMPTY_EXPR
        for sym, sign in raw:
            img = self.express_schreier(sym)
            out = expr_mul(out, img if sign > 0 else expr_inv(img))
        return out

    def spell(self, e: Expr) -> Word:
        """Expand a basis expression back to a graph-product word."""
        parts = []
        for sym, sign in e:
            w = self.basis_words[sym - 1]
            parts.append(w if sign > 0 else word_inverse(w))
        return word_mul(*parts) if parts else EMPTY_WORD


def tietze_simplify(
    data: SchreierData,
    budget: int = DEFAULT_TIETZE_BUDGET,
    relators: Sequence[Expr] | None = None,
) -> FreePresentation:
    """Eliminate Schreier generators that occur exactly once in some
    relator, shortest relator first, until no relators remain.

    Each substitution is logged; the survivors are the free basis.  Raises
    BudgetExceeded when the move budget runs out and RuntimeError when no
    single-occurrence generator exists (the relators then present a
    non-free group, e.g. from a non-chordal 1-skeleton).
    """
    rels: list[Expr] = list(rewritten_relators(data) if relators is None else relators)
    rels = [_cyclic_reduce(r) for r in rels]
    log: list[tuple[int, Expr]] = []
    eliminated: set[int] = set()
    moves = 0
    while True:
        rels = [r for r in rels if r]
        if not rels:
            break
        best: tuple[int, int, int] | None = None
        for rid, rel in enumerate(rels):
            counts = Counter(sym for sym, _ in rel)
            singles = [sym for sym, c in counts.items() if c == 1]
            if not singles:
                continue
            cand = (len(rel), rid, min(singles))
            if best is None or cand < best:
                best = cand
        if best is None:
            raise RuntimeError(
                "no single-occurrence generator in any relator; "
                "the kernel is not free on the surviving generators"
            )
        _, rid, gen = best
        rel = rels.pop(rid)
        pos = next(i for i, (s, _) in enumerate(rel) if s == gen)
        sign = rel[pos][1]
        head, tail = rel[:pos], rel[pos + 1:]
        # rel = head . gen^sign . tail = 1
        image = expr_mul(expr_inv(head), expr_inv(tail))
        if sign < 0:
            image = expr_inv(image)
        log.append((gen, image))
        eliminated.add(gen)
        sub = {gen: image}
        new_rels = []
        for r in rels:
            if any(s == gen for s, _ in r):
                r = _cyclic_reduce(expr_substitute(r, sub))
                moves += 1
            if r:
                new_rels.append(r)
        rels = new_rels
        moves += 1
        if moves > budget:
            raise BudgetExceeded(
                f"simplification budget {budget} exhausted with "
                f"{len(rels)} relators remaining"
            )
    survivors = [g.index for g in data.gens if g.index not in eliminated]
    basis_of_schreier = {s: i + 1 for i, s in enumerate(survivors)}
    basis_words = tuple(data.gens[s - 1].word for s in survivors)
    return FreePresentation(
        len(survivors), basis_words, tuple(log), data, basis_of_schreier
    )


def _cyclic_reduce(e: Expr) -> Expr:
    e = expr_reduce(e)
    while len(e) >= 2 and e[0][0] == e[-1][0] and e[0][1] == -e[-1][1]:
        e = expr_reduce(e[1:-1])
    return e


# --- basis validation by tag-tracked folding ---


@dataclass(frozen=True)
class BasisValidation:
    """Outcome of folding the candidate words against a free presentation.

    ok means the candidates freely generate the whole kernel.  rank and
    index describe the subgroup they do generate (index None = infinite).
    letter_expressions[i] writes basis letter i+1 in the candidate alphabet
    and is only present when ok.
    """

    ok: bool
    rank: int
    vertices: int
    complete: bool
    index: int | None
    letter_expressions: tuple[Expr, ...] | None

    @property
    def message(self) -> str:
        if self.ok:
            return f"basis of rank {self.rank}"
        idx = self.index if self.index is not None else "infinite"
        return f"proper subgroup: rank {self.rank}, index {idx}"


def validate_basis(candidates: Sequence[Word], fp: FreePresentation) -> BasisValidation:
    """Fold the candidate words (rewritten over the free basis) and decide
    whether they generate the whole kernel.

    Each edge of the folding graph carries a tag word over the candidate
    alphabet; identifications conjugate the tags of re-hung edges, so the
    tag of the x_i petal of a successful fold expresses x_i in the
    candidates.  The expressions are verified by substitution before
    returning.
    """
    return validate_expr_basis([fp.rewrite(w) for w in candidates], fp.rank)


def validate_expr_basis(exprs: Sequence[Expr], rank: int) -> BasisValidation:
    """Same decision for candidates already written over the free basis."""
    graph = _FoldGraph()
    for k, e in enumerate(exprs, start=1):
        graph.add_loop(e, k)
    graph.fold()
    graph.trim()
    core_rank = graph.edge_count() - len(graph.vertices) + (1 if graph.vertices else 0)
    complete = graph.is_complete(rank)
    index = len(graph.vertices) if complete else None
    labels = graph.loop_labels_at_base()
    ok = (
        len(exprs) == rank
        and len(graph.vertices) == 1
        and sorted(labels) == list(range(1, rank + 1))
    )
    letter_exprs: tuple[Expr, ...] | None = None
    if ok:
        sigma = []
        for i in range(1, rank + 1):
            tag = graph.base_loop_tag(i)
            check = expr_substitute(tag, {k: e for k, e in enumerate(exprs, start=1)})
            if check != ((i, 1),):
                raise RuntimeError("folding certificate failed verification")
            sigma.append(tag)
        letter_exprs = tuple(sigma)
    return BasisValidation(
        ok, core_rank, len(graph.vertices), complete, index, letter_exprs
    )


class _FoldGraph:
    """Labeled directed graph with tagged edges for Stallings folding."""

    BASE = 0

    def __init__(self) -> None:
        self.vertices: set[int] = {self.BASE}
        self.edges: dict[int, tuple[int, int, int, Expr]] = {}
        self._next_v = 1
        self._next_e = 0

    def _new_vertex(self) -> int:
        v = self._next_v
        self._next_v += 1
        self.vertices.add(v)
        return v

    def _add_edge(self, src: int, dst: int, label: int, tag: Expr) -> int:
        eid = self._next_e
        self._next_e += 1
        self.edges[eid] = (src, dst, label, tag)
        return eid

    def add_loop(self, expr: Expr, candidate: int) -> None:
        """Attach a base loop reading expr; the closing edge is tagged with
        the candidate symbol."""
        if not expr:
            return
        at = self.BASE
        for i, (sym, sign) in enumerate(expr):
            nxt = self.BASE if i == len(expr) - 1 else self._new_vertex()
            tag: Expr = EMPTY_EXPR
            if i == len(expr) - 1:
                # a backward-traversed edge contributes its tag inverted
                tag = ((candidate, 1),) if sign > 0 else ((candidate, -1),)
            if sign > 0:
                self._add_edge(at, nxt, sym, tag)
            else:
                self._add_edge(nxt, at, sym, tag)
            at = nxt

    def edge_count(self) -> int:
        return len(self.edges)

    def fold(self) -> None:
        while True:
            pair = self._find_foldable()
            if pair is None:
                return
            e1, e2, outgoing = pair
            s1, d1, lab, t1 = self.edges[e1]
            s2, d2, _, t2 = self.edges[e2]
            keep, merge = (d1, d2) if outgoing else (s1, s2)
            if keep == merge:
                del self.edges[e2]
                continue
            if merge == self.BASE:
                e1, e2 = e2, e1
                s1, d1, lab, t1 = self.edges[e1]
                s2, d2, _, t2 = self.edges[e2]
                keep, merge = (d1, d2) if outgoing else (s1, s2)
            if outgoing:
                corr = expr_mul(expr_inv(t1), t2)
            else:
                corr = expr_mul(t2, expr_inv(t1))
            del self.edges[e2]
            corr_inv = expr_inv(corr)
            for eid, (s, d, l, t) in list(self.edges.items()):
                if s != merge and d != merge:
                    continue
                if outgoing:
                    # paths re-hung at keep: leaving gets corr on the left,
                    # entering gets corr^-1 on the right
                    if s == merge:
                        t = expr_mul(corr, t)
                        s = keep
                    if d == merge:
                        t = expr_mul(t, corr_inv)
                        d = keep
                else:
                    if d == merge:
                        t = expr_mul(t, corr)
                        d = keep
                    if s == merge:
                        t = expr_mul(corr_inv, t)
                        s = keep
                self.edges[eid] = (s, d, l, t)
            self.vertices.discard(merge)

    def _find_foldable(self) -> tuple[int, int, bool] | None:
        out_seen: dict[tuple[int, int], int] = {}
        in_seen: dict[tuple[int, int], int] = {}
        for eid in sorted(self.edges):
            s, d, lab, _ = self.edges[eid]
            if (s, lab) in out_seen:
                return out_seen[(s, lab)], eid, True
            out_seen[(s, lab)] = eid
            if (d, lab) in in_seen:
                return in_seen[(d, lab)], eid, False
            in_seen[(d, lab)] = eid
        return None

    def trim(self) -> None:
        while True:
            degree = Counter()
            for s, d, _, _ in self.edges.values():
                degree[s] += 1
                degree[d] += 1
            dead = [
                v for v in self.vertices
                if v != self.BASE and degree[v] <= 1
            ]
            if not dead:
                return
            for v in dead:
                self.vertices.discard(v)
            self.edges = {
                eid: e for eid, e in self.edges.items()
                if e[0] not in dead and e[1] not in dead
            }

    def is_complete(self, n_labels: int) -> bool:
        out_deg = Counter()
        in_deg = Counter()
        for s, d, lab, _ in self.edges.values():
            out_deg[(s, lab)] += 1
            in_deg[(d, lab)] += 1
        for v in self.vertices:
            for lab in range(1, n_labels + 1):
                if out_deg[(v, lab)] != 1 or in_deg[(v, lab)] != 1:
                    return False
        return True

    def loop_labels_at_base(self) -> list[int]:
        return [
            lab for s, d, lab, _ in self.edges.values()
            if s == self.BASE and d == self.BASE
        ]

    def base_loop_tag(self, label: int) -> Expr:
        for s, d, lab, tag in self.edges.values():
            if s == self.BASE and d == self.BASE and lab == label:
                return tag
        raise KeyError(label)


def rewrite_in_basis(
    w: Word,
    basis: Sequence[Word],
    fp: FreePresentation,
    validation: BasisValidation | None = None,
) -> Expr:
    """Kernel element as a reduced word over the given basis.

    The basis is validated first (reusing a supplied validation); the
    change of basis comes from the folding certificates.
    """
    if validation is None:
        validation = validate_basis(basis, fp)
    if not validation.ok:
        raise ValueError(f"not a basis: {validation.message}")
    canonical = fp.rewrite(w)
    images = {
        i + 1: e for i, e in enumerate(validation.letter_expressions)
    }
    return expr_substitute(canonical, images)


# --- full pipeline ---


@dataclass(frozen=True)
class KernelRealization:
    pres: GraphProductPresentation
    table: CosetTable
    schreier: SchreierData
    fp: FreePresentation


def realize_kernel(
    K: SimplicialComplex,
    groups: Sequence,
    coset_bound: int = DEFAULT_COSET_BOUND,
    tietze_budget: int = DEFAULT_TIETZE_BUDGET,
) -> KernelRealization:
    """End-to-end: presentation, coset table, Schreier generators, free
    presentation.  Refuses non-chordal or non-flag complexes up front and
    cross-checks the resulting rank against the fiber Euler characteristic.
    """
    if not is_flag(K):
        raise ValueError("rank via Euler characteristic requires a flag complex")
    ok, cert = is_chordal(K)
    if not ok:
        raise ValueError(f"kernel not free: chordless cycle {tuple(cert[1])}")
    pres = build_graph_product(groups, (tuple(sorted(e)) for e in K.edges()))
    table = build_coset_table(pres, bound=coset_bound)
    data = schreier(table)
    expected = table.size * len(pres.generators) - table.size + 1
    if len(data.gens) != expected:
        raise RuntimeError(
            f"Schreier generator count {len(data.gens)} != {expected}"
        )
    try:
        fp = tietze_simplify(data, budget=tietze_budget)
    except RuntimeError as err:
        chordal_now, cert = is_chordal(K)
        if not chordal_now:
            raise ValueError(
                f"kernel not free: chordless cycle {tuple(cert[1])}"
            ) from err
        raise
    rho = rank_rho(K, [g.order for g in groups], method="euler")
    if fp.rank != rho:
        raise RuntimeError(
            f"simplified rank {fp.rank} != expected rank {rho}"
        )
    return KernelRealization(pres, table, data, fp)
