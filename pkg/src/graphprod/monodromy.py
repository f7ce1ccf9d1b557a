"""Conjugation monodromy of the free kernel.

Vertex-group elements act on the kernel by conjugation.  That action is
materialized twice: as free-group automorphisms (image word per basis
letter) and, after abelianizing, as integer matrices in row convention
(entry [i][j] = exponent sum of basis letter j in the image of letter i).
Under row convention the matrix map is an anti-homomorphism; the transposed
family is a genuine homomorphism.  An independent homological route builds
the chain complex of the finite cover and reads the deck action off H1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .finitegroup import FiniteGroup, abelianization
from .kernel import (
    BasisValidation,
    CosetTable,
    Expr,
    FreePresentation,
    KernelRealization,
    build_coset_table,
    expr_substitute,
    realize_kernel,
    rewrite_in_basis,
    validate_basis,
    validate_expr_basis,
    DEFAULT_COSET_BOUND,
    DEFAULT_TIETZE_BUDGET,
)
from .presentation import (
    GraphProductPresentation,
    Letter,
    ProductElement,
    Word,
    commutator_basis,
    product_elements,
    product_mul,
    word_mul,
)
from .simplicial import SimplicialComplex, VertexPermutation
from .zlinalg import (
    DEFAULT_CLOSURE_BUDGET,
    IntMatrix,
    determinant,
    mat_inverse_unimodular,
    mat_mul,
    matrix_group_order,
    smith_normal_form_extended,
)

ROW_CONVENTION = "rows-are-images"
DECK_CONVENTION = "homology-deck"


def exponent_vector(e: Expr, rank: int) -> tuple[int, ...]:
    row = [0] * rank
    for sym, sign in e:
        row[sym - 1] += sign
    return tuple(row)


@dataclass(frozen=True)
class FreeAutomorphism:
    """Automorphism of the free kernel, one image word per basis letter."""

    rank: int
    images: tuple[Expr, ...]

    @classmethod
    def identity(cls, rank: int) -> "FreeAutomorphism":
        return cls(rank, tuple(((i, 1),) for i in range(1, rank + 1)))

    def is_identity(self) -> bool:
        return all(im == ((i + 1, 1),) for i, im in enumerate(self.images))

    def apply_expr(self, e: Expr) -> Expr:
        return expr_substitute(e, {i + 1: im for i, im in enumerate(self.images)})

    def compose(self, other: "FreeAutomorphism") -> "FreeAutomorphism":
        """self after other: x  |->  self(other(x))."""
        return FreeAutomorphism(
            self.rank, tuple(self.apply_expr(im) for im in other.images)
        )

    def matrix(self) -> IntMatrix:
        if self.rank == 0:
            return IntMatrix((), cols=0)
        return IntMatrix([exponent_vector(im, self.rank) for im in self.images])


def conjugation_action(
    g: Letter,
    basis: Sequence[Word],
    fp: FreePresentation,
    validation: BasisValidation | None = None,
    check: bool = True,
) -> FreeAutomorphism:
    """x_k  |->  g x_k g^-1, written over the given basis."""
    if validation is None:
        validation = validate_basis(basis, fp)
    images = []
    for b in basis:
        w = word_mul((g,), b, (g.inverse(),))
        images.append(rewrite_in_basis(w, basis, fp, validation))
    aut = FreeAutomorphism(len(basis), tuple(images))
    if check and not validate_expr_basis(images, len(basis)).ok:
        raise RuntimeError(f"conjugation by {g} did not yield an automorphism")
    return aut


def theta(
    w: Word,
    basis: Sequence[Word],
    fp: FreePresentation,
    validation: BasisValidation | None = None,
) -> FreeAutomorphism:
    """Composite conjugation action of a word; theta(uv) = theta(u) o theta(v)."""
    if validation is None:
        validation = validate_basis(basis, fp)
    aut = FreeAutomorphism.identity(len(basis))
    for letter in reversed(w):
        aut = conjugation_action(letter, basis, fp, validation, check=False).compose(aut)
    return aut


@dataclass(frozen=True)
class MonodromyRep:
    """Per-generator automorphisms (word route only) and matrices, plus the
    basis and convention they are written in."""

    pres: GraphProductPresentation
    basis: tuple[Word, ...]
    generators: tuple[Letter, ...]
    automorphisms: tuple[FreeAutomorphism, ...] | None
    matrices: tuple[IntMatrix, ...]
    convention: str = ROW_CONVENTION

    @property
    def rank(self) -> int:
        if self.matrices:
            return self.matrices[0].rows
        return len(self.basis)

    def generator_names(self) -> list[str]:
        from .presentation import generator_name

        return [generator_name(g.vertex, g.element, self.pres.n) for g in self.generators]

    def matrix_of(self, letter: Letter) -> IntMatrix:
        k = self.generators.index(Letter(letter.vertex, letter.element, 1))
        m = self.matrices[k]
        return m if letter.sign > 0 else mat_inverse_unimodular(m)

    def transposed(self) -> tuple[IntMatrix, ...]:
        """The homomorphism family: transposing flips the anti-homomorphism
        of the row convention."""
        return tuple(m.transpose() for m in self.matrices)

    def element_matrix(self, p: ProductElement) -> IntMatrix:
        """Matrix of any direct-product element, letters taken in vertex
        order; row convention composes in reverse."""
        rank = self.rank
        m = IntMatrix.identity(rank) if rank else IntMatrix((), cols=0)
        for v, x in enumerate(p, start=1):
            if x != 0:
                m = mat_mul(self.matrix_of(Letter(v, x, 1)), m)
        return m


def phi_matrices(
    pres: GraphProductPresentation,
    basis: Sequence[Word],
    generators: Sequence[Letter],
    automorphisms: Sequence[FreeAutomorphism],
) -> MonodromyRep:
    """Materialize the automorphisms as exponent-sum matrices (row
    convention) and check unimodularity."""
    mats = []
    for aut in automorphisms:
        m = aut.matrix()
        if m.rows and determinant(m) not in (1, -1):
            raise RuntimeError("monodromy matrix is not unimodular")
        mats.append(m)
    return MonodromyRep(
        pres, tuple(basis), tuple(generators), tuple(automorphisms), tuple(mats)
    )


def build_monodromy(
    K: SimplicialComplex,
    groups: Sequence[FiniteGroup],
    basis: Sequence[Word] | None = None,
    basis_rule: str = "example-matching",
    coset_bound: int = DEFAULT_COSET_BOUND,
    tietze_budget: int = DEFAULT_TIETZE_BUDGET,
    realization: KernelRealization | None = None,
) -> MonodromyRep:
    """Full word route: realize the kernel, pick the commutator basis unless
    one is supplied, and compute the action of every generator."""
    real = realization or realize_kernel(K, groups, coset_bound, tietze_budget)
    if basis is None:
        basis = commutator_basis(K, groups, basis_rule=basis_rule)
    basis = list(basis)
    val = validate_basis(basis, real.fp)
    if not val.ok:
        raise ValueError(f"not a basis: {val.message}")
    auts = [
        conjugation_action(g, basis, real.fp, val, check=True)
        for g in real.pres.generators
    ]
    return phi_matrices(real.pres, basis, real.pres.generators, auts)


# --- faithfulness and classification ---


@dataclass(frozen=True)
class FaithfulnessReport:
    faithful: bool
    image_order: int
    expected_order: int
    witness: ProductElement | None


def verify_faithful(
    rep: MonodromyRep, budget: int = DEFAULT_CLOSURE_BUDGET
) -> FaithfulnessReport:
    """Image order equals the direct-product order iff the materialized
    representation is faithful; a smaller image yields a witness element."""
    expected = rep.pres.product_order()
    order = matrix_group_order(list(rep.matrices), budget=budget)
    if order == expected:
        return FaithfulnessReport(True, order, expected, None)
    witness = None
    for p in product_elements(rep.pres)[1:]:
        if rep.element_matrix(p).is_identity():
            witness = p
            break
    return FaithfulnessReport(False, order, expected, witness)


@dataclass(frozen=True)
class SLGLReport:
    determinants: tuple[tuple[str, int], ...]
    overall: str  # "SL" or "GL-only"


def sl_gl_classify(rep: MonodromyRep) -> SLGLReport:
    names = rep.generator_names()
    dets = tuple(
        (name, determinant(m) if m.rows else 1)
        for name, m in zip(names, rep.matrices)
    )
    overall = "SL" if all(d == 1 for _, d in dets) else "GL-only"
    return SLGLReport(dets, overall)


def ia_check(rep: MonodromyRep, budget: int = DEFAULT_CLOSURE_BUDGET) -> bool:
    """True iff no nontrivial product element acts trivially on H1 of the
    kernel, i.e. the image meets the IA subgroup only in the identity."""
    return verify_faithful(rep, budget=budget).faithful


# --- independent homological route ---


class _H1Chart:
    """H1 of the finite cover's presentation 2-complex, with coordinates.

    Cells: C2 = relators x cosets, C1 = generators x cosets, C0 = cosets.
    The chart keeps a basis of 1-cycles spanning the free part of H1 and a
    coordinate map, so any deck permutation of cells induces a matrix.
    """

    def __init__(self, pres: GraphProductPresentation, table: CosetTable):
        self.pres = pres
        self.table = table
        n_gens = len(pres.generators)
        size = table.size
        self.n_cells1 = n_gens * size

        def cell1(gen: int, coset: int) -> int:
            return gen * size + coset

        self.cell1 = cell1
        # boundary of 1-cells: d1[cell] = (target coset, source coset)
        d1 = [[0] * self.n_cells1 for _ in range(size)]
        for k in range(n_gens):
            for c in range(size):
                d = table.forward[c][k]
                j = cell1(k, c)
                d1[d][j] += 1
                d1[c][j] -= 1
        # boundary of 2-cells: walk each relator from each coset
        cols: list[list[int]] = []
        gen_index = {g: k for k, g in enumerate(pres.generators)}
        back = table._backward()
        for r in pres.relators:
            for c in range(size):
                col = [0] * self.n_cells1
                at = c
                for letter in r:
                    k = gen_index[Letter(letter.vertex, letter.element, 1)]
                    if letter.sign > 0:
                        col[cell1(k, at)] += 1
                        at = table.forward[at][k]
                    else:
                        at = back[at][k]
                        col[cell1(k, at)] -= 1
                if at != c:
                    raise RuntimeError("relator walk did not close")
                cols.append(col)
        D1 = IntMatrix(d1) if d1 else IntMatrix((), cols=self.n_cells1)
        D2 = IntMatrix([[col[i] for col in cols] for i in range(self.n_cells1)])

        snf1 = smith_normal_form_extended(D1)
        diag1 = list(snf1.diagonal) + [0] * (self.n_cells1 - len(snf1.diagonal))
        self.ker_idx = [i for i in range(self.n_cells1) if diag1[i] == 0]
        self.right1 = snf1.right
        self.right1_inv = snf1.right_inv
        k = len(self.ker_idx)
        # D1.D2 = 0 forces the non-kernel coordinates of every 2-boundary
        # to vanish exactly
        coords = mat_mul(self.right1_inv, D2)
        for i in range(self.n_cells1):
            if diag1[i] != 0 and any(coords.entries[i]):
                raise RuntimeError("2-boundary is not a 1-cycle")
        Q = IntMatrix(
            [coords.entries[i] for i in self.ker_idx] or (),
            cols=coords.cols,
        )
        snf2 = smith_normal_form_extended(Q)
        diag2 = list(snf2.diagonal) + [0] * (k - len(snf2.diagonal))
        torsion = [d for d in diag2 if d > 1]
        if torsion:
            raise RuntimeError(f"H1 has torsion {torsion}")
        self.free_idx = [i for i in range(k) if diag2[i] == 0]
        self.rank = len(self.free_idx)
        self.left2 = snf2.left
        left2_inv = snf2.left_inv
        # representative cycles: columns of Kmat . left2_inv at free indices
        self.reps: list[tuple[int, ...]] = []
        for j in self.free_idx:
            y = [left2_inv.entries[i][j] for i in range(k)]
            v = [0] * self.n_cells1
            for yi, idx in zip(y, self.ker_idx):
                if yi:
                    col = [self.right1.entries[r][idx] for r in range(self.n_cells1)]
                    for r in range(self.n_cells1):
                        v[r] += yi * col[r]
            self.reps.append(tuple(v))

    def coords(self, v: Sequence[int]) -> tuple[int, ...]:
        """H1 coordinates of a 1-cycle."""
        y = [
            sum(self.right1_inv.entries[i][r] * v[r] for r in range(self.n_cells1))
            for i in range(self.n_cells1)
        ]
        yk = [y[i] for i in self.ker_idx]
        z = [
            sum(self.left2.entries[i][j] * yk[j] for j in range(len(yk)))
            for i in range(len(yk))
        ]
        return tuple(z[i] for i in self.free_idx)

    def deck_matrix(self, p: ProductElement) -> IntMatrix:
        """Matrix (row convention) of the deck permutation induced by p."""
        size = self.table.size
        if not hasattr(self, "_elem_index"):
            self._elem_index = {q: i for i, q in enumerate(self.table.elements)}
        perm = [
            self._elem_index[product_mul(self.pres, p, q)]
            for q in self.table.elements
        ]
        rows = []
        for v in self.reps:
            moved = [0] * self.n_cells1
            for k in range(self.n_cells1 // size if size else 0):
                for c in range(size):
                    val = v[k * size + c]
                    if val:
                        moved[k * size + perm[c]] += val
            rows.append(self.coords(moved))
        if not rows:
            return IntMatrix((), cols=0)
        return IntMatrix(rows)


def homology_monodromy(
    pres: GraphProductPresentation,
    table: CosetTable,
    expected_rank: int | None = None,
) -> MonodromyRep:
    """Deck action on H1 of the cover, one matrix per generator; fails if H1
    has torsion or (when given) unexpected rank."""
    chart = _H1Chart(pres, table)
    if expected_rank is not None and chart.rank != expected_rank:
        raise RuntimeError(f"H1 rank {chart.rank} != expected {expected_rank}")
    mats = []
    for g in pres.generators:
        p = [0] * pres.n
        p[g.vertex - 1] = g.element
        mats.append(chart.deck_matrix(tuple(p)))
    return MonodromyRep(
        pres, (), tuple(pres.generators), None, tuple(mats), DECK_CONVENTION
    )


@dataclass(frozen=True)
class TraceCheckReport:
    all_match: bool
    h1_rank: int
    checked: int
    mismatches: tuple[ProductElement, ...]


def homology_trace_check(
    rep: MonodromyRep, table: CosetTable | None = None
) -> TraceCheckReport:
    """Oracle: for every product element, the trace of the word-route matrix
    must equal the trace of the independently computed deck matrix."""
    if table is None:
        table = build_coset_table(rep.pres)
    chart = _H1Chart(rep.pres, table)
    mismatches = []
    checked = 0
    for p in product_elements(rep.pres):
        word_trace = rep.element_matrix(p).trace()
        deck_trace = chart.deck_matrix(p).trace()
        checked += 1
        if word_trace != deck_trace:
            mismatches.append(p)
    return TraceCheckReport(not mismatches, chart.rank, checked, tuple(mismatches))


# --- image in the homology of the total space ---


@dataclass(frozen=True)
class H1ImageReport:
    target_factors: tuple[tuple[int, ...], ...]
    image_trivial: bool
    surjective: bool
    degenerate: bool


def h1_image_check(pres: GraphProductPresentation, fp: FreePresentation) -> H1ImageReport:
    """Image of the kernel's H1 inside the direct sum of the vertex-group
    abelianizations.  Basis words are commutators, so the image is trivial;
    the map is onto only in the degenerate case of a trivial target."""
    factor_data = []
    for G in pres.groups:
        factors, coords = abelianization(G)
        factor_data.append((factors, coords))
    image_trivial = True
    for w in fp.basis_words:
        acc = [[0] * len(f) for f, _ in factor_data]
        for letter in w:
            G = pres.groups[letter.vertex - 1]
            e = letter.element if letter.sign > 0 else G.inv(letter.element)
            vec = factor_data[letter.vertex - 1][1][e]
            slot = acc[letter.vertex - 1]
            for i, x in enumerate(vec):
                slot[i] += x
        for (factors, _), slot in zip(factor_data, acc):
            for d, x in zip(factors, slot):
                if x % d != 0:
                    image_trivial = False
    target = tuple(tuple(f) for f, _ in factor_data)
    degenerate = all(not f for f in target)
    return H1ImageReport(target, image_trivial, degenerate, degenerate)


# --- equivariance under complex automorphisms ---


def autK_equivariance(
    K: SimplicialComplex,
    groups: Sequence[FiniteGroup],
    sigma: VertexPermutation,
    basis_rule: str = "example-matching",
) -> bool:
    """Feeding the sigma-permuted input through the pipeline yields the same
    representation up to the explicit change of basis: per-generator
    conjugacy plus trace equality over the whole direct product."""
    for f in K.faces:
        if frozenset(sigma(v) for v in f) not in K.faces:
            raise ValueError(f"{sigma} is not an automorphism of the complex")
    for v in range(1, K.n + 1):
        G, H = groups[v - 1], groups[sigma(v) - 1]
        if G.labels != H.labels or G.table != H.table:
            raise ValueError(f"groups at vertices {v} and {sigma(v)} differ")

    real = realize_kernel(K, groups)
    basis = list(commutator_basis(K, groups, basis_rule=basis_rule))
    val = validate_basis(basis, real.fp)
    rep = build_monodromy(K, groups, basis=basis, realization=real)

    inv = sigma.inverse()
    K_perm = SimplicialComplex(K.n, [frozenset(inv(v) for v in f) for f in K.faces])
    groups_perm = [groups[sigma(v) - 1] for v in range(1, K.n + 1)]
    rep_perm = build_monodromy(K_perm, groups_perm, basis_rule=basis_rule)

    relabeled = [
        tuple(Letter(sigma(l.vertex), l.element, l.sign) for l in w)
        for w in rep_perm.basis
    ]
    val2 = validate_basis(relabeled, real.fp)
    if not val2.ok:
        return False
    rank = len(basis)
    C = IntMatrix(
        [
            exponent_vector(rewrite_in_basis(w, basis, real.fp, val), rank)
            for w in relabeled
        ]
    )
    if determinant(C) not in (1, -1):
        return False
    C_inv = mat_inverse_unimodular(C)
    for g, m_perm in zip(rep_perm.generators, rep_perm.matrices):
        m_orig = rep.matrix_of(Letter(sigma(g.vertex), g.element, 1))
        if mat_mul(mat_mul(C_inv, m_perm), C) != m_orig:
            return False
    for p in product_elements(rep_perm.pres):
        q = [0] * K.n
        for v, x in enumerate(p, start=1):
            q[sigma(v) - 1] = x
        if rep_perm.element_matrix(p).trace() != rep.element_matrix(tuple(q)).trace():
            return False
    return True
