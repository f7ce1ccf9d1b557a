"""Monodromy: automorphisms, matrices, faithfulness, homology oracle."""

import math
import random

import pytest

from det_character import predicted_determinants
from graphprod.cli import format_expr, parse_word
from graphprod.finitegroup import abelian, cyclic, permutation_group, symmetric
from graphprod.kernel import realize_kernel, validate_basis
from graphprod.monodromy import (
    FreeAutomorphism,
    MonodromyRep,
    autK_equivariance,
    build_monodromy,
    conjugation_action,
    h1_image_check,
    homology_monodromy,
    homology_trace_check,
    ia_check,
    phi_matrices,
    sl_gl_classify,
    theta,
    verify_faithful,
)
from graphprod.presentation import (
    Letter,
    build_graph_product,
    product_elements,
    word_mul,
)
from graphprod.simplicial import (
    SimplicialComplex,
    VertexPermutation,
    clique_complex,
    from_facets,
    is_chordal,
)
from graphprod.zlinalg import IntMatrix, mat_mul
from reference_values import (
    EDGELESS3_BASIS_WORDS,
    EDGELESS3_MATRICES,
    EDGELESS3_TABLES,
    PATH4_BASIS_WORDS,
    PATH4_MATRICES,
    PATH4_MATRIX_BY_GENERATOR,
    PATH4_TABLES,
)

A5_GENS = [[2, 3, 1, 4, 5], [2, 3, 4, 5, 1]]


@pytest.fixture(scope="module")
def e3():
    K = from_facets(3, [])
    groups = [cyclic(2)] * 3
    real = realize_kernel(K, groups)
    basis = [parse_word(s, real.pres) for s in EDGELESS3_BASIS_WORDS]
    rep = build_monodromy(K, groups, basis=basis, realization=real)
    return real, basis, rep


@pytest.fixture(scope="module")
def p4():
    K = from_facets(4, [{1, 2}, {2, 3}, {3, 4}])
    groups = [cyclic(2)] * 4
    real = realize_kernel(K, groups)
    basis = [parse_word(s, real.pres) for s in PATH4_BASIS_WORDS]
    rep = build_monodromy(K, groups, basis=basis, realization=real)
    return real, basis, rep


class TestConjugationAction:
    def test_edgeless3_tables_match(self, e3):
        real, basis, rep = e3
        val = validate_basis(basis, real.fp)
        for name, expected in EDGELESS3_TABLES.items():
            g = parse_word(name, real.pres)[0]
            aut = conjugation_action(g, basis, real.fp, val)
            assert [format_expr(im) for im in aut.images] == expected

    def test_path4_tables_match(self, p4):
        real, basis, rep = p4
        val = validate_basis(basis, real.fp)
        for name, expected in PATH4_TABLES.items():
            g = parse_word(name, real.pres)[0]
            aut = conjugation_action(g, basis, real.fp, val)
            assert [format_expr(im) for im in aut.images] == expected

    def test_dominating_vertex_acts_trivially(self):
        # center of a 3-vertex star commutes with everything in the product
        K = from_facets(3, [{1, 2}, {1, 3}])
        groups = [cyclic(2)] * 3
        real = realize_kernel(K, groups)
        basis = list(real.fp.basis_words)
        aut = conjugation_action(Letter(1, 1, 1), basis, real.fp)
        assert aut.is_identity()


class TestTheta:
    def test_empty_word_is_identity(self, e3):
        real, basis, _ = e3
        assert theta((), basis, real.fp).is_identity()

    def test_involution_squares_to_identity(self, e3):
        real, basis, _ = e3
        a = parse_word("a a", real.pres)
        assert theta(a, basis, real.fp).is_identity()

    def test_kernel_word_gives_inner_automorphism(self, e3):
        real, basis, _ = e3
        aut = theta(basis[0], basis, real.fp)
        assert not aut.is_identity()
        # inner automorphisms die on homology
        assert aut.matrix().is_identity()
        # x_k |-> x_1 x_k x_1^-1
        val = validate_basis(basis, real.fp)
        for k, im in enumerate(aut.images, start=1):
            expected = ((1, 1), (k, 1), (1, -1)) if k != 1 else ((1, 1),)
            assert im == expected

    def test_composition_law(self, e3):
        real, basis, _ = e3
        val = validate_basis(basis, real.fp)
        rng = random.Random(5)
        letters = real.pres.generators
        for _ in range(10):
            u = tuple(rng.choice(letters) for _ in range(rng.randrange(0, 4)))
            v = tuple(rng.choice(letters) for _ in range(rng.randrange(0, 4)))
            lhs = theta(u + v, basis, real.fp, val)
            rhs = theta(u, basis, real.fp, val).compose(theta(v, basis, real.fp, val))
            assert lhs == rhs


class TestPhiMatrices:
    def test_edgeless3_matrices_exact(self, e3):
        real, basis, rep = e3
        for name, mat in EDGELESS3_MATRICES.items():
            g = parse_word(name, real.pres)[0]
            assert rep.matrix_of(g) == IntMatrix(mat)

    def test_path4_matrices_exact(self, p4):
        real, basis, rep = p4
        for name, key in PATH4_MATRIX_BY_GENERATOR.items():
            g = parse_word(name, real.pres)[0]
            assert rep.matrix_of(g) == IntMatrix(PATH4_MATRICES[key])

    def test_identity_automorphism_gives_identity_matrix(self):
        aut = FreeAutomorphism.identity(4)
        assert aut.matrix().is_identity()

    def test_anti_homomorphism_law(self, p4):
        real, basis, rep = p4
        val = validate_basis(basis, real.fp)
        rng = random.Random(11)
        letters = real.pres.generators
        for _ in range(8):
            u = tuple(rng.choice(letters) for _ in range(rng.randrange(0, 3)))
            v = tuple(rng.choice(letters) for _ in range(rng.randrange(0, 3)))
            mu = theta(u, basis, real.fp, val).matrix()
            mv = theta(v, basis, real.fp, val).matrix()
            muv = theta(u + v, basis, real.fp, val).matrix()
            assert muv == mat_mul(mv, mu)
            assert muv.transpose() == mat_mul(mu.transpose(), mv.transpose())

    def test_involution_matrices_square_to_identity(self, e3):
        real, basis, rep = e3
        for m in rep.matrices:
            assert mat_mul(m, m).is_identity()


class TestVerifyFaithful:
    def test_edgeless3_order_8(self, e3):
        rep = e3[2]
        report = verify_faithful(rep)
        assert report.faithful
        assert report.image_order == 8 == report.expected_order
        assert ia_check(rep)

    def test_path4_order_16(self, p4):
        rep = p4[2]
        report = verify_faithful(rep)
        assert report.faithful
        assert report.image_order == 16
        assert ia_check(rep)

    def test_dominating_vertex_breaks_faithfulness(self):
        K = from_facets(3, [{1, 2}, {1, 3}])
        rep = build_monodromy(K, [cyclic(2)] * 3)
        report = verify_faithful(rep)
        assert not report.faithful
        assert report.image_order < report.expected_order == 8
        assert report.witness is not None
        assert any(report.witness)
        assert rep.element_matrix(report.witness).is_identity()
        assert not ia_check(rep)

    def test_all_identity_rep_rejected(self, e3):
        real, basis, rep = e3
        fake = MonodromyRep(
            rep.pres,
            rep.basis,
            rep.generators,
            None,
            tuple(IntMatrix.identity(5) for _ in rep.matrices),
        )
        report = verify_faithful(fake)
        assert not report.faithful
        assert report.witness == product_elements(rep.pres)[1]


class TestSlGlClassify:
    def test_abelian_instances_land_in_sl(self, e3, p4):
        for rep in (e3[2], p4[2]):
            report = sl_gl_classify(rep)
            assert report.overall == "SL"
            assert all(d == 1 for _, d in report.determinants)

    def test_nonabelian_vertex_group_reported(self):
        # only unimodularity is promised here; SL membership is reported,
        # not asserted either way
        K = from_facets(3, [{1, 2}])
        rep = build_monodromy(K, [symmetric(3), cyclic(2), cyclic(3)])
        report = sl_gl_classify(rep)
        assert len(report.determinants) == len(rep.generators)
        assert all(d in (1, -1) for _, d in report.determinants)
        expected = "SL" if all(d == 1 for _, d in report.determinants) else "GL-only"
        assert report.overall == expected


class TestHomologyOracle:
    def test_single_vertex_rank_zero(self):
        pres = build_graph_product([cyclic(2)], [])
        from graphprod.kernel import build_coset_table

        rep = homology_monodromy(pres, build_coset_table(pres), expected_rank=0)
        assert rep.rank == 0

    def test_two_involutions_deck_is_minus_one(self):
        pres = build_graph_product([cyclic(2), cyclic(2)], [])
        from graphprod.kernel import build_coset_table

        rep = homology_monodromy(pres, build_coset_table(pres), expected_rank=1)
        assert rep.rank == 1
        for m in rep.matrices:
            assert m == IntMatrix([[-1]])

    def test_wrong_expected_rank_raises(self):
        pres = build_graph_product([cyclic(2), cyclic(2)], [])
        from graphprod.kernel import build_coset_table

        with pytest.raises(RuntimeError, match="rank"):
            homology_monodromy(pres, build_coset_table(pres), expected_rank=4)

    @pytest.mark.parametrize(
        "fixture_name,expected_rank,order",
        [("e3", 5, 8), ("p4", 5, 16)],
    )
    def test_traces_match_word_route(self, request, fixture_name, expected_rank, order):
        real, basis, rep = request.getfixturevalue(fixture_name)
        report = homology_trace_check(rep, real.table)
        assert report.all_match
        assert report.h1_rank == expected_rank
        assert report.checked == order
        assert report.mismatches == ()

    def test_traces_match_mixed_orders(self):
        K = from_facets(3, [])
        groups = [cyclic(2), cyclic(2), cyclic(3)]
        real = realize_kernel(K, groups)
        rep = build_monodromy(K, groups, realization=real)
        report = homology_trace_check(rep, real.table)
        assert report.all_match
        assert report.h1_rank == 9
        assert report.checked == 12


class TestH1Image:
    def test_edgeless3_not_surjective(self, e3):
        real, basis, rep = e3
        report = h1_image_check(real.pres, real.fp)
        assert report.target_factors == ((2,), (2,), (2,))
        assert report.image_trivial
        assert not report.surjective
        assert not report.degenerate

    def test_mixed_instance_not_surjective(self):
        K = from_facets(3, [{1, 2}])
        real = realize_kernel(K, [symmetric(3), cyclic(2), cyclic(3)])
        report = h1_image_check(real.pres, real.fp)
        assert report.target_factors == ((2,), (2,), (3,))
        assert report.image_trivial
        assert not report.surjective

    def test_perfect_vertex_group_degenerate(self):
        # a perfect vertex group abelianizes to nothing, so the target is
        # trivial; only the presentation and the basis words matter here
        from graphprod.kernel import FreePresentation

        A5 = permutation_group(5, A5_GENS)
        pres = build_graph_product([A5], [])
        fp = FreePresentation(0, (), (), None, {})
        report = h1_image_check(pres, fp)
        assert report.target_factors == ((),)
        assert report.surjective
        assert report.degenerate


class TestAutKEquivariance:
    def test_identity_permutation(self):
        K = from_facets(3, [])
        sigma = VertexPermutation((1, 2, 3))
        assert autK_equivariance(K, [cyclic(2)] * 3, sigma)

    def test_path_reversal(self):
        K = from_facets(4, [{1, 2}, {2, 3}, {3, 4}])
        sigma = VertexPermutation((4, 3, 2, 1))
        assert autK_equivariance(K, [cyclic(2)] * 4, sigma)

    def test_edgeless_cycle_permutation(self):
        K = from_facets(3, [])
        sigma = VertexPermutation((2, 3, 1))
        assert autK_equivariance(K, [cyclic(2)] * 3, sigma)

    def test_rejects_non_automorphism(self):
        K = from_facets(4, [{1, 2}, {2, 3}, {3, 4}])
        sigma = VertexPermutation((2, 1, 3, 4))
        with pytest.raises(ValueError, match="not an automorphism"):
            autK_equivariance(K, [cyclic(2)] * 4, sigma)

    def test_rejects_mismatched_groups(self):
        K = from_facets(3, [])
        sigma = VertexPermutation((3, 2, 1))
        with pytest.raises(ValueError, match="differ"):
            autK_equivariance(K, [cyclic(2), cyclic(2), cyclic(3)], sigma)


class TestDeterminantCharacter:
    """Every generator determinant must match the translation-sign and
    link-Euler-characteristic prediction of det_character, which touches
    neither presentations nor matrices."""

    def check(self, K, groups):
        rep = build_monodromy(K, groups)
        computed = dict(sl_gl_classify(rep).determinants)
        assert computed == predicted_determinants(K, groups)
        return computed

    def test_point_next_to_edge_escapes_special_linear(self):
        # lone involution acts by -1 on each of the 7 tensor lines
        K = from_facets(3, [[2, 3]])
        computed = self.check(K, [cyclic(2), cyclic(2), cyclic(4)])
        assert computed == {"a": -1, "b": 1, "c": 1, "c2": 1, "c3": 1}

    def test_odd_group_next_to_edge(self):
        K = from_facets(3, [[1, 2]])
        computed = self.check(K, [cyclic(3), cyclic(2), cyclic(4)])
        assert computed == {"a": 1, "a2": 1, "b": -1, "c": -1, "c2": 1, "c3": -1}

    def test_dominated_path_signs(self):
        K = from_facets(3, [[1, 2], [2, 3]])
        computed = self.check(K, [cyclic(2)] * 3)
        assert computed == {"a": -1, "b": 1, "c": -1}

    def test_reference_instances_stay_special_linear(self):
        for K, groups in (
            (from_facets(3, []), [cyclic(2)] * 3),
            (from_facets(4, [{1, 2}, {2, 3}, {3, 4}]), [cyclic(2)] * 4),
        ):
            computed = self.check(K, groups)
            assert set(computed.values()) == {1}

    def test_klein_vertex_never_contributes_sign(self):
        # order 4 with exponent 2 has no element moving an odd count
        K = from_facets(3, [[2, 3]])
        computed = self.check(K, [abelian([2, 2]), cyclic(2), cyclic(4)])
        assert set(computed.values()) == {1}

    def test_symmetric_vertex_prediction(self):
        K = from_facets(3, [[1, 2]])
        computed = self.check(K, [symmetric(3), cyclic(2), cyclic(3)])
        assert set(computed.values()) == {1}

    def test_random_instances_match(self):
        rng = random.Random(4099)
        done = 0
        while done < 6:
            n = rng.randint(1, 4)
            edges = set()
            for u in range(1, n + 1):
                for w in range(u + 1, n + 1):
                    if rng.random() < 0.4:
                        edges.add(frozenset((u, w)))
            K = clique_complex(SimplicialComplex(n, edges))
            ok, _ = is_chordal(K)
            if not ok:
                continue
            orders = [rng.choice([2, 2, 3, 4]) for _ in range(n)]
            if math.prod(orders) > 36:
                continue
            self.check(K, [cyclic(m) for m in orders])
            done += 1
