import pytest
from hypothesis import given, settings, strategies as st

from graphprod.zlinalg import (
    BudgetExceeded,
    IntMatrix,
    determinant,
    mat_inverse_unimodular,
    mat_mul,
    matrix_group_elements,
    matrix_group_order,
    smith_normal_form,
    smith_normal_form_extended,
)

from reference_values import (
    EDGELESS3_MATRICES,
    GL3_V,
    GL3_W,
    GL3_X,
    GL3_Y,
)


def M(rows):
    return IntMatrix(rows)


small_entries = st.integers(min_value=-9, max_value=9)


def matrices(rows, cols):
    return st.lists(
        st.lists(small_entries, min_size=cols, max_size=cols),
        min_size=rows,
        max_size=rows,
    ).map(IntMatrix)


class TestMatMul:
    def test_identity_times_identity(self):
        i3 = IntMatrix.identity(3)
        assert mat_mul(i3, i3) == i3

    def test_order_two_image(self):
        x = M(EDGELESS3_MATRICES["a"])
        assert mat_mul(x, x) == IntMatrix.identity(5)

    def test_swap_involution(self):
        s = M([[0, 1], [1, 0]])
        assert mat_mul(s, s) == IntMatrix.identity(2)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mat_mul(IntMatrix.identity(2), IntMatrix.identity(3))

    def test_huge_entries_stay_exact(self):
        big = 10**30
        a = M([[big, 0], [0, big]])
        b = M([[big, 1], [1, big]])
        p = mat_mul(a, b)
        assert p.entries[0][0] == big * big
        assert p.entries[0][1] == big

    @given(matrices(3, 4), matrices(4, 2), matrices(2, 5))
    @settings(max_examples=60)
    def test_associative(self, a, b, c):
        assert mat_mul(mat_mul(a, b), c) == mat_mul(a, mat_mul(b, c))

    @given(matrices(3, 3))
    @settings(max_examples=30)
    def test_identity_neutral(self, a):
        i3 = IntMatrix.identity(3)
        assert mat_mul(a, i3) == a
        assert mat_mul(i3, a) == a


class TestDeterminant:
    def test_identity(self):
        assert determinant(IntMatrix.identity(4)) == 1

    def test_reference_matrices_are_special_linear(self):
        for rows in EDGELESS3_MATRICES.values():
            assert determinant(M(rows)) == 1

    def test_diagonal_reflection(self):
        assert determinant(M(GL3_W)) == -1

    def test_singular(self):
        assert determinant(M([[1, 2], [2, 4]])) == 0

    def test_empty(self):
        assert determinant(IntMatrix((), cols=0)) == 1

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            determinant(IntMatrix.zeros(2, 3))

    @given(matrices(3, 3), matrices(3, 3))
    @settings(max_examples=60)
    def test_multiplicative(self, a, b):
        assert determinant(mat_mul(a, b)) == determinant(a) * determinant(b)


def check_snf(m):
    d, left, right = smith_normal_form(m)
    assert determinant(left) in (1, -1)
    assert determinant(right) in (1, -1)
    prod = mat_mul(mat_mul(left, m), right)
    for i in range(m.rows):
        for j in range(m.cols):
            want = d[i] if i == j and i < len(d) else 0
            assert prod.entries[i][j] == want
    for i in range(len(d) - 1):
        if d[i] == 0:
            assert d[i + 1] == 0
        else:
            assert d[i + 1] % d[i] == 0
    assert all(x >= 0 for x in d)
    return d


class TestSmithNormalForm:
    def test_zero_matrix(self):
        d, left, right = smith_normal_form(IntMatrix.zeros(3, 2))
        assert d == (0, 0)
        assert left == IntMatrix.identity(3)
        assert right == IntMatrix.identity(2)

    def test_two_three(self):
        d = check_snf(M([[2, 0], [0, 3]]))
        assert d == (1, 6)

    def test_identity(self):
        d, _, _ = smith_normal_form(IntMatrix.identity(3))
        assert d == (1, 1, 1)

    def test_extended_inverses(self):
        m = M([[4, 6, 2], [2, 8, 10]])
        res = smith_normal_form_extended(m)
        assert mat_mul(res.left, res.left_inv) == IntMatrix.identity(2)
        assert mat_mul(res.right, res.right_inv) == IntMatrix.identity(3)

    @given(matrices(3, 4))
    @settings(max_examples=60, deadline=None)
    def test_reconstruction_and_chain(self, m):
        check_snf(m)

    @given(matrices(4, 3))
    @settings(max_examples=40, deadline=None)
    def test_extended_consistent(self, m):
        res = smith_normal_form_extended(m)
        n = mat_mul(mat_mul(res.left_inv, _diag(res.diagonal, 4, 3)), res.right_inv)
        assert n == m


def _diag(d, rows, cols):
    return IntMatrix(
        tuple(
            tuple(d[i] if i == j and i < len(d) else 0 for j in range(cols))
            for i in range(rows)
        ),
        cols=cols,
    )


class TestInverse:
    def test_round_trip(self):
        m = M([[2, 1], [1, 1]])
        inv = mat_inverse_unimodular(m)
        assert mat_mul(m, inv) == IntMatrix.identity(2)
        assert mat_mul(inv, m) == IntMatrix.identity(2)

    def test_rejects_non_unimodular(self):
        with pytest.raises(ValueError):
            mat_inverse_unimodular(M([[2, 0], [0, 1]]))


class TestMatrixGroupOrder:
    def test_trivial(self):
        assert matrix_group_order([IntMatrix.identity(3)]) == 1

    def test_signed_permutations(self):
        gens = [M(GL3_X), M(GL3_Y), M(GL3_W)]
        assert matrix_group_order(gens) == 48

    def test_order_six_cyclic(self):
        assert matrix_group_order([M(GL3_V)]) == 6

    def test_reference_image_order(self):
        gens = [M(rows) for rows in EDGELESS3_MATRICES.values()]
        assert matrix_group_order(gens) == 8

    def test_budget_exceeded_signals(self):
        shear = M([[1, 1], [0, 1]])
        with pytest.raises(BudgetExceeded):
            matrix_group_order([shear], budget=100)

    def test_elements_contains_identity_first(self):
        els = matrix_group_elements([M(GL3_V)])
        assert els[0] == IntMatrix.identity(3)
        assert len(els) == 6

    def test_rejects_non_invertible(self):
        with pytest.raises(ValueError):
            matrix_group_order([M([[2, 0], [0, 1]])])

    @given(st.permutations(range(3)), st.lists(st.booleans(), min_size=3, max_size=3))
    @settings(max_examples=20, deadline=None)
    def test_invariance_under_permutation_and_inversion(self, perm, flips):
        base = [M(GL3_X), M(GL3_Y), M(GL3_W)]
        gens = [base[i] for i in perm]
        gens = [mat_inverse_unimodular(g) if f else g for g, f in zip(gens, flips)]
        assert matrix_group_order(gens) == 48
