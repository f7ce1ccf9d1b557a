"""Exact integer linear algebra: matrix products, determinants, Smith normal
form, and breadth-first enumeration of finitely generated matrix groups.

Everything is arbitrary-precision; no floating point is used anywhere.  A
numpy int64 fast path is used for products only when a worst-case bound rules
out overflow.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

import numpy as np

DEFAULT_CLOSURE_BUDGET = 10**6

# Products whose entries provably fit under this bound go through numpy int64.
_INT64_SAFE = 2**62


class BudgetExceeded(RuntimeError):
    """A bounded enumeration hit its budget before completing."""


class IntMatrix:
    """Immutable integer matrix, row-major.

    Entries are plain Python ints.  A matrix with zero rows or columns is
    legal; the column count must then be supplied explicitly since it cannot
    be inferred from an empty entry list.
    """

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Iterable[Iterable[int]], cols: int | None = None):
        table = tuple(tuple(int(x) for x in row) for row in entries)
        if table:
            width = len(table[0])
            if any(len(row) != width for row in table):
                raise ValueError("ragged rows")
            if cols is not None and cols != width:
                raise ValueError("cols does not match row length")
        else:
            width = 0 if cols is None else cols
        object.__setattr__(self, "entries", table)
        object.__setattr__(self, "rows", len(table))
        object.__setattr__(self, "cols", width)

    def __setattr__(self, name, value):
        raise AttributeError("IntMatrix is immutable")

    @staticmethod
    def identity(n: int) -> "IntMatrix":
        return IntMatrix(
            tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)),
            cols=n,
        )

    @staticmethod
    def zeros(rows: int, cols: int) -> "IntMatrix":
        return IntMatrix(tuple((0,) * cols for _ in range(rows)), cols=cols)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_identity(self) -> bool:
        return self.is_square() and all(
            x == (1 if i == j else 0)
            for i, row in enumerate(self.entries)
            for j, x in enumerate(row)
        )

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.entries)) if self.entries else (), cols=self.rows)

    def trace(self) -> int:
        if not self.is_square():
            raise ValueError("trace of a non-square matrix")
        return sum(self.entries[i][i] for i in range(self.rows))

    def max_abs(self) -> int:
        return max((abs(x) for row in self.entries for x in row), default=0)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntMatrix)
            and self.cols == other.cols
            and self.entries == other.entries
        )

    def __hash__(self) -> int:
        return hash((self.cols, self.entries))

    def __repr__(self) -> str:
        return f"IntMatrix({[list(r) for r in self.entries]!r})"


def mat_mul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """Exact product a·b."""
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.rows}x{a.cols} times {b.rows}x{b.cols}")
    if a.rows == 0 or b.cols == 0 or a.cols == 0:
        return IntMatrix.zeros(a.rows, b.cols)
    # |product entry| <= inner * max|a| * max|b|; use int64 when that is safe.
    bound = a.cols * a.max_abs() * b.max_abs()
    if bound < _INT64_SAFE:
        prod = np.array(a.entries, dtype=np.int64) @ np.array(b.entries, dtype=np.int64)
        return IntMatrix(tuple(tuple(int(x) for x in row) for row in prod.tolist()))
    bt = tuple(zip(*b.entries))
    return IntMatrix(
        tuple(
            tuple(sum(x * y for x, y in zip(arow, bcol)) for bcol in bt)
            for arow in a.entries
        )
    )


def mat_vec(a: IntMatrix, v: Sequence[int]) -> tuple[int, ...]:
    """Exact matrix-vector product a·v."""
    if a.cols != len(v):
        raise ValueError("dimension mismatch")
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a.entries)


def determinant(m: IntMatrix) -> int:
    """Exact determinant by Bareiss fraction-free elimination."""
    if not m.is_square():
        raise ValueError("determinant of a non-square matrix")
    n = m.rows
    if n == 0:
        return 1
    a = [list(row) for row in m.entries]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                # Bareiss update: division by the previous pivot is exact.
                row_i[j] = (row_i[j] * pivot - aik * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


class SmithResult(NamedTuple):
    diagonal: tuple[int, ...]
    left: IntMatrix
    right: IntMatrix
    left_inv: IntMatrix
    right_inv: IntMatrix


def smith_normal_form(m: IntMatrix) -> tuple[tuple[int, ...], IntMatrix, IntMatrix]:
    """Smith normal form: (d, left, right) with left·m·right = diag(d).

    The diagonal is nonnegative with d[i] | d[i+1]; left and right are
    unimodular.
    """
    full = smith_normal_form_extended(m)
    return full.diagonal, full.left, full.right


def smith_normal_form_extended(m: IntMatrix) -> SmithResult:
    """Smith normal form together with the inverses of both transforms.

    Maintains a = left·m·right throughout, so m = left_inv·diag·right_inv.
    The inverses come for free by applying the inverse elementary operation
    to a parallel matrix at each step.
    """
    nr, nc = m.rows, m.cols
    a = [list(row) for row in m.entries]
    left = [[int(i == j) for j in range(nr)] for i in range(nr)]
    left_inv = [[int(i == j) for j in range(nr)] for i in range(nr)]
    right = [[int(i == j) for j in range(nc)] for i in range(nc)]
    right_inv = [[int(i == j) for j in range(nc)] for i in range(nc)]

    def swap_rows(i, k):
        a[i], a[k] = a[k], a[i]
        left[i], left[k] = left[k], left[i]
        for row in left_inv:
            row[i], row[k] = row[k], row[i]

    def swap_cols(j, l):
        for row in a:
            row[j], row[l] = row[l], row[j]
        for row in right:
            row[j], row[l] = row[l], row[j]
        right_inv[j], right_inv[l] = right_inv[l], right_inv[j]

    def add_row(i, k, q):
        # row_i += q * row_k
        if q == 0:
            return
        a[i] = [x + q * y for x, y in zip(a[i], a[k])]
        left[i] = [x + q * y for x, y in zip(left[i], left[k])]
        for row in left_inv:
            row[k] -= q * row[i]

    def add_col(j, l, q):
        # col_j += q * col_l
        if q == 0:
            return
        for row in a:
            row[j] += q * row[l]
        for row in right:
            row[j] += q * row[l]
        right_inv[l] = [x - q * y for x, y in zip(right_inv[l], right_inv[j])]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        left[i] = [-x for x in left[i]]
        for row in left_inv:
            row[i] = -row[i]

    def pivot_at_least(s):
        # Smallest nonzero absolute value in the trailing block, first
        # position on ties; deterministic.
        best = None
        for i in range(s, nr):
            row = a[i]
            for j in range(s, nc):
                x = row[j]
                if x != 0 and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        return best
        return best

    size = min(nr, nc)
    for s in range(size):
        while True:
            found = pivot_at_least(s)
            if found is None:
                break
            _, pi, pj = found
            if pi != s:
                swap_rows(s, pi)
            if pj != s:
                swap_cols(s, pj)
            # Clear column s, then row s, repeating while remainders appear.
            dirty = False
            for i in range(s + 1, nr):
                if a[i][s] != 0:
                    q = a[i][s] // a[s][s]
                    add_row(i, s, -q)
                    if a[i][s] != 0:
                        dirty = True
            for j in range(s + 1, nc):
                if a[s][j] != 0:
                    q = a[s][j] // a[s][s]
                    add_col(j, s, -q)
                    if a[s][j] != 0:
                        dirty = True
            if dirty:
                continue
            # Row and column are clear; enforce that the pivot divides the
            # rest of the block, else fold an offending row in and retry.
            pivot = a[s][s]
            offender = None
            for i in range(s + 1, nr):
                row = a[i]
                for j in range(s + 1, nc):
                    if row[j] % pivot != 0:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            add_row(s, offender, 1)
        if s < size and a[s][s] < 0:
            negate_row(s)
    diag = tuple(a[i][i] for i in range(size))
    return SmithResult(
        diag,
        IntMatrix(left, cols=nr),
        IntMatrix(right, cols=nc),
        IntMatrix(left_inv, cols=nr),
        IntMatrix(right_inv, cols=nc),
    )


def mat_inverse_unimodular(m: IntMatrix) -> IntMatrix:
    """Exact inverse of a matrix with determinant ±1."""
    if not m.is_square():
        raise ValueError("inverse of a non-square matrix")
    d, left, right = smith_normal_form(m)
    if any(x != 1 for x in d):
        raise ValueError("matrix is not unimodular")
    # left·m·right = I, hence m^-1 = right·left.
    return mat_mul(right, left)


def matrix_group_elements(
    gens: Sequence[IntMatrix], budget: int = DEFAULT_CLOSURE_BUDGET
) -> list[IntMatrix]:
    """All elements of the matrix group generated by gens.

    Breadth-first closure under multiplication and inverse, elements keyed by
    their entry tuples, visited in a deterministic order (generator index,
    then discovery order).  Raises BudgetExceeded if more than `budget`
    distinct elements appear, which signals an infinite or too-large group.
    """
    gens = list(gens)
    if not gens:
        return [IntMatrix.identity(0)]
    n = gens[0].rows
    for g in gens:
        if not g.is_square() or g.rows != n:
            raise ValueError("generators must be square matrices of equal size")
        if determinant(g) not in (1, -1):
            raise ValueError("generator is not invertible over the integers")
    alphabet = gens + [mat_inverse_unimodular(g) for g in gens]
    identity = IntMatrix.identity(n)
    seen = {identity.entries}
    queue = [identity]
    head = 0
    while head < len(queue):
        current = queue[head]
        head += 1
        for g in alphabet:
            nxt = mat_mul(current, g)
            if nxt.entries not in seen:
                seen.add(nxt.entries)
                if len(seen) > budget:
                    raise BudgetExceeded(
                        f"matrix group closure exceeded budget of {budget} elements"
                    )
                queue.append(nxt)
    return queue


def matrix_group_order(
    gens: Sequence[IntMatrix], budget: int = DEFAULT_CLOSURE_BUDGET
) -> int:
    """Order of the matrix group generated by gens; see matrix_group_elements."""
    if not gens:
        return 1
    return len(matrix_group_elements(gens, budget))
