"""Exact integer matrix algebra: Smith normal form and chain-complex homology.

All arithmetic is over Python's arbitrary-precision integers; intermediate
entries during diagonalization can outgrow any fixed-width type even for
small inputs.  Matrices are dense and desk-scale by design.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import abelian
from .abelian import AbGroup
from .errors import ChainComplexError, MalformedInputError


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]  # row-major

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise MalformedInputError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise MalformedInputError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: list[list[int]]) -> "IntMatrix":
        r = len(rows)
        c = len(rows[0]) if rows else 0
        if any(len(row) != c for row in rows):
            raise MalformedInputError("ragged rows")
        return cls(r, c, tuple(int(x) for row in rows for x in row))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def zero(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    def at(self, i: int, j: int) -> int:
        return self.entries[i * self.cols + j]

    def row_lists(self) -> list[list[int]]:
        return [list(self.entries[i * self.cols : (i + 1) * self.cols]) for i in range(self.rows)]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows,
                         tuple(self.at(i, j) for j in range(self.cols) for i in range(self.rows)))

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise MalformedInputError("dimension mismatch in matrix product")
        a, b = self.row_lists(), other.row_lists()
        out = []
        for i in range(self.rows):
            for j in range(other.cols):
                out.append(sum(a[i][k] * b[k][j] for k in range(self.cols)))
        return IntMatrix(self.rows, other.cols, tuple(out))

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.entries)

    def diagonal(self) -> list[int]:
        return [self.at(i, i) for i in range(min(self.rows, self.cols))]

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "entries": list(self.entries)}

    @classmethod
    def from_json(cls, data: dict) -> "IntMatrix":
        return cls(int(data["rows"]), int(data["cols"]),
                   tuple(int(x) for x in data["entries"]))


def determinant(a: IntMatrix) -> int:
    """Exact determinant via fraction-free (Bareiss) elimination."""
    if a.rows != a.cols:
        raise MalformedInputError("determinant requires a square matrix")
    n = a.rows
    if n == 0:
        return 1
    m = a.row_lists()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def smith_normal_form(a: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """(U, D, V) with U*a*V = D, D a nonnegative divisor-chain diagonal,
    U and V square unimodular.

    Pivot choice is the smallest nonzero absolute value, ties broken by
    lowest (row, col), so the transforms are reproducible run to run; only
    D is canonical.
    """
    m, n = a.rows, a.cols
    M = a.row_lists()
    U = IntMatrix.identity(m).row_lists()
    V = IntMatrix.identity(n).row_lists()

    def row_op(i: int, j: int, q: int) -> None:  # row_i -= q * row_j
        for k in range(n):
            M[i][k] -= q * M[j][k]
        for k in range(m):
            U[i][k] -= q * U[j][k]

    def col_op(i: int, j: int, q: int) -> None:  # col_i -= q * col_j
        for k in range(m):
            M[k][i] -= q * M[k][j]
        for k in range(n):
            V[k][i] -= q * V[k][j]

    def row_swap(i: int, j: int) -> None:
        M[i], M[j] = M[j], M[i]
        U[i], U[j] = U[j], U[i]

    def col_swap(i: int, j: int) -> None:
        for k in range(m):
            M[k][i], M[k][j] = M[k][j], M[k][i]
        for k in range(n):
            V[k][i], V[k][j] = V[k][j], V[k][i]

    def row_negate(i: int) -> None:
        M[i] = [-x for x in M[i]]
        U[i] = [-x for x in U[i]]

    def find_pivot(t: int) -> tuple[int, int] | None:
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if M[i][j] != 0 and (best is None or abs(M[i][j]) < abs(M[best[0]][best[1]])):
                    best = (i, j)
        return best

    t = 0
    while t < min(m, n):
        piv = find_pivot(t)
        if piv is None:
            break
        row_swap(t, piv[0])
        col_swap(t, piv[1])
        while True:
            # Clear row and column t; division remainders shrink the pivot,
            # so re-selecting the minimum converges.
            for i in range(t + 1, m):
                if M[i][t]:
                    row_op(i, t, M[i][t] // M[t][t])
            for j in range(t + 1, n):
                if M[t][j]:
                    col_op(j, t, M[t][j] // M[t][t])
            if any(M[i][t] for i in range(t + 1, m)) or any(M[t][j] for j in range(t + 1, n)):
                piv = find_pivot(t)
                row_swap(t, piv[0])
                col_swap(t, piv[1])
                continue
            # Divisor-chain fix: the pivot must divide the rest of the block.
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if M[i][j] % M[t][t] != 0:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_op(t, bad, -1)  # pull the offending row up, then re-reduce
        if M[t][t] < 0:
            row_negate(t)
        t += 1

    return (
        IntMatrix.from_rows(U),
        IntMatrix.from_rows(M),
        IntMatrix.from_rows(V),
    )


def snf_diagonal(a: IntMatrix) -> list[int]:
    _, d, _ = smith_normal_form(a)
    return [x for x in d.diagonal() if x != 0]


def rank(a: IntMatrix) -> int:
    return len(snf_diagonal(a))


@dataclass(frozen=True)
class ChainComplexZ:
    """Finite chain complex of free abelian groups.

    ranks[p] is the rank of C_p; differentials[p] is the matrix of
    d_p : C_p -> C_{p-1} (shape ranks[p-1] x ranks[p]), for p = 1..top.
    """

    ranks: tuple[int, ...]
    differentials: tuple[IntMatrix, ...]

    @classmethod
    def build(cls, ranks: list[int], differentials: list[IntMatrix]) -> "ChainComplexZ":
        return cls(tuple(ranks), tuple(differentials))

    @property
    def top(self) -> int:
        return len(self.ranks) - 1

    def differential(self, p: int) -> IntMatrix:
        """d_p, a zero matrix of the right shape at the boundary indices."""
        if 1 <= p <= self.top:
            return self.differentials[p - 1]
        target = self.ranks[p - 1] if 0 <= p - 1 <= self.top else 0
        source = self.ranks[p] if 0 <= p <= self.top else 0
        return IntMatrix.zero(target, source)


def validate_complex(c: ChainComplexZ) -> None:
    """Raise ChainComplexError at the first index where dimensions fail to
    chain or a consecutive composition is nonzero."""
    if len(c.differentials) != max(len(c.ranks) - 1, 0):
        raise ChainComplexError(
            f"need {max(len(c.ranks) - 1, 0)} differentials for {len(c.ranks)} chain groups, "
            f"got {len(c.differentials)}"
        )
    for p in range(1, c.top + 1):
        d = c.differential(p)
        if d.rows != c.ranks[p - 1] or d.cols != c.ranks[p]:
            raise ChainComplexError(
                f"d_{p} has shape {d.rows}x{d.cols}, expected {c.ranks[p - 1]}x{c.ranks[p]}"
            )
    for p in range(2, c.top + 1):
        if not c.differential(p - 1).mul(c.differential(p)).is_zero():
            raise ChainComplexError(f"composition d_{p - 1} * d_{p} is nonzero at p={p}")


def homology(c: ChainComplexZ) -> list[AbGroup]:
    """H_p = ker d_p / im d_{p+1} in canonical form, for p = 0..top.

    For a complex of free groups, H_p is Z^(null(d_p) - rank(d_{p+1}))
    plus one Z/s for every elementary divisor s >= 2 of d_{p+1}; the free
    quotient C_p / ker d_p cannot absorb torsion, so the elementary
    divisors of d_{p+1} survive into the subquotient unchanged.
    """
    validate_complex(c)
    ranks_of_d = [rank(c.differential(p)) for p in range(0, c.top + 2)]
    out = []
    for p in range(0, c.top + 1):
        free_rank = c.ranks[p] - ranks_of_d[p] - ranks_of_d[p + 1]
        torsion = [s for s in snf_diagonal(c.differential(p + 1)) if s >= 2]
        out.append(abelian.normalize(["Z"] * free_rank + [("cyclic", s) for s in torsion]))
    return out


def parse_matrix_text(text: str) -> IntMatrix:
    """Plain-text matrix format: first two integers are "rows cols", then
    rows*cols integers in row-major order, any whitespace as separator."""
    tokens = text.split()
    if len(tokens) < 2:
        raise MalformedInputError("matrix text needs a 'rows cols' header")
    try:
        nums = [int(tok) for tok in tokens]
    except ValueError as exc:
        raise MalformedInputError(f"non-integer token in matrix text: {exc}") from exc
    r, c = nums[0], nums[1]
    if r < 0 or c < 0:
        raise MalformedInputError("matrix dimensions must be nonnegative")
    if len(nums) - 2 != r * c:
        raise MalformedInputError(f"expected {r * c} entries, got {len(nums) - 2}")
    return IntMatrix(r, c, tuple(nums[2:]))
