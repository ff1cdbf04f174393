"""Square matrices over Z/p^k: ring ops, invertibility, reduction maps, block maps.

Entries are stored as plain ints in [0, p^k) (row-major tuples), which keeps
matrices hashable and cheap to churn through group closures.  ResidueInt views
are available through ``entry``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .residues import NonUnitError, ResidueInt, RingParams


class NotInvertibleError(ArithmeticError):
    """Matrix determinant is divisible by p."""


class NotInHPrimeError(ValueError):
    """Corner projection applied to a matrix outside its domain subgroup."""


@dataclass(frozen=True)
class MatrixZ:
    params: RingParams
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n, m = self.params.n, self.params.modulus
        if len(self.entries) != n or any(len(row) != n for row in self.entries):
            raise ValueError(f"entries must form an {n}x{n} matrix")
        if any(not 0 <= v < m for row in self.entries for v in row):
            raise ValueError(f"entries must lie in [0, {m})")

    def entry(self, i: int, j: int) -> ResidueInt:
        return ResidueInt(self.entries[i][j], self.params.modulus)

    def flat(self) -> tuple[int, ...]:
        return tuple(v for row in self.entries for v in row)

    def __repr__(self) -> str:
        rows = "; ".join(" ".join(str(v) for v in row) for row in self.entries)
        return f"MatrixZ(mod {self.params.p}^{self.params.k}: [{rows}])"


def from_rows(params: RingParams, rows) -> MatrixZ:
    """Build a matrix, reducing arbitrary integer entries mod p^k."""
    m = params.modulus
    return MatrixZ(params, tuple(tuple(int(v) % m for v in row) for row in rows))


def identity(params: RingParams) -> MatrixZ:
    n = params.n
    return MatrixZ(params, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))


def zero(params: RingParams) -> MatrixZ:
    n = params.n
    return MatrixZ(params, tuple((0,) * n for _ in range(n)))


def _check_same(a: MatrixZ, b: MatrixZ) -> None:
    if a.params != b.params:
        raise ValueError(f"params mismatch: {a.params} vs {b.params}")


def mat_add(a: MatrixZ, b: MatrixZ) -> MatrixZ:
    _check_same(a, b)
    m = a.params.modulus
    return MatrixZ(
        a.params,
        tuple(tuple((x + y) % m for x, y in zip(ra, rb)) for ra, rb in zip(a.entries, b.entries)),
    )


def mat_sub(a: MatrixZ, b: MatrixZ) -> MatrixZ:
    _check_same(a, b)
    m = a.params.modulus
    return MatrixZ(
        a.params,
        tuple(tuple((x - y) % m for x, y in zip(ra, rb)) for ra, rb in zip(a.entries, b.entries)),
    )


def scalar_mul(c: int, a: MatrixZ) -> MatrixZ:
    m = a.params.modulus
    return MatrixZ(a.params, tuple(tuple(c * x % m for x in row) for row in a.entries))


def mat_mul(a: MatrixZ, b: MatrixZ) -> MatrixZ:
    _check_same(a, b)
    m = a.params.modulus
    bt = tuple(zip(*b.entries))
    return MatrixZ(
        a.params,
        tuple(
            tuple(sum(x * y for x, y in zip(row, col)) % m for col in bt)
            for row in a.entries
        ),
    )


def mat_pow(a: MatrixZ, e: int) -> MatrixZ:
    if e < 0:
        return mat_pow(mat_inverse(a), -e)
    acc = identity(a.params)
    base = a
    while e:
        if e & 1:
            acc = mat_mul(acc, base)
        base = mat_mul(base, base)
        e >>= 1
    return acc


def mat_det(a: MatrixZ) -> ResidueInt:
    """Determinant mod p^k via fraction-free (Bareiss) elimination on integer
    representatives; exact, no pivoting over the non-field needed."""
    n = a.params.n
    m = a.params.modulus
    w = [list(row) for row in a.entries]
    sign = 1
    prev = 1
    for c in range(n - 1):
        if w[c][c] == 0:
            for r in range(c + 1, n):
                if w[r][c] != 0:
                    w[c], w[r] = w[r], w[c]
                    sign = -sign
                    break
            else:
                return ResidueInt(0, m)
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                w[r][j] = (w[r][j] * w[c][c] - w[r][c] * w[c][j]) // prev
            w[r][c] = 0
        prev = w[c][c]
    return ResidueInt(sign * w[n - 1][n - 1], m)


def is_invertible(a: MatrixZ) -> bool:
    return mat_det(a).is_unit()


def _inverse_mod_p(a: MatrixZ) -> list[list[int]]:
    """Gauss-Jordan inverse of a's reduction mod p (entries as plain ints)."""
    n, p = a.params.n, a.params.p
    w = [[v % p for v in row] + [1 if i == j else 0 for j in range(n)]
         for i, row in enumerate(a.entries)]
    for c in range(n):
        piv = next((r for r in range(c, n) if w[r][c] % p != 0), None)
        if piv is None:
            raise NotInvertibleError("matrix is singular mod p")
        w[c], w[piv] = w[piv], w[c]
        inv = pow(w[c][c], -1, p)
        w[c] = [v * inv % p for v in w[c]]
        for r in range(n):
            if r != c and w[r][c]:
                f = w[r][c]
                w[r] = [(v - f * u) % p for v, u in zip(w[r], w[c])]
    return [row[n:] for row in w]


def mat_inverse(a: MatrixZ) -> MatrixZ:
    """Inverse mod p^k: invert mod p, then Newton steps X <- X(2I - AX)."""
    if not is_invertible(a):
        raise NotInvertibleError("determinant is divisible by p")
    params = a.params
    x = from_rows(params, _inverse_mod_p(a))
    two_i = scalar_mul(2, identity(params))
    ident = identity(params)
    for _ in range(max(params.k - 1, 0)):
        ax = mat_mul(a, x)
        if ax == ident:
            break
        x = mat_mul(x, mat_sub(two_i, ax))
    assert mat_mul(a, x) == ident
    return x


def reduce_modulus(a: MatrixZ, k_target: int) -> MatrixZ:
    """Entrywise reduction Mat_n(Z/p^k) -> Mat_n(Z/p^k_target), a ring map."""
    if not 1 <= k_target <= a.params.k:
        raise ValueError(f"target exponent {k_target} outside [1, {a.params.k}]")
    if k_target == a.params.k:
        return a
    tgt = a.params.reduced(k_target)
    m = tgt.modulus
    return MatrixZ(tgt, tuple(tuple(v % m for v in row) for row in a.entries))


def in_kernel_subgroup(a: MatrixZ) -> bool:
    """True iff a = I mod p, i.e. a lies in 1 + (radical)."""
    p = a.params.p
    return all(
        (v - (1 if i == j else 0)) % p == 0
        for i, row in enumerate(a.entries)
        for j, v in enumerate(row)
    )


def block_embed(a: MatrixZ, n_target: int) -> MatrixZ:
    """Embed an m x m matrix as diag(a, I) inside size n_target."""
    m_size = a.params.n
    if n_target < m_size:
        raise ValueError(f"target size {n_target} smaller than block size {m_size}")
    tgt = RingParams(a.params.p, n_target, a.params.k)
    rows = []
    for i in range(n_target):
        row = []
        for j in range(n_target):
            if i < m_size and j < m_size:
                row.append(a.entries[i][j])
            else:
                row.append(1 if i == j else 0)
        rows.append(tuple(row))
    return MatrixZ(tgt, tuple(rows))


def in_corner_subgroup(a: MatrixZ, m: int) -> bool:
    """Membership test for the domain of corner_project: entries outside the
    top-left m x m block must be congruent to the identity's mod p."""
    p, n = a.params.p, a.params.n
    if not 1 <= m <= n:
        raise ValueError(f"corner size {m} outside [1, {n}]")
    for i in range(n):
        for j in range(n):
            if i < m and j < m:
                continue
            delta = 1 if i == j else 0
            if (a.entries[i][j] - delta) % p != 0:
                return False
    return True


def corner_project(a: MatrixZ, m: int) -> MatrixZ:
    """Top-left m x m corner; a homomorphism on the subgroup of invertible
    matrices that look like diag(*, I) mod p.  The membership predicate is
    validated on every call: outside that subgroup the corner map is not
    multiplicative and silent misuse would corrupt downstream certificates."""
    if not in_corner_subgroup(a, m):
        raise NotInHPrimeError(
            f"matrix is not congruent to diag(*, I) mod {a.params.p} outside its {m}x{m} corner"
        )
    tgt = RingParams(a.params.p, m, a.params.k)
    return MatrixZ(tgt, tuple(tuple(row[:m]) for row in a.entries[:m]))


def matrix_to_json(a: MatrixZ) -> dict:
    return {
        "p": a.params.p,
        "k": a.params.k,
        "n": a.params.n,
        "rows": [list(row) for row in a.entries],
    }


def matrix_from_json(obj: dict) -> MatrixZ:
    params = RingParams(int(obj["p"]), int(obj["n"]), int(obj["k"]))
    rows = obj["rows"]
    m = params.modulus
    got = tuple(tuple(int(v) for v in row) for row in rows)
    if any(not 0 <= v < m for row in got for v in row):
        raise ValueError("matrix entries outside [0, p^k)")
    return MatrixZ(params, got)
