"""Finite matrix-group machinery over Z/p^k: closure, orders, complements.

The kernel subgroup throughout is the set of units congruent to I mod p,
i.e. 1 + (radical).  A complement is a subgroup meeting it trivially whose
order equals |GL_n(Z/p)|.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, Iterator, Optional

import numpy as np

from .matrices import (
    MatrixZ,
    NotInvertibleError,
    from_rows,
    identity,
    in_kernel_subgroup,
    is_invertible,
    mat_mul,
    matrix_from_json,
    matrix_to_json,
    reduce_modulus,
)
from .residues import RingParams, primitive_root

if TYPE_CHECKING:
    from .presentations import Presentation


class BadGeneratorsError(ValueError):
    """Generators do not generate the expected group."""


class SearchSpaceTooLargeError(ValueError):
    """Brute-force lift search would exceed the candidate budget."""


DEFAULT_SEARCH_CAP = 1 << 30


@lru_cache(maxsize=None)
def gl_order(n: int, p: int) -> int:
    """|GL_n(Z/p)| = prod_{i<n} (p^n - p^i)."""
    out = 1
    for i in range(n):
        out *= p**n - p**i
    return out


def unit_group_order(params: RingParams) -> int:
    """|G(Mat_n(Z/p^k))| = p^((k-1) n^2) * |GL_n(Z/p)| (kernel times image)."""
    n, p, k = params.n, params.p, params.k
    return p ** ((k - 1) * n * n) * gl_order(n, p)


def _flat_mul(n: int, m: int):
    rng = range(n)

    def mul(a, b):
        return tuple(
            sum(a[i * n + l] * b[l * n + j] for l in rng) % m for i in rng for j in rng
        )

    return mul


def _flat_identity(n: int) -> tuple[int, ...]:
    return tuple(1 if i == j else 0 for i in range(n) for j in range(n))


def _unflatten(params: RingParams, flat) -> MatrixZ:
    n = params.n
    return MatrixZ(params, tuple(tuple(int(v) for v in flat[i * n : (i + 1) * n]) for i in range(n)))


@dataclass
class MatrixGroup:
    """A finite matrix group given by a fully enumerated element list."""

    params: RingParams
    generators: tuple[MatrixZ, ...]
    elements: tuple[MatrixZ, ...]
    words: Optional[dict[tuple[int, ...], tuple[int, ...]]] = field(default=None, repr=False)
    _index: dict[tuple[int, ...], int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._index = {m.flat(): i for i, m in enumerate(self.elements)}

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, mat: MatrixZ) -> bool:
        return mat.params == self.params and mat.flat() in self._index

    def word_for(self, mat: MatrixZ) -> tuple[int, ...]:
        """Positive generator word reaching ``mat`` (requires track_words closure)."""
        if self.words is None:
            raise ValueError("closure was run without word tracking")
        return self.words[mat.flat()]


def _vector_path_ok(params: RingParams) -> bool:
    n, m = params.n, params.modulus
    return m ** (n * n) <= (1 << 62) and n * (m - 1) ** 2 < (1 << 63)


def _closure_vectorized(params: RingParams, gens: list[MatrixZ], abort_above: Optional[int]):
    n, m = params.n, params.modulus
    nn = n * n
    gen_arr = np.stack([np.array(g.entries, dtype=np.int64) for g in gens])
    powers = np.array([m ** (nn - 1 - t) for t in range(nn)], dtype=np.int64)
    ident = np.eye(n, dtype=np.int64)

    def keys_of(batch: np.ndarray) -> np.ndarray:
        return batch.reshape(len(batch), nn) @ powers

    seen = {int(keys_of(ident[None])[0])}
    batches = [ident[None]]
    frontier = ident[None]
    while len(frontier):
        prods = np.matmul(frontier[:, None, :, :], gen_arr[None, :, :, :]) % m
        flat = prods.reshape(-1, n, n)
        keys = keys_of(flat)
        uniq, first_idx = np.unique(keys, return_index=True)
        fresh = []
        for key, idx in zip(uniq.tolist(), first_idx.tolist()):
            if key not in seen:
                seen.add(key)
                fresh.append(idx)
                if abort_above is not None and len(seen) > abort_above:
                    return None
        if not fresh:
            break
        frontier = flat[fresh]
        batches.append(frontier)
    stacked = np.concatenate(batches, axis=0)
    elements = tuple(
        MatrixZ(params, tuple(tuple(int(v) for v in row) for row in mat)) for mat in stacked
    )
    return elements


def _closure_python(
    params: RingParams,
    gens: list[MatrixZ],
    abort_above: Optional[int],
    track_words: bool,
):
    n, m = params.n, params.modulus
    mul = _flat_mul(n, m)
    gen_flats = [g.flat() for g in gens]
    ident = _flat_identity(n)
    index = {ident: 0}
    order_list = [ident]
    words = {ident: ()} if track_words else None
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for gi, g in enumerate(gen_flats):
                prod = mul(a, g)
                if prod in index:
                    continue
                index[prod] = len(order_list)
                order_list.append(prod)
                if track_words:
                    words[prod] = words[a] + (gi + 1,)
                if abort_above is not None and len(order_list) > abort_above:
                    return None, None
                nxt.append(prod)
        frontier = nxt
    elements = tuple(_unflatten(params, f) for f in order_list)
    return elements, words


def closure(
    generators: list[MatrixZ],
    abort_above: Optional[int] = None,
    track_words: bool = False,
) -> Optional[MatrixGroup]:
    """Smallest group containing the generators (BFS orbit under right
    multiplication; a finite monoid of invertible matrices is a group).

    Returns None if the running element count exceeds ``abort_above`` - a
    soft outcome, not an error.
    """
    if not generators:
        raise ValueError("need at least one generator")
    params = generators[0].params
    for g in generators:
        if g.params != params:
            raise ValueError("generators live over different rings")
        if not is_invertible(g):
            raise NotInvertibleError("generator is singular mod p")
    if not track_words and _vector_path_ok(params):
        elements = _closure_vectorized(params, generators, abort_above)
        if elements is None:
            return None
        return MatrixGroup(params, tuple(generators), elements)
    elements, words = _closure_python(params, generators, abort_above, track_words)
    if elements is None:
        return None
    return MatrixGroup(params, tuple(generators), elements, words)


def matrix_order(a: MatrixZ, bound: int = 1 << 20) -> int:
    ident = identity(a.params)
    acc = a
    for d in range(1, bound + 1):
        if acc == ident:
            return d
        acc = mat_mul(acc, a)
    raise ArithmeticError("element order exceeds bound")


def enumerate_kernel(params: RingParams) -> Iterator[MatrixZ]:
    """All units congruent to I mod p: entries delta_ij + p*t, t < p^(k-1)."""
    n, p, k = params.n, params.p, params.k
    reps = p ** (k - 1)
    cells = n * n
    for ts in itertools.product(range(reps), repeat=cells):
        rows = tuple(
            tuple(((1 if i == j else 0) + p * ts[i * n + j]) % params.modulus for j in range(n))
            for i in range(n)
        )
        yield MatrixZ(params, rows)


def is_complement(h: MatrixGroup) -> bool:
    """True iff h meets the kernel subgroup only in I and |h| = |GL_n(Z/p)|.

    The order condition makes h * kernel the whole unit group, since the unit
    group order is exactly |kernel| * |GL_n(Z/p)|.
    """
    params = h.params
    if h.order != gl_order(params.n, params.p):
        return False
    ident = identity(params)
    for elt in h.elements:
        if elt != ident and in_kernel_subgroup(elt):
            return False
    return True


@dataclass(frozen=True)
class SectionWitness:
    """Constructive proof that the reduction-mod-p quotient map splits.

    ``generator_images`` lift ``base_generators`` (matrices over Z/p); when the
    witness verifies, the group they generate is a complement of the kernel.
    """

    params: RingParams
    base_generators: tuple[MatrixZ, ...]
    generator_images: tuple[MatrixZ, ...]
    presentation: "Presentation | None" = None


@dataclass(frozen=True)
class SectionCheck:
    ok: bool
    reason: Optional[str] = None  # BadReduction | KernelIntersection | WrongOrder
    order: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def verify_section(witness: SectionWitness) -> SectionCheck:
    """Re-derive everything a complement requires; trusts nothing stored.

    Checks, in order: every image reduces onto its base generator; the closure
    of the images stays within |GL_n(Z/p)| elements; the closure avoids the
    kernel subgroup; the closure order is exactly |GL_n(Z/p)|.
    """
    params = witness.params
    target = gl_order(params.n, params.p)
    if len(witness.base_generators) != len(witness.generator_images) or not witness.generator_images:
        return SectionCheck(False, "BadReduction")
    for img, base in zip(witness.generator_images, witness.base_generators):
        if img.params != params or base.params != params.reduced(1):
            return SectionCheck(False, "BadReduction")
        if reduce_modulus(img, 1) != base:
            return SectionCheck(False, "BadReduction")
    grp = closure(list(witness.generator_images), abort_above=target)
    if grp is None:
        return SectionCheck(False, "WrongOrder")
    ident = identity(params)
    for elt in grp.elements:
        if elt != ident and in_kernel_subgroup(elt):
            return SectionCheck(False, "KernelIntersection", grp.order)
    if grp.order != target:
        return SectionCheck(False, "WrongOrder", grp.order)
    return SectionCheck(True, None, grp.order)


def _flat_pow(mul, flat, e: int, ident):
    acc = ident
    base = flat
    while e:
        if e & 1:
            acc = mul(acc, base)
        base = mul(base, base)
        e >>= 1
    return acc


def _guarded_order(flats, n: int, m: int, p: int, target: int) -> Optional[int]:
    """Closure size of the lifts, or None as soon as the partial closure
    exceeds ``target`` or contains a non-identity kernel element."""
    mul = _flat_mul(n, m)
    ident = _flat_identity(n)
    deltas = ident
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in flats:
                prod = mul(a, g)
                if prod in seen:
                    continue
                if len(seen) >= target:
                    return None
                if all((v - d) % p == 0 for v, d in zip(prod, deltas)):
                    return None
                seen.add(prod)
                nxt.append(prod)
        frontier = nxt
    return len(seen)


def find_complement_brute(
    params: RingParams,
    base_generators: list[MatrixZ],
    search_cap: int = DEFAULT_SEARCH_CAP,
    require_full_group: bool = True,
) -> Optional[SectionWitness]:
    """Exhaustive lift search at k = 2: every candidate is base + p*X.

    A candidate tuple survives only if the group it generates meets the kernel
    trivially and has the same order as the base group mod p; pruning happens
    the moment a partial closure exceeds that order or hits the kernel.
    Exhaustion without a witness proves no complement restricts to these base
    generators, hence (for a full GL generating set) that none exists.
    """
    if params.k != 2:
        raise ValueError("brute-force lift search is defined for k = 2 only")
    p, n = params.p, params.n
    base_params = params.reduced(1)
    for b in base_generators:
        if b.params != base_params:
            raise BadGeneratorsError("base generators must live over Z/p")
    base_grp = closure(list(base_generators))
    full = gl_order(n, p)
    if require_full_group and base_grp.order != full:
        raise BadGeneratorsError(
            f"base generators span order {base_grp.order}, expected {full}"
        )
    target = base_grp.order

    kernel_count = p ** (n * n)
    if kernel_count ** len(base_generators) > search_cap:
        raise SearchSpaceTooLargeError(
            f"{kernel_count}^{len(base_generators)} candidates exceed cap {search_cap}"
        )

    m = params.modulus
    mul = _flat_mul(n, m)
    ident = _flat_identity(n)
    base_orders = [matrix_order(b) for b in base_generators]

    survivors: list[list[tuple[int, ...]]] = []
    for b, d in zip(base_generators, base_orders):
        base_flat = b.flat()
        keep = []
        for xs in itertools.product(range(p), repeat=n * n):
            lift = tuple((v + p * x) % m for v, x in zip(base_flat, xs))
            if _flat_pow(mul, lift, d, ident) == ident:
                keep.append(lift)
        if not keep:
            return None
        survivors.append(keep)

    commuting_pairs = [
        (i, j)
        for i in range(len(base_generators))
        for j in range(i + 1, len(base_generators))
        if mat_mul(base_generators[i], base_generators[j])
        == mat_mul(base_generators[j], base_generators[i])
    ]

    for combo in itertools.product(*survivors):
        if any(mul(combo[i], combo[j]) != mul(combo[j], combo[i]) for i, j in commuting_pairs):
            continue
        if _guarded_order(combo, n, m, p, target) != target:
            continue
        witness = SectionWitness(
            params,
            tuple(base_generators),
            tuple(_unflatten(params, f) for f in combo),
        )
        if require_full_group:
            assert verify_section(witness).ok
        return witness
    return None


_CANDIDATE_KINDS = ("cycle", "cycle_scaled_left", "cycle_scaled_right", "diag_and_cycle")


def _transvection(params: RingParams) -> MatrixZ:
    rows = [[1 if i == j else 0 for j in range(params.n)] for i in range(params.n)]
    rows[0][1] = 1
    return from_rows(params, rows)


def _cycle(params: RingParams) -> MatrixZ:
    n = params.n
    rows = [[0] * n for _ in range(n)]
    rows[0][n - 1] = 1
    for i in range(1, n):
        rows[i][i - 1] = 1
    return from_rows(params, rows)


def _scalar_diag(params: RingParams) -> MatrixZ:
    g = primitive_root(params.p)
    rows = [[1 if i == j else 0 for j in range(params.n)] for i in range(params.n)]
    rows[0][0] = g
    return from_rows(params, rows)


@lru_cache(maxsize=None)
def default_generators(n: int, p: int) -> tuple[MatrixZ, ...]:
    """A verified generating set of GL_n(Z/p), chosen deterministically.

    Candidates are tried in a fixed order (transvection + cycle first) and the
    first whose closure has the right order wins.
    """
    params = RingParams(p, n, 1)
    if n == 1:
        return (from_rows(params, [[primitive_root(p) if p > 2 else 1]]),)
    t = _transvection(params)
    c = _cycle(params)
    d = _scalar_diag(params)
    candidates = [
        (t, c),
        (t, mat_mul(c, d)),
        (t, mat_mul(d, c)),
        (d, c),
        (t, c, d),
    ]
    want = gl_order(n, p)
    for cand in candidates:
        grp = closure(list(cand), abort_above=want)
        if grp is not None and grp.order == want:
            return tuple(cand)
    raise BadGeneratorsError(f"no default generating set found for GL_{n}(Z/{p})")


def witness_to_json(witness: SectionWitness) -> dict:
    out = {
        "params": {"p": witness.params.p, "n": witness.params.n, "k": witness.params.k},
        "base_generators": [matrix_to_json(b) for b in witness.base_generators],
        "generator_images": [matrix_to_json(g) for g in witness.generator_images],
    }
    if witness.presentation is not None:
        out["presentation"] = {
            "generators": witness.presentation.num_generators,
            "relators": [list(r) for r in witness.presentation.relators],
        }
    return out


def witness_from_json(obj: dict) -> SectionWitness:
    params = RingParams(int(obj["params"]["p"]), int(obj["params"]["n"]), int(obj["params"]["k"]))
    base = tuple(matrix_from_json(b) for b in obj["base_generators"])
    images = tuple(matrix_from_json(g) for g in obj["generator_images"])
    pres = None
    if "presentation" in obj:
        from .presentations import Presentation

        pres = Presentation(
            int(obj["presentation"]["generators"]),
            tuple(tuple(int(x) for x in r) for r in obj["presentation"]["relators"]),
        )
    return SectionWitness(params, base, images, pres)
