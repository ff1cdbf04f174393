"""Finitely presented groups: signed-index words, relator evaluation in matrix
groups, and Todd-Coxeter enumeration over the trivial subgroup.

Words are tuples of signed generator indices: +i is generator i, -i its
inverse (1-based).  The enumerator is relator-scanning with union-find
coincidence merging on a Schreier-graph table; coset numbering follows
creation order, so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

from .groups import MatrixGroup, closure
from .matrices import MatrixZ, identity, mat_inverse, mat_mul

Word = tuple[int, ...]


class CosetLimitError(RuntimeError):
    """Enumeration exceeded its coset budget; order not determined."""


def free_reduce(word) -> Word:
    out: list[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(int(letter))
    return tuple(out)


def invert_word(word) -> Word:
    return tuple(-letter for letter in reversed(word))


def word_power(word, e: int) -> Word:
    if e < 0:
        return word_power(invert_word(word), -e)
    return free_reduce(tuple(word) * e)


@dataclass(frozen=True)
class Presentation:
    num_generators: int
    relators: tuple[Word, ...]

    def __post_init__(self) -> None:
        if self.num_generators < 1:
            raise ValueError("need at least one generator")
        reduced = []
        for rel in self.relators:
            for letter in rel:
                if letter == 0 or abs(letter) > self.num_generators:
                    raise ValueError(f"letter {letter} out of range in relator {rel}")
            reduced.append(free_reduce(rel))
        object.__setattr__(self, "relators", tuple(reduced))


def presentation_to_json(pres: Presentation) -> dict:
    return {"generators": pres.num_generators, "relators": [list(r) for r in pres.relators]}


def presentation_from_json(obj: dict) -> Presentation:
    return Presentation(
        int(obj["generators"]),
        tuple(tuple(int(x) for x in r) for r in obj["relators"]),
    )


def evaluate_word(word, images: list[MatrixZ]) -> MatrixZ:
    """Product of generator images along the word; empty word gives I."""
    if not images:
        raise ValueError("need at least one image")
    params = images[0].params
    acc = identity(params)
    inverses: dict[int, MatrixZ] = {}
    for letter in word:
        g = abs(letter) - 1
        if not 0 <= g < len(images):
            raise ValueError(f"letter {letter} has no image")
        if letter > 0:
            factor = images[g]
        else:
            factor = inverses.setdefault(g, mat_inverse(images[g]))
        acc = mat_mul(acc, factor)
    return acc


def _letter_to_dir(letter: int) -> int:
    g = abs(letter) - 1
    return 2 * g if letter > 0 else 2 * g + 1


class _CosetGraph:
    """Union-find Schreier graph used by the enumerator."""

    def __init__(self, ndirs: int, max_cosets: int):
        self.ndirs = ndirs
        self.max_cosets = max_cosets
        self.parent: list[int] = []
        self.neighbors: list[list[int]] = []
        self.add_vertex()

    def add_vertex(self) -> int:
        if len(self.parent) >= self.max_cosets:
            raise CosetLimitError(f"coset budget {self.max_cosets} exceeded")
        c = len(self.parent)
        self.parent.append(c)
        self.neighbors.append([-1] * self.ndirs)
        return c

    def find(self, c: int) -> int:
        root = c
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[c] != root:
            self.parent[c], c = root, self.parent[c]
        return root

    def step(self, c: int, d: int) -> int:
        c = self.find(c)
        row = self.neighbors[c]
        if row[d] == -1:
            row[d] = self.add_vertex()
        return self.find(row[d])

    def follow(self, c: int, path) -> int:
        for d in path:
            c = self.step(c, d)
        return c

    def unify(self, a: int, b: int) -> None:
        stack = [(a, b)]
        while stack:
            a, b = stack.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if a > b:
                a, b = b, a
            self.parent[b] = a
            row_a, row_b = self.neighbors[a], self.neighbors[b]
            for d in range(self.ndirs):
                nb = row_b[d]
                if nb == -1:
                    continue
                if row_a[d] == -1:
                    row_a[d] = nb
                else:
                    stack.append((row_a[d], nb))

    def live_count(self) -> int:
        return sum(1 for c, par in enumerate(self.parent) if c == par)


def todd_coxeter(pres: Presentation, max_cosets: int = 100_000) -> int:
    """Order of the presented group, by coset enumeration over the trivial
    subgroup.  Raises CosetLimitError when the table would outgrow
    ``max_cosets`` - meaning undetermined within budget, not infinite.
    """
    ndirs = 2 * pres.num_generators
    paths = []
    for g in range(pres.num_generators):
        paths.append((2 * g, 2 * g + 1))
        paths.append((2 * g + 1, 2 * g))
    for rel in pres.relators:
        paths.append(tuple(_letter_to_dir(letter) for letter in rel))

    graph = _CosetGraph(ndirs, max_cosets)
    to_visit = 0
    while to_visit < len(graph.parent):
        c = graph.find(to_visit)
        if c == to_visit:
            for path in paths:
                graph.unify(graph.follow(c, path), c)
        to_visit += 1
    return graph.live_count()


def verify_presentation(pres: Presentation, images: list[MatrixZ], max_cosets: int = 100_000) -> bool:
    """True iff every relator kills the images and the group the images generate
    has exactly the presented order, i.e. the images realize the presentation
    faithfully."""
    if len(images) != pres.num_generators:
        return False
    ident = identity(images[0].params)
    for rel in pres.relators:
        if evaluate_word(rel, images) != ident:
            return False
    presented = todd_coxeter(pres, max_cosets)
    grp = closure(images, abort_above=presented)
    return grp is not None and grp.order == presented


def cayley_presentation(generators: list[MatrixZ]) -> Presentation:
    """Presentation of the finite group the generators span, from its Cayley
    graph: spanning-tree words plus one relator per non-tree edge.  The relator
    count is |G|*|S| - |G| + 1 before deduplication."""
    grp = closure(generators, track_words=True)
    relators: list[Word] = []
    seen: set[Word] = set()
    for elt in grp.elements:
        w_e = grp.word_for(elt)
        for gi, gen in enumerate(generators, start=1):
            target = mat_mul(elt, gen)
            w_t = grp.word_for(target)
            if w_t == w_e + (gi,):
                continue  # tree edge
            rel = free_reduce(w_e + (gi,) + invert_word(w_t))
            if rel and rel not in seen:
                seen.add(rel)
                relators.append(rel)
    return Presentation(len(generators), tuple(relators))
