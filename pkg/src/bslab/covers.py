"""Permutation representations, congruence quotients of SL(2, Z), coset-graph
constructions, and finite covers of 2-dimensional cell complexes.

Permutations are 0-based integer arrays internally; text files use 1-based
one-line notation.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse

from bslab.graphs import RootedGraph

MAX_GROUP_ORDER = 10**6


def _as_perm(p, n: int | None = None) -> np.ndarray:
    arr = np.asarray(p, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("permutation must be one-dimensional")
    if n is not None and len(arr) != n:
        raise ValueError(f"permutation has length {len(arr)}, expected {n}")
    if not np.array_equal(np.sort(arr), np.arange(len(arr))):
        raise ValueError("not a bijection of 0..n-1")
    return arr


def orbit(generators: Sequence[np.ndarray], start: int = 0) -> set[int]:
    moves = [np.asarray(g) for g in generators] + [np.argsort(g) for g in generators]
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for g in moves:
            y = int(g[x])
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


@dataclass(frozen=True)
class PermRep:
    """A group action on {0..n-1} given by generator permutations; the base
    point is 0."""

    degree: int
    generators: tuple[np.ndarray, ...]

    def __post_init__(self):
        gens = tuple(_as_perm(g, self.degree) for g in self.generators)
        object.__setattr__(self, "generators", gens)

    @cached_property
    def is_transitive(self) -> bool:
        if not self.generators:
            return self.degree == 1
        return len(orbit(self.generators)) == self.degree

    def word_permutation(self, word: Sequence[tuple[int, int]]) -> np.ndarray:
        """Permutation of the product s_1 s_2 ... s_k acting on the left.

        ``word`` is a sequence of ``(generator_index, +1 | -1)``.
        """
        perm = np.arange(self.degree)
        for i, e in word:
            g = self.generators[i]
            step = g if e > 0 else np.argsort(g)
            perm = perm[step]
        return perm


def fixed_points(perm_or_word, rep: PermRep | None = None) -> int:
    """Number of points fixed by a permutation, or by a word evaluated in ``rep``."""
    if rep is not None:
        perm = rep.word_permutation(perm_or_word)
    else:
        perm = np.asarray(perm_or_word)
    return int(np.count_nonzero(perm == np.arange(len(perm))))


def read_permutations(path: str | Path) -> list[np.ndarray]:
    return loads_permutations(Path(path).read_text())


def loads_permutations(text: str) -> list[np.ndarray]:
    perms = []
    for line in text.splitlines():
        if line.strip():
            perms.append(_as_perm([int(x) - 1 for x in line.split()]))
    return perms


def dumps_permutations(perms: Sequence[np.ndarray]) -> str:
    return "".join(" ".join(str(int(x) + 1) for x in p) + "\n" for p in perms)


def schreier_graph(rep: PermRep) -> RootedGraph:
    """One labelled edge p -> g_i(p) per point and generator, rooted at 0."""
    if not rep.generators:
        raise ValueError("empty generator list")
    edges, labels = [], []
    for i, g in enumerate(rep.generators):
        for p in range(rep.degree):
            edges.append((p, int(g[p])))
            labels.append((i, 1))
    return RootedGraph(rep.degree, tuple(edges), 0, tuple(labels))


# ---------------------------------------------------------------------------
# SL(2, Z/N)


def sl2_order(N: int) -> int:
    order = N**3
    for p in _prime_factors(N):
        order = order * (p * p - 1) // (p * p)
    return order


def _prime_factors(N: int) -> list[int]:
    out, p = [], 2
    while p * p <= N:
        if N % p == 0:
            out.append(p)
            while N % p == 0:
                N //= p
        p += 1
    if N > 1:
        out.append(N)
    return out


DEFAULT_GENERATORS = ((1, 1, 0, 1), (1, -1, 0, 1), (1, 0, 1, 1), (1, 0, -1, 1))
DEFAULT_LETTERS = "aAbB"


@dataclass(frozen=True)
class FiniteMatrixGroup:
    """SL(2, Z/N) materialized as a sorted table of (a, b, c, d) rows."""

    modulus: int
    elements: np.ndarray
    generators: tuple[int, ...]
    letters: str = DEFAULT_LETTERS
    _codes: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        N = self.modulus
        codes = ((self.elements[:, 0] * N + self.elements[:, 1]) * N + self.elements[:, 2]) * N + self.elements[:, 3]
        object.__setattr__(self, "_codes", codes)

    @property
    def order(self) -> int:
        return len(self.elements)

    def index_of(self, m) -> int | np.ndarray:
        m = np.asarray(m, dtype=np.int64) % self.modulus
        N = self.modulus
        code = ((m[..., 0] * N + m[..., 1]) * N + m[..., 2]) * N + m[..., 3]
        idx = np.searchsorted(self._codes, code)
        idx = np.minimum(idx, len(self._codes) - 1)
        if np.any(self._codes[idx] != code):
            raise KeyError("matrix is not an element of the group")
        return int(idx) if np.ndim(idx) == 0 else idx

    @cached_property
    def identity(self) -> int:
        return self.index_of((1, 0, 0, 1))

    @cached_property
    def minus_identity(self) -> int:
        return self.index_of((-1, 0, 0, -1))

    def matmul(self, x, y) -> np.ndarray:
        """Row-wise product of (..., 4) arrays of matrix entries, mod N."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        a = x[..., 0] * y[..., 0] + x[..., 1] * y[..., 2]
        b = x[..., 0] * y[..., 1] + x[..., 1] * y[..., 3]
        c = x[..., 2] * y[..., 0] + x[..., 3] * y[..., 2]
        d = x[..., 2] * y[..., 1] + x[..., 3] * y[..., 3]
        return np.stack([a, b, c, d], axis=-1) % self.modulus

    def mul(self, i, j):
        return self.index_of(self.matmul(self.elements[i], self.elements[j]))

    def inv(self, i):
        a, b, c, d = np.moveaxis(self.elements[i], -1, 0)
        return self.index_of(np.stack([d, -b, -c, a], axis=-1))

    @cached_property
    def generator_inverse(self) -> tuple[int, ...]:
        """Position in ``generators`` of each generator's inverse."""
        pos = {g: k for k, g in enumerate(self.generators)}
        return tuple(pos[self.inv(g)] for g in self.generators)

    @cached_property
    def right_table(self) -> np.ndarray:
        """``right_table[g, k]`` is the index of g * generators[k]."""
        gens = self.elements[list(self.generators)]
        prods = self.matmul(self.elements[:, None, :], gens[None, :, :])
        return self.index_of(prods)


def sl2_quotient(N: int, generators: Sequence[Sequence[int]] = DEFAULT_GENERATORS,
                 letters: str | None = None) -> FiniteMatrixGroup:
    if N < 2:
        raise ValueError("modulus must be at least 2")
    if sl2_order(N) > MAX_GROUP_ORDER:
        raise ValueError(f"|SL2(Z/{N})| = {sl2_order(N)} exceeds the size guard {MAX_GROUP_ORDER}")
    c, d = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    c, d = c.ravel(), d.ravel()
    rows = []
    for a in range(N):
        for b in range(N):
            ok = (a * d - b * c) % N == 1
            k = int(ok.sum())
            if k:
                rows.append(np.column_stack([np.full(k, a), np.full(k, b), c[ok], d[ok]]))
    elements = np.concatenate(rows).astype(np.int64)
    group = FiniteMatrixGroup(N, elements, ())
    if letters is None:
        letters = DEFAULT_LETTERS if len(generators) == 4 else "".join(chr(97 + i) for i in range(len(generators)))
    # generators can coincide mod small N (e.g. a = a^-1 mod 2); keep first occurrences
    kept: dict[int, str] = {}
    for g, letter in zip(generators, letters):
        kept.setdefault(group.index_of(g), letter)
    gens = tuple(kept)
    letters = "".join(kept.values())
    out = FiniteMatrixGroup(N, elements, gens, letters)
    if sorted(out.inv(g) for g in gens) != sorted(gens):
        raise ValueError("generating set is not closed under inversion")
    return out


def with_generators(group: FiniteMatrixGroup, generators: Sequence[int]) -> FiniteMatrixGroup:
    letters = "".join(chr(97 + i) for i in range(len(generators)))
    return FiniteMatrixGroup(group.modulus, group.elements, tuple(int(g) for g in generators), letters)


# ---------------------------------------------------------------------------
# Cayley graphs and girth


def cayley_graph(group: FiniteMatrixGroup) -> RootedGraph:
    """Right Cayley graph g -- g s, one undirected edge per {s, s^-1} pair,
    rooted at the identity."""
    gens = group.generators
    if group.identity in gens:
        raise ValueError("identity in generating set")
    inv = group.generator_inverse
    table = group.right_table
    edges, labels = [], []
    for k, s in enumerate(gens):
        if inv[k] < k:
            continue
        targets = table[:, k]
        for g in range(group.order):
            h = int(targets[g])
            if inv[k] == k and h < g:
                continue  # involution: the pair {g, gs} was already added
            edges.append((g, h))
            labels.append((k, 1))
    return RootedGraph(group.order, tuple(edges), group.identity, tuple(labels))


def girth(g: RootedGraph, roots: Sequence[int] | None = None) -> int | None:
    """Length of a shortest cycle, or ``None`` for a forest.

    A BFS from each root scores every non-tree edge by the closed walk it
    closes.  Over all roots the minimum is the girth; for a vertex-transitive
    graph a single root suffices.
    """
    best = math.inf
    for u, v in g.edges:
        if u == v:
            return 1
    if roots is None:
        roots = range(g.vertex_count)
    for r in roots:
        dist = [-1] * g.vertex_count
        parent_edge = [-1] * g.vertex_count
        dist[r] = 0
        queue = deque([r])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for h, y in g.half_edges[x]:
                if h >> 1 == parent_edge[x]:
                    continue
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    parent_edge[y] = h >> 1
                    queue.append(y)
                else:
                    best = min(best, dist[x] + dist[y] + 1)
    return None if best == math.inf else int(best)


# ---------------------------------------------------------------------------
# actions on the projective line and fixity


def projective_points(N: int) -> np.ndarray:
    """Points (x : 1) for x in Z/N followed by (1 : 0); N prime."""
    pts = [(x, 1) for x in range(N)] + [(1, 0)]
    return np.array(pts, dtype=np.int64)


def _normalize_projective(v: np.ndarray, N: int) -> np.ndarray:
    x, y = v[..., 0] % N, v[..., 1] % N
    inv_y = np.array([pow(int(t), -1, N) if t else 0 for t in y.ravel()]).reshape(y.shape)
    idx = np.where(y != 0, (x * inv_y) % N, N)
    return idx


def projective_permutation(m, N: int) -> np.ndarray:
    a, b, c, d = (int(t) for t in m)
    pts = projective_points(N)
    img = np.stack([a * pts[:, 0] + b * pts[:, 1], c * pts[:, 0] + d * pts[:, 1]], axis=-1)
    return _normalize_projective(img, N)


def projective_line_rep(group: FiniteMatrixGroup) -> PermRep:
    """Action of the group's generators on P^1(Z/p), p prime.  Scalar
    matrices act trivially, so this is the PSL action."""
    N = group.modulus
    if _prime_factors(N) != [N]:
        raise ValueError("projective line action implemented for prime modulus only")
    gens = tuple(projective_permutation(group.elements[g], N) for g in group.generators)
    return PermRep(N + 1, gens)


def projective_fixed_point_counts(group: FiniteMatrixGroup) -> np.ndarray:
    """Fixed points on P^1(Z/p) of every element, via the fixed-point equation
    c x^2 + (d - a) x - b = 0 on the affine chart plus c = 0 at infinity."""
    N = group.modulus
    a, b, c, d = (group.elements[:, k][:, None] for k in range(4))
    x = np.arange(N)[None, :]
    affine = ((c * x * x + (d - a) * x - b) % N == 0).sum(axis=1)
    return affine + (group.elements[:, 2] % N == 0)


@dataclass
class FixityScan:
    rows: list[tuple[str, int, int, int, float]]
    max_ratio: float
    max_exponent: float
    degree: int
    metadata: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["word_string", "length", "fix", "index", "ratio"])
        for row in self.rows:
            w.writerow([row[0], row[1], row[2], row[3], repr(row[4])])
        return buf.getvalue()


def fixity_scan(group: FiniteMatrixGroup, rep: PermRep, max_length: int) -> FixityScan:
    """Fix counts of every reduced word of length <= ``max_length``.

    ``rep`` must list permutations for the group's generators in the same
    order.  The ratio statistics ignore words acting trivially (e.g. +-I on
    the projective line).
    """
    if not rep.is_transitive:
        raise ValueError("fixity_scan needs a transitive action")
    if len(rep.generators) != len(group.generators):
        raise ValueError("representation and group disagree on generators")
    inv = group.generator_inverse
    ident = np.arange(rep.degree)
    rows: list[tuple[str, int, int, int, float]] = [("", 0, rep.degree, rep.degree, 1.0)]
    max_ratio, max_exp = 0.0, -math.inf
    n = rep.degree
    stack = [("", -1, ident)]
    while stack:
        word, last, perm = stack.pop()
        if len(word) == max_length:
            continue
        for k, g in enumerate(rep.generators):
            if last >= 0 and inv[last] == k:
                continue
            new = perm[g]
            w = word + group.letters[k]
            fix = int(np.count_nonzero(new == ident))
            rows.append((w, len(w), fix, n, fix / n))
            if fix < n:
                max_ratio = max(max_ratio, fix / n)
                if fix > 0:
                    max_exp = max(max_exp, math.log(fix) / math.log(n))
            stack.append((w, k, new))
    rows.sort(key=lambda r: (r[1], r[0]))
    meta = {"action": "projective line (PSL: +-I act trivially)", "words": len(rows)}
    return FixityScan(rows, max_ratio, max_exp, n, meta)


def girth_table_csv(rows: Sequence[tuple[int, int, int | None]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "group_order", "girth"])
    for p, order, gi in rows:
        w.writerow([p, order, "" if gi is None else gi])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# cell complexes and covers

SignedEdge = tuple[int, int]


@dataclass(frozen=True)
class CellComplex:
    """A 2-dimensional cell complex: vertices, oriented edges (tail, head),
    and 2-cells given by closed boundary words of signed edges."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    faces: tuple[tuple[SignedEdge, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        object.__setattr__(self, "faces", tuple(tuple((int(e), int(s)) for e, s in f) for f in self.faces))
        for a, b in self.edges:
            if not (0 <= a < self.vertex_count and 0 <= b < self.vertex_count):
                raise ValueError("edge endpoint out of range")
        for f in self.faces:
            self._check_closed(f)
        d1, d2 = self.boundary(1), self.boundary(2)
        if d1.size and d2.size and (sparse.csr_matrix(d1) @ sparse.csr_matrix(d2)).count_nonzero():
            raise ValueError("boundary maps do not compose to zero")

    def _ends(self, e: int, s: int) -> tuple[int, int]:
        a, b = self.edges[e]
        return (a, b) if s > 0 else (b, a)

    def _check_closed(self, word) -> None:
        if not word:
            raise ValueError("empty 2-cell boundary")
        for (e, s), (e2, s2) in zip(word, word[1:] + word[:1]):
            if not (0 <= e < len(self.edges) and s in (1, -1)):
                raise ValueError(f"bad signed edge ({e}, {s})")
            if self._ends(e, s)[1] != self._ends(e2, s2)[0]:
                raise ValueError("2-cell boundary word is not a closed path")

    @property
    def cell_counts(self) -> tuple[int, int, int]:
        return (self.vertex_count, len(self.edges), len(self.faces))

    @property
    def dimension(self) -> int:
        return 2 if self.faces else (1 if self.edges else 0)

    @property
    def euler_characteristic(self) -> int:
        n0, n1, n2 = self.cell_counts
        return n0 - n1 + n2

    def boundary(self, k: int) -> np.ndarray:
        """Integer matrix of the boundary map from k-cells to (k-1)-cells."""
        n0, n1, n2 = self.cell_counts
        if k == 0:
            return np.zeros((0, n0), dtype=np.int64)
        if k == 1:
            d = np.zeros((n0, n1), dtype=np.int64)
            if n1:
                tails, heads = np.array(self.edges).T
                cols = np.arange(n1)
                np.add.at(d, (heads, cols), 1)
                np.add.at(d, (tails, cols), -1)
            return d
        if k == 2:
            d = np.zeros((n1, n2), dtype=np.int64)
            for f, word in enumerate(self.faces):
                for e, s in word:
                    d[e, f] += s
            return d
        if k == 3:
            return np.zeros((n2, 0), dtype=np.int64)
        raise ValueError(f"no boundary map in degree {k}")

    def is_connected(self) -> bool:
        parent = list(range(self.vertex_count))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.edges:
            parent[find(a)] = find(b)
        return len({find(v) for v in range(self.vertex_count)}) == 1

    def one_skeleton(self) -> RootedGraph:
        return RootedGraph(self.vertex_count, self.edges, 0)


def circle() -> CellComplex:
    return CellComplex(1, ((0, 0),))


def wedge_of_circles(k: int) -> CellComplex:
    return CellComplex(1, tuple((0, 0) for _ in range(k)))


def filled_triangle() -> CellComplex:
    return CellComplex(3, ((0, 1), (1, 2), (0, 2)), (((0, 1), (1, 1), (2, -1)),))


def surface_complex(genus: int) -> CellComplex:
    """One vertex, edges a_1, b_1, ..., a_g, b_g, one 2-cell [a_1, b_1]...[a_g, b_g]."""
    if genus < 1:
        raise ValueError("genus must be at least 1")
    word = []
    for i in range(genus):
        a, b = 2 * i, 2 * i + 1
        word += [(a, 1), (b, 1), (a, -1), (b, -1)]
    return CellComplex(1, tuple((0, 0) for _ in range(2 * genus)), (tuple(word),))


def torus_complex() -> CellComplex:
    return surface_complex(1)


def graph_complex(g: RootedGraph) -> CellComplex:
    return CellComplex(g.vertex_count, g.edges)


def build_cover(base: CellComplex, assignment: Sequence[Sequence[int]]) -> CellComplex:
    """The n-sheeted cover in which edge e lifts from (tail, i) to (head, sigma_e(i)).

    Vertex (v, i) has index v * n + i, and likewise for edges and faces.  Each
    2-cell lifts once per sheet, which requires its boundary word to have
    trivial monodromy.
    """
    if len(assignment) != len(base.edges):
        raise ValueError(f"need one permutation per 1-cell ({len(base.edges)}), got {len(assignment)}")
    perms = [_as_perm(p) for p in assignment]
    n = len(perms[0]) if perms else 1
    if any(len(p) != n for p in perms):
        raise ValueError("permutations of different degrees")
    invs = [np.argsort(p) for p in perms]
    edges = []
    for e, (a, b) in enumerate(base.edges):
        for i in range(n):
            edges.append((a * n + i, b * n + int(perms[e][i])))
    faces = []
    for f, word in enumerate(base.faces):
        for i in range(n):
            sheet = i
            lifted = []
            for e, s in word:
                if s > 0:
                    lifted.append((e * n + sheet, 1))
                    sheet = int(perms[e][sheet])
                else:
                    sheet = int(invs[e][sheet])
                    lifted.append((e * n + sheet, -1))
            if sheet != i:
                raise ValueError(f"2-cell {f} has nontrivial monodromy; assignment does not define a cover")
            faces.append(tuple(lifted))
    return CellComplex(base.vertex_count * n, tuple(edges), tuple(faces))


def is_transitive_assignment(assignment: Sequence[Sequence[int]]) -> bool:
    perms = [_as_perm(p) for p in assignment]
    if not perms:
        return True
    return len(orbit(perms)) == len(perms[0])


def random_permutation(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.permutation(n)


def permutation_model_graph(n: int, degree: int, rng: np.random.Generator) -> RootedGraph:
    """Union of degree/2 uniform random permutations on n points (loops and
    multi-edges kept), a 2k-regular multigraph."""
    if degree % 2 or degree < 2:
        raise ValueError("permutation model needs an even degree >= 2")
    edges = []
    for _ in range(degree // 2):
        p = random_permutation(n, rng)
        edges.extend((i, int(p[i])) for i in range(n))
    return RootedGraph(n, tuple(edges))


def cyclic_shift(n: int, k: int = 1) -> np.ndarray:
    return (np.arange(n) + k) % n


def torus_grid_assignment(n: int) -> list[np.ndarray]:
    """Z/n x Z/n regular cover of the torus: a shifts the first coordinate,
    b the second.  Sheet (i, j) has index i * n + j."""
    idx = np.arange(n * n).reshape(n, n)
    a = np.roll(idx, -1, axis=0).ravel()
    b = np.roll(idx, -1, axis=1).ravel()
    return [a, b]


def genus2_assignment(n: int, rng: np.random.Generator) -> list[np.ndarray]:
    """A transitive assignment for surface_complex(2) with trivial relator:
    b_1 commutes with a_1 (a power of it) and b_2 is a power of a_2, while a_1
    is an n-cycle conjugated at random."""
    sigma = rng.permutation(n)
    cycle = np.empty(n, dtype=np.int64)
    cycle[sigma] = sigma[(np.arange(n) + 1) % n]
    a2 = rng.permutation(n)
    b1 = _perm_power(cycle, int(rng.integers(0, n)))
    b2 = _perm_power(a2, int(rng.integers(0, 3)))
    return [cycle, b1, a2, b2]


def _perm_power(p: np.ndarray, k: int) -> np.ndarray:
    out = np.arange(len(p))
    for _ in range(k):
        out = p[out]
    return out
