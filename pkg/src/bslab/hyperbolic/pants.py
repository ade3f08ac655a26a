"""Pairs of pants, Fenchel-Nielsen gluing over trees, short closed geodesics.

Conventions: every cuff matrix is oriented so that its pants lies to the
right of the oriented axis.  In the standard frame of a cuff (axis the
imaginary axis, translating upward) the pants sits in Re z > 0.

The glued group over a tree with P pants is free of rank P + 1.  Its basis
letters are ``x`` (first cuff of the root pants) and ``y<v>`` (second cuff
of pants v); each third cuff is (X Y)^-1 and each parent cuff is the inverse
of the neighbouring cuff it is glued to.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import mpmath
import numpy as np
from scipy import optimize

from bslab.graphs import RootedGraph
from bslab.hyperbolic.mobius import (
    ROTATE_PI,
    MobiusTransform,
    boost,
    diagonal,
    projective_distance,
    translation_length,
    translation_lengths,
)

RELATION_TOL = 1e-10
MP_DPS = 60
UNIT_ROUNDOFF = 2.0 ** -53

Word = tuple[int, ...]  # letters are +-(index + 1)


def build_pants(l1: float, l2: float, l3: float) -> tuple[MobiusTransform, MobiusTransform, MobiusTransform]:
    """Cuff matrices (X, Y, Z) of the pants with boundary lengths l1, l2, l3.

    X translates along the imaginary axis, Y along a geodesic at distance
    delta from it (the common perpendicular of the right-angled hexagon), and
    Z = (X Y)^-1 up to sign.  Signs are chosen so all traces are positive;
    then X Y Z = -I.
    """
    for name, val in (("l1", l1), ("l2", l2), ("l3", l3)):
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val}")
    a, b, c = l1 / 2.0, l2 / 2.0, l3 / 2.0
    cosh_delta = (math.cosh(c) + math.cosh(a) * math.cosh(b)) / (math.sinh(a) * math.sinh(b))
    k = boost(math.acosh(cosh_delta))
    x = diagonal(l1)
    y = diagonal(-l2).conjugate(k)
    z = -(x @ y).inverse()
    return x, y, z


# The same construction in high precision.  Short cuffs make the collars
# wide, so products of a few letters have norms far beyond what double
# precision can resolve near trace 2; words whose float traces are not
# conclusive get re-evaluated against these matrices.

Mat = tuple  # (a, b, c, d)


def _mp_mul(p: Mat, q: Mat) -> Mat:
    a, b, c, d = p
    e, f, g, h = q
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _mp_inv(p: Mat) -> Mat:
    a, b, c, d = p
    return (d, -b, -c, a)


def _mp_conj(p: Mat, g: Mat) -> Mat:
    return _mp_mul(_mp_mul(g, p), _mp_inv(g))


def _mp_diag(length) -> Mat:
    h = mpmath.mpf(length) / 2
    return (mpmath.exp(h), mpmath.mpf(0), mpmath.mpf(0), mpmath.exp(-h))


def _mp_standardizer(p: Mat) -> Mat:
    a, b, c, d = p
    t = a + d
    if t < 0:
        a, b, c, d, t = -a, -b, -c, -d, -t
    root = mpmath.sqrt(t * t - 4)
    cols = []
    for lam in ((t + root) / 2, (t - root) / 2):
        v1, v2 = (b, lam - a), (lam - d, c)
        n1, n2 = mpmath.hypot(*v1), mpmath.hypot(*v2)
        v, n = (v1, n1) if n1 >= n2 else (v2, n2)
        cols.append((v[0] / n, v[1] / n))
    (p00, p10), (p01, p11) = cols
    det = p00 * p11 - p01 * p10
    if det < 0:
        p01, p11, det = -p01, -p11, -det
    s = mpmath.sqrt(det)
    p00, p01, p10, p11 = p00 / s, p01 / s, p10 / s, p11 / s
    return (p11, -p01, -p10, p00)


def _mp_pants(l1, l2, l3) -> list[Mat]:
    a, b, c = (mpmath.mpf(v) / 2 for v in (l1, l2, l3))
    delta = mpmath.acosh((mpmath.cosh(c) + mpmath.cosh(a) * mpmath.cosh(b)) / (mpmath.sinh(a) * mpmath.sinh(b)))
    h = delta / 2
    k = (mpmath.cosh(h), mpmath.sinh(h), mpmath.sinh(h), mpmath.cosh(h))
    x = _mp_diag(2 * a)
    y = _mp_conj(_mp_diag(-2 * b), k)
    z = tuple(-v for v in _mp_inv(_mp_mul(x, y)))
    return [x, y, z]


def _balancing_shift(gens: list[Mat]) -> float:
    """Shift s along the imaginary axis minimizing the sum of log-norms after
    conjugating by diag(e^{s/2}, e^{-s/2})."""
    ent = np.array([[float(v) for v in g] for g in gens])

    def cost(s):
        lam2 = math.exp(s)
        a, b, c, d = ent.T
        return float(np.sum(np.log(a * a + (lam2 * b) ** 2 + (c / lam2) ** 2 + d * d)))

    res = optimize.minimize_scalar(cost, bounds=(-60.0, 60.0), method="bounded", options={"xatol": 1e-6})
    return float(res.x)


def _to_float(p: Mat) -> MobiusTransform:
    return MobiusTransform(np.array([[float(p[0]), float(p[1])], [float(p[2]), float(p[3])]]), check=False)


def relation_defect(x: MobiusTransform, y: MobiusTransform, z: MobiusTransform) -> float:
    ident = MobiusTransform(np.eye(2), check=False)
    return projective_distance(x @ y @ z, ident)


def pants_crossing_bound(l: float) -> float:
    """Lower bound for non-cuff closed geodesics when cuffs lie in [l, l + 1]."""
    return min((l - 1.0) / 2.0, math.sinh(1.0 / math.sinh(l)))


# ---------------------------------------------------------------------------
# words in the free basis


def free_reduce(word: Sequence[int]) -> Word:
    out: list[int] = []
    for s in word:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def cyclic_reduce(word: Sequence[int]) -> Word:
    w = list(free_reduce(word))
    i, j = 0, len(w) - 1
    while i < j and w[i] == -w[j]:
        i += 1
        j -= 1
    return tuple(w[i:j + 1])


def invert_word(word: Sequence[int]) -> Word:
    return tuple(-s for s in reversed(word))


def canonical_cyclic(word: Sequence[int]) -> Word:
    """Least rotation of w or w^-1: a key for conjugacy classes up to inversion."""
    w = cyclic_reduce(word)
    if not w:
        return w
    cands = []
    for u in (w, invert_word(w)):
        cands.extend(u[i:] + u[:i] for i in range(len(u)))
    return min(cands)


def is_proper_power(word: Sequence[int]) -> bool:
    w = cyclic_reduce(word)
    n = len(w)
    for d in range(1, n // 2 + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return True
    return False


# ---------------------------------------------------------------------------
# surfaces


@dataclass
class PantsSurface:
    """Fenchel-Nielsen data over a tree of pants together with its Fuchsian realisation.

    ``slots[e] = (u, k, w)`` says internal edge e glues cuff k of pants u to
    cuff 0 of its child w.  ``cuffs[v][k]`` are global matrices,
    ``cuff_words[v][k]`` the same elements as words in the basis.
    """

    tree: RootedGraph
    lengths: np.ndarray
    twists: np.ndarray
    boundary_lengths: dict
    slots: list
    cuffs: list
    cuff_words: list
    letters: list
    generators: list = field(repr=False)
    local_cuffs: list = field(repr=False, default_factory=list)
    gluings: list = field(repr=False, default_factory=list)
    parent_edge: dict = field(repr=False, default_factory=dict)
    mp_local: list = field(repr=False, default_factory=list)
    mp_gluings: list = field(repr=False, default_factory=list)

    @property
    def pants_count(self) -> int:
        return self.tree.vertex_count

    @property
    def rank(self) -> int:
        return len(self.generators)

    def evaluate(self, word: Sequence[int]) -> MobiusTransform:
        m = np.eye(2)
        for s in word:
            g = self.generators[abs(s) - 1]
            m = m @ (g.m if s > 0 else g.inverse().m)
        return MobiusTransform(m, check=False)

    def word_string(self, word: Sequence[int]) -> str:
        return " ".join(self.letters[s - 1] if s > 0 else self.letters[-s - 1].upper() for s in word)

    def parse_word(self, text: str) -> Word:
        index = {name: i + 1 for i, name in enumerate(self.letters)}
        out = []
        for tok in text.split():
            if tok in index:
                out.append(index[tok])
            elif tok.lower() in index:
                out.append(-index[tok.lower()])
            else:
                raise ValueError(f"unknown letter {tok!r}")
        return tuple(out)

    def internal_cuff_words(self) -> list[Word]:
        return [canonical_cyclic(self.cuff_words[u][k]) for u, k, _ in self.slots]

    def all_cuff_classes(self) -> set[Word]:
        return {canonical_cyclic(w) for ws in self.cuff_words for w in ws}

    def min_cuff_length(self) -> float:
        return float(min(translation_length(m) for ms in self.cuffs for m in ms))

    def relation_defects(self) -> list[float]:
        """Per pants, in its own frame."""
        return [relation_defect(*ms) for ms in self.local_cuffs]

    def relative_frame(self, top: int, v: int) -> MobiusTransform:
        """Map from the frame of v to the frame of its ancestor ``top``."""
        m = MobiusTransform(np.eye(2), check=False)
        while v != top:
            e = self.parent_edge[v]
            if e is None:
                raise ValueError(f"{top} is not an ancestor")
            m = self.gluings[e] @ m
            v = self.slots[e][0]
        return m

    def window_generators(self, window: Sequence[int]) -> list[Mat]:
        """High-precision generators of a connected window, in the frame of its top pants."""
        top = window[0]
        with mpmath.workdps(MP_DPS):
            out = [self.mp_local[top][0], self.mp_local[top][1]]
            for w in window[1:]:
                g = (mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(1))
                v = w
                while v != top:
                    e = self.parent_edge[v]
                    if e is None:
                        raise ValueError(f"{top} is not an ancestor of {w}")
                    g = _mp_mul(self.mp_gluings[e], g)
                    v = self.slots[e][0]
                out.append(_mp_conj(self.mp_local[w][1], g))
            if len(window) > 1:
                # move the base point onto the cuff shared with the first child,
                # then slide it along that axis to balance the generator norms
                e = self.parent_edge[window[1]]
                a = _mp_standardizer(self.mp_local[top][self.slots[e][1]])
                out = [_mp_conj(g, a) for g in out]
                s = _balancing_shift(out)
                out = [_mp_conj(g, _mp_diag(s)) for g in out]
        return out

    def gluing_defects(self) -> list[float]:
        """Per internal edge: max trace error of the two glued cuffs against 2 cosh(l/2)."""
        out = []
        for e, (u, k, w) in enumerate(self.slots):
            want = 2.0 * math.cosh(self.lengths[e] / 2.0)
            a = self.local_cuffs[u][k]
            b = self.local_cuffs[w][0].conjugate(self.gluings[e])
            out.append(max(abs(abs(a.trace) - want), abs(abs(b.trace) - want),
                           projective_distance(a, b.inverse())))
        return out

    def to_csv(self) -> str:
        """Per-edge Fenchel-Nielsen coordinates."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["edge", "u", "v", "length", "twist"])
        for e, (u, v) in enumerate(self.tree.edges):
            w.writerow([e, u, v, repr(float(self.lengths[e])), repr(float(self.twists[e]))])
        return buf.getvalue()


def _tree_slots(tree: RootedGraph) -> tuple[list, dict]:
    n = tree.vertex_count
    if len(tree.edges) != n - 1 or not tree.is_connected():
        raise ValueError("tree portion must be a connected tree")
    if any(u == v for u, v in tree.edges):
        raise ValueError("tree portion must not contain loops")
    if np.any(tree.degrees > 3):
        raise ValueError("tree portion must have degree at most 3")
    incident: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e, (u, v) in enumerate(tree.edges):
        incident[u].append((e, v))
        incident[v].append((e, u))
    slots: list = [None] * len(tree.edges)
    order = [tree.root]
    parent_edge = {tree.root: None}
    for u in order:
        k = 0 if parent_edge[u] is None else 1
        for e, w in incident[u]:
            if e == parent_edge[u]:
                continue
            slots[e] = (u, k, w)
            parent_edge[w] = e
            k += 1
            order.append(w)
    return slots, {"order": order, "parent_edge": parent_edge}


def glue_forest(tree: RootedGraph, lengths: Sequence[float], twists: Sequence[float],
                boundary_lengths: float | Mapping = 1.0) -> PantsSurface:
    """Glue one pants per tree vertex along the internal edges.

    ``lengths`` and ``twists`` are indexed by edge; twists are fractions of
    the cuff length in [0, 1).  ``boundary_lengths`` is a constant or a map
    (vertex, slot) -> length for the cuffs not used by an edge.
    """
    lengths = np.asarray(lengths, dtype=float).reshape(-1)
    twists = np.asarray(twists, dtype=float).reshape(-1)
    if lengths.shape[0] != tree.edge_count or twists.shape[0] != tree.edge_count:
        raise ValueError("need one length and one twist per internal edge")
    if np.any(~(lengths > 0)):
        raise ValueError("cuff lengths must be positive")
    if np.any((twists < 0) | (twists >= 1)):
        raise ValueError("twists must lie in [0, 1)")
    slots, info = _tree_slots(tree)
    order, parent_edge = info["order"], info["parent_edge"]

    n = tree.vertex_count
    slot_len: list[list[float | None]] = [[None] * 3 for _ in range(n)]
    for e, (u, k, w) in enumerate(slots):
        slot_len[u][k] = lengths[e]
        slot_len[w][0] = lengths[e]
    bl: dict = {}
    for v in range(n):
        for k in range(3):
            if slot_len[v][k] is None:
                val = boundary_lengths.get((v, k), 1.0) if isinstance(boundary_lengths, Mapping) else boundary_lengths
                if not val > 0:
                    raise ValueError(f"boundary length at {(v, k)} must be positive")
                slot_len[v][k] = float(val)
                bl[(v, k)] = float(val)

    root = tree.root
    letters = ["x"] + [f"y{v}" for v in range(n)]
    with mpmath.workdps(MP_DPS):
        mp_local = [_mp_pants(*slot_len[v]) for v in range(n)]
        mp_gluings: list = [None] * len(slots)
        rotate = (mpmath.mpf(0), mpmath.mpf(1), mpmath.mpf(-1), mpmath.mpf(0))
        for w in order[1:]:
            e = parent_edge[w]
            u, k, _ = slots[e]
            # each gluing maps the child's own frame into the parent's
            a_c = _mp_standardizer(mp_local[u][k])
            a_d = _mp_standardizer(mp_local[w][0])
            glue = _mp_mul(_mp_mul(_mp_inv(a_c), rotate), a_d)
            twist = _mp_conj(_mp_diag(mpmath.mpf(twists[e]) * mpmath.mpf(lengths[e])), _mp_inv(a_c))
            mp_gluings[e] = _mp_mul(twist, glue)
    local = [[_to_float(m) for m in ms] for ms in mp_local]
    gluings = [_to_float(g) for g in mp_gluings]

    frames: list = [None] * n
    words: list = [None] * n
    frames[root] = MobiusTransform(np.eye(2), check=False)
    words[root] = [(1,), (root + 2,), (-(root + 2), -1)]
    for w in order[1:]:
        e = parent_edge[w]
        u, k, _ = slots[e]
        frames[w] = frames[u] @ gluings[e]
        xw = invert_word(words[u][k])
        words[w] = [xw, (w + 2,), free_reduce((-(w + 2),) + invert_word(xw))]

    cuffs = [[m.conjugate(frames[v]) for m in local[v]] for v in range(n)]
    gens = [cuffs[root][0]] + [cuffs[v][1] for v in range(n)]
    return PantsSurface(tree=tree, lengths=lengths, twists=twists, boundary_lengths=bl,
                        slots=slots, cuffs=cuffs, cuff_words=words, letters=letters,
                        generators=gens, local_cuffs=local, gluings=gluings,
                        parent_edge=parent_edge, mp_local=mp_local, mp_gluings=mp_gluings)


def trivalent_tree_ball(radius: int) -> RootedGraph:
    """The ball of the given radius around a vertex of the 3-valent tree."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    edges = []
    frontier = [(0, 3)]
    count = 1
    for _ in range(radius):
        nxt = []
        for v, kids in frontier:
            for _ in range(kids):
                edges.append((v, count))
                nxt.append((count, 2))
                count += 1
        frontier = nxt
    return RootedGraph(count, tuple(edges), root=0)


def sample_surface(tree: RootedGraph, nu: tuple[float, float], rng: np.random.Generator,
                   boundary_lengths: float | Mapping = 1.0) -> PantsSurface:
    """Cuff lengths uniform on ``nu``, twists uniform on [0, 1)."""
    lo, hi = nu
    lengths = rng.uniform(lo, hi, size=tree.edge_count)
    twists = rng.uniform(0.0, 1.0, size=tree.edge_count)
    return glue_forest(tree, lengths, twists, boundary_lengths)


# ---------------------------------------------------------------------------
# short geodesics


@dataclass(frozen=True)
class Geodesic:
    word: Word
    length: float


def _windows(surface: PantsSurface, size: int) -> list[list[int]]:
    """Connected vertex sets of min(size, P) pants, listed top vertex first."""
    n = surface.pants_count
    size = min(size, n)
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in surface.tree.edges:
        adj[u].append(v)
        adj[v].append(u)
    found: set[frozenset] = set()
    stack = [frozenset([v]) for v in range(n)]
    while stack:
        s = stack.pop()
        if len(s) == size:
            found.add(s)
            continue
        for v in s:
            for w in adj[v]:
                if w not in s:
                    stack.append(s | {w})
    depth = surface.tree.distances_from(surface.tree.root)
    return [sorted(s, key=lambda v: (depth[v], v)) for s in sorted(found, key=sorted)]


def _enumerate_candidates(mats: np.ndarray, max_length: int, cutoff_trace: float):
    """Reduced, cyclically reduced words up to ``max_length`` whose |trace|
    might be below ``cutoff_trace``, with a rigorous bound on the float error.

    Letter j < k is generator j, letter j >= k the inverse of generator j - k.
    ``mats`` are the correctly rounded generators.  For a computed product P
    and an exact one Q, ||P - Q|| <= B is propagated as
    B' = B ||G|| + 4 u (||P|| + B) ||G||, which covers both the rounding of G
    and of the product; the trace error is at most sqrt(2) B.  Only words
    starting with their smallest letter are built: every cyclic class has
    such a rotation, with the same trace.
    """
    k = mats.shape[0]
    inv = np.stack([[mats[:, 1, 1], -mats[:, 0, 1]], [-mats[:, 1, 0], mats[:, 0, 0]]]).transpose(2, 0, 1)
    table = np.concatenate([mats, inv])
    norms = np.linalg.norm(table, axis=(1, 2))
    inverse_of = np.concatenate([np.arange(k, 2 * k), np.arange(k)])
    u = UNIT_ROUNDOFF
    words = np.arange(2 * k).reshape(-1, 1)
    cur = table.copy()
    err = u * norms
    out = []
    for length in range(1, max_length + 1):
        if length > 1:
            last, first = words[:, -1], words[:, 0]
            new_words, new_mats, new_err = [], [], []
            cur_norm = np.linalg.norm(cur, axis=(1, 2))
            for j in range(2 * k):
                keep = (last != inverse_of[j]) & (first <= j)
                new_words.append(np.column_stack([words[keep], np.full(keep.sum(), j)]))
                new_mats.append(np.einsum("nij,jk->nik", cur[keep], table[j]))
                new_err.append(err[keep] * norms[j] + 4 * u * (cur_norm[keep] + err[keep]) * norms[j])
            words = np.concatenate(new_words)
            cur = np.concatenate(new_mats)
            err = np.concatenate(new_err)
        cyc = words[:, 0] != inverse_of[words[:, -1]]
        tr = np.abs(cur[:, 0, 0] + cur[:, 1, 1])
        terr = 2.0 * math.sqrt(2.0) * err  # factor 2 of slack
        hit = np.flatnonzero(cyc & (tr - terr < cutoff_trace))
        for i in hit:
            out.append((tuple(int(j) for j in words[i]), float(tr[i]), float(terr[i])))
    return out


def _mp_trace(gens: list[Mat], word: Sequence[int]):
    k = len(gens)
    with mpmath.workdps(MP_DPS):
        p = (mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(1))
        for j in word:
            p = _mp_mul(p, gens[j] if j < k else _mp_inv(gens[j - k]))
        return abs(p[0] + p[3])


def short_geodesics(surface: PantsSurface, max_length: int, cutoff: float, window: int = 2) -> list[Geodesic]:
    """Primitive closed geodesics shorter than ``cutoff`` among words of bounded length.

    Words are enumerated in local bases of windows of ``window`` adjacent
    pants (the fundamental group of the union), up to ``max_length`` local
    letters, then rewritten in the global basis and deduplicated by cyclic
    class up to inversion.  Float traces are used only when their error bound
    decides the comparison; otherwise the trace is recomputed in high
    precision.  Every returned item is a closed geodesic of the stated
    length; completeness holds only relative to the windows and the length
    bound.
    """
    if max_length < 1:
        raise ValueError("word length bound must be at least 1")
    if cutoff <= 0:
        return []
    cutoff_trace = 2.0 * math.cosh(cutoff / 2.0)
    found: dict[Word, float] = {}
    for win in _windows(surface, window):
        top = win[0]
        local_words = [surface.cuff_words[top][0], surface.cuff_words[top][1]]
        local_words += [surface.cuff_words[w][1] for w in win[1:]]
        gens = surface.window_generators(win)
        mats = np.array([[[float(g[0]), float(g[1])], [float(g[2]), float(g[3])]] for g in gens])
        k = len(local_words)
        for lw, tr, terr in _enumerate_candidates(mats, max_length, cutoff_trace):
            glob: list[int] = []
            for j in lw:
                glob.extend(local_words[j] if j < k else invert_word(local_words[j - k]))
            key = canonical_cyclic(glob)
            if not key or is_proper_power(key) or key in found:
                continue
            if terr > 1e-12 * max(tr, 1.0):
                tr_exact = _mp_trace(gens, lw)
                if tr_exact <= 2:
                    raise ValueError(f"non-hyperbolic element {surface.word_string(key)}: group is not discrete")
                tr = float(tr_exact)
            length = 2.0 * math.acosh(tr / 2.0) if tr > 2.0 else 0.0
            if length < cutoff:
                found[key] = length
    return sorted((Geodesic(w, l) for w, l in found.items()), key=lambda g: (g.length, len(g.word), g.word))


def geodesics_csv(surface: PantsSurface, geodesics: Sequence[Geodesic]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["word", "length"])
    for g in geodesics:
        w.writerow([surface.word_string(g.word), repr(g.length)])
    return buf.getvalue()


def pants_bound_violations(surface: PantsSurface, geodesics: Sequence[Geodesic]) -> list[Geodesic]:
    """Non-cuff geodesics shorter than the pants bound for l = min cuff length."""
    bound = pants_crossing_bound(surface.min_cuff_length())
    cuffs = surface.all_cuff_classes()
    return [g for g in geodesics if g.word not in cuffs and g.length < bound]
