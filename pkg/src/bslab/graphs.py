"""Rooted finite multigraphs and their local (Benjamini-Schramm) statistics.

Edges are stored as a tuple of vertex pairs; loops and parallel edges are
allowed.  Each edge ``e = (u, v)`` yields two half-edges, ``2e`` (u -> v) and
``2e + 1`` (v -> u); the reverse of half-edge ``h`` is ``h ^ 1``.  Walks that
never use ``h`` followed by ``h ^ 1`` are non-backtracking, and the
non-backtracking walks from a root enumerate the universal-cover ball.
"""

from __future__ import annotations

import csv
import io
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from bslab.canon import ball_certificate_from_edges

Edge = tuple[int, int]
Label = tuple[int, int]


@dataclass(frozen=True)
class RootedGraph:
    vertex_count: int
    edges: tuple[Edge, ...]
    root: int = 0
    labels: tuple[Label, ...] | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.vertex_count < 1:
            raise ValueError("vertex_count must be positive")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        for u, v in edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{self.vertex_count - 1}")
        self._check_vertex(self.root)
        if self.labels is not None:
            labels = tuple((int(a), int(b)) for a, b in self.labels)
            if len(labels) != len(edges):
                raise ValueError("one label per edge required")
            object.__setattr__(self, "labels", labels)

    def _check_vertex(self, v: int) -> None:
        if not (0 <= v < self.vertex_count):
            raise ValueError(f"invalid vertex index {v}")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def with_root(self, root: int) -> "RootedGraph":
        return RootedGraph(self.vertex_count, self.edges, root, self.labels)

    @cached_property
    def half_edges(self) -> list[list[tuple[int, int]]]:
        """Per vertex, the outgoing half-edges as ``(half_edge_id, head)``."""
        out: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
        for e, (u, v) in enumerate(self.edges):
            out[u].append((2 * e, v))
            out[v].append((2 * e + 1, u))
        return out

    @cached_property
    def degrees(self) -> np.ndarray:
        """Degrees with loops counted twice."""
        deg = np.zeros(self.vertex_count, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def neighbors(self, v: int) -> list[int]:
        """Neighbours of ``v`` with multiplicity (a loop lists ``v`` twice)."""
        return [w for _, w in self.half_edges[v]]

    def distances_from(self, v: int) -> np.ndarray:
        """BFS distances from ``v``; unreachable vertices get -1."""
        key = ("dist", v)
        if key not in self._cache:
            self._check_vertex(v)
            dist = np.full(self.vertex_count, -1, dtype=np.int64)
            dist[v] = 0
            queue = deque([v])
            while queue:
                x = queue.popleft()
                for _, y in self.half_edges[x]:
                    if dist[y] < 0:
                        dist[y] = dist[x] + 1
                        queue.append(y)
            self._cache[key] = dist
        return self._cache[key]

    def distance(self, u: int, v: int) -> int:
        return int(self.distances_from(u)[v])

    def ball(self, v: int, radius: int) -> tuple[list[int], list[Edge]]:
        """Vertices within ``radius`` of ``v`` (root first, BFS order) and the
        induced edges, relabelled to positions in that list."""
        dist = self.distances_from(v)
        order = sorted((int(d), int(x)) for x, d in enumerate(dist) if 0 <= d <= radius)
        verts = [x for _, x in order]
        index = {x: i for i, x in enumerate(verts)}
        edges = [(index[a], index[b]) for a, b in self.edges if a in index and b in index]
        return verts, edges

    def is_connected(self) -> bool:
        return bool(np.all(self.distances_from(0) >= 0))


# ---------------------------------------------------------------------------
# construction and serialization


def cycle_graph(n: int, root: int = 0) -> RootedGraph:
    if n == 1:
        return RootedGraph(1, ((0, 0),), root)
    return RootedGraph(n, tuple((i, (i + 1) % n) for i in range(n)), root)


def path_graph(n: int, root: int = 0) -> RootedGraph:
    return RootedGraph(n, tuple((i, i + 1) for i in range(n - 1)), root)


def complete_graph(n: int, root: int = 0) -> RootedGraph:
    return RootedGraph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)), root)


def relabel(g: RootedGraph, perm: Sequence[int]) -> RootedGraph:
    """Image of ``g`` under the vertex bijection ``v -> perm[v]``."""
    edges = tuple((perm[u], perm[v]) for u, v in g.edges)
    return RootedGraph(g.vertex_count, edges, perm[g.root], g.labels)


def dumps_graph(g: RootedGraph) -> str:
    lines = [f"{g.vertex_count} {g.edge_count} {g.root}"]
    for i, (u, v) in enumerate(g.edges):
        if g.labels is None:
            lines.append(f"{u} {v}")
        else:
            lines.append(f"{u} {v} {g.labels[i][0]} {g.labels[i][1]}")
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> RootedGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise ValueError("empty graph file")
    n, m, root = (int(x) for x in rows[0])
    body = rows[1:]
    if len(body) != m:
        raise ValueError(f"header announces {m} edges, found {len(body)}")
    edges = tuple((int(r[0]), int(r[1])) for r in body)
    labelled = [len(r) >= 4 for r in body]
    labels = None
    if m and all(labelled):
        labels = tuple((int(r[2]), int(r[3])) for r in body)
    elif any(labelled):
        raise ValueError("either all or no edges carry labels")
    return RootedGraph(n, edges, root, labels)


def write_graph(g: RootedGraph, path: str | Path) -> None:
    Path(path).write_text(dumps_graph(g))


def read_graph(path: str | Path) -> RootedGraph:
    return loads_graph(Path(path).read_text())


# ---------------------------------------------------------------------------
# injectivity radius and thin part


def injectivity_radius(g: RootedGraph, v: int, r_max: int) -> int:
    """Largest R <= r_max such that the induced ball B(v, R) is a tree,
    i.e. rooted-isomorphic to the radius-R ball of the universal cover.

    Non-backtracking walks from ``v`` are unfolded layer by layer.  B(v, R)
    is a tree iff walks of length <= R reach distinct vertices and no walk of
    length R + 1 lands back inside the ball.  Returns ``r_max`` when the cap
    is reached (meaning "at least r_max").
    """
    g._check_vertex(v)
    if r_max < 0:
        raise ValueError("r_max must be nonnegative")
    seen = {v}
    frontier: list[tuple[int, int]] = [(v, -1)]
    radius = 0
    while True:
        step: list[tuple[int, int]] = []
        for x, came_by in frontier:
            for h, y in g.half_edges[x]:
                if h != came_by ^ 1:
                    step.append((y, h))
        ends = [y for y, _ in step]
        if any(y in seen for y in ends):
            return max(radius - 1, 0)
        if radius == r_max:
            return r_max
        if len(set(ends)) != len(ends):
            return radius
        seen.update(ends)
        frontier = step
        radius += 1


def thin_fraction(g: RootedGraph, radius: int) -> float:
    """Fraction of vertices whose injectivity radius is < ``radius``."""
    if radius <= 0:
        return 0.0
    thin = sum(injectivity_radius(g, v, radius) < radius for v in range(g.vertex_count))
    return thin / g.vertex_count


# ---------------------------------------------------------------------------
# rooted-ball statistics


@dataclass(frozen=True)
class BallClass:
    radius: int
    certificate: bytes


@dataclass(frozen=True)
class LocalStatistics:
    radius: int
    distribution: dict[bytes, float]

    def __post_init__(self):
        total = sum(self.distribution.values())
        if self.distribution and abs(total - 1.0) > 1e-12:
            raise ValueError(f"frequencies sum to {total}, not 1")

    def classes(self) -> list[BallClass]:
        return [BallClass(self.radius, c) for c in sorted(self.distribution)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["certificate_hex", "frequency"])
        for cert in sorted(self.distribution):
            w.writerow([cert.hex(), repr(self.distribution[cert])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, radius: int) -> "LocalStatistics":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(radius, {bytes.fromhex(r["certificate_hex"]): float(r["frequency"]) for r in rows})


def ball_class(g: RootedGraph, v: int, radius: int) -> BallClass:
    verts, edges = g.ball(v, radius)
    return BallClass(radius, ball_certificate_from_edges(len(verts), edges, 0))


def ball_statistics(g: RootedGraph, radius: int) -> LocalStatistics:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    counts = Counter(ball_class(g, v, radius).certificate for v in range(g.vertex_count))
    n = g.vertex_count
    return LocalStatistics(radius, {c: k / n for c, k in counts.items()})


def bs_distance(s1: LocalStatistics, s2: LocalStatistics) -> float:
    """Total-variation distance between two rooted-ball distributions."""
    if s1.radius != s2.radius:
        raise ValueError(f"radius mismatch: {s1.radius} != {s2.radius}")
    keys = set(s1.distribution) | set(s2.distribution)
    return 0.5 * sum(abs(s1.distribution.get(k, 0.0) - s2.distribution.get(k, 0.0)) for k in keys)


# ---------------------------------------------------------------------------
# mass transport

Payoff = Callable[[RootedGraph, int, int], float]


def uniform_root_ensemble(g: RootedGraph) -> list[tuple[float, RootedGraph]]:
    w = 1.0 / g.vertex_count
    return [(w, g.with_root(v)) for v in range(g.vertex_count)]


def mass_transport_check(
    ensemble: Iterable[tuple[float, RootedGraph]], payoff: Payoff, radius: int
) -> tuple[float, float]:
    """Expected mass sent out of the root versus mass received by it.

    Only pairs at distance <= ``radius`` are transported.  Unimodular
    ensembles give equal sides.
    """
    lhs = rhs = 0.0
    for weight, g in ensemble:
        dist = g.distances_from(g.root)
        out = into = 0.0
        for v in np.flatnonzero((dist >= 0) & (dist <= radius)):
            out += payoff(g, g.root, int(v))
            into += payoff(g, int(v), g.root)
        lhs += weight * out
        rhs += weight * into
    return lhs, rhs


def payoff_adjacent(g: RootedGraph, u: int, v: int) -> float:
    return float(u != v and g.distance(u, v) == 1)


def payoff_distance_two(g: RootedGraph, u: int, v: int) -> float:
    return float(g.distance(u, v) == 2)


def payoff_target_degree(g: RootedGraph, u: int, v: int) -> float:
    return float(g.degrees[v]) / (1 + g.distance(u, v))


def payoff_leaf_neighbor(g: RootedGraph, u: int, v: int) -> float:
    """1 if ``v`` is a degree-1 neighbour of ``u``."""
    return float(u != v and g.distance(u, v) == 1 and g.degrees[v] == 1)


def payoff_source_weighted(g: RootedGraph, u: int, v: int) -> float:
    return float(g.degrees[u]) * float(np.exp(-g.distance(u, v)))


PAYOFF_SUITE: dict[str, Payoff] = {
    "adjacent": payoff_adjacent,
    "distance_two": payoff_distance_two,
    "target_degree": payoff_target_degree,
    "leaf_neighbor": payoff_leaf_neighbor,
    "source_weighted": payoff_source_weighted,
}
