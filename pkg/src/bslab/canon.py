"""Canonical certificates for small rooted multigraphs.

Trees use the AHU encoding.  Everything else goes through colour refinement
followed by an exhaustive individualization search that keeps the
lexicographically smallest relabelled edge list.  Both are exact: equal
certificates iff rooted-isomorphic.
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence


def _adjacency(n: int, edges: Sequence[tuple[int, int]]) -> list[Counter]:
    adj = [Counter() for _ in range(n)]
    for u, v in edges:
        adj[u][v] += 1
        if u != v:
            adj[v][u] += 1
    return adj


def _ahu(n: int, edges: Sequence[tuple[int, int]], root: int) -> str:
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    parent = [-1] * n
    order = [root]
    parent[root] = root
    for x in order:
        for y in adj[x]:
            if parent[y] < 0:
                parent[y] = x
                order.append(y)
    code = [""] * n
    for x in reversed(order):
        kids = sorted(code[y] for y in adj[x] if parent[y] == x and y != root)
        code[x] = "(" + "".join(kids) + ")"
    return code[root]


def _refine(colors: list[int], adj: list[Counter]) -> list[int]:
    """Iterate colour refinement to the coarsest equitable partition.

    Colours are renumbered by sorted signature, so the result depends only on
    the isomorphism type of (graph, initial colouring).
    """
    n = len(colors)
    while True:
        sigs = [
            (colors[v], tuple(sorted((colors[w], k) for w, k in adj[v].items())))
            for v in range(n)
        ]
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(ranks) == len(set(colors)):
            return new
        colors = new


def _encode(perm: list[int], edges: Sequence[tuple[int, int]]) -> tuple:
    return tuple(sorted(tuple(sorted((perm[u], perm[v]))) for u, v in edges))


def _search(colors: list[int], adj: list[Counter], edges, best: list) -> None:
    colors = _refine(colors, adj)
    n = len(colors)
    cells: dict[int, list[int]] = {}
    for v, c in enumerate(colors):
        cells.setdefault(c, []).append(v)
    if len(cells) == n:
        enc = _encode(colors, edges)
        if best[0] is None or enc < best[0]:
            best[0] = enc
        return
    target = min(c for c, members in cells.items() if len(members) > 1)
    for v in cells[target]:
        # split v off the front of its cell; doubling keeps colours integral
        split = [2 * c + (c == target and w != v) for w, c in enumerate(colors)]
        _search(split, adj, edges, best)


def ball_certificate_from_edges(n: int, edges: Sequence[tuple[int, int]], root: int) -> bytes:
    edges = [(int(u), int(v)) for u, v in edges]
    is_tree = len(edges) == n - 1 and all(u != v for u, v in edges)
    if is_tree:
        return b"T" + _ahu(n, edges, root).encode()
    adj = _adjacency(n, edges)
    colors = [0 if v == root else 1 for v in range(n)]
    best: list = [None]
    _search(colors, adj, edges, best)
    body = ";".join(f"{u},{v}" for u, v in best[0])
    return b"G" + f"{n}|".encode() + body.encode()
