import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bslab.covers import (
    PermRep,
    build_cover,
    cayley_graph,
    circle,
    dumps_permutations,
    fixed_points,
    fixity_scan,
    genus2_assignment,
    girth,
    is_transitive_assignment,
    loads_permutations,
    permutation_model_graph,
    projective_fixed_point_counts,
    projective_line_rep,
    projective_permutation,
    schreier_graph,
    sl2_order,
    sl2_quotient,
    surface_complex,
    torus_complex,
    torus_grid_assignment,
    wedge_of_circles,
    with_generators,
)
from bslab.graphs import RootedGraph, cycle_graph, path_graph


def _brute_sl2_order(N):
    return sum(1 for a, b, c, d in itertools.product(range(N), repeat=4) if (a * d - b * c) % N == 1)


def _girth_oracle(g: RootedGraph):
    # shortest cycle through edge e = 1 + distance between its ends without e
    best = None
    for e, (u, v) in enumerate(g.edges):
        if u == v:
            return 1
        h = nx.MultiGraph()
        h.add_nodes_from(range(g.vertex_count))
        h.add_edges_from(x for i, x in enumerate(g.edges) if i != e)
        try:
            d = nx.shortest_path_length(h, u, v)
        except nx.NetworkXNoPath:
            continue
        best = d + 1 if best is None else min(best, d + 1)
    return best


# ---------------------------------------------------------------------------
# permutation representations


def test_schreier_graph_examples():
    bouquet = schreier_graph(PermRep(1, (np.array([0]), np.array([0]))))
    assert bouquet.vertex_count == 1 and bouquet.edges == ((0, 0), (0, 0))
    shift = np.roll(np.arange(5), -1)
    g = schreier_graph(PermRep(5, (shift,)))
    assert sorted(tuple(sorted(e)) for e in g.edges) == sorted(tuple(sorted(e)) for e in cycle_graph(5).edges)
    with pytest.raises(ValueError, match="empty generator"):
        schreier_graph(PermRep(3, ()))


def test_schreier_graph_random_pair_is_regular():
    rng = np.random.default_rng(0)
    g = schreier_graph(PermRep(100, (rng.permutation(100), rng.permutation(100))))
    assert np.all(g.degrees == 4)
    assert g.degrees.sum() == 2 * g.edge_count


def test_permutation_model_graph_is_regular():
    g = permutation_model_graph(50, 6, np.random.default_rng(1))
    assert np.all(g.degrees == 6)
    with pytest.raises(ValueError):
        permutation_model_graph(10, 3, np.random.default_rng(1))


def test_permutation_text_round_trip():
    rng = np.random.default_rng(2)
    perms = [rng.permutation(7) for _ in range(3)]
    back = loads_permutations(dumps_permutations(perms))
    assert all(np.array_equal(a, b) for a, b in zip(perms, back))


def test_word_permutation_composition():
    rng = np.random.default_rng(4)
    a, b = rng.permutation(6), rng.permutation(6)
    rep = PermRep(6, (a, b))
    w = rep.word_permutation([(0, 1), (1, -1)])
    assert np.array_equal(w, a[np.argsort(b)])
    assert fixed_points([(0, 1), (0, -1)], rep) == 6


# ---------------------------------------------------------------------------
# SL(2, Z/N)


@pytest.mark.parametrize("N,order", [(2, 6), (3, 24), (5, 120)])
def test_sl2_orders(N, order):
    assert sl2_quotient(N).order == order == _brute_sl2_order(N)


@pytest.mark.parametrize("N", [4, 6, 7, 8, 9])
def test_sl2_order_formula_matches_brute_force(N):
    assert sl2_order(N) == _brute_sl2_order(N) == sl2_quotient(N).order


def test_sl2_size_guard():
    with pytest.raises(ValueError, match="size guard"):
        sl2_quotient(200)


def test_group_tables_are_consistent():
    g = sl2_quotient(7)
    rng = np.random.default_rng(5)
    i, j, k = rng.integers(0, g.order, size=3)
    assert g.mul(g.mul(i, j), k) == g.mul(i, g.mul(j, k))
    assert g.mul(i, g.inv(i)) == g.identity
    assert np.all(g.right_table[g.identity] == np.array(g.generators))


def test_cayley_graph_of_cyclic_group_is_cycle():
    g = sl2_quotient(6)
    shift = g.index_of((1, 1, 0, 1))  # order 6 unipotent
    cyc = with_generators(g, [shift, g.inv(shift)])
    cay = cayley_graph(cyc)
    # the Cayley graph of <u> is a 6-cycle inside the (disconnected) group graph
    comp = cay.distances_from(cay.root)
    assert int((comp >= 0).sum()) == 6
    assert girth(cay, roots=[cay.root]) == 6
    assert girth(cycle_graph(6)) == 6


def test_cayley_rejects_identity_generator():
    g = sl2_quotient(5)
    with pytest.raises(ValueError, match="identity"):
        cayley_graph(with_generators(g, [g.identity]))


def test_girth_of_trees_is_acyclic_sentinel():
    assert girth(path_graph(6)) is None
    assert girth(RootedGraph(4, ((0, 1), (0, 2), (0, 3)))) is None


@pytest.mark.parametrize("p", [5, 7])
def test_cayley_girth_matches_edge_deletion_oracle(p):
    cay = cayley_graph(sl2_quotient(p))
    assert np.all(cay.degrees == 4)
    assert girth(cay, roots=[cay.root]) == girth(cay) == _girth_oracle(cay)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.data())
def test_girth_matches_oracle_on_random_multigraphs(n, data):
    m = data.draw(st.integers(0, 2 * n))
    ends = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=m, max_size=m))
    g = RootedGraph(n, tuple(ends))
    assert girth(g) == _girth_oracle(g)


# ---------------------------------------------------------------------------
# projective line and fixity


def test_unipotent_fixes_one_point():
    assert fixed_points(projective_permutation((1, 1, 0, 1), 5)) == 1
    assert fixed_points(np.arange(9)) == 9


@pytest.mark.parametrize("p", [5, 7, 11])
def test_fixed_point_counts_match_permutations(p):
    g = sl2_quotient(p)
    counts = projective_fixed_point_counts(g)
    brute = [fixed_points(projective_permutation(m, p)) for m in g.elements]
    assert counts.tolist() == brute
    assert counts.sum() == g.order  # Burnside: one orbit, and +-I both fix everything


def test_projective_rep_is_transitive_and_requires_prime():
    rep = projective_line_rep(sl2_quotient(7))
    assert rep.degree == 8 and rep.is_transitive
    with pytest.raises(ValueError, match="prime"):
        projective_line_rep(sl2_quotient(6))


def test_fixity_scan():
    g = sl2_quotient(5)
    scan = fixity_scan(g, projective_line_rep(g), 3)
    assert scan.rows[0] == ("", 0, 6, 6, 1.0)
    # reduced words on 2 generator pairs: 1 + 4 + 12 + 36
    assert len(scan.rows) == 53
    assert scan.max_ratio <= 2 / 6
    header = scan.to_csv().splitlines()[0]
    assert header == "word_string,length,fix,index,ratio"


def test_fixity_scan_rejects_intransitive_action():
    g = sl2_quotient(5)
    ident = np.arange(6)
    with pytest.raises(ValueError, match="transitive"):
        fixity_scan(g, PermRep(6, tuple(ident for _ in g.generators)), 2)


# ---------------------------------------------------------------------------
# complexes and covers


def test_boundary_maps_compose_to_zero():
    for c in (surface_complex(2), torus_complex(), build_cover(surface_complex(2), genus2_assignment(4, np.random.default_rng(0)))):
        d1, d2 = c.boundary(1), c.boundary(2)
        assert not np.any(d1 @ d2)


def test_trivial_cover_is_isomorphic():
    base = surface_complex(2)
    cover = build_cover(base, [np.arange(1)] * 4)
    assert cover == base


def test_double_cover_of_circle():
    cover = build_cover(circle(), [np.array([1, 0])])
    assert cover.cell_counts == (2, 2, 0)
    assert cover.euler_characteristic == 0 and cover.is_connected()


def test_genus2_index3_cover_euler_characteristic():
    rng = np.random.default_rng(11)
    while True:
        assignment = genus2_assignment(3, rng)
        if is_transitive_assignment(assignment):
            break
    cover = build_cover(surface_complex(2), assignment)
    v, e, f = cover.cell_counts
    assert (v, e, f) == (3, 12, 3)
    assert v - e + f == -6 == 3 * surface_complex(2).euler_characteristic


def test_torus_grid_cover():
    cover = build_cover(torus_complex(), torus_grid_assignment(3))
    assert cover.cell_counts == (9, 18, 9)
    assert cover.euler_characteristic == 0


def test_cover_rejects_bad_assignments():
    with pytest.raises(ValueError, match="one permutation per 1-cell"):
        build_cover(wedge_of_circles(2), [np.arange(3)])
    with pytest.raises(ValueError, match="monodromy"):
        build_cover(torus_complex(), [np.array([1, 2, 0]), np.array([1, 0, 2])])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_euler_characteristic_is_multiplicative(n, seed):
    rng = np.random.default_rng(seed)
    base = wedge_of_circles(3)
    cover = build_cover(base, [rng.permutation(n) for _ in range(3)])
    assert cover.euler_characteristic == n * base.euler_characteristic
