import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from bslab.covers import (
    build_cover,
    circle,
    filled_triangle,
    genus2_assignment,
    surface_complex,
    torus_complex,
    torus_grid_assignment,
    wedge_of_circles,
)
from bslab.graphs import RootedGraph, cycle_graph, path_graph
from bslab.spectral import (
    LimitSpectralMeasure,
    SpectralDensity,
    adjacency,
    betti,
    eigenvalues,
    empirical_kolmogorov,
    kernel_multiplicity,
    kesten_mckay_density,
    kolmogorov_distance,
    laplacian,
    limit_cdf,
    lueck_ceiling,
    lueck_grid,
    lueck_tail_statistic,
    spectral_cdf,
)


def _cycle_spectrum(n):
    return np.sort(2.0 - 2.0 * np.cos(2.0 * np.pi * np.arange(n) / n))


# ---------------------------------------------------------------------------
# Laplacians and eigenvalues


def test_laplacian_examples():
    edge = RootedGraph(2, ((0, 1),))
    assert laplacian(edge).tolist() == [[1, -1], [-1, 1]]
    assert np.allclose(eigenvalues(laplacian(cycle_graph(3))), [0, 3, 3], atol=1e-12)
    assert np.allclose(eigenvalues(laplacian(filled_triangle(), 1)), [3, 3, 3], atol=1e-12)


def test_laplacian_degree_errors():
    with pytest.raises(ValueError, match="degree-0"):
        laplacian(cycle_graph(4), 1)
    with pytest.raises(ValueError, match="out of range"):
        laplacian(wedge_of_circles(2), 2)


def test_graph_laplacian_is_degree_minus_adjacency():
    g = RootedGraph(4, ((0, 1), (1, 2), (1, 2), (2, 3), (3, 3)))
    lap = laplacian(g)
    a = adjacency(g)
    # loops cancel in D - A; row sums vanish
    assert np.array_equal(lap.sum(axis=1), np.zeros(4))
    off = ~np.eye(4, dtype=bool)
    assert np.array_equal(lap[off], -a[off])


def test_eigenvalue_examples():
    assert eigenvalues(np.eye(2)).tolist() == [1.0, 1.0]
    assert np.allclose(eigenvalues([[0, 1], [1, 0]]), [-1, 1])
    with pytest.raises(ValueError, match="symmetric"):
        eigenvalues([[0, 1], [0, 0]])


@pytest.mark.parametrize("n", [3, 8, 17, 64, 255])
def test_cycle_spectrum_closed_form(n):
    assert np.max(np.abs(eigenvalues(laplacian(cycle_graph(n))) - _cycle_spectrum(n))) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_trace_and_frobenius_identities(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.integers(-5, 6, size=(n, n))
    m = m + m.T
    ev = eigenvalues(m)
    scale = max(1.0, float(np.sum(m.astype(float) ** 2)))
    assert np.all(np.diff(ev) >= 0)
    assert abs(ev.sum() - np.trace(m)) <= 1e-8 * scale
    assert abs(np.sum(ev**2) - np.sum(m.astype(float) ** 2)) <= 1e-8 * scale


def _complexes():
    rng = np.random.default_rng(8)
    return [
        circle(), wedge_of_circles(2), wedge_of_circles(5), filled_triangle(), torus_complex(),
        surface_complex(2), surface_complex(3),
        build_cover(torus_complex(), torus_grid_assignment(3)),
        build_cover(surface_complex(2), genus2_assignment(5, rng)),
        build_cover(wedge_of_circles(2), [rng.permutation(20), rng.permutation(20)]),
    ]


def test_laplacians_are_integer_psd():
    for c in _complexes():
        for k in range(c.dimension + 1):
            lap = laplacian(c, k)
            assert lap.dtype.kind == "i"
            assert eigenvalues(lap)[0] >= -1e-9


# ---------------------------------------------------------------------------
# Betti numbers


def test_betti_examples():
    assert (betti(circle(), 0), betti(circle(), 1)) == (1, 1)
    assert betti(wedge_of_circles(2), 1) == 2
    assert betti(torus_complex(), 1) == 2
    assert [betti(surface_complex(2), k) for k in range(3)] == [1, 4, 1]
    with pytest.raises(ValueError, match="out of range"):
        betti(circle(), 3)


def test_betti_equals_kernel_multiplicity():
    for c in _complexes():
        assert sum(c.cell_counts) <= 200
        for k in range(c.dimension + 1):
            assert betti(c, k) == kernel_multiplicity(laplacian(c, k))


def test_betti_euler_characteristic():
    for c in _complexes():
        assert sum((-1) ** k * betti(c, k) for k in range(3)) == c.euler_characteristic


# ---------------------------------------------------------------------------
# spectral density functions


def test_spectral_cdf_examples():
    sd = SpectralDensity(np.array([0.0, 2.0, 2.0, 4.0]), 4)
    assert spectral_cdf(sd, -1.0) == 0.0
    assert spectral_cdf(sd, 5.0) == 1.0
    assert spectral_cdf(sd, 2.0) == 0.75
    assert spectral_cdf(sd, 2.0 - 5e-10) == 0.75  # membership tolerance
    assert spectral_cdf(sd, 2.0 - 1e-6) == 0.25
    assert sd.cdf(np.array([0.0, 4.0])).tolist() == [0.25, 1.0]


def test_spectral_cdf_of_disjoint_union():
    a = eigenvalues(laplacian(cycle_graph(5)))
    b = eigenvalues(laplacian(path_graph(7)))
    union = SpectralDensity(np.concatenate([a, b]), 12)
    pa, pb = SpectralDensity(a, 5), SpectralDensity(b, 7)
    for lam in np.linspace(-0.5, 4.5, 41):
        assert spectral_cdf(union, lam) == pytest.approx((5 * spectral_cdf(pa, lam) + 7 * spectral_cdf(pb, lam)) / 12, abs=1e-15)


def test_spectral_density_csv():
    text = SpectralDensity.of(laplacian(cycle_graph(4))).to_csv()
    assert text.splitlines()[0] == "index,value"
    assert len(text.splitlines()) == 5


def test_lueck_examples():
    sd = SpectralDensity(np.array([0.0, 2.0, 2.0, 4.0]), 4)
    assert lueck_tail_statistic(sd, [0.5]) == 0.0
    assert lueck_tail_statistic(SpectralDensity(np.array([1.0, 3.0, 7.0]), 3), np.linspace(0.01, 0.99, 50)) == 0.0
    with pytest.raises(ValueError, match=r"\(0, 1\)"):
        lueck_tail_statistic(sd, [0.0, 0.5])
    with pytest.raises(ValueError):
        lueck_tail_statistic(sd, [1.0])


def test_lueck_c8_hand_computed():
    ev = _cycle_spectrum(8)
    grid = np.round(np.arange(1, 10) / 10, 12)
    # below 1 the only positive eigenvalue pair is 2 - sqrt(2) = 0.586
    expected = max((np.count_nonzero((ev > 1e-12) & (ev <= lam)) / 8) * -math.log(lam) for lam in grid)
    assert expected == pytest.approx(0.25 * -math.log(0.6))
    sd = SpectralDensity.of(laplacian(cycle_graph(8)))
    assert lueck_tail_statistic(sd, grid) == pytest.approx(expected, abs=1e-12)


def test_lueck_statistic_below_ceiling_on_covers():
    rng = np.random.default_rng(9)
    base = wedge_of_circles(2)
    for n in (4, 16, 64):
        cover = build_cover(base, [rng.permutation(n), rng.permutation(n)])
        lap = laplacian(cover, 1)
        sd = SpectralDensity.of(lap, n)
        assert lueck_tail_statistic(sd, lueck_grid(sd)) <= lueck_ceiling(lap, n)


# ---------------------------------------------------------------------------
# limit measures


def test_kesten_mckay_mass_and_symmetry():
    for d in (3, 4, 6):
        km = LimitSpectralMeasure("kesten_mckay", d)
        r = 2 * math.sqrt(d - 1)
        mass, _ = integrate.quad(lambda x: kesten_mckay_density(x, d), -r, r, epsabs=1e-13, limit=200)
        assert abs(mass - 1.0) <= 1e-8
        assert abs(km.total_mass() - 1.0) <= 1e-8
        assert limit_cdf(km, 0.0) == pytest.approx(0.5, abs=1e-12)
        assert limit_cdf(km, -r - 1) == 0.0 and limit_cdf(km, r + 1) == 1.0


def test_kesten_mckay_laplacian_transport():
    km = LimitSpectralMeasure("kesten_mckay", 4)
    lap = LimitSpectralMeasure("kesten_mckay", 4, laplacian=True)
    for x in (-3.0, -1.0, 0.5, 2.0):
        assert lap.cdf(4 - x) == pytest.approx(1 - km.cdf(x), abs=1e-12)
    assert lap.support == pytest.approx((4 - 2 * math.sqrt(3), 4 + 2 * math.sqrt(3)))


def test_cycle_limit():
    m = LimitSpectralMeasure("cycle_limit")
    assert limit_cdf(m, 2.0) == pytest.approx(0.5, abs=1e-15)
    assert abs(m.total_mass() - 1.0) <= 1e-8
    xs = np.linspace(-1, 5, 200)
    assert np.all(np.diff(m.cdf(xs)) >= 0)


def test_torus_limit_matches_lattice_spectrum():
    m = LimitSpectralMeasure("torus_limit", dim=2)
    assert m.cdf(4.0) == pytest.approx(0.5, abs=1e-8)
    assert abs(m.total_mass() - 1.0) <= 1e-8
    n = 40
    j = 2 * np.pi * np.arange(n) / n
    ev = (4 - 2 * np.cos(j)[:, None] - 2 * np.cos(j)[None, :]).ravel()
    sd = SpectralDensity(ev, n * n)
    assert kolmogorov_distance(sd.cdf, m.cdf, np.linspace(0.1, 7.9, 30)) < 0.05


def test_unsupported_kind():
    with pytest.raises(ValueError, match="unsupported"):
        LimitSpectralMeasure("hyperbolic_plane")


def test_kolmogorov_distance_grid():
    m = LimitSpectralMeasure("cycle_limit")
    assert kolmogorov_distance(m.cdf, m.cdf, [0.0, 1.0, 2.0]) == 0.0
    with pytest.raises(ValueError, match="nonempty"):
        kolmogorov_distance(m.cdf, m.cdf, [])


@pytest.mark.parametrize("n", [8, 64, 256])
def test_cycle_kolmogorov_distance_is_one_over_n(n):
    # jumps of height 2/n straddle a continuous CDF that interpolates them;
    # the sqrt singularity at 0 turns eigenvalue noise into ~1e-9 here
    sd = SpectralDensity.of(laplacian(cycle_graph(n)))
    assert empirical_kolmogorov(sd, LimitSpectralMeasure("cycle_limit")) == pytest.approx(1 / n, abs=1e-7)


def test_empirical_kolmogorov_dominates_grid_distance():
    rng = np.random.default_rng(0)
    ev = rng.uniform(0, 4, 50)
    sd = SpectralDensity(ev, 50)
    m = LimitSpectralMeasure("cycle_limit")
    grid = np.linspace(-0.5, 4.5, 2001)
    assert empirical_kolmogorov(sd, m) >= kolmogorov_distance(sd.cdf, m.cdf, grid) - 1e-12
