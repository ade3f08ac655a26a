"""Combinatorial Laplacians, spectral density functions and their limits.

Graph Laplacians follow L = D - A, which coincides with the degree-0 Hodge
Laplacian of the graph's boundary map (loops contribute nothing).  The
empirical spectral measures of finite quotients are compared with the
spectral measure of the universal cover (Kesten-McKay for regular trees,
the arcsine law for the bi-infinite path); this pairing is the graph
analogue of comparing a lattice's spectral measure with the Plancherel
measure, not an identity.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, sparse

from bslab.covers import CellComplex, graph_complex
from bslab.exact import integer_rank
from bslab.graphs import RootedGraph

MEMBERSHIP_TOL = 1e-9
KERNEL_TOL = 1e-7
MAX_DENSE = 5000


def laplacian(obj: CellComplex | RootedGraph, k: int = 0) -> np.ndarray:
    """Delta_k = d_{k+1} d_{k+1}^T + d_k^T d_k as an integer matrix."""
    if isinstance(obj, RootedGraph):
        if k != 0:
            raise ValueError("graphs only carry the degree-0 Laplacian")
        obj = graph_complex(obj)
    if not 0 <= k <= 2 or k > max(obj.dimension, 0):
        raise ValueError(f"degree {k} out of range for a {obj.dimension}-dimensional complex")
    up = sparse.csr_matrix(obj.boundary(k + 1))
    down = sparse.csr_matrix(obj.boundary(k))
    return (up @ up.T + down.T @ down).toarray().astype(np.int64)


def adjacency(g: RootedGraph) -> np.ndarray:
    """Adjacency matrix with loops counted twice, so rows sum to degrees."""
    a = np.zeros((g.vertex_count, g.vertex_count), dtype=np.int64)
    for u, v in g.edges:
        a[u, v] += 1
        a[v, u] += 1
    return a


def eigenvalues(matrix) -> np.ndarray:
    """Full sorted spectrum of a dense symmetric matrix."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if m.shape[0] > MAX_DENSE:
        raise ValueError(f"dense eigensolves are capped at {MAX_DENSE}x{MAX_DENSE}")
    if m.size and np.max(np.abs(m - m.T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
        raise ValueError("matrix is not symmetric")
    if m.shape[0] == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh(m)


@dataclass(frozen=True)
class SpectralDensity:
    eigenvalues: np.ndarray
    normalization: float

    def __post_init__(self):
        ev = np.sort(np.asarray(self.eigenvalues, dtype=float))
        object.__setattr__(self, "eigenvalues", ev)
        if self.normalization <= 0:
            raise ValueError("normalization must be positive")

    @classmethod
    def of(cls, matrix, normalization: float | None = None) -> "SpectralDensity":
        ev = eigenvalues(matrix)
        return cls(ev, float(len(ev) if normalization is None else normalization))

    def cdf(self, lam):
        return spectral_cdf(self, lam)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "value"])
        for i, x in enumerate(self.eigenvalues):
            w.writerow([i, repr(float(x))])
        return buf.getvalue()


def spectral_cdf(sd: SpectralDensity, lam):
    """#{mu <= lam} / N, counting eigenvalues within 1e-9 of lam as <= lam."""
    counts = np.searchsorted(sd.eigenvalues, np.asarray(lam, dtype=float) + MEMBERSHIP_TOL, side="right")
    out = counts / sd.normalization
    return float(out) if np.ndim(out) == 0 else out


def _rank_boundary_1(c: CellComplex) -> int:
    # rank of an incidence matrix = #vertices - #components of the 1-skeleton
    parent = list(range(c.vertex_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in c.edges:
        parent[find(a)] = find(b)
    return c.vertex_count - len({find(v) for v in range(c.vertex_count)})


def boundary_rank(c: CellComplex, k: int) -> int:
    """Exact rank over Q of the k-th boundary map."""
    if k == 1:
        return _rank_boundary_1(c)
    d = c.boundary(k)
    if d.size == 0:
        return 0
    return integer_rank(d.tolist())


def betti(c: CellComplex, k: int) -> int:
    """b_k = #k-cells - rank d_k - rank d_{k+1}, in exact integer arithmetic."""
    if not 0 <= k <= 2:
        raise ValueError(f"degree {k} out of range")
    return c.cell_counts[k] - boundary_rank(c, k) - boundary_rank(c, k + 1)


def kernel_multiplicity(matrix, tol: float = KERNEL_TOL) -> int:
    return int(np.count_nonzero(np.abs(eigenvalues(matrix)) < tol))


def lueck_tail_statistic(sd: SpectralDensity, grid: Sequence[float]) -> float:
    """sup over the grid of (F(lam) - F(0)) * (-log lam), with F normalized by N."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any((grid <= 0) | (grid >= 1)):
        raise ValueError("grid values must lie in (0, 1)")
    f0 = spectral_cdf(sd, 0.0)
    vals = (spectral_cdf(sd, grid) - f0) * -np.log(grid)
    return float(np.max(vals))


def lueck_ceiling(matrix, normalization: float) -> float:
    """Ceiling for the tail statistic of an integer symmetric PSD matrix.

    The product of the nonzero eigenvalues is a nonzero integer coefficient of
    the characteristic polynomial, hence >= 1, and every eigenvalue is at most
    the max absolute row sum; so #{0 < mu <= lam} * log(1/lam) <= m * log(norm).
    """
    m = np.asarray(matrix)
    norm = float(np.max(np.sum(np.abs(m), axis=1)))
    return math.log(max(norm, 1.0)) * m.shape[0] / normalization


# ---------------------------------------------------------------------------
# limit measures


def kesten_mckay_density(x, d: int):
    """Spectral density of the adjacency operator of the d-regular tree."""
    x = np.asarray(x, dtype=float)
    r2 = 4.0 * (d - 1)
    inside = x * x < r2
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = d * np.sqrt(r2 - xi * xi) / (2.0 * np.pi * (d * d - xi * xi))
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _km_cdf_scalar(x: float, d: int) -> float:
    r = 2.0 * math.sqrt(d - 1)
    if x <= -r:
        return 0.0
    if x >= r:
        return 1.0
    # x = r cos(theta) removes the square-root endpoint singularities
    theta0 = math.acos(x / r)

    def integrand(theta):
        s = math.sin(theta)
        c = r * math.cos(theta)
        return d * (r * s) * (r * s) / (2.0 * math.pi * (d * d - c * c))

    val, _ = integrate.quad(integrand, theta0, math.pi, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def _cycle_cdf(lam):
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, 4.0)
    return (2.0 / np.pi) * np.arcsin(np.sqrt(lam) / 2.0)


def _torus_cdf_scalar(lam: float, dim: int) -> float:
    if dim == 1:
        return float(_cycle_cdf(lam))
    if lam <= 0:
        return 0.0
    if lam >= 4 * dim:
        return 1.0
    val, _ = integrate.quad(lambda t: _torus_cdf_scalar(lam - 2 + 2 * math.cos(t), dim - 1),
                            0.0, math.pi, epsabs=1e-11, epsrel=1e-10, limit=200)
    return val / math.pi


@dataclass(frozen=True)
class LimitSpectralMeasure:
    """Spectral measure of a universal cover.

    ``kind`` is ``"kesten_mckay"`` (adjacency of the ``degree``-regular tree,
    or its Laplacian transport when ``laplacian`` is set), ``"cycle_limit"``
    (Laplacian of the bi-infinite path) or ``"torus_limit"`` (Laplacian of
    Z^dim).
    """

    kind: str
    degree: int = 0
    dim: int = 1
    laplacian: bool = False

    def __post_init__(self):
        if self.kind not in ("kesten_mckay", "cycle_limit", "torus_limit"):
            raise ValueError(f"unsupported limit measure {self.kind!r}")
        if self.kind == "kesten_mckay" and self.degree < 2:
            raise ValueError("Kesten-McKay needs degree >= 2")

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "kesten_mckay":
            r = 2.0 * math.sqrt(self.degree - 1)
            return (self.degree - r, self.degree + r) if self.laplacian else (-r, r)
        if self.kind == "cycle_limit":
            return (0.0, 4.0)
        return (0.0, 4.0 * self.dim)

    def density(self, x):
        if self.kind == "kesten_mckay":
            x = np.asarray(x, dtype=float)
            return kesten_mckay_density(self.degree - x if self.laplacian else x, self.degree)
        if self.kind == "cycle_limit":
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            inside = (x > 0) & (x < 4)
            out[inside] = 1.0 / (np.pi * np.sqrt(x[inside] * (4 - x[inside])))
            return out
        raise ValueError("density available for kesten_mckay and cycle_limit only")

    def cdf(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.kind == "kesten_mckay":
            if self.laplacian:
                f = np.vectorize(lambda t: 1.0 - _km_cdf_scalar(float(self.degree - t), self.degree))
            else:
                f = np.vectorize(lambda t: _km_cdf_scalar(float(t), self.degree))
        elif self.kind == "cycle_limit":
            f = _cycle_cdf
        else:
            f = np.vectorize(lambda t: _torus_cdf_scalar(float(t), self.dim))
        out = np.asarray(f(lam), dtype=float)
        return float(out) if out.ndim == 0 else out

    def total_mass(self) -> float:
        """Integral of the density over its support, by adaptive quadrature."""
        lo, hi = self.support
        if self.kind == "torus_limit":
            return float(self.cdf(hi) - self.cdf(lo - 1e-12))
        if self.kind == "cycle_limit":
            # endpoint singularities are integrable; quad's algebraic weight handles them
            val, _ = integrate.quad(lambda x: 1.0 / np.pi, lo, hi, weight="alg", wvar=(-0.5, -0.5),
                                    epsabs=1e-13, epsrel=1e-12)
            return val
        val, _ = integrate.quad(lambda x: float(self.density(np.array(x))), lo, hi,
                                epsabs=1e-13, epsrel=1e-12, limit=400)
        return val


def limit_cdf(measure: LimitSpectralMeasure, lam):
    return measure.cdf(lam)


def kolmogorov_distance(f1: Callable, f2: Callable, grid) -> float:
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    return float(np.max(np.abs(np.asarray(f1(grid)) - np.asarray(f2(grid)))))


def cdf_comparison_csv(grid, f_emp, f_lim) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "F_empirical", "F_limit", "abs_diff"])
    for x, a, b in zip(grid, f_emp, f_lim):
        w.writerow([repr(float(x)), repr(float(a)), repr(float(b)), repr(abs(float(a) - float(b)))])
    return buf.getvalue()


def empirical_kolmogorov(sd: SpectralDensity, measure: LimitSpectralMeasure) -> float:
    """Exact sup |F_emp - F| for a continuous limit CDF.

    The supremum is attained at a jump of the empirical CDF, approached from
    either side, so it suffices to look at the distinct eigenvalues.
    """
    ev = np.unique(np.round(sd.eigenvalues / MEMBERSHIP_TOL) * MEMBERSHIP_TOL)
    f_lim = np.asarray(measure.cdf(ev), dtype=float)
    right = spectral_cdf(sd, ev)
    left = np.searchsorted(sd.eigenvalues, ev - MEMBERSHIP_TOL, side="right") / sd.normalization
    return float(max(np.max(np.abs(right - f_lim)), np.max(np.abs(left - f_lim))))


def lueck_grid(sd: SpectralDensity, points: int = 200) -> np.ndarray:
    """Log-spaced grid in (0, 1) plus the eigenvalues lying there (where the sup sits)."""
    ev = sd.eigenvalues[(sd.eigenvalues > KERNEL_TOL) & (sd.eigenvalues < 1.0)]
    return np.union1d(np.logspace(-8, math.log10(0.999), points), ev)
