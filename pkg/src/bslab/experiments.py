"""Named experiments: parameters, defaults, and the computations behind each run.

Every experiment returns an :class:`Outcome` holding its quantitative
results, a list of checked assertions, and the text artifacts to write.
Random choices draw from ``task_rng(seed, i)`` for work item ``i``, so the
output does not depend on how items are scheduled.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from bslab import arithmetic, covers, graphs, spectral
from bslab.hyperbolic import cylinder, heat, pants
from bslab.seeding import task_rng


@dataclass
class Assertion:
    name: str
    value: Any
    op: str
    bound: Any

    def passed(self) -> bool:
        return check(self.value, self.op, self.bound)

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "op": self.op, "bound": self.bound,
                "passed": self.passed()}


OPS = {
    "<=": lambda a, b: a <= b,
    "<": lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "is_true": lambda a, b: a is True,
}


def check(value, op: str, bound) -> bool:
    if op not in OPS:
        raise ValueError(f"unknown comparison {op!r}")
    return bool(OPS[op](value, bound))


@dataclass
class Outcome:
    results: dict = field(default_factory=dict)
    assertions: list[Assertion] = field(default_factory=list)
    files: dict[str, str] = field(default_factory=dict)

    def claim(self, name: str, value, op: str, bound) -> None:
        self.assertions.append(Assertion(name, value, op, bound))


@dataclass(frozen=True)
class Experiment:
    name: str
    statement: str
    defaults: dict
    func: Callable[[dict, int, int], Outcome]
    columns: dict = field(default_factory=dict)


def parallel_map(fn, items, workers: int = 1) -> list:
    """Order-preserving map; processes only when workers > 1."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _strictly_decreasing(xs) -> bool:
    return all(a > b for a, b in zip(xs, xs[1:]))


def _nondecreasing(xs) -> bool:
    return all(a <= b for a, b in zip(xs, xs[1:]))


# ---------------------------------------------------------------------------
# tower-spectra


def _regular_sample(args) -> float:
    n, degree, seed, i = args
    g = covers.permutation_model_graph(n, degree, task_rng(seed, i))
    sd = spectral.SpectralDensity.of(spectral.adjacency(g))
    return spectral.empirical_kolmogorov(sd, spectral.LimitSpectralMeasure("kesten_mckay", degree))


def run_tower_spectra(p: dict, seed: int, workers: int) -> Outcome:
    out = Outcome()
    if p["family"] == "cycle":
        limit = spectral.LimitSpectralMeasure("cycle_limit")
        rows = []
        for n in p["sizes"]:
            g = graphs.cycle_graph(n)
            sd = spectral.SpectralDensity.of(spectral.laplacian(g))
            ks = spectral.empirical_kolmogorov(sd, limit)
            tail = spectral.lueck_tail_statistic(sd, spectral.lueck_grid(sd))
            rows.append((n, ks, tail))
        out.files["tower_spectra.csv"] = _csv(["n", "kolmogorov_distance", "lueck_tail"], rows)
        ks = [r[1] for r in rows]
        tails = [r[2] for r in rows]
        out.results.update(kolmogorov=dict(zip(map(str, p["sizes"]), ks)),
                           lueck_tail=dict(zip(map(str, p["sizes"]), tails)),
                           lueck_constant=max(tails))
        out.claim("kolmogorov strictly decreasing along the tower", _strictly_decreasing(ks), "is_true", True)
        out.claim("kolmogorov at the largest size", ks[-1], "<=", p["ks_bound"])
        out.claim("lueck tail statistic bounded", max(tails), "<=", p["lueck_bound"])
    elif p["family"] == "random-regular":
        rows = []
        for n in p["sizes"]:
            vals = parallel_map(_regular_sample, [(n, p["degree"], seed, i) for i in range(p["samples"])], workers)
            rows.append((n, float(np.mean(vals)), float(np.max(vals))))
        out.files["tower_spectra.csv"] = _csv(["n", "mean_kolmogorov", "max_kolmogorov"], rows)
        out.results["mean_kolmogorov"] = {str(r[0]): r[1] for r in rows}
        out.claim("seed-averaged kolmogorov distance to Kesten-McKay", rows[-1][1], "<=", p["ks_bound"])
    else:
        raise ValueError(f"parameter 'family' must be 'cycle' or 'random-regular', got {p['family']!r}")
    return out


# ---------------------------------------------------------------------------
# betti-tower


def _connected_wedge_cover(n: int, rng: np.random.Generator) -> list[np.ndarray]:
    while True:
        assignment = [covers.random_permutation(n, rng) for _ in range(2)]
        if covers.is_transitive_assignment(assignment):
            return assignment


def run_betti_tower(p: dict, seed: int, workers: int) -> Outcome:
    out = Outcome()
    rows = []
    family = p["family"]
    if family == "wedge":
        base = covers.wedge_of_circles(2)
        for j, n in enumerate(p["sizes"]):
            for i in range(p["samples"]):
                rng = task_rng(seed, j * p["samples"] + i)
                cover = covers.build_cover(base, _connected_wedge_cover(n, rng))
                rows.append((n, i, spectral.betti(cover, 0), spectral.betti(cover, 1)))
        exact = all(b1 == n + 1 for n, _, _, b1 in rows)
        out.claim("b1 / n equals 1 + 1/n on every connected cover", exact, "is_true", True)
    elif family == "genus2":
        base = covers.surface_complex(2)
        for j, n in enumerate(p["sizes"]):
            for i in range(p["samples"]):
                rng = task_rng(seed, j * p["samples"] + i)
                cover = covers.build_cover(base, covers.genus2_assignment(n, rng))
                rows.append((n, i, spectral.betti(cover, 0), spectral.betti(cover, 1)))
        exact = all(b0 == 1 and b1 == 2 * n + 2 for n, _, b0, b1 in rows)
        out.claim("|b1/n - 2| equals 2/n on every cover", exact, "is_true", True)
    elif family == "torus":
        base = covers.torus_complex()
        for n in p["sizes"]:
            cover = covers.build_cover(base, covers.torus_grid_assignment(n))
            rows.append((n * n, 0, spectral.betti(cover, 0), spectral.betti(cover, 1)))
        out.claim("b1 equals 2 on every torus cover", all(b1 == 2 for *_, b1 in rows), "is_true", True)
    else:
        raise ValueError(f"parameter 'family' must be wedge, genus2 or torus, got {family!r}")
    out.files["betti_tower.csv"] = _csv(["sheets", "sample", "b0", "b1"], rows)
    out.results["betti"] = [{"sheets": r[0], "sample": r[1], "b0": r[2], "b1": r[3]} for r in rows]
    return out


# ---------------------------------------------------------------------------
# congruence experiments


def run_congruence_girth(p: dict, seed: int, workers: int) -> Outcome:
    out = Outcome()
    rows = []
    for q in p["primes"]:
        group = covers.sl2_quotient(q)
        g = covers.cayley_graph(group)
        rows.append((q, group.order, covers.girth(g, roots=[g.root])))
    out.files["girth.csv"] = covers.girth_table_csv(rows)
    girths = [r[2] for r in rows]
    out.results["girth"] = {str(r[0]): r[2] for r in rows}
    out.claim("girth nondecreasing in p", _nondecreasing(girths), "is_true", True)
    large = [gi for q, _, gi in rows if q >= p["large_prime"]]
    out.claim(f"girth for p >= {p['large_prime']}", min(large) if large else None, ">=", p["min_girth"])
    return out


def run_congruence_fixity(p: dict, seed: int, workers: int) -> Outcome:
    out = Outcome()
    rows = []
    worst = 0
    burnside_ok = True
    for q in p["primes"]:
        group = covers.sl2_quotient(q)
        fix = covers.projective_fixed_point_counts(group)
        trivial = fix == q + 1
        nontrivial_max = int(fix[~trivial].max())
        total = int(fix.sum())
        rows.append((q, group.order, q + 1, nontrivial_max, int(trivial.sum()), total))
        worst = max(worst, nontrivial_max)
        burnside_ok &= total == group.order
    out.files["fixity.csv"] = _csv(["p", "group_order", "points", "max_fix_nontrivial", "trivial_elements", "fix_sum"], rows)
    for q in p["scan_primes"]:
        group = covers.sl2_quotient(q)
        scan = covers.fixity_scan(group, covers.projective_line_rep(group), p["scan_length"])
        out.files[f"fixity_scan_p{q}.csv"] = scan.to_csv()
        out.results[f"scan_p{q}_max_ratio"] = scan.max_ratio
    out.results["max_fix_nontrivial"] = worst
    out.claim("every nontrivial element fixes at most 2 points", worst, "<=", 2)
    out.claim("Burnside sum equals the group order", burnside_ok, "is_true", True)
    return out


# ---------------------------------------------------------------------------
# arithmetic


def _oracle_count(n: int, theta: float) -> int:
    """Brute force over the doubled box with float measures and the exact
    Kronecker test, independent of the census filters."""
    from itertools import product

    box = [2 * math.comb(n, i) * theta for i in range(1, n + 1)]
    count = 0
    for tail in product(*[range(-int(b), int(b) + 1) for b in box]):
        poly = arithmetic.IntPolynomial((1,) + tail)
        if arithmetic.mahler_measure(poly) <= theta + 1e-9:
            count += 1
    return count


def run_mahler_census(p: dict, seed: int, workers: int) -> Outcome:
    out = Outcome()
    theta = float(p["theta"])
    rows = []
    for n in p["degrees"]:
        res = arithmetic.census(arithmetic.CensusQuery(n, theta))
        bound = arithmetic.census_count_bound(n, theta) if n >= 3 else None
        rows.append((n, theta, res.count, res.box_size, "" if bound is None else bound,
                     "" if res.min_m_above_1 is None else res.min_m_above_1))
        out.files[f"census_n{n}.csv"] = res.to_csv()
        out.results[f"count_n{n}"] = res.count
        out.results[f"min_m_above_1_n{n}"] = res.min_m_above_1
        if bound is not None and p["check_bound"]:
            out.claim(f"census count within the count bound at n = {n}", res.count, "<=", bound)
        if n <= p["oracle_max_degree"]:
            oracle = _oracle_count(n, theta)
            out.results[f"oracle_count_n{n}"] = oracle
            out.claim(f"census equals the wide-box oracle at n = {n}", res.count, "==", oracle)
    out.files["census_summary.csv"] = _csv(["degree", "theta", "count", "box_size", "count_bound", "min_m_above_1"], rows)
    lehmer = arithmetic.mahler_measure(arithmetic.IntPolynomial((1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1)))
    out.results["lehmer_measure"] = lehmer
    out.claim("Lehmer measure error", abs(lehmer - 1.176280818), "<=", p["lehmer_tol"])
    return out


def run_torsion_growth(p: dict, seed: int, workers: int) -> Outcome:
    out = Outcome()
    for text in p["polynomials"]:
        poly = arithmetic.IntPolynomial.parse(text)
        rate = arithmetic.torsion_growth_rate(poly, p["n_max"])
        key = "_".join(str(c) for c in poly.coefficients)
        out.files[f"growth_{key}.csv"] = rate.to_csv()
        err = abs(rate.limit_estimate - rate.log_mahler)
        out.results[key] = {"a_n_max": rate.limit_estimate, "log_mahler": rate.log_mahler,
                            "constant_k": rate.constant_k}
        out.claim(f"|a_n_max - log m| for {text}", err, "<=", p["tol"])
    return out


# ---------------------------------------------------------------------------
# hyperbolic


def run_cylinder_heat(p: dict, seed: int, workers: int) -> Outcome:
    out = Outcome()
    d = p["dimension"]
    rows, records = [], []
    for tau in p["taus"]:
        c = heat.HyperbolicCylinder(tau)
        q = heat.HeatQuery(p["t"], d, p["tail_tol"], p["epsilon"])
        axis = cylinder.f_t_value(c, 0.0, q)
        rep = cylinder.thin_part_report(c, q)
        rows.append((tau, axis.value, axis.value * tau, rep.rho_thin, rep.vol_thin_per_period,
                     rep.integral_f_over_thin, rep.ratio, axis.n_star, axis.tail))
        records.append(rep.to_json())
    out.files["cylinder_heat.csv"] = _csv(
        ["tau", "f_axis", "f_axis_times_tau", "rho_thin", "vol_thin", "integral_f_thin", "ratio", "n_star", "tail_bound"],
        rows)
    out.files["thin_part.jsonl"] = "\n".join(records) + "\n"
    ft = [r[2] for r in rows]
    ratios = [r[6] for r in rows]
    out.results.update(f_axis_times_tau=ft, thin_ratio=ratios, c1_estimate=max(ft), c0_estimate=max(ratios))
    out.claim("variation of f_t * tau on the axis", max(ft) / min(ft), "<=", p["band"])
    out.claim("variation of the thin-part ratio", max(ratios) / min(ratios), "<=", p["band"])

    mass_rows = []
    worst = 0.0
    for t in p["normalization_times"]:
        m = heat.total_mass(heat.HeatQuery(t, 3))
        mass_rows.append((t, m))
        worst = max(worst, abs(m - 1.0))
    t_grid = np.linspace(p["grid_t_min"], p["grid_t_max"], p["grid_t_points"])
    rho_grid = np.linspace(0.0, p["grid_rho_max"], p["grid_rho_points"])
    const = heat.gaussian_bound_constant(3, t_grid, rho_grid)
    out.files["heat_normalization.csv"] = _csv(["t", "total_mass"], mass_rows)
    out.results.update(normalization_error=worst, gaussian_constant=const)
    out.claim("heat kernel normalization error (d = 3)", worst, "<=", 1e-6)
    out.claim("Gaussian bound constant (d = 3)", const, "<=", (4.0 * math.pi) ** -1.5)
    return out


def _pants_sample(args):
    """One sampled surface; ``boundary`` None draws boundary cuffs from nu too."""
    radius, nu, boundary, length, cutoffs, seed, i = args
    rng = task_rng(seed, i)
    tree = pants.trivalent_tree_ball(radius)
    lengths = rng.uniform(*nu, size=tree.edge_count)
    twists = rng.uniform(0.0, 1.0, size=tree.edge_count)
    if boundary is None:
        boundary = {(v, k): float(rng.uniform(*nu)) for v in range(tree.vertex_count) for k in range(3)}
    surface = pants.glue_forest(tree, lengths, twists, boundary)
    found = [pants.short_geodesics(surface, length, cut) for cut in cutoffs]
    rows = [[(surface.word_string(g.word), g.length) for g in f] for f in found]
    exact = sorted(g.word for g in found[0]) == sorted(surface.internal_cuff_words())
    violations = len(pants.pants_bound_violations(surface, found[-1]))
    return rows, exact, violations, surface.to_csv()


def run_pants_forest(p: dict, seed: int, workers: int) -> Outcome:
    out = Outcome()
    cut_short, cut_long = p["short_cutoff"], p["long_cutoff"]
    jobs_short = [(p["radius"], tuple(p["nu_short"]), p["boundary_length"], p["word_length"], (cut_short,), seed, i)
                  for i in range(p["samples"])]
    jobs_long = [(p["radius"], tuple(p["nu_long"]), None, p["word_length"], (cut_short, cut_long), seed,
                  p["samples"] + i) for i in range(p["samples"])]
    short = parallel_map(_pants_sample, jobs_short, workers)
    long = parallel_map(_pants_sample, jobs_long, workers)
    geo_rows = []
    for i, (rows, *_rest) in enumerate(short):
        geo_rows.extend(("short", i, cut_short, w, l) for w, l in rows[0])
    for i, (rows, *_rest) in enumerate(long):
        for cut, found in zip((cut_short, cut_long), rows):
            geo_rows.extend(("long", i, cut, w, l) for w, l in found)
    out.files["geodesics.csv"] = _csv(["family", "sample", "cutoff", "word", "length"], geo_rows)
    out.files["surface_short_0.csv"] = short[0][3]
    exact = sum(r[1] for r in short)
    empty = sum(1 for r in long if not r[0][0])
    violations = sum(r[2] for r in long)
    found_long = sum(len(r[0][1]) for r in long)
    out.results.update(short_exact=exact, long_empty=empty, long_found_at_cutoff=found_long,
                       bound_violations=violations)
    out.claim("samples returning exactly the internal cuffs", exact, "==", p["samples"])
    out.claim("long-cuff samples with no short geodesic", empty, "==", p["samples"])
    out.claim("pants lower bound violations", violations, "==", 0)
    return out


def _random_multigraph(rng: np.random.Generator, n_min: int, n_max: int) -> graphs.RootedGraph:
    n = int(rng.integers(n_min, n_max + 1))
    m = int(rng.integers(n, 2 * n + 1))
    ends = rng.integers(0, n, size=(m, 2))
    return graphs.RootedGraph(n, tuple((int(a), int(b)) for a, b in ends))


def run_mass_transport(p: dict, seed: int, workers: int) -> Outcome:
    out = Outcome()
    rows = []
    worst = 0.0
    for i in range(p["graphs"]):
        g = _random_multigraph(task_rng(seed, i), p["min_vertices"], p["max_vertices"])
        ens = graphs.uniform_root_ensemble(g)
        for name, payoff in graphs.PAYOFF_SUITE.items():
            lhs, rhs = graphs.mass_transport_check(ens, payoff, p["radius"])
            rows.append((i, g.vertex_count, g.edge_count, name, lhs, rhs, abs(lhs - rhs)))
            worst = max(worst, abs(lhs - rhs))
    p3 = graphs.path_graph(3).with_root(1)
    lhs, rhs = graphs.mass_transport_check([(1.0, p3)], graphs.payoff_leaf_neighbor, 1)
    out.files["mass_transport.csv"] = _csv(["graph", "vertices", "edges", "payoff", "lhs", "rhs", "abs_diff"], rows)
    out.results.update(max_defect=worst, fixed_center_lhs=lhs, fixed_center_rhs=rhs)
    out.claim("uniform-root mass transport defect", worst, "<=", 1e-12)
    out.claim("fixed-center counterexample sends", lhs, "==", 2.0)
    out.claim("fixed-center counterexample receives", rhs, "==", 0.0)
    return out


EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment("tower-spectra",
                   "spectral measures along a tower converge to the spectral measure of the cover",
                   {"family": "cycle", "sizes": [64, 256, 1024, 4096], "degree": 4, "samples": 5,
                    "ks_bound": 0.01, "lueck_bound": 4.0},
                   run_tower_spectra),
        Experiment("betti-tower",
                   "normalized Betti numbers of finite covers converge to L2-Betti numbers",
                   {"family": "wedge", "sizes": [500], "samples": 5},
                   run_betti_tower),
        Experiment("congruence-girth",
                   "principal congruence quotients have injectivity radius growing with the level",
                   {"primes": [5, 7, 11, 13, 17, 19, 23], "large_prime": 11, "min_girth": 4},
                   run_congruence_girth),
        Experiment("congruence-fixity",
                   "nontrivial elements of congruence quotients fix few points in transitive actions",
                   {"primes": [5, 7, 11, 13, 17, 19, 23, 29, 31], "scan_primes": [5, 7], "scan_length": 4},
                   run_congruence_fixity),
        Experiment("mahler-census",
                   "integer polynomials of bounded degree and Mahler measure are few (count bound)",
                   {"degrees": [1], "theta": 1.0, "check_bound": True, "oracle_max_degree": 2,
                    "lehmer_tol": 1e-8},
                   run_mahler_census),
        Experiment("torsion-growth",
                   "torsion in cyclic covers grows at the rate of the log Mahler measure",
                   {"polynomials": ["1 -3 1", "1 -2"], "n_max": 500, "tol": 1e-3},
                   run_torsion_growth),
        Experiment("cylinder-heat",
                   "the heat sum f_t over a thin part is bounded by a constant times its volume",
                   {"taus": [0.02, 0.05, 0.1, 0.2], "t": 1.0, "epsilon": 0.5, "dimension": 2,
                    "tail_tol": 1e-12, "band": 10.0, "normalization_times": [0.1, 1.0, 10.0],
                    "grid_t_min": 0.1, "grid_t_max": 10.0, "grid_t_points": 100,
                    "grid_rho_max": 10.0, "grid_rho_points": 1001},
                   run_cylinder_heat),
        Experiment("pants-forest",
                   "random pants gluings have short geodesics only at short cuffs",
                   {"radius": 2, "samples": 50, "nu_short": [0.05, 0.1], "nu_long": [4.0, 5.0],
                    "boundary_length": 1.0, "word_length": 8, "short_cutoff": 0.12, "long_cutoff": 4.0},
                   run_pants_forest),
        Experiment("mass-transport",
                   "uniformly rooted finite graphs are unimodular (mass transport principle)",
                   {"graphs": 20, "min_vertices": 4, "max_vertices": 14, "radius": 3},
                   run_mass_transport),
    ]
}


def resolve_parameters(name: str, params: dict) -> dict:
    """Defaults overridden by ``params``; unknown names are rejected."""
    if name not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {name!r}")
    defaults = EXPERIMENTS[name].defaults
    unknown = sorted(set(params) - set(defaults))
    if unknown:
        raise ValueError(f"unknown parameter(s) for {name}: {', '.join(unknown)}")
    merged = dict(defaults)
    for key, val in params.items():
        want = type(defaults[key])
        if want is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if defaults[key] is not None and not isinstance(val, want):
            raise ValueError(f"parameter {key!r} expects {want.__name__}, got {type(val).__name__}")
        merged[key] = val
    return merged
